"""Reference line tracer used to produce the frozen oracle fixtures.

Runs a program under the stock interpreter's sys.settrace hook and writes one
JSON record per 'line' event: the 1-based line, the frame depth (module = 0)
and the int/bool locals of the traced frame.

    python3 tools/python_trace.py program.py > program.trace.json
"""
import json
import sys


def main(path):
    with open(path) as f:
        source = f.read()
    code = compile(source, path, "exec")
    events = []

    def depth_of(frame):
        d = 0
        while frame is not None and frame.f_code.co_filename == path:
            d += 1
            frame = frame.f_back
        return d - 1

    def tracer(frame, event, arg):
        if frame.f_code.co_filename != path:
            return None
        if event == "line":
            local_vars = {}
            for name, value in frame.f_locals.items():
                if name.startswith("__"):
                    continue
                if isinstance(value, bool):
                    local_vars[name] = {"type": "bool", "value": value}
                elif isinstance(value, int):
                    local_vars[name] = {"type": "int", "value": value}
            events.append(
                {"line": frame.f_lineno, "depth": depth_of(frame), "locals": local_vars}
            )
        return tracer

    scope = {"__name__": "__main__"}
    sys.settrace(tracer)
    try:
        exec(code, scope)
    finally:
        sys.settrace(None)
    json.dump({"program": path.rsplit("/", 1)[-1], "lineEvents": events}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
