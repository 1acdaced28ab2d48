use std::sync::Arc;

use indexmap::IndexMap;

use super::value::{Builtin, Value, VarValue};
use super::{EventKind, FrameSummary, Limits, Outcome, Trace, TraceEvent, MODULE_FRAME};
use crate::lang::ast::*;

struct Frame {
    function: String,
    def: Option<Arc<FunctionDef>>,
    locals: IndexMap<String, Value>,
    line: Line,
    // line of the last emitted Line event, to mimic the tracer's
    // "new line or backward jump" rule
    last_line: Option<Line>,
}

enum Flow {
    Normal,
    Return(Value),
}

enum Halt {
    Error { message: String, line: Line },
    Limit,
}

type Exec<T> = Result<T, Halt>;

struct Interp {
    limits: Limits,
    events: Vec<TraceEvent>,
    frames: Vec<Frame>,
    console: String,
    last_value: Option<Value>,
}

pub(super) fn run(module: &Module, limits: Limits) -> Trace {
    let mut it = Interp {
        limits,
        events: Vec::new(),
        frames: vec![Frame {
            function: MODULE_FRAME.to_string(),
            def: None,
            locals: IndexMap::new(),
            line: module.body.first().map_or(1, |s| s.line),
            last_line: None,
        }],
        console: String::new(),
        last_value: None,
    };
    let result = it.exec_block(&module.body, false);
    let outcome = match result {
        Ok(_) => Outcome::Completed { value: it.last_value.as_ref().map(Value::snapshot) },
        Err(Halt::Error { message, line }) => Outcome::RuntimeError { message, line },
        Err(Halt::Limit) => Outcome::LimitExceeded { limit: limits.max_events },
    };
    // unwinding frames still report Return so depth moves one step at a time
    while it.frames.len() > 1 {
        it.push_event(EventKind::Return, Some(VarValue::None));
        it.frames.pop();
    }
    it.push_event(EventKind::End, None);
    Trace { events: it.events, outcome }
}

fn err<T>(line: Line, message: impl Into<String>) -> Exec<T> {
    Err(Halt::Error { message: message.into(), line })
}

fn overflow<T>(line: Line) -> Exec<T> {
    err(line, "OverflowError: integer result exceeds 64 bits")
}

impl Interp {
    fn frame(&self) -> &Frame {
        self.frames.last().unwrap()
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().unwrap()
    }

    fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    fn push_event(&mut self, kind: EventKind, return_value: Option<VarValue>) {
        let console_delta = if self.console.is_empty() { None } else { Some(std::mem::take(&mut self.console)) };
        let frame = self.frame();
        let locals = frame.locals.iter().map(|(k, v)| (k.clone(), v.snapshot())).collect();
        let stack = self
            .frames
            .iter()
            .enumerate()
            .map(|(depth, f)| FrameSummary { function: f.function.clone(), line: f.line, depth })
            .collect();
        let event = TraceEvent {
            index: self.events.len(),
            kind,
            line: frame.line,
            depth: self.depth(),
            function: frame.function.clone(),
            locals,
            stack,
            return_value,
            console_delta,
        };
        self.events.push(event);
    }

    fn emit(&mut self, kind: EventKind, return_value: Option<VarValue>) -> Exec<()> {
        if self.events.len() >= self.limits.max_events {
            return Err(Halt::Limit);
        }
        self.push_event(kind, return_value);
        Ok(())
    }

    fn line_event(&mut self, line: Line, forced: bool) -> Exec<()> {
        let frame = self.frame_mut();
        frame.line = line;
        if forced || frame.last_line != Some(line) {
            frame.last_line = Some(line);
            self.emit(EventKind::Line, None)?;
        }
        Ok(())
    }

    fn exec_block(&mut self, body: &[Stmt], force_first: bool) -> Exec<Flow> {
        for (i, s) in body.iter().enumerate() {
            if let Flow::Return(v) = self.exec_stmt(s, force_first && i == 0)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, s: &Stmt, forced: bool) -> Exec<Flow> {
        self.line_event(s.line, forced)?;
        match &s.kind {
            StmtKind::FunctionDef(def) => {
                self.assign(&def.name, Value::Function(def.clone()));
            }
            StmtKind::While { cond, body } => {
                if !self.eval(cond)?.truthy() {
                    return Ok(Flow::Normal);
                }
                let mut first = true;
                loop {
                    // later iterations arrive by a backward jump
                    if let Flow::Return(v) = self.exec_block(body, !first)? {
                        return Ok(Flow::Return(v));
                    }
                    first = false;
                    self.line_event(s.line, false)?;
                    if !self.eval(cond)?.truthy() {
                        break;
                    }
                }
            }
            StmtKind::If { cond, then, orelse } => {
                let branch = if self.eval(cond)?.truthy() { then } else { orelse };
                return self.exec_block(branch, false);
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                self.assign(target, v);
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                let v = self.eval(e)?;
                if self.depth() == 0 {
                    self.last_value = Some(v);
                }
            }
            StmtKind::Pass => {}
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, name: &str, v: Value) {
        self.frame_mut().locals.insert(name.to_string(), v);
    }

    fn lookup(&self, name: &str, line: Line) -> Exec<Value> {
        let frame = self.frame();
        if let Some(def) = &frame.def {
            if def.locals.contains(name) {
                return match frame.locals.get(name) {
                    Some(v) => Ok(v.clone()),
                    None => err(line, format!("UnboundLocalError: local variable '{name}' referenced before assignment")),
                };
            }
        }
        if let Some(v) = self.frames[0].locals.get(name) {
            return Ok(v.clone());
        }
        match Builtin::lookup(name) {
            Some(b) => Ok(Value::Builtin(b)),
            None => err(line, format!("NameError: name '{name}' is not defined")),
        }
    }

    fn eval(&mut self, e: &Expr) -> Exec<Value> {
        let line = self.frame().line;
        match &e.kind {
            ExprKind::Name(n) => self.lookup(n, line),
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::NoneLit => Ok(Value::None),
            ExprKind::BinOp { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                arith(*op, &a, &b, line)
            }
            ExprKind::Compare { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                compare(*op, &a, &b, line).map(Value::Bool)
            }
            ExprKind::Not(x) => Ok(Value::Bool(!self.eval(x)?.truthy())),
            ExprKind::Neg(x) => {
                let v = self.eval(x)?;
                match v.as_int() {
                    Some(i) => i.checked_neg().map(Value::Int).map_or_else(|| overflow(line), Ok),
                    None => err(line, format!("TypeError: bad operand type for unary -: '{}'", v.type_name())),
                }
            }
            ExprKind::BoolOp { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                match (op, a.truthy()) {
                    (BoolOp::And, false) | (BoolOp::Or, true) => Ok(a),
                    _ => self.eval(rhs),
                }
            }
            ExprKind::Call { callee, args } => {
                let f = self.eval(callee)?;
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a)?);
                }
                self.call(f, values, line)
            }
        }
    }

    fn call(&mut self, f: Value, args: Vec<Value>, line: Line) -> Exec<Value> {
        let def = match f {
            Value::Function(def) => def,
            Value::Builtin(Builtin::Print) => {
                let text: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                self.console.push_str(&text.join(" "));
                self.console.push('\n');
                return Ok(Value::None);
            }
            other => return err(line, format!("TypeError: '{}' object is not callable", other.type_name())),
        };
        if args.len() != def.params.len() {
            let n = def.params.len();
            let plural = if n == 1 { "" } else { "s" };
            return err(
                line,
                format!("TypeError: {}() takes {n} positional argument{plural} but {} were given", def.name, args.len()),
            );
        }
        if self.depth() >= self.limits.max_depth {
            return err(line, "RecursionError: maximum recursion depth exceeded");
        }
        let locals = def.params.iter().cloned().zip(args).collect();
        self.frames.push(Frame { function: def.name.clone(), def: Some(def.clone()), locals, line: def.line, last_line: None });
        self.emit(EventKind::Call, None)?;
        let result = match self.exec_block(&def.body, false)? {
            Flow::Return(v) => v,
            Flow::Normal => Value::None,
        };
        self.emit(EventKind::Return, Some(result.snapshot()))?;
        self.frames.pop();
        Ok(result)
    }
}

fn arith(op: BinOp, a: &Value, b: &Value, line: Line) -> Exec<Value> {
    let (Some(x), Some(y)) = (a.as_int(), b.as_int()) else {
        return err(
            line,
            format!("TypeError: unsupported operand type(s) for {}: '{}' and '{}'", op.symbol(), a.type_name(), b.type_name()),
        );
    };
    let r = match op {
        BinOp::Add => x.checked_add(y),
        BinOp::Sub => x.checked_sub(y),
        BinOp::Mul => x.checked_mul(y),
        BinOp::FloorDiv | BinOp::Mod if y == 0 => return err(line, "ZeroDivisionError: integer division or modulo by zero"),
        BinOp::FloorDiv => floor_div(x, y),
        BinOp::Mod => floor_mod(x, y),
    };
    r.map(Value::Int).map_or_else(|| overflow(line), Ok)
}

pub(crate) fn floor_div(x: i64, y: i64) -> Option<i64> {
    let q = x.checked_div(y)?;
    if x % y != 0 && ((x < 0) != (y < 0)) {
        q.checked_sub(1)
    } else {
        Some(q)
    }
}

pub(crate) fn floor_mod(x: i64, y: i64) -> Option<i64> {
    if y == -1 {
        return Some(0);
    }
    let r = x.checked_rem(y)?;
    if r != 0 && ((r < 0) != (y < 0)) {
        Some(r + y)
    } else {
        Some(r)
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value, line: Line) -> Exec<bool> {
    match op {
        CmpOp::Eq => return Ok(a.py_eq(b)),
        CmpOp::Ne => return Ok(!a.py_eq(b)),
        _ => {}
    }
    let (Some(x), Some(y)) = (a.as_int(), b.as_int()) else {
        return err(
            line,
            format!("TypeError: '{}' not supported between instances of '{}' and '{}'", op.symbol(), a.type_name(), b.type_name()),
        );
    };
    Ok(match op {
        CmpOp::Lt => x < y,
        CmpOp::Le => x <= y,
        CmpOp::Gt => x > y,
        CmpOp::Ge => x >= y,
        CmpOp::Eq | CmpOp::Ne => unreachable!(),
    })
}
