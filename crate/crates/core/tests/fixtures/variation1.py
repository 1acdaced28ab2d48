def accumulate(combiner, base, n, term):
    total = base
    i = 1
    while i <= n:
        total = combiner(i, term(i))
        i = i + 1
    return total

def add(a, b):
    return a + b

def identity(x):
    return x

accumulate(add, 0, 25, identity)
