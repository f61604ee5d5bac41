"""A small Pratt parser for radial profile expressions in the variable ``r``.

Grammar: numbers (decimal or scientific), ``r``, ``+ - * / ^``, unary minus,
parentheses and the functions exp, sin, cos, sqrt, pow.  ``^`` is right
associative and binds tighter than unary minus, so ``-r^2 == -(r^2)``.
"""

import re

import numpy as np

FUNCTIONS = {
    "exp": (1, np.exp),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "sqrt": (1, np.sqrt),
    "pow": (2, np.power),
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_MINUS = 25


class ExpressionError(ValueError):
    def __init__(self, message, position=None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


def tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {src[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", None, len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.tokens = tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.advance()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expression(0)
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {text!r}", pos)
        return node

    def expression(self, rbp):
        left = self.prefix()
        while True:
            kind, text, pos = self.peek()
            if kind != "op" or text not in _INFIX or _INFIX[text] <= rbp:
                break
            self.advance()
            lbp = _INFIX[text]
            right = self.expression(lbp - 1 if text == "^" else lbp)
            left = ("bin", text, left, right)
        return left

    def prefix(self):
        kind, text, pos = self.advance()
        if kind == "num":
            return ("num", float(text))
        if kind == "op" and text == "-":
            return ("neg", self.expression(_PREFIX_MINUS))
        if kind == "op" and text == "+":
            return self.expression(_PREFIX_MINUS)
        if kind == "op" and text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if kind == "name":
            if text == "r":
                return ("var",)
            if text in FUNCTIONS:
                arity, _ = FUNCTIONS[text]
                self.expect("(")
                args = [self.expression(0)]
                while self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expression(0))
                self.expect(")")
                if len(args) != arity:
                    raise ExpressionError(f"{text}() takes {arity} argument(s), got {len(args)}", pos)
                return ("call", text, args)
            raise ExpressionError(f"unknown identifier {text!r}", pos)
        if kind == "end":
            raise ExpressionError("unexpected end of input", pos)
        raise ExpressionError(f"unexpected token {text!r}", pos)


def parse(src):
    """Parse ``src`` into a tuple-based syntax tree."""
    return _Parser(src).parse()


_BINOPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


def evaluate(node, r):
    r = np.asarray(r, dtype=float)
    kind = node[0]
    if kind == "num":
        return np.full_like(r, node[1])
    if kind == "var":
        return r
    if kind == "neg":
        return -evaluate(node[1], r)
    if kind == "bin":
        return _BINOPS[node[1]](evaluate(node[2], r), evaluate(node[3], r))
    if kind == "call":
        return FUNCTIONS[node[1]][1](*(evaluate(a, r) for a in node[2]))
    raise ValueError(f"bad node {node!r}")


def power_series(node):
    """Return {exponent: coefficient} if the tree is a finite sum of c * r^k,
    otherwise None.  Used to register closed-form primitives."""
    kind = node[0]
    if kind == "num":
        return {0.0: node[1]}
    if kind == "var":
        return {1.0: 1.0}
    if kind == "neg":
        s = power_series(node[1])
        return None if s is None else {k: -v for k, v in s.items()}
    if kind == "call":
        if node[1] == "pow":
            return _pow_series(*node[2])
        if node[1] == "sqrt":
            return _pow_series(node[2][0], ("num", 0.5))
        return None
    op, a, b = node[1], node[2], node[3]
    if op == "^":
        return _pow_series(a, b)
    sa, sb = power_series(a), power_series(b)
    if sa is None or sb is None:
        return None
    if op in "+-":
        sign = 1.0 if op == "+" else -1.0
        out = dict(sa)
        for k, v in sb.items():
            out[k] = out.get(k, 0.0) + sign * v
        return out
    if op == "*":
        out = {}
        for k1, v1 in sa.items():
            for k2, v2 in sb.items():
                out[k1 + k2] = out.get(k1 + k2, 0.0) + v1 * v2
        return out
    if op == "/":
        if len(sb) != 1:
            return None
        (kb, vb), = sb.items()
        if vb == 0:
            return None
        return {k - kb: v / vb for k, v in sa.items()}
    return None


def _pow_series(base, exponent):
    se = power_series(exponent)
    if se is None or set(se) - {0.0}:
        return None
    e = se.get(0.0, 0.0)
    sb = power_series(base)
    if sb is None:
        return None
    sb = {k: v for k, v in sb.items() if v != 0}
    if len(sb) == 0:
        return {0.0: 0.0 ** e} if e >= 0 else None
    if len(sb) != 1:
        if float(e).is_integer() and e >= 0:
            out = {0.0: 1.0}
            for _ in range(int(e)):
                out = power_series(("bin", "*", _series_node(out), _series_node(sb)))
            return out
        return None
    (k, v), = sb.items()
    if v < 0 and not float(e).is_integer():
        return None
    return {k * e: v**e}


def _series_node(series):
    node = ("num", 0.0)
    for k, v in series.items():
        term = ("bin", "*", ("num", v), ("bin", "^", ("var",), ("num", k)))
        node = ("bin", "+", node, term)
    return node
