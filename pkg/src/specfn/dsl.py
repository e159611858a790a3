"""
A small expression language for symmetric functions of the diagonal entries.

Grammar (EBNF)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom (("^" | "**") unary)?          exponent folds to an integer
    atom    := NUMBER | NAME | "r" "[" index "]" | "(" expr ")"
             | FUNC "(" expr ")"                    FUNC in log exp sin cos sqrt
             | "pow" "(" expr "," expr ")"
             | ("sum" | "prod") "(" NAME "," expr ")"
             | "psum" "(" INT ")" | "esym" "(" INT ")" | "logdet" ["(" ")"]
    index   := INT (1-based) | NAME bound by an enclosing sum/prod

Bare names that are not functions or bound indices are parameters, bound at
evaluation time.  ``psum(k)`` is ``sum(i, r[i]^k)``, ``logdet`` is
``sum(i, log(r[i]))`` and ``esym(k)`` is the k-th elementary symmetric
polynomial, expanded once the dimension is known.

Parsing produces a surface tree; :meth:`DiagExpr.instantiate` expands it for a
fixed dimension into a flat core form made of nested tuples::

    ("c", value) | ("p", name) | ("r", i) | ("+", terms) | ("*", factors)
    | ("^", base, k) | ("f", name, arg)

Core expressions are differentiated symbolically and compiled into vectorized
numpy functions.
"""
import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, InputError, OrderCapError

DEFAULT_MAX_ORDER = 4
UNARY_FUNCS = ("log", "exp", "sin", "cos", "sqrt")
RESERVED = set(UNARY_FUNCS) | {"pow", "sum", "prod", "psum", "esym", "logdet", "r"}


# ---------------------------------------------------------------------------
# surface syntax

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class RVar:
    index: object  # int (1-based literal) or str (bound variable)


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Reduce:
    kind: str  # "sum" or "prod"
    var: str
    body: object


@dataclass(frozen=True)
class Esym:
    k: int


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),\[\]]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(src, pos)
        if m is None:
            rest = src[pos:]
            if rest.strip() == "":
                break
            off = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character {src[off]!r}", off, src)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.bound = []

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(msg, tok[2], self.src)

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "end":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {value!r}, found {found}")
        return self.take()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        if self.peek()[1] == "+" and self.peek()[0] == "op":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**") and self.peek()[0] == "op":
            tok = self.take()
            exponent = self._integer(self.unary(), tok)
            return Power(base, exponent)
        return base

    def _integer(self, node, tok):
        value = _fold_constant(node)
        if value is None or value != int(value):
            raise self.error("exponent must be an integer constant", tok)
        return int(value)

    def _int_literal(self):
        tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            raise self.error("expected a non-negative integer")
        self.take()
        return int(tok[1])

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Num(float(tok[1]))
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if tok[0] != "name":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"unexpected {found}")
        name = tok[1]
        self.take()
        nxt = self.peek()
        if name == "r":
            if nxt[1] != "[":
                raise self.error("r must be indexed as r[i]", tok)
            self.take()
            idx = self.peek()
            if idx[0] == "num":
                k = self._int_literal()
                if k < 1:
                    raise self.error("r indices are 1-based", idx)
                index = k
            elif idx[0] == "name":
                if idx[1] not in self.bound:
                    raise self.error(f"unknown identifier {idx[1]!r}", idx)
                self.take()
                index = idx[1]
            else:
                raise self.error("expected an index")
            self.expect("]")
            return RVar(index)
        if name in self.bound:
            raise self.error(f"index variable {name!r} used as a value", tok)
        if name == "logdet":
            if nxt[1] == "(":
                self.take()
                self.expect(")")
            return Reduce("sum", "_i", Call("log", RVar("_i")))
        if nxt[1] != "(" or nxt[0] != "op":
            if name in RESERVED:
                raise self.error(f"{name!r} needs arguments", tok)
            return Name(name)
        if name not in RESERVED:
            raise self.error(f"unknown identifier {name!r}", tok)
        self.take()  # "("
        if name in UNARY_FUNCS:
            arg = self.expr()
            self._close(name, 1)
            return Call(name, arg)
        if name == "pow":
            base = self.expr()
            if self.peek()[1] != ",":
                raise self.error("arity mismatch: pow takes 2 arguments")
            comma = self.take()
            exponent = self._integer(self.expr(), comma)
            self._close(name, 2)
            return Power(base, exponent)
        if name in ("psum", "esym"):
            k = self._int_literal()
            self._close(name, 1)
            if name == "psum":
                return Reduce("sum", "_i", Power(RVar("_i"), k))
            return Esym(k)
        # sum / prod
        var = self.peek()
        if var[0] != "name" or var[1] in RESERVED:
            raise self.error("expected an index variable name")
        self.take()
        if self.peek()[1] != ",":
            raise self.error(f"arity mismatch: {name} takes 2 arguments")
        self.take()
        self.bound.append(var[1])
        body = self.expr()
        self.bound.pop()
        self._close(name, 2)
        return Reduce(name, var[1], body)

    def _close(self, name, arity):
        tok = self.peek()
        if tok[1] == ",":
            raise self.error(f"arity mismatch: {name} takes {arity} argument" + ("s" if arity > 1 else ""))
        self.expect(")")


def _fold_constant(node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        v = _fold_constant(node.operand)
        return None if v is None else -v
    if isinstance(node, BinOp):
        a, b = _fold_constant(node.left), _fold_constant(node.right)
        if a is None or b is None:
            return None
        if node.op == "/":
            return None if b == 0 else a / b
        return {"+": a + b, "-": a - b, "*": a * b}[node.op]
    return None


# ---------------------------------------------------------------------------
# core form: constructors with light simplification

ZERO = ("c", 0.0)
ONE = ("c", 1.0)


def const(v):
    return ("c", float(v))


def _split_coeff(e):
    if e[0] == "c":
        return e[1], ONE
    if e[0] == "*" and e[1][0][0] == "c":
        rest = e[1][1:]
        return e[1][0][1], rest[0] if len(rest) == 1 else ("*", rest)
    return 1.0, e


def add(*terms):
    acc = {}
    constant = 0.0
    stack = list(terms)
    while stack:
        t = stack.pop()
        if t[0] == "+":
            stack.extend(t[1])
        elif t[0] == "c":
            constant += t[1]
        else:
            c, rest = _split_coeff(t)
            acc[rest] = acc.get(rest, 0.0) + c
    out = [mul(const(c), rest) for rest, c in acc.items() if c != 0.0]
    out.sort(key=repr)
    if constant != 0.0:
        out.insert(0, const(constant))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return ("+", tuple(out))


def mul(*factors):
    coeff = 1.0
    powers = {}
    stack = list(factors)
    while stack:
        f = stack.pop()
        if f[0] == "*":
            stack.extend(f[1])
        elif f[0] == "c":
            coeff *= f[1]
        elif f[0] == "^":
            powers[f[1]] = powers.get(f[1], 0) + f[2]
        else:
            powers[f] = powers.get(f, 0) + 1
    if coeff == 0.0:
        return ZERO
    out = []
    for base, k in powers.items():
        p = power(base, k)
        if p[0] == "c":
            coeff *= p[1]
        else:
            out.append(p)
    out.sort(key=repr)
    if coeff != 1.0 or not out:
        out.insert(0, const(coeff))
    if len(out) == 1:
        return out[0]
    return ("*", tuple(out))


def power(base, k):
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return base
    if base[0] == "c" and not (base[1] == 0.0 and k < 0):
        return const(base[1] ** k)
    if base[0] == "^":
        return power(base[1], base[2] * k)
    if base[0] == "*" and k > 0:
        return mul(*(power(f, k) for f in base[1]))
    return ("^", base, k)


def func(name, arg):
    if arg[0] == "c":
        v = arg[1]
        if name in ("exp", "sin", "cos") or (name == "log" and v > 0) or (name == "sqrt" and v >= 0):
            return const(getattr(math, name)(v))
    return ("f", name, arg)


def derivative(e, k):
    """Symbolic partial derivative of a core expression in ``r[k]`` (0-based)."""
    tag = e[0]
    if tag in ("c", "p"):
        return ZERO
    if tag == "r":
        return ONE if e[1] == k else ZERO
    if tag == "+":
        return add(*(derivative(t, k) for t in e[1]))
    if tag == "*":
        fs = e[1]
        terms = []
        for i, f in enumerate(fs):
            df = derivative(f, k)
            if df != ZERO:
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if tag == "^":
        db = derivative(e[1], k)
        if db == ZERO:
            return ZERO
        return mul(const(e[2]), power(e[1], e[2] - 1), db)
    if tag == "f":
        name, arg = e[1], e[2]
        da = derivative(arg, k)
        if da == ZERO:
            return ZERO
        if name == "log":
            return mul(da, power(arg, -1))
        if name == "exp":
            return mul(e, da)
        if name == "sin":
            return mul(func("cos", arg), da)
        if name == "cos":
            return mul(const(-1.0), func("sin", arg), da)
        if name == "sqrt":
            return mul(const(0.5), power(e, -1), da)
    raise ValueError(f"unknown core node {tag!r}")


def core_to_str(e):
    tag = e[0]
    if tag == "c":
        v = e[1]
        return repr(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
    if tag == "p":
        return e[1]
    if tag == "r":
        return f"r[{e[1] + 1}]"
    if tag == "+":
        return "(" + " + ".join(core_to_str(t) for t in e[1]) + ")"
    if tag == "*":
        return "*".join(core_to_str(f) for f in e[1])
    if tag == "^":
        return f"{core_to_str(e[1])}^{e[2]}" if e[2] > 0 else f"{core_to_str(e[1])}^({e[2]})"
    return f"{e[1]}({core_to_str(e[2])})"


def _params_of(e, out):
    tag = e[0]
    if tag == "p":
        out.add(e[1])
    elif tag in ("+", "*"):
        for t in e[1]:
            _params_of(t, out)
    elif tag == "^":
        _params_of(e[1], out)
    elif tag == "f":
        _params_of(e[2], out)
    return out


# ---------------------------------------------------------------------------
# compilation to vectorized numpy code

def _checked_log(x, label):
    if np.any(x <= 0):
        raise DomainError(f"log argument must be positive in {label}", label)
    return np.log(x)


def _checked_sqrt(x, label):
    if np.any(x < 0):
        raise DomainError(f"sqrt argument must be non-negative in {label}", label)
    return np.sqrt(x)


def _checked_inv(x, label):
    if np.any(x == 0):
        raise DomainError(f"division by zero in {label}", label)
    return 1.0 / x


def _compile(e):
    labels = []

    def label(node):
        labels.append(core_to_str(node))
        return f"_L[{len(labels) - 1}]"

    def gen(e):
        tag = e[0]
        if tag == "c":
            return repr(e[1])
        if tag == "p":
            return f"_prm[{e[1]!r}]"
        if tag == "r":
            return f"_R[:, {e[1]}]"
        if tag == "+":
            return "(" + " + ".join(gen(t) for t in e[1]) + ")"
        if tag == "*":
            return "(" + " * ".join(gen(f) for f in e[1]) + ")"
        if tag == "^":
            if e[2] > 0:
                return f"({gen(e[1])}) ** {e[2]}"
            inner = gen(e[1]) if e[2] == -1 else f"({gen(e[1])}) ** {-e[2]}"
            return f"_inv({inner}, {label(e[1])})"
        name = e[1]
        if name == "log":
            return f"_log({gen(e[2])}, {label(e)})"
        if name == "sqrt":
            return f"_sqrt({gen(e[2])}, {label(e)})"
        return f"_np.{name}({gen(e[2])})"

    body = gen(e)
    src = f"def _fn(_R, _prm):\n    return _np.broadcast_to({body}, (_R.shape[0],))\n"
    scope = {"_np": np, "_log": _checked_log, "_sqrt": _checked_sqrt,
             "_inv": _checked_inv, "_L": labels}
    exec(compile(src, "<specfn-expr>", "exec"), scope)
    return scope["_fn"]


# ---------------------------------------------------------------------------
# public expression object

def _instantiate(node, d, env):
    if isinstance(node, Num):
        return const(node.value)
    if isinstance(node, Name):
        return ("p", node.name)
    if isinstance(node, RVar):
        if isinstance(node.index, str):
            return ("r", env[node.index])
        if node.index > d:
            raise InputError(f"index r[{node.index}] out of range for dimension {d}")
        return ("r", node.index - 1)
    if isinstance(node, Neg):
        return mul(const(-1.0), _instantiate(node.operand, d, env))
    if isinstance(node, BinOp):
        a = _instantiate(node.left, d, env)
        b = _instantiate(node.right, d, env)
        if node.op == "+":
            return add(a, b)
        if node.op == "-":
            return add(a, mul(const(-1.0), b))
        if node.op == "*":
            return mul(a, b)
        return mul(a, power(b, -1))
    if isinstance(node, Power):
        return power(_instantiate(node.base, d, env), node.exponent)
    if isinstance(node, Call):
        return func(node.func, _instantiate(node.arg, d, env))
    if isinstance(node, Reduce):
        parts = [_instantiate(node.body, d, {**env, node.var: k}) for k in range(d)]
        return add(*parts) if node.kind == "sum" else mul(*parts)
    if isinstance(node, Esym):
        if node.k == 0:
            return ONE
        return add(*(mul(*(("r", i) for i in combo))
                     for combo in itertools.combinations(range(d), node.k)))
    raise TypeError(f"unknown syntax node {node!r}")


def _ast_params(node, out):
    if isinstance(node, Name):
        out.add(node.name)
    elif isinstance(node, (Neg,)):
        _ast_params(node.operand, out)
    elif isinstance(node, BinOp):
        _ast_params(node.left, out)
        _ast_params(node.right, out)
    elif isinstance(node, Power):
        _ast_params(node.base, out)
    elif isinstance(node, Call):
        _ast_params(node.arg, out)
    elif isinstance(node, Reduce):
        _ast_params(node.body, out)
    return out


def _structurally_symmetric(node):
    if isinstance(node, RVar):
        return isinstance(node.index, str)
    if isinstance(node, (Num, Name, Esym)):
        return True
    if isinstance(node, Neg):
        return _structurally_symmetric(node.operand)
    if isinstance(node, BinOp):
        return _structurally_symmetric(node.left) and _structurally_symmetric(node.right)
    if isinstance(node, Power):
        return _structurally_symmetric(node.base)
    if isinstance(node, Call):
        return _structurally_symmetric(node.arg)
    if isinstance(node, Reduce):
        return _structurally_symmetric(node.body)
    return False


def as_multi_index(alpha, d):
    """Normalize ``alpha`` to a length-``d`` tuple of non-negative counts."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d or any(a < 0 for a in alpha):
        raise InputError(f"multi-index must have {d} non-negative entries, got {alpha}")
    return alpha


def indices_to_multi(indices, d):
    """Multi-index counting the (0-based) variable indices in ``indices``."""
    counts = [0] * d
    for i in indices:
        counts[i] += 1
    return tuple(counts)


class DiagExpr:
    """A function of the diagonal entries ``r[1..d]``.

    Built by :func:`parse`; :meth:`instantiate` fixes the dimension.  An
    instantiated expression can be evaluated, differentiated with
    :meth:`partial`, and vectorized over many points with :meth:`evaluate_many`.
    """

    def __init__(self, ast=None, source=None, dim=None, core=None):
        self.ast = ast
        self.source = source
        self.dim = dim
        self.core = core
        self._instances = {}
        self._partials = {}
        self._fn = None
        self.symmetric = None  # cached symmetry verdict, set by check_symmetry

    def __repr__(self):
        text = self.source if self.source is not None else core_to_str(self.core)
        return f"DiagExpr({text!r}, dim={self.dim})"

    def __str__(self):
        return self.source if self.source is not None else core_to_str(self.core)

    @property
    def params(self):
        if self.core is None:
            return _ast_params(self.ast, set())
        return _params_of(self.core, set())

    def instantiate(self, d):
        if self.dim is not None:
            if d != self.dim:
                raise InputError(f"expression is fixed to dimension {self.dim}, not {d}")
            return self
        if d < 1:
            raise InputError("dimension must be at least 1")
        inst = self._instances.get(d)
        if inst is None:
            inst = DiagExpr(self.ast, self.source, d, _instantiate(self.ast, d, {}))
            self._instances[d] = inst
        return inst

    def _require_dim(self):
        if self.dim is None:
            raise InputError("expression has no dimension yet; call instantiate(d)")

    def partial(self, alpha, max_order=DEFAULT_MAX_ORDER):
        """Exact symbolic partial ``d^alpha f``; ``alpha`` counts per variable."""
        self._require_dim()
        alpha = as_multi_index(alpha, self.dim)
        if sum(alpha) > max_order:
            raise OrderCapError(f"derivative order {sum(alpha)} exceeds cap {max_order}")
        return self._partial(alpha)

    def _partial(self, alpha):
        if not any(alpha):
            return self
        hit = self._partials.get(alpha)
        if hit is not None:
            return hit
        k = max(i for i, a in enumerate(alpha) if a)
        lower = list(alpha)
        lower[k] -= 1
        base = self._partial(tuple(lower))
        out = DiagExpr(None, None, self.dim, derivative(base.core, k))
        self._partials[alpha] = out
        return out

    def evaluate_many(self, R, params=None):
        """Evaluate at each row of the ``(N, d)`` array ``R``."""
        self._require_dim()
        if self._fn is None:
            self._fn = _compile(self.core)
        R = np.asarray(R, dtype=float)
        if R.ndim != 2 or R.shape[1] != self.dim:
            raise InputError(f"points must have shape (N, {self.dim})")
        prm = dict(params or {})
        missing = self.params - set(prm)
        if missing:
            raise InputError(f"unbound parameter(s): {', '.join(sorted(missing))}")
        with np.errstate(all="ignore"):
            return np.array(self._fn(R, prm), dtype=float)

    def evaluate(self, r, params=None):
        r = np.asarray(r, dtype=float)
        return float(self.evaluate_many(r.reshape(1, -1), params)[0])

    def is_polynomial(self):
        """True when the core form uses only +, *, constants and positive powers."""
        self._require_dim()

        def poly(e):
            tag = e[0]
            if tag in ("c", "p", "r"):
                return True
            if tag in ("+", "*"):
                return all(poly(t) for t in e[1])
            if tag == "^":
                return e[2] > 0 and poly(e[1])
            return False

        return poly(self.core)


def parse(src):
    """Parse ``src`` into a :class:`DiagExpr` (dimension not yet fixed)."""
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    ast = _Parser(src).parse()
    return DiagExpr(ast, src.strip())


def as_expr(f, d=None):
    """Coerce a string or :class:`DiagExpr` to an expression, instantiated at ``d``."""
    if isinstance(f, str):
        f = parse(f)
    if d is not None:
        f = f.instantiate(d)
    return f


def partial(f, alpha, max_order=DEFAULT_MAX_ORDER):
    return f.partial(alpha, max_order)


def evaluate(f, r, params=None):
    """Evaluate ``f`` at the point ``r``; instantiates at ``len(r)`` if needed."""
    r = np.asarray(r, dtype=float)
    return as_expr(f, r.shape[0]).evaluate(r, params)


def check_symmetry(f, d, trials=20, seed=0, params=None, retries=20):
    """Check that ``f`` is invariant under permutations of its ``d`` arguments.

    Expressions whose only variable references go through full-range
    ``sum``/``prod`` indices are accepted without sampling.  Otherwise
    ``trials`` random points are each compared against a random permutation.
    Raises :class:`DomainError` when no valid sample point is found within
    ``retries`` attempts (the verdict is indeterminate).
    """
    if d < 1:
        raise InputError("dimension must be at least 1")
    f = as_expr(f)
    if f.ast is not None and _structurally_symmetric(f.ast):
        return True
    inst = f.instantiate(d)
    if params is None:
        params = {name: 0.7 + 0.1 * i for i, name in enumerate(sorted(inst.params))}
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        for attempt in range(retries):
            if attempt < retries // 2:
                r = rng.uniform(0.5, 2.5, size=d)
            else:
                r = rng.normal(0.0, 3.0, size=d)
            perm = rng.permutation(d)
            try:
                a = inst.evaluate(r, params)
                b = inst.evaluate(r[perm], params)
            except DomainError:
                continue
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            break
        else:
            raise DomainError("symmetry check indeterminate: no valid sample point found")
        if abs(a - b) > 1e-9 * (1.0 + abs(a)):
            return False
    return True
