"""
Spectral calculus: values and derivatives of ``F(X) = f(eigenvalues(X))``.

Directional derivatives of every order are produced by iterating the pair of
operators ``D`` (gradient in the eigenvalues) and ``L`` (contraction with the
direction plus the flag-rotation part).  Intermediates are kept symbolic:

* a *coefficient node* is a function of the eigenvalue vector ``r`` built
  from partials of ``f``:

  ``("P", idx)``
      the partial of ``f`` in the (0-based, sorted) variables ``idx``;
  ``("DD", i, j, child)``
      the divided difference ``(child(r) - child(m r)) / (r_i - r_j)`` where
      ``m`` replaces ``r_i, r_j`` by their mean.  It also equals
      ``1/2 * int_0^1 (d_i - d_j) child (r(t)) dt`` along the midpoint path
      ``r_i(t) = t r_i + (1 - t)(r_i + r_j)/2`` (same for ``j``), which stays
      finite when ``r_i = r_j``;
  ``("I", i, j, w, child)``
      ``int_0^1 w(t) child(r(t)) dt`` on the same path, ``w`` a polynomial.

* a *monomial* is a sorted tuple of cyclic words; the word ``(a1, ..., am)``
  stands for ``Tr(P_a1 xi P_a2 xi ... P_am xi)`` and evaluates to the cyclic
  product ``w[a1][a2] ... w[am][a1]`` of :func:`specfn.linalg.w_matrix`.

A :class:`TermSum` is a rational linear combination of (node, monomial)
pairs.  Its structure depends only on the dimension and the order, so it is
built once and cached.
"""
import enum
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dsl import DEFAULT_MAX_ORDER, as_expr, check_symmetry, indices_to_multi
from .errors import DomainError, InputError, NumericalError, OrderCapError
from .linalg import as_symmetric, jacobi_eigh, w_matrix

log = logging.getLogger(__name__)


class DividedDiffMode(enum.Enum):
    QUOTIENT = "quotient"
    MIDPOINT_INTEGRAL = "midpoint_integral"
    AUTO = "auto"


@dataclass(frozen=True)
class EngineConfig:
    coalescence_tol: float = 1e-6
    quad_nodes: int = 32
    max_order: int = DEFAULT_MAX_ORDER
    fd_consistency_check: bool = False
    mode: DividedDiffMode = DividedDiffMode.AUTO

    def __post_init__(self):
        if not self.coalescence_tol > 0:
            raise InputError("coalescence_tol must be positive")
        if self.quad_nodes < 2:
            raise InputError("quad_nodes must be at least 2")
        if self.max_order < 0:
            raise InputError("max_order must be non-negative")


DEFAULT_CONFIG = EngineConfig()


@lru_cache(maxsize=16)
def gauss_legendre_01(n):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def coalesced(r, i, j, tol):
    """True when ``r_i`` and ``r_j`` are within ``tol * (1 + max|r|)``."""
    return abs(r[i] - r[j]) <= tol * (1.0 + np.max(np.abs(r)))


# ---------------------------------------------------------------------------
# coefficient nodes

HALF = Fraction(1, 2)
ONE_PLUS_T = (HALF, HALF)     # (1 + t) / 2
ONE_MINUS_T = (HALF, -HALF)   # (1 - t) / 2


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for p, x in enumerate(a):
        for q, y in enumerate(b):
            out[p + q] += x * y
    return tuple(out)


def _combine(pairs):
    acc = defaultdict(Fraction)
    for c, node in pairs:
        acc[node] += c
    return tuple((c, node) for node, c in acc.items() if c != 0)


def _dd(i, j, child):
    """Divided-difference node with ``i < j``; returns (sign, node)."""
    if i < j:
        return 1, ("DD", i, j, child)
    return -1, ("DD", j, i, child)


def _integral(i, j, w, child):
    # the midpoint path is symmetric in (i, j)
    return ("I", min(i, j), max(i, j), w, child)


@lru_cache(maxsize=None)
def node_diff(node, k):
    """Partial derivative in ``r_k`` of a coefficient node, as ((coeff, node), ...)."""
    tag = node[0]
    if tag == "P":
        return ((Fraction(1), ("P", tuple(sorted(node[1] + (k,))))),)
    if tag == "DD":
        _, i, j, child = node
        if k != i and k != j:
            return _combine((c, ("DD", i, j, n)) for c, n in node_diff(child, k))
        return _combine(
            (c * cc, n)
            for c, integ in dd_as_integrals(node)
            for cc, n in node_diff(integ, k)
        )
    if tag == "I":
        _, i, j, w, child = node
        if k != i and k != j:
            return _combine((c, _integral(i, j, w, n)) for c, n in node_diff(child, k))
        same, other = (i, j) if k == i else (j, i)
        out = [(c, _integral(i, j, _polymul(w, ONE_PLUS_T), n)) for c, n in node_diff(child, same)]
        out += [(c, _integral(i, j, _polymul(w, ONE_MINUS_T), n)) for c, n in node_diff(child, other)]
        return _combine(out)
    raise ValueError(f"unknown node {node!r}")


@lru_cache(maxsize=None)
def dd_as_integrals(node):
    """Integral form of a ``DD`` node: ``1/2 int (d_i - d_j) child(r(t)) dt``."""
    _, i, j, child = node
    out = [(c, _integral(i, j, (HALF,), n)) for c, n in node_diff(child, i)]
    out += [(-c, _integral(i, j, (HALF,), n)) for c, n in node_diff(child, j)]
    return _combine(out)


def node_order(node):
    """Highest partial order of ``f`` touched when evaluating ``node``."""
    tag = node[0]
    if tag == "P":
        return len(node[1])
    if tag == "DD":
        return node_order(node[3]) + 1
    return node_order(node[4])


# ---------------------------------------------------------------------------
# cyclic words and monomials

def canonical_word(word):
    """Lexicographically least rotation of ``word`` or of its reversal.

    Reversal is included because ``w`` is symmetric, so a cyclic product read
    backwards has the same value.
    """
    word = tuple(word)
    m = len(word)
    rev = word[::-1]
    return min(min(word[k:] + word[:k] for k in range(m)),
               min(rev[k:] + rev[:k] for k in range(m)))


def monomial(*words):
    return tuple(sorted(canonical_word(w) for w in words))


def mono_letters(mono):
    return {a for word in mono for a in word}


def delta_monomial(mono, i, j):
    """Action of the pair field on a monomial, by the product rule.

    Each occurrence of letter ``i`` is replaced by the two words obtained by
    inserting ``(i, j)`` and ``(j, i)`` in its place; occurrences of ``j`` do
    the same with a minus sign.  Returns ((sign, monomial), ...).
    """
    out = []
    for widx, word in enumerate(mono):
        rest = mono[:widx] + mono[widx + 1:]
        for p, a in enumerate(word):
            if a != i and a != j:
                continue
            sign = 1 if a == i else -1
            for pair in ((i, j), (j, i)):
                new = word[:p] + pair + word[p + 1:]
                out.append((sign, tuple(sorted(rest + (canonical_word(new),)))))
    return out


def mono_value(mono, w):
    v = 1.0
    for word in mono:
        m = len(word)
        for p in range(m):
            v *= w[word[p], word[(p + 1) % m]]
    return v


# ---------------------------------------------------------------------------
# symbolic operators

class TermSum:
    """Linear combination ``sum coeff * node(r) * monomial(w)``.

    ``terms`` maps ``(node, monomial)`` to a :class:`~fractions.Fraction`.
    ``order`` counts the ``L`` applications that produced it.
    """

    def __init__(self, d, terms=None, order=0):
        self.d = d
        self.terms = dict(terms or {})
        self.order = order

    @classmethod
    def of_function(cls, d):
        """The function ``f`` itself: a single term with the empty monomial."""
        return cls(d, {(("P", ()), ()): Fraction(1)})

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"TermSum(d={self.d}, order={self.order}, terms={len(self.terms)})"

    def add(self, node, mono, coeff):
        key = (node, mono)
        v = self.terms.get(key, 0) + coeff
        if v == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = v

    def grouped(self):
        """Terms grouped by node: {node: [(float coeff, monomial), ...]}."""
        groups = defaultdict(list)
        for (node, mono), c in self.terms.items():
            groups[node].append((float(c), mono))
        return groups

    def max_node_order(self):
        return max((node_order(n) for n, _ in self.terms), default=0)

    def evaluate(self, r, w, f, params=None, config=DEFAULT_CONFIG):
        """Numeric value at eigenvalues ``r`` and contraction matrix ``w``."""
        ev = NodeEvaluator(f, r, params, config)
        mono_cache = {}
        total = 0.0
        for node, items in self.grouped().items():
            s = 0.0
            for c, mono in items:
                mv = mono_cache.get(mono)
                if mv is None:
                    mv = mono_cache[mono] = mono_value(mono, w)
                s += c * mv
            if s != 0.0:
                total += s * ev.value(node)
        return total


class DComponents(list):
    """The d components produced by :func:`apply_D`; remembers its source."""

    def __init__(self, items, parent=None):
        super().__init__(items)
        self.parent = parent


def apply_D(ts):
    """Gradient in the eigenvalues: component ``k`` differentiates every node in ``r_k``."""
    comps = []
    for k in range(ts.d):
        out = TermSum(ts.d, order=ts.order)
        for (node, mono), c in ts.terms.items():
            for cc, n in node_diff(node, k):
                out.add(n, mono, c * cc)
        comps.append(out)
    return DComponents(comps, parent=ts)


def apply_L(components, letter_cap=None):
    """Apply ``L`` to a vector of term sums.

    ``L(g) = sum_i g_i <P_i, xi> + 1/4 sum_{i != j} int_0^1 delta_ij(g_i - g_j)(r(t)) dt``.

    When the components come from :func:`apply_D` the pair integral is written
    as a ``DD`` node of the parent coefficient, which admits the cheap
    quotient evaluation away from coalescence.  Otherwise the general
    integral nodes are used.
    """
    d = len(components)
    order = max(c.order for c in components) + 1
    cap = letter_cap if letter_cap is not None else 2 * order + 2
    out = TermSum(d, order=order)
    for k, comp in enumerate(components):
        for (node, mono), c in comp.terms.items():
            out.add(node, tuple(sorted(mono + ((k,),))), c)
    parent = getattr(components, "parent", None)
    if parent is not None:
        # 1/4 sum_{i != j} int delta_ij(d_i phi - d_j phi) = sum_{i<j} DD(i, j, phi) delta_ij
        for (node, mono), c in parent.terms.items():
            letters = mono_letters(mono)
            for i, j in itertools.combinations(range(d), 2):
                if i not in letters and j not in letters:
                    continue
                dd = ("DD", i, j, node)
                for sign, new in delta_monomial(mono, i, j):
                    out.add(dd, new, c * sign)
    else:
        quarter = Fraction(1, 4)
        for i, j in itertools.permutations(range(d), 2):
            for src, sgn in ((components[i], 1), (components[j], -1)):
                for (node, mono), c in src.terms.items():
                    if i not in mono_letters(mono) and j not in mono_letters(mono):
                        continue
                    integ = _integral(i, j, (Fraction(1),), node)
                    for sign, new in delta_monomial(mono, i, j):
                        out.add(integ, new, quarter * c * sgn * sign)
    for _, mono in out.terms:
        if sum(len(wd) for wd in mono) > cap:
            raise NumericalError(f"monomial length cap {cap} exceeded (engine bug)")
    return out


@lru_cache(maxsize=32)
def derivative_terms(d, n):
    """Symbolic ``(L D)^n f`` for dimension ``d``; independent of ``f`` itself."""
    ts = TermSum.of_function(d)
    for _ in range(n):
        ts = apply_L(apply_D(ts))
    return ts


# ---------------------------------------------------------------------------
# numeric evaluation of coefficient nodes

class NodeEvaluator:
    """Evaluates coefficient nodes at one eigenvalue vector.

    Point sets are described by keys (``("base",)``, ``("mid", i, j, parent)``,
    ``("path", i, j, parent)``) and cached with their values.  ``ctx`` holds
    the indices already used as a quotient denominator higher up; nested
    divided differences touching them switch to the integral form so that
    roundoff is never divided twice by the same small gap.
    """

    def __init__(self, f, r, params=None, config=DEFAULT_CONFIG):
        self.f = f
        self.r = np.asarray(r, dtype=float)
        self.params = params or {}
        self.config = config
        self.t, self.wq = gauss_legendre_01(config.quad_nodes)
        self._points = {("base",): self.r.reshape(1, -1)}
        self._values = {}
        self.modes = {}

    def points(self, key):
        P = self._points.get(key)
        if P is not None:
            return P
        kind, i, j, parent = key
        base = self.points(parent)
        m = 0.5 * (base[:, i] + base[:, j])
        if kind == "mid":
            P = base.copy()
            P[:, i] = m
            P[:, j] = m
        else:
            t = self.t[:, None]
            P = np.repeat(base[None, :, :], len(self.t), axis=0)
            P[:, :, i] = t * base[None, :, i] + (1 - t) * m[None, :]
            P[:, :, j] = t * base[None, :, j] + (1 - t) * m[None, :]
            P = P.reshape(-1, base.shape[1])
        self._points[key] = P
        return P

    def value(self, node, key=("base",), ctx=frozenset()):
        ck = (node, key, ctx)
        v = self._values.get(ck)
        if v is None:
            v = self._compute(node, key, ctx)
            self._values[ck] = v
        return v if key != ("base",) else float(v[0])

    def _vals(self, node, key, ctx):
        v = self.value(node, key, ctx)
        return np.atleast_1d(v)

    def _partial(self, idx, P):
        g = self.f._partial(indices_to_multi(idx, self.f.dim))
        return g.evaluate_many(P, self.params)

    def _path_integral(self, child, i, j, key, ctx, weight):
        N = self.points(key).shape[0]
        vals = self._vals(child, ("path", i, j, key), ctx).reshape(len(self.t), N)
        return (self.wq * weight) @ vals

    def _compute(self, node, key, ctx):
        tag = node[0]
        P = self.points(key)
        if tag == "P":
            return self._partial(node[1], P)
        if tag == "I":
            _, i, j, w, child = node
            wt = np.polyval([float(c) for c in reversed(w)], self.t)
            return self._path_integral(child, i, j, key, ctx, wt)
        _, i, j, child = node
        gap = P[:, i] - P[:, j]
        mode = self.config.mode
        if mode is DividedDiffMode.MIDPOINT_INTEGRAL or i in ctx or j in ctx:
            use_q = np.zeros(len(gap), dtype=bool)
        elif mode is DividedDiffMode.QUOTIENT:
            # exact ties have no quotient; the integral is their continuous extension
            use_q = gap != 0
        else:
            scale = self.config.coalescence_tol * (1.0 + np.max(np.abs(P), axis=1))
            use_q = np.abs(gap) > scale
        if key == ("base",):
            self.modes[(i, j)] = "quotient" if use_q[0] else "midpoint_integral"
        out = np.empty(len(gap))
        if use_q.any():
            inner = ctx | {i, j}
            a = self._vals(child, key, inner)
            b = self._vals(child, ("mid", i, j, key), inner)
            with np.errstate(divide="ignore", invalid="ignore"):
                quot = (a - b) / gap
            out[use_q] = quot[use_q]
        if not use_q.all():
            integ = sum(float(c) * self._vals(n, key, ctx) for c, n in dd_as_integrals(node))
            out[~use_q] = np.broadcast_to(integ, out.shape)[~use_q]
        return out


# ---------------------------------------------------------------------------
# public operations

def _prepare(f, X, params, config):
    X = as_symmetric(X)
    d = X.shape[0]
    f = as_expr(f, d)
    if f.symmetric is None:
        f.symmetric = check_symmetry(f, d, params=params or None)
    if not f.symmetric:
        raise InputError(f"function {f} is not symmetric in its {d} arguments")
    return f, X


def _spectrum_for(X, spectrum):
    if spectrum is None:
        return jacobi_eigh(X)
    if spectrum.dim != X.shape[0]:
        raise InputError("spectrum does not match the matrix size")
    return spectrum


def eval_F(f, X, params=None, config=DEFAULT_CONFIG, spectrum=None):
    """``F(X) = f(r)`` at the sorted eigenvalues of ``X``."""
    f, X = _prepare(f, X, params, config)
    s = _spectrum_for(X, spectrum)
    return f.evaluate(s.r, params)


def gradient(f, X, params=None, config=DEFAULT_CONFIG, spectrum=None):
    """``grad F(X) = sum_i f_{r_i}(r) P_i``."""
    f, X = _prepare(f, X, params, config)
    s = _spectrum_for(X, spectrum)
    d = f.dim
    coeffs = np.array([f.partial(indices_to_multi((i,), d)).evaluate(s.r, params)
                       for i in range(d)])
    U = s.flag.vectors()
    G = (U * coeffs) @ U.T
    return 0.5 * (G + G.T)


def eigen_derivative(X, xi, config=DEFAULT_CONFIG, spectrum=None):
    """First-order motion of eigenvalues and eigenprojections along ``xi``.

    Returns ``(rdot, pidot)`` with ``rdot_i = Tr(P_i xi)`` and
    ``pidot_i = sum_{j != i} (P_j xi P_i + P_i xi P_j) / (r_i - r_j)``.
    Raises :class:`NumericalError` if two eigenvalues coalesce.
    """
    X = as_symmetric(X)
    xi = as_symmetric(xi)
    s = _spectrum_for(X, spectrum)
    d = s.dim
    for i, j in itertools.combinations(range(d), 2):
        if coalesced(s.r, i, j, config.coalescence_tol):
            raise NumericalError("eigenprojection derivative undefined at coalescence")
    P = s.flag.projections
    rdot = np.einsum("kab,ab->k", P, xi)
    pidot = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            if i != j:
                term = P[j] @ xi @ P[i]
                pidot[i] += (term + term.T) / (s.r[i] - s.r[j])
    return rdot, pidot


def divided_difference(f, alpha, r, i, j, mode=DividedDiffMode.AUTO, params=None,
                       config=DEFAULT_CONFIG):
    """Divided difference of the gradient components ``g_k = d^alpha f_{r_k}``.

    Quotient form ``(g_i(r) - g_j(r)) / (r_i - r_j)``; midpoint-integral form
    ``1/2 int_0^1 (d_i - d_j)(g_i - g_j)(r(t)) dt``.  The two agree when ``f``
    is symmetric and ``alpha`` treats ``i`` and ``j`` alike
    (``alpha[i] == alpha[j]``), which is required.
    """
    r = np.asarray(r, dtype=float)
    d = r.shape[0]
    f = as_expr(f, d)
    alpha = tuple(int(a) for a in alpha) if alpha is not None else (0,) * d
    if len(alpha) != d:
        raise InputError(f"multi-index must have {d} entries")
    if i == j or not (0 <= i < d and 0 <= j < d):
        raise InputError("need two distinct indices in range")
    if alpha[i] != alpha[j]:
        raise InputError("alpha must give the pair (i, j) equal weight")
    if sum(alpha) + 2 > config.max_order + 1:
        raise OrderCapError(f"order {sum(alpha) + 1} exceeds cap {config.max_order}")
    mode = DividedDiffMode(mode)
    if mode is DividedDiffMode.AUTO:
        mode = (DividedDiffMode.MIDPOINT_INTEGRAL if coalesced(r, i, j, config.coalescence_tol)
                else DividedDiffMode.QUOTIENT)

    def part(*extra):
        a = list(alpha)
        for k in extra:
            a[k] += 1
        return f._partial(tuple(a))

    if mode is DividedDiffMode.QUOTIENT:
        if r[i] == r[j]:
            raise NumericalError(f"quotient divided difference with r[{i}] == r[{j}]")
        return (part(i).evaluate(r, params) - part(j).evaluate(r, params)) / (r[i] - r[j])
    t, wq = gauss_legendre_01(config.quad_nodes)
    m = 0.5 * (r[i] + r[j])
    R = np.repeat(r[None, :], len(t), axis=0)
    R[:, i] = t * r[i] + (1 - t) * m
    R[:, j] = t * r[j] + (1 - t) * m
    integrand = (part(i, i).evaluate_many(R, params) - 2 * part(i, j).evaluate_many(R, params)
                 + part(j, j).evaluate_many(R, params))
    return 0.5 * float(wq @ integrand)


def hessian_apply(f, X, xi, params=None, config=DEFAULT_CONFIG, spectrum=None):
    """Second derivative of ``F`` applied to ``xi``, as a symmetric matrix.

    In the eigenbasis the diagonal is ``sum_k f_{r_a r_k} w_kk`` and the
    off-diagonal ``(a, b)`` entry is ``w_ab`` times the divided difference of
    ``f_{r_a}`` and ``f_{r_b}``.
    """
    f, X = _prepare(f, X, params, config)
    xi = as_symmetric(xi)
    s = _spectrum_for(X, spectrum)
    d = s.dim
    w = w_matrix(s.flag, xi)
    H = np.zeros((d, d))
    hess = np.array([[f._partial(indices_to_multi((a, b), d)).evaluate(s.r, params)
                      for b in range(d)] for a in range(d)])
    H[np.diag_indices(d)] = hess @ np.diag(w)
    for a, b in itertools.combinations(range(d), 2):
        dd = divided_difference(f, None, s.r, a, b, config.mode, params, config)
        H[a, b] = H[b, a] = w[a, b] * dd
    U = s.flag.vectors()
    out = U @ H @ U.T
    return 0.5 * (out + out.T)


def dirderiv(f, X, xi, n, params=None, config=DEFAULT_CONFIG, spectrum=None,
             return_modes=False):
    """n-th directional derivative ``d^n/ds^n F(X + s xi)`` at ``s = 0``.

    Evaluates the symbolic ``(L D)^n f`` at the eigenvalues and an eigenflag
    of ``X``.  With ``return_modes`` also returns the divided-difference mode
    chosen for each eigenvalue pair at the top level.
    """
    if n < 0:
        raise InputError("order must be non-negative")
    if n > config.max_order:
        raise OrderCapError(f"order {n} exceeds cap {config.max_order}")
    f, X = _prepare(f, X, params, config)
    xi = as_symmetric(xi)
    if xi.shape != X.shape:
        raise InputError("direction and matrix have different shapes")
    s = _spectrum_for(X, spectrum)
    w = w_matrix(s.flag, xi)
    ts = derivative_terms(s.dim, n)
    ev = NodeEvaluator(f, s.r, params, config)
    mono_cache = {}
    total = 0.0
    for node, items in ts.grouped().items():
        acc = 0.0
        for c, mono in items:
            mv = mono_cache.get(mono)
            if mv is None:
                mv = mono_cache[mono] = mono_value(mono, w)
            acc += c * mv
        if acc != 0.0:
            total += acc * ev.value(node)
    if not np.isfinite(total):
        raise NumericalError("directional derivative is not finite")
    if config.fd_consistency_check and n >= 1:
        _fd_check(f, X, xi, n, params, config, total)
    if return_modes:
        return total, dict(ev.modes)
    return total


def _fd_check(f, X, xi, n, params, config, value):
    from .oracle import fd_dirderiv, rel_err
    quiet = EngineConfig(config.coalescence_tol, config.quad_nodes, config.max_order,
                         False, config.mode)
    try:
        ref = fd_dirderiv(lambda Y: dirderiv(f, Y, xi, n - 1, params, quiet), X, xi, 1)
    except (DomainError, NumericalError) as exc:
        log.warning("finite-difference consistency check skipped: %s", exc)
        return
    err = rel_err(value, ref)
    if err > 1e-4:
        log.warning("order-%d derivative disagrees with finite differences (rel err %.2e)",
                    n, err)


def diagnostics(X, config=DEFAULT_CONFIG, spectrum=None):
    """Eigenvalue gaps and which divided-difference form each pair would use."""
    s = _spectrum_for(as_symmetric(X), spectrum)
    d = s.dim
    pairs = []
    modes = {}
    for i, j in itertools.combinations(range(d), 2):
        c = coalesced(s.r, i, j, config.coalescence_tol)
        if c:
            pairs.append([i, j])
        if config.mode is DividedDiffMode.AUTO:
            modes[f"{i},{j}"] = "midpoint_integral" if c else "quotient"
        else:
            modes[f"{i},{j}"] = config.mode.value
    return {
        "eigenvalues": s.r.tolist(),
        "eigenvalue_gaps": (-np.diff(s.r)).tolist(),
        "coalescent_pairs": pairs,
        "mode_used": modes,
    }
