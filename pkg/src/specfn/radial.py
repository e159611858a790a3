"""
Directional derivatives of rotation-invariant functions on R^d.

``F(x) = f(|x|)`` with ``f`` an even function of one variable.  Writing
``x = r pi`` with ``|pi| = 1``, ``s = <pi, xi>`` and ``q = |xi|**2``, the
derivative along ``xi`` of a term ``g(r, pi)`` is

    D g = s * dg/dr + delta(g) / r,    delta(pi) = xi - s pi,

so ``delta(s) = q - s**2`` and ``delta(q) = 0``.  With

    L^j(h)(r) = s h(r) + int_0^1 t**j delta(h)(t r) dt

and ``(L^j h)' = L^(j+1)(h')`` one gets ``D^n F = L^0 L^1 ... L^(n-1) (f^(n))``.
Each term of the expansion is ``c * s**a * q**b * R(r)`` where
``R(r) = int prod_l t_l**e_l f^(k)(prod_l t_l * r) dt`` over a unit cube.
"""
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np

from .calculus import gauss_legendre_01
from .dsl import DEFAULT_MAX_ORDER, as_expr
from .errors import DomainError, InputError, OrderCapError

EVEN_TOL = 1e-10
QUAD_NODES = 32


def _poly_degree(e):
    tag = e[0]
    if tag in ("c", "p"):
        return 0
    if tag == "r":
        return 1
    if tag == "+":
        return max(_poly_degree(t) for t in e[1])
    if tag == "*":
        return sum(_poly_degree(t) for t in e[1])
    if tag == "^":
        return e[2] * _poly_degree(e[1])
    raise ValueError("not a polynomial")


class RadialProfile:
    """An even function ``f(r)`` written in ``r[1]`` (dimension one).

    Evenness is checked at random points on construction.
    """

    def __init__(self, f, params=None, max_order=DEFAULT_MAX_ORDER, seed=0):
        self.expr = as_expr(f, 1)
        self.params = dict(params or {})
        self.max_order = max_order
        self._check_even(seed)
        self._coeffs = None
        if self.expr.is_polynomial():
            deg = _poly_degree(self.expr.core)
            zero = np.zeros(1)
            self._coeffs = np.array([
                self.expr._partial((k,)).evaluate(zero, self.params) / math.factorial(k)
                for k in range(deg + 1)])

    def __repr__(self):
        return f"RadialProfile({str(self.expr)!r})"

    def _check_even(self, seed):
        rng = np.random.default_rng(seed)
        checked = 0
        for r in rng.uniform(0.05, 3.0, size=40):
            try:
                a = self.expr.evaluate([r], self.params)
                b = self.expr.evaluate([-r], self.params)
            except DomainError:
                continue
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            checked += 1
            if abs(a - b) > EVEN_TOL * (1.0 + abs(a)):
                raise InputError(f"radial profile {self.expr} is not even")
        if checked == 0:
            raise DomainError("evenness check indeterminate: no valid sample point")

    @property
    def is_polynomial(self):
        return self._coeffs is not None

    def derivative(self, k):
        """Symbolic ``f^(k)`` as a one-variable expression."""
        if k > self.max_order:
            raise OrderCapError(f"derivative order {k} exceeds cap {self.max_order}")
        return self.expr._partial((k,))

    def taylor_coeffs(self):
        """Coefficients ``c_p`` of ``f = sum c_p r**p`` (polynomial profiles only)."""
        if self._coeffs is None:
            raise InputError("profile is not a polynomial")
        return self._coeffs.copy()

    def __call__(self, r, k=0):
        return self.derivative(k).evaluate_many(np.reshape(r, (-1, 1)), self.params)


def as_profile(f, params=None):
    return f if isinstance(f, RadialProfile) else RadialProfile(f, params)


def delta_sphere(xi, pi):
    """Tangent field of the sphere: ``xi - <pi, xi> pi``."""
    xi = np.asarray(xi, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if xi.shape != pi.shape or xi.ndim != 1:
        raise InputError("xi and pi must be vectors of the same length")
    if abs(np.linalg.norm(pi) - 1.0) > 1e-12:
        raise InputError("pi must be a unit vector")
    return xi - (pi @ xi) * pi


class RadialTerm:
    """Symbolic sum of ``coeff * s**a * q**b * R_{k, weights}(r)``.

    Keys are ``(k, a, b, weights)`` with ``weights`` the sorted tuple of
    pending t-exponents of the iterated integrals.
    """

    def __init__(self, terms=None):
        self.terms = defaultdict(Fraction)
        for key, c in (terms or {}).items():
            self.terms[key] += Fraction(c)

    @classmethod
    def of_derivative(cls, k):
        return cls({(k, 0, 0, ()): 1})

    def __len__(self):
        return len(self.terms)

    def apply_L(self, j):
        """``L^j``: multiply by ``s``, plus the weighted integral of ``delta``."""
        out = RadialTerm()
        for (k, a, b, wts), c in self.terms.items():
            if c == 0:
                continue
            out.terms[(k, a + 1, b, wts)] += c
            if a:
                new_w = tuple(sorted(wts + (j,)))
                out.terms[(k, a - 1, b + 1, new_w)] += c * a
                out.terms[(k, a + 1, b, new_w)] -= c * a
        out.terms = defaultdict(Fraction, {key: c for key, c in out.terms.items() if c != 0})
        return out

    def degree(self):
        return max((a + 2 * b for _, a, b, _ in self.terms), default=0)


def radial_terms(n):
    """``L^0 L^1 ... L^(n-1)`` applied to ``f^(n)``, innermost first."""
    ts = RadialTerm.of_derivative(n)
    for j in reversed(range(n)):
        ts = ts.apply_L(j)
    return ts


def _r_function(profile, k, wts, r):
    """``int prod t_l**e_l f^(k)(prod t_l * r) dt`` over the unit cube."""
    if profile.is_polynomial:
        c = profile.taylor_coeffs()
        total = 0.0
        for p in range(k, len(c)):
            # f^(k)(rho) = sum_p c_p p!/(p-k)! rho**(p-k)
            m = p - k
            coeff = c[p] * math.factorial(p) / math.factorial(m)
            if coeff == 0.0:
                continue
            total += coeff * r ** m * np.prod([1.0 / (e + m + 1) for e in wts])
        return total
    t, w = gauss_legendre_01(QUAD_NODES)
    if not wts:
        return float(profile(r, k)[0])
    grids = np.meshgrid(*([t] * len(wts)), indexing="ij")
    weights = np.ones_like(grids[0])
    scale = np.ones_like(grids[0])
    for g, e, wg in zip(grids, wts, np.meshgrid(*([w] * len(wts)), indexing="ij")):
        weights = weights * wg * g ** e
        scale = scale * g
    vals = profile(scale.ravel() * r, k)
    return float(weights.ravel() @ vals)


def radial_dirderiv(f, x, xi, n, params=None):
    """``d^n/ds^n f(|x + s xi|)`` at ``s = 0``.

    At ``x = 0`` the unit vector ``pi`` is taken as the first basis vector;
    the value does not depend on it because ``f`` is even.
    """
    prof = as_profile(f, params)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x.ndim != 1 or xi.shape != x.shape:
        raise InputError("x and xi must be vectors of the same length")
    if n < 0:
        raise InputError("order must be non-negative")
    if n > prof.max_order:
        raise OrderCapError(f"order {n} exceeds cap {prof.max_order}")
    r = float(np.linalg.norm(x))
    if r > 0:
        pi = x / r
    else:
        pi = np.zeros_like(x)
        pi[0] = 1.0
    s = float(pi @ xi)
    q = float(xi @ xi)
    cache = {}
    total = 0.0
    for (k, a, b, wts), c in radial_terms(n).terms.items():
        key = (k, wts)
        if key not in cache:
            cache[key] = _r_function(prof, k, wts, r)
        total += float(c) * s ** a * q ** b * cache[key]
    return total


def radial_bound_check(f, x, xi, n, params=None, grid=201):
    """``(|D^n F(x)|, sup_{|r| <= |x|} |f^(n)(r)|)`` with the sup over a grid."""
    prof = as_profile(f, params)
    lhs = abs(radial_dirderiv(prof, x, xi, n))
    rho = np.linspace(0.0, float(np.linalg.norm(x)), grid)
    rhs = float(np.max(np.abs(prof(rho, n))))
    return lhs, rhs

