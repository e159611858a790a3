"""
Power sums, the Vandermonde Jacobian and the polynomial lift.

Two normalizations of the power sums are in use and both are exposed:
``p_k = sum_i r_i**k`` and the scaled ``n_k = p_k / k``, whose gradient in
``r`` is the Vandermonde row ``(r_1**(k-1), ..., r_d**(k-1))``.  The lift
evaluates a polynomial in ``p_1, ..., p_d`` at ``p_k = Trace(X**k)``.
"""
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InputError, OrderCapError
from .linalg import _rng, as_symmetric, jacobi_eigh, rand_sym

log = logging.getLogger(__name__)

DEFAULT_DEGREE_CAP = 24


@dataclass(frozen=True)
class PowerSums:
    """``p[k-1] = sum_i r_i**k`` for ``k = 1..kmax``."""

    p: np.ndarray

    @property
    def n(self):
        """Scaled sums ``n_k = p_k / k``."""
        return self.p / np.arange(1, len(self.p) + 1)

    def __getitem__(self, k):
        return self.p[k - 1]


def power_sums(X, kmax=None):
    """Traces of ``X, X**2, ..., X**kmax`` by repeated multiplication."""
    X = as_symmetric(X)
    kmax = X.shape[0] if kmax is None else kmax
    if kmax < 1:
        raise InputError("kmax must be at least 1")
    out = np.empty(kmax)
    M = X.copy()
    for k in range(kmax):
        out[k] = np.trace(M)
        M = M @ X
    return PowerSums(out)


def power_sums_of(r, kmax=None):
    r = np.asarray(r, dtype=float)
    kmax = len(r) if kmax is None else kmax
    return PowerSums(np.array([np.sum(r ** k) for k in range(1, kmax + 1)]))


def vandermonde_jacobian(r):
    """Jacobian of ``(n_1, ..., n_d)`` in ``r`` and its determinant.

    Row ``k`` (0-based) is ``(r_1**k, ..., r_d**k)``.  The determinant is
    ``prod_{i<j} (r_j - r_i)``.
    """
    r = np.asarray(r, dtype=float)
    d = len(r)
    M = np.vander(r, d, increasing=True).T
    det = 1.0
    for i in range(d):
        for j in range(i + 1, d):
            det *= r[j] - r[i]
    return M, det


class PowerSumPoly:
    """Polynomial in the power sums ``p_1, p_2, ...`` with rational coefficients.

    ``terms`` maps an exponent tuple ``(e_1, e_2, ...)`` (trailing zeros
    stripped) to its coefficient, i.e. ``coeff * p_1**e_1 * p_2**e_2 * ...``.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for exps, c in (terms or {}).items():
            self._add(tuple(exps), Fraction(c))

    def _add(self, exps, c):
        exps = tuple(exps)
        while exps and exps[-1] == 0:
            exps = exps[:-1]
        v = self.terms.get(exps, Fraction(0)) + c
        if v == 0:
            self.terms.pop(exps, None)
        else:
            self.terms[exps] = v

    @classmethod
    def constant(cls, c):
        return cls({(): c})

    @classmethod
    def p(cls, k):
        return cls({(0,) * (k - 1) + (1,): 1})

    def __add__(self, other):
        out = PowerSumPoly(self.terms)
        for exps, c in other.terms.items():
            out._add(exps, c)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return PowerSumPoly({e: v * Fraction(c) for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PowerSumPoly):
            return self.scale(other)
        out = PowerSumPoly()
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                n = max(len(e1), len(e2))
                a = e1 + (0,) * (n - len(e1))
                b = e2 + (0,) * (n - len(e2))
                out._add(tuple(x + y for x, y in zip(a, b)), c1 * c2)
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, PowerSumPoly) and self.terms == other.terms

    def __repr__(self):
        return f"PowerSumPoly({self.to_source()!r})"

    @property
    def degree(self):
        """Weighted degree in ``r`` (``p_k`` has degree ``k``)."""
        return max((sum((k + 1) * e for k, e in enumerate(exps)) for exps in self.terms),
                   default=0)

    @property
    def max_index(self):
        return max((len(e) for e in self.terms), default=0)

    def evaluate(self, p):
        p = np.asarray(p, dtype=float)
        if len(p) < self.max_index:
            raise InputError(f"need power sums up to p_{self.max_index}")
        total = 0.0
        for exps, c in self.terms.items():
            total += float(c) * np.prod([p[k] ** e for k, e in enumerate(exps)])
        return total

    def to_source(self):
        """Expression source in the diagonal-function language."""
        parts = []
        for exps, c in sorted(self.terms.items()):
            factors = [f"psum({k + 1})" + (f"^{e}" if e > 1 else "")
                       for k, e in enumerate(exps) if e]
            coeff = f"({c.numerator}/{c.denominator})" if c.denominator != 1 else f"({c.numerator})"
            parts.append("*".join([coeff] + factors))
        return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=None)
def _esym_psum(k):
    if k == 0:
        return PowerSumPoly.constant(1)
    acc = PowerSumPoly()
    for m in range(1, k + 1):
        acc = acc + _esym_psum(k - m) * PowerSumPoly.p(m) * (-1) ** (m - 1)
    return acc.scale(Fraction(1, k))


def esym_to_psums(k, d):
    """``e_k`` as a polynomial in power sums, by Newton's identities.

    ``e_k = (1/k) sum_{m=1}^{k} (-1)**(m-1) e_{k-m} p_m``.
    """
    if not 1 <= k <= d:
        raise InputError(f"need 1 <= k <= d, got k={k}, d={d}")
    return PowerSumPoly(_esym_psum(k).terms)


class SymPoly:
    """Symmetric polynomial given in the elementary symmetric basis.

    ``terms`` maps exponents ``(a_1, ..., a_m)`` to coefficients meaning
    ``coeff * e_1**a_1 * ... * e_m**a_m``.
    """

    def __init__(self, terms):
        self.terms = {tuple(e): Fraction(c) for e, c in terms.items()}

    @property
    def degree(self):
        return max((sum((k + 1) * a for k, a in enumerate(e)) for e in self.terms), default=0)

    def to_psums(self, d):
        out = PowerSumPoly()
        for exps, c in self.terms.items():
            term = PowerSumPoly.constant(c)
            for k, a in enumerate(exps):
                if a:
                    if k + 1 > d:
                        term = PowerSumPoly()  # e_k vanishes for k > d
                        break
                    base = esym_to_psums(k + 1, d)
                    for _ in range(a):
                        term = term * base
            out = out + term
        return out

    def to_json(self):
        return json.dumps([{"coeff": str(c), "exponents": list(e)}
                           for e, c in sorted(self.terms.items())])

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, str) else text
        if not isinstance(obj, list):
            raise InputError("SymPoly JSON must be a list of {coeff, exponents}")
        terms = {}
        for item in obj:
            try:
                exps = tuple(int(e) for e in item["exponents"])
                c = Fraction(item["coeff"]) if isinstance(item["coeff"], str) \
                    else Fraction(item["coeff"]).limit_denominator(10 ** 12)
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"bad SymPoly term {item!r}") from exc
            if any(e < 0 for e in exps):
                raise InputError("exponents must be non-negative")
            terms[exps] = terms.get(exps, Fraction(0)) + c
        return cls(terms)


def lift_polynomial(p, X, degree_cap=DEFAULT_DEGREE_CAP):
    """Evaluate a power-sum polynomial at ``p_k = Trace(X**k)``.

    ``p`` may also be a :class:`SymPoly`, converted first.
    """
    X = as_symmetric(X)
    if isinstance(p, SymPoly):
        p = p.to_psums(X.shape[0])
    if p.degree > degree_cap:
        raise OrderCapError(f"polynomial degree {p.degree} exceeds cap {degree_cap}")
    kmax = max(p.max_index, 1)
    return p.evaluate(power_sums(X, kmax).p)


def dr_dx_rows_check(X, trials=5, seed=0, h=1e-6, separation=1e-6):
    """Largest mismatch between finite-difference eigenvalue slopes and ``Tr(P_i xi)``.

    Returns ``None`` (with a logged notice) when the spectrum is not
    separated by more than ``separation``.
    """
    X = as_symmetric(X)
    s = jacobi_eigh(X)
    if np.any(-np.diff(s.r) <= separation):
        log.warning("eigenvalues not separated; skipping eigenvalue-slope check")
        return None
    rng = _rng(seed)
    P = s.flag.projections
    worst = 0.0
    for _ in range(trials):
        xi = rand_sym(X.shape[0], rng)
        xi /= np.linalg.norm(xi)
        slope = (jacobi_eigh(X + h * xi).r - jacobi_eigh(X - h * xi).r) / (2 * h)
        exact = np.einsum("kab,ab->k", P, xi)
        worst = max(worst, float(np.max(np.abs(slope - exact))))
    return worst
