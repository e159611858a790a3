"""
Finite-difference oracles, engineered random instances and the property suites.

Everything here is independent of the symbolic engine except the value under
test: oracles only evaluate ``F`` itself (or the eigensolver) at perturbed
points.
"""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import calculus as calc
from .calculus import DividedDiffMode
from .errors import InputError, NumericalError
from .linalg import (Flag, Spectrum, conjugate, jacobi_eigh, random_orthogonal,
                     sym_with_spectrum)
from .newton import (dr_dx_rows_check, esym_to_psums, lift_polynomial,
                     vandermonde_jacobian)
from .radial import radial_dirderiv

# base FD step per derivative order, multiplied by (1 + |X|_F)
DEFAULT_STEPS = {0: 1e-4, 1: 1e-4, 2: 1e-3, 3: 1e-2, 4: 2e-2}

POLY_CORPUS = ("psum(2)", "psum(3)", "psum(4)", "esym(2)", "esym(3)")
CORPUS = POLY_CORPUS + ("logdet",)
RADIAL_CORPUS = ("r[1]^2", "r[1]^4", "r[1]^4 - 2*r[1]^2", "r[1]^6/3 + r[1]^2")

SUITES = ("gradient", "hessian", "order3", "coalescence", "invariance", "radial",
          "newton", "dualpath")


@dataclass(frozen=True)
class FDConfig:
    """Central differences with Richardson extrapolation.

    ``h`` is the base step; ``None`` picks ``DEFAULT_STEPS[n] * (1 + |X|_F)``.
    """

    h: float = None
    richardson_levels: int = 2
    scheme: str = "central"

    def __post_init__(self):
        if self.h is not None and not self.h > 0:
            raise InputError("FD step must be positive")
        if self.richardson_levels < 1:
            raise InputError("richardson_levels must be at least 1")
        if self.scheme != "central":
            raise InputError(f"unknown FD scheme {self.scheme!r}")


# central stencils: offsets (in units of h) and weights, divided by h**n
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((1, -1), (0.5, -0.5)),
    2: ((1, 0, -1), (1.0, -2.0, 1.0)),
    3: ((2, 1, -1, -2), (0.5, -1.0, 1.0, -0.5)),
    4: ((2, 1, 0, -1, -2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def fd_dirderiv(F_eval, X, xi, n, cfg=None):
    """n-th derivative of ``s -> F_eval(X + s xi)`` at 0 by central differences.

    The stencil error is even in ``h``, so each Richardson level removes the
    next power ``h**2``.  Failures of ``F_eval`` are re-raised as
    :class:`NumericalError`.
    """
    if n not in _STENCILS:
        raise InputError(f"FD order {n} not supported")
    cfg = cfg or FDConfig()
    X = np.asarray(X, dtype=float)
    xi = np.asarray(xi, dtype=float)
    h = cfg.h if cfg.h is not None else DEFAULT_STEPS[n] * (1.0 + np.linalg.norm(X))
    offsets, weights = _STENCILS[n]

    def stencil(step):
        total = 0.0
        for o, wt in zip(offsets, weights):
            try:
                v = F_eval(X + (o * step) * xi)
            except (ArithmeticError, ValueError) as exc:
                raise NumericalError(f"oracle evaluation failed at step {o * step:g}: {exc}") from exc
            total += wt * v
        return total / step ** n

    table = [stencil(h / 2 ** k) for k in range(cfg.richardson_levels)]
    for m in range(1, cfg.richardson_levels):
        f = 4.0 ** m
        table = [(f * table[k + 1] - table[k]) / (f - 1) for k in range(len(table) - 1)]
    return float(table[0])


def rel_err(a, b):
    """``|a - b| / max(|b|, 1)``: relative above one, absolute below."""
    return abs(a - b) / max(abs(b), 1.0)


def fd_eigen(X, xi, h=1e-5):
    """Central differences of eigenvalues and eigenprojections along ``xi``.

    Projections are sign-free, so no eigenvector alignment is needed.
    """
    a = jacobi_eigh(X + h * xi)
    b = jacobi_eigh(X - h * xi)
    rdot = (a.r - b.r) / (2 * h)
    pidot = (a.flag.projections - b.flag.projections) / (2 * h)
    return rdot, pidot


# ---------------------------------------------------------------------------
# random instances

def separated_spectrum(d, rng, min_gap=0.1, shift_min=None):
    """Sorted (non-increasing) eigenvalues with consecutive gaps >= ``min_gap``.

    With ``shift_min`` the smallest eigenvalue is moved to at least that value.
    """
    top = rng.uniform(-1.0, 2.0)
    gaps = min_gap + rng.exponential(0.6, size=d - 1)
    r = top - np.concatenate([[0.0], np.cumsum(gaps)])
    if shift_min is not None:
        r = r - r.min() + shift_min + rng.uniform(0.0, 1.0)
    return r


def unit_direction(d, rng):
    A = rng.standard_normal((d, d))
    A = 0.5 * (A + A.T)
    return A / np.linalg.norm(A)


def random_case(f, rng, dims=(2, 6), min_gap=0.1):
    d = int(rng.integers(dims[0], dims[1] + 1))
    shift = 1.0 if "logdet" in f or "log" in f else None
    r = separated_spectrum(d, rng, min_gap, shift)
    X = sym_with_spectrum(r, rng)
    return X, unit_direction(d, rng), r


# ---------------------------------------------------------------------------
# reports

@dataclass
class CaseRecord:
    f: str
    X: dict
    xi: dict
    n: int
    formula_value: float
    oracle_value: float
    rel_err: float
    tol: float
    check: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        self.formula_value = float(self.formula_value)
        self.oracle_value = float(self.oracle_value)
        self.rel_err = float(self.rel_err)
        self.passed = bool(self.rel_err <= self.tol)


@dataclass
class DerivReport:
    suite: str
    seed: int
    records: list = field(default_factory=list)

    def add(self, *args, **kw):
        rec = CaseRecord(*args, **kw)
        self.records.append(rec)
        return rec

    @property
    def max_rel_err(self):
        return max((r.rel_err for r in self.records), default=0.0)

    @property
    def pass_rate(self):
        if not self.records:
            return 1.0
        return sum(r.passed for r in self.records) / len(self.records)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def summary(self):
        return {"suite": self.suite, "cases": len(self.records),
                "max_rel_err": self.max_rel_err, "pass_rate": self.pass_rate,
                "seed": self.seed}

    def to_dict(self):
        return {"summary": self.summary(),
                "records": [asdict(r) for r in self.records]}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _xdesc(X, r=None):
    r = jacobi_eigh(X).r if r is None else np.sort(r)[::-1]
    return {"dim": int(X.shape[0]), "eigenvalues": [float(v) for v in r]}


def _xidesc(xi):
    return {"dim": int(xi.shape[0]), "fro_norm": float(np.linalg.norm(xi))}


def _F(f):
    return lambda Y: calc.eval_F(f, Y)


# ---------------------------------------------------------------------------
# suites

def _suite_gradient(rep, rng, trials, tol=1e-6):
    for k in range(trials):
        f = CORPUS[k % len(CORPUS)]
        X, xi, r = random_case(f, rng)
        val = float(np.sum(calc.gradient(f, X) * xi))
        fd = fd_dirderiv(_F(f), X, xi, 1)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 1, val, fd, rel_err(val, fd), tol,
                "gradient_vs_fd")


def _suite_hessian(rep, rng, trials, tol_fd=1e-5, tol_exact=1e-9):
    for k in range(trials):
        f = CORPUS[k % len(CORPUS)]
        X, xi, r = random_case(f, rng)
        val = float(np.sum(calc.hessian_apply(f, X, xi) * xi))
        fd = fd_dirderiv(_F(f), X, xi, 2)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 2, val, fd, rel_err(val, fd), tol_fd,
                "hessian_vs_fd")
        dd = calc.dirderiv(f, X, xi, 2)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 2, val, dd, rel_err(val, dd), tol_exact,
                "hessian_vs_dirderiv")


def _suite_order3(rep, rng, trials, tol=1e-4):
    for k in range(trials):
        f = POLY_CORPUS[k % len(POLY_CORPUS)]
        X, xi, r = random_case(f, rng)
        val = calc.dirderiv(f, X, xi, 3)
        fd = fd_dirderiv(_F(f), X, xi, 3)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 3, val, fd, rel_err(val, fd), tol,
                "order3_vs_fd")


COALESCENCE_GAPS = tuple(10.0 ** -k for k in range(2, 11))


def coalescence_sweep(f, d, n, rng, gaps=COALESCENCE_GAPS, config=calc.DEFAULT_CONFIG):
    """Values of ``dirderiv`` as one eigenvalue pair closes, in a fixed eigenframe.

    Returns ``(gaps, values, value_at_zero)``.  The pair is the middle one;
    its midpoint stays fixed while the gap shrinks.
    """
    base = separated_spectrum(d, rng, min_gap=0.3)
    i = (d - 1) // 2
    mid = 0.5 * (base[i] + base[i + 1])
    Q = random_orthogonal(d, rng)
    xi = unit_direction(d, rng)

    def at(gap):
        r = base.copy()
        r[i], r[i + 1] = mid + gap / 2, mid - gap / 2
        X = 0.5 * ((Q * r) @ Q.T + ((Q * r) @ Q.T).T)
        # the known eigenframe is used so only the gap moves
        U = Q[:, np.argsort(-r, kind="stable")]
        spec = Spectrum(np.sort(r)[::-1], Flag.from_vectors(U))
        return calc.dirderiv(f, X, xi, n, config=config, spectrum=spec)

    values = np.array([at(g) for g in gaps])
    return np.asarray(gaps), values, at(0.0)


def extrapolate_to_zero(gaps, values):
    """Linear extrapolation to gap 0 from the two smallest gaps."""
    g1, g2 = gaps[-1], gaps[-2]
    v1, v2 = values[-1], values[-2]
    return v1 - g1 * (v2 - v1) / (g2 - g1)


def _suite_coalescence(rep, rng, trials, tol_zero=1e-7):
    """Continuity of values as a pair gap closes.

    Successive differences must stay below ``C * gap`` with ``C`` fitted on
    the widest step, plus a roundoff floor; the exact-coalescence value must
    match the linear extrapolation.
    """
    for k in range(trials):
        f = POLY_CORPUS[k % len(POLY_CORPUS)]
        d = int(rng.integers(3, 6))
        n = 1 + k % 3
        gaps, vals, v0 = coalescence_sweep(f, d, n, rng)
        desc = {"dim": d, "gaps": gaps.tolist()}
        C = abs(vals[0] - vals[1]) / (gaps[0] - gaps[1])
        for a in range(len(gaps) - 1):
            diff = abs(vals[a] - vals[a + 1])
            bound = 2.0 * C * (gaps[a] - gaps[a + 1]) + 1e-9 * (1 + abs(vals[a]))
            rep.add(f, desc, {"fro_norm": 1.0}, n, vals[a + 1], vals[a], diff / bound, 1.0,
                    f"step_{gaps[a]:.0e}")
        ex = extrapolate_to_zero(gaps, vals)
        rep.add(f, desc, {"fro_norm": 1.0}, n, v0, ex, rel_err(v0, ex), tol_zero,
                "exact_coalescence")
        if not np.all(np.isfinite(vals)):
            rep.add(f, desc, {"fro_norm": 1.0}, n, np.nan, 0.0, np.inf, 0.0, "finite")


def repeated_flags(r, rng):
    """A matrix with spectrum ``r`` and two eigenflags that differ inside
    every repeated eigenspace."""
    r = np.sort(np.asarray(r, dtype=float))[::-1]
    d = len(r)
    Q = random_orthogonal(d, rng)
    Q2 = Q.copy()
    start = 0
    while start < d:
        stop = start
        while stop + 1 < d and r[stop + 1] == r[start]:
            stop += 1
        m = stop - start + 1
        if m > 1:
            Q2[:, start:stop + 1] = Q[:, start:stop + 1] @ random_orthogonal(m, rng)
        start = stop + 1
    X = (Q * r) @ Q.T
    X = 0.5 * (X + X.T)
    return X, Spectrum(r, Flag.from_vectors(Q)), Spectrum(r, Flag.from_vectors(Q2))


def _suite_invariance(rep, rng, trials, tol=1e-8, tol_flag=1e-9):
    for k in range(trials):
        f = CORPUS[k % len(CORPUS)]
        X, xi, r = random_case(f, rng)
        Q = random_orthogonal(X.shape[0], rng)
        Y, eta = conjugate(X, Q), conjugate(xi, Q)
        a, b = calc.eval_F(f, Y), calc.eval_F(f, X)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 0, a, b, rel_err(a, b), tol, "rotation_eval")
        G = calc.gradient(f, X)
        GY = calc.gradient(f, Y)
        err = np.linalg.norm(GY - Q @ G @ Q.T) / max(np.linalg.norm(G), 1.0)
        rep.add(f, _xdesc(X, r), _xidesc(xi), 1, np.linalg.norm(GY), np.linalg.norm(G),
                err, tol, "rotation_gradient")
        n = 1 + k % 3
        a, b = calc.dirderiv(f, Y, eta, n), calc.dirderiv(f, X, xi, n)
        rep.add(f, _xdesc(X, r), _xidesc(xi), n, a, b, rel_err(a, b), tol,
                "rotation_dirderiv")
        # repeated eigenvalues: two independent eigenflags
        d = X.shape[0]
        rr = r.copy()
        rr[1] = rr[0]
        if d > 3:
            rr[3] = rr[2]
        Z, s1, s2 = repeated_flags(rr, rng)
        for label, fn in (("eval", lambda s: calc.eval_F(f, Z, spectrum=s)),
                          ("dirderiv", lambda s: calc.dirderiv(f, Z, xi, n, spectrum=s))):
            a, b = fn(s1), fn(s2)
            rep.add(f, _xdesc(Z, rr), _xidesc(xi), n if label == "dirderiv" else 0, a, b,
                    rel_err(a, b), tol_flag, f"flag_{label}")
        G1 = calc.gradient(f, Z, spectrum=s1)
        G2 = calc.gradient(f, Z, spectrum=s2)
        err = np.linalg.norm(G1 - G2) / max(np.linalg.norm(G2), 1.0)
        rep.add(f, _xdesc(Z, rr), _xidesc(xi), 1, np.linalg.norm(G1), np.linalg.norm(G2),
                err, tol_flag, "flag_gradient")


def _suite_radial(rep, rng, trials, tol=1e-6):
    for k in range(trials):
        f = RADIAL_CORPUS[k % len(RADIAL_CORPUS)]
        d = int(rng.integers(1, 6))
        x = rng.standard_normal(d)
        x *= rng.uniform(0.1, 2.0) / np.linalg.norm(x)
        xi = rng.standard_normal(d)
        xi /= np.linalg.norm(xi)
        n = 1 + k % 3
        val = radial_dirderiv(f, x, xi, n)
        fd = fd_dirderiv(lambda y: radial_dirderiv(f, y, xi, 0), x, xi, n)
        rep.add(f, {"dim": d, "norm": float(np.linalg.norm(x))}, {"fro_norm": 1.0}, n,
                val, fd, rel_err(val, fd), tol, "radial_vs_fd")


def _suite_newton(rep, rng, trials, tol=1e-9, tol_dr=1e-6):
    for t in range(trials):
        d = 2 + t % 5
        k = 1 + int(rng.integers(0, d))
        r = separated_spectrum(d, rng)
        X = sym_with_spectrum(r, rng)
        f = f"esym({k})"
        a = lift_polynomial(esym_to_psums(k, d), X)
        b = calc.eval_F(f, X)
        rep.add(f, _xdesc(X, r), {}, 0, a, b, rel_err(a, b), tol, "lift_vs_eval")
        M, det = vandermonde_jacobian(r)
        ref = float(np.linalg.det(M))
        rep.add("vandermonde", _xdesc(X, r), {}, 0, det, ref,
                abs(det - ref) / max(abs(ref), 1e-300), tol, "vandermonde_det")
        res = dr_dx_rows_check(X, trials=2, seed=int(rng.integers(1 << 31)))
        if res is not None:
            rep.add("eigenvalues", _xdesc(X, r), {}, 1, res, 0.0, res, tol_dr, "dr_dx_rows")


def _suite_dualpath(rep, rng, trials, tol=1e-9):
    for k in range(trials):
        f = CORPUS[k % len(CORPUS)]
        d = int(rng.integers(2, 7))
        shift = 1.0 if f == "logdet" else None
        r = separated_spectrum(d, rng, 0.1, shift)
        i, j = (int(v) for v in rng.choice(d, size=2, replace=False))
        gap = 10.0 ** rng.uniform(-5, 0)
        r[j] = r[i] - gap if rng.random() < 0.5 else r[i] + gap
        alpha = [0] * d
        if k % 3:
            alpha[int(rng.integers(d))] += 1
            alpha[j] = alpha[i]
        q = calc.divided_difference(f, alpha, r, i, j, DividedDiffMode.QUOTIENT)
        m = calc.divided_difference(f, alpha, r, i, j, DividedDiffMode.MIDPOINT_INTEGRAL)
        rep.add(f, {"dim": d, "r": r.tolist(), "pair": [i, j], "alpha": alpha}, {}, 0,
                q, m, rel_err(q, m), tol, "quotient_vs_midpoint")


_RUNNERS = {
    "gradient": _suite_gradient,
    "hessian": _suite_hessian,
    "order3": _suite_order3,
    "coalescence": _suite_coalescence,
    "invariance": _suite_invariance,
    "radial": _suite_radial,
    "newton": _suite_newton,
    "dualpath": _suite_dualpath,
}

DEFAULT_TRIALS = {"gradient": 100, "hessian": 100, "order3": 50, "coalescence": 15,
                  "invariance": 100, "radial": 60, "newton": 30, "dualpath": 1000}


def run_suite(suite, seed=0, trials=None):
    """Run a named property suite; deterministic given ``seed``."""
    if suite not in _RUNNERS:
        raise InputError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    trials = DEFAULT_TRIALS[suite] if trials is None else int(trials)
    if trials < 1:
        raise InputError("trials must be positive")
    rep = DerivReport(suite, seed)
    _RUNNERS[suite](rep, np.random.default_rng([seed, SUITES.index(suite)]), trials)
    return rep


__all__ = ["FDConfig", "fd_dirderiv", "rel_err", "fd_eigen", "DerivReport", "CaseRecord",
           "run_suite", "SUITES", "CORPUS", "POLY_CORPUS", "coalescence_sweep",
           "extrapolate_to_zero", "repeated_flags", "separated_spectrum", "random_case",
           "unit_direction"]
