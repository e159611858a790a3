"""
Symmetric matrices, Jacobi eigendecomposition, flags and flag tangent fields.

A symmetric matrix ``X`` is written as ``X = sum_i r_i P_i`` with eigenvalues
``r`` sorted non-increasing and ``P_i`` mutually orthogonal rank-one
projections (a *flag*).  Matrices are plain ``numpy`` arrays; the helpers here
validate and symmetrize them.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError

FLAG_TOL = 1e-10
MAX_SWEEPS = 30


def as_symmetric(X, tol=1e-12):
    """Return ``X`` as a float array, symmetrized exactly.

    Raises :class:`InputError` if ``X`` is not square or if
    ``max|X_ij - X_ji| > tol * (1 + max|X|)``.
    """
    X = np.array(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("matrix has non-finite entries")
    asym = np.max(np.abs(X - X.T))
    if asym > tol * (1.0 + np.max(np.abs(X))):
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (X + X.T)


def fix_signs(V):
    """Flip columns of ``V`` so the largest-magnitude entry of each is positive."""
    V = np.array(V, dtype=float)
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


@dataclass(frozen=True, eq=False)
class Flag:
    """d mutually orthogonal rank-one projections summing to the identity.

    ``projections[k]`` is the k-th projection matrix.  Construction validates
    idempotence, orthogonality, completeness and unit trace to ``FLAG_TOL``.
    """

    projections: np.ndarray
    _vectors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        P = np.asarray(self.projections, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[1] or P.shape[1] != P.shape[2]:
            raise InputError(f"flag must have shape (d, d, d), got {P.shape}")
        object.__setattr__(self, "projections", P)
        d = P.shape[0]
        if np.max(np.abs(P - P.transpose(0, 2, 1))) > FLAG_TOL:
            raise InputError("flag projections must be symmetric")
        prod = np.einsum("iab,jbc->ijac", P, P)
        for i in range(d):
            for j in range(d):
                target = P[i] if i == j else 0.0
                if np.max(np.abs(prod[i, j] - target)) > FLAG_TOL:
                    kind = "idempotent" if i == j else "mutually orthogonal"
                    raise InputError(f"flag projections are not {kind} ({i}, {j})")
        if np.max(np.abs(P.sum(axis=0) - np.eye(d))) > FLAG_TOL:
            raise InputError("flag projections do not sum to the identity")
        traces = np.einsum("kaa->k", P)
        if np.max(np.abs(traces - 1.0)) > FLAG_TOL:
            raise InputError("flag projections must be one-dimensional")

    @classmethod
    def from_vectors(cls, V):
        """Flag of the columns of an orthogonal matrix ``V``."""
        V = np.asarray(V, dtype=float)
        P = np.einsum("ak,bk->kab", V, V)
        return cls(P, fix_signs(V))

    @property
    def dim(self):
        return self.projections.shape[0]

    def vectors(self):
        """Unit vectors spanning each projection, as columns.

        Recovered from the projections themselves; the sign is fixed so the
        largest-magnitude component is positive.
        """
        if self._vectors is not None:
            return self._vectors
        P = self.projections
        d = self.dim
        U = np.empty((d, d))
        for k in range(d):
            c = int(np.argmax(np.diag(P[k])))
            if P[k, c, c] <= 0.5 / d:
                raise InputError(f"projection {k} is not rank one")
            U[:, k] = P[k][:, c] / np.sqrt(P[k, c, c])
        U = fix_signs(U)
        object.__setattr__(self, "_vectors", U)
        return U

    @classmethod
    def standard(cls, d):
        return cls.from_vectors(np.eye(d))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues ``r`` (non-increasing) and an eigenflag of a symmetric matrix."""

    r: np.ndarray
    flag: Flag

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        object.__setattr__(self, "r", r)
        if r.shape != (self.flag.dim,):
            raise InputError("eigenvalue vector and flag have different sizes")
        if np.any(np.diff(r) > 0):
            raise InputError("eigenvalues must be sorted non-increasing")

    @property
    def dim(self):
        return self.r.shape[0]


def jacobi_eigh(X):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns a :class:`Spectrum` with eigenvalues sorted non-increasing; ties
    keep the order produced by the sweeps, so an exactly diagonal input keeps
    the standard basis.
    """
    A = as_symmetric(X)
    d = A.shape[0]
    V = np.eye(d)
    scale = np.linalg.norm(A)
    target = 1e-14 * scale
    for _ in range(MAX_SWEEPS + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                if abs(apq) < 1e-18 * (abs(A[p, p]) + abs(A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise NumericalError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
    evals = np.diag(A).copy()
    order = np.argsort(-evals, kind="stable")
    return Spectrum(evals[order], Flag.from_vectors(fix_signs(V[:, order])))


def reconstruct(s):
    """``sum_i r_i P_i``."""
    return np.einsum("k,kab->ab", s.r, s.flag.projections)


def delta_field(a, xi, flag):
    """Flag tangent field: ``d_i = P_i xi S_i + S_i xi P_i`` with ``S_i = sum_j a_ij P_j``.

    ``a`` must be skew-symmetric.  The components sum to zero.
    """
    a = np.asarray(a, dtype=float)
    d = flag.dim
    if a.shape != (d, d):
        raise InputError(f"skew matrix must be {d}x{d}")
    if np.max(np.abs(a + a.T), initial=0.0) > 1e-12:
        raise InputError("a must be skew-symmetric")
    xi = as_symmetric(xi)
    P = flag.projections
    S = np.einsum("ij,jab->iab", a, P)
    left = np.einsum("iab,bc,icd->iad", P, xi, S)
    return left + left.transpose(0, 2, 1)


def w_matrix(flag, xi):
    """``w[a][b] = u_a^T xi u_b`` for the unit vectors ``u_k`` of the flag.

    Cyclic traces ``Tr(P_a1 xi P_a2 xi ... P_am xi)`` equal the cyclic products
    ``w[a1][a2] w[a2][a3] ... w[am][a1]``.
    """
    xi = as_symmetric(xi)
    U = flag.vectors()
    if xi.shape[0] != U.shape[0]:
        raise InputError("direction and flag have different sizes")
    w = U.T @ xi @ U
    return 0.5 * (w + w.T)


def random_orthogonal(d, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed)."""
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def conjugate(X, Q):
    """``Q X Q^T``, re-symmetrized.  ``Q`` must be orthogonal."""
    X = as_symmetric(X)
    Q = np.asarray(Q, dtype=float)
    if Q.shape != X.shape:
        raise InputError("rotation and matrix have different shapes")
    if np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0]))) > 1e-10:
        raise InputError("Q is not orthogonal")
    Y = Q @ X @ Q.T
    return 0.5 * (Y + Y.T)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def rand_sym(d, seed=None):
    """Random symmetric matrix with standard-normal entries (GOE-like)."""
    rng = _rng(seed)
    A = rng.standard_normal((d, d))
    return 0.5 * (A + A.T)


def sym_with_spectrum(r, seed=None):
    """Random symmetric matrix ``Q diag(r) Q^T`` with ``Q`` Haar orthogonal."""
    r = np.asarray(r, dtype=float)
    Q = random_orthogonal(r.shape[0], _rng(seed))
    Y = (Q * r) @ Q.T
    return 0.5 * (Y + Y.T)


def load_matrix(path):
    """Read ``{"dim": d, "rows": [[...], ...]}`` and return a symmetric array."""
    with open(path) as fh:
        obj = json.load(fh)
    return matrix_from_json(obj)


def matrix_from_json(obj):
    try:
        rows = obj["rows"]
    except (TypeError, KeyError):
        raise InputError('matrix JSON must be an object with a "rows" field') from None
    X = np.array(rows, dtype=float)
    if "dim" in obj and (X.ndim != 2 or X.shape != (obj["dim"], obj["dim"])):
        raise InputError(f"matrix rows do not match dim={obj['dim']}")
    return as_symmetric(X)


def matrix_to_json(X):
    X = np.asarray(X, dtype=float)
    return {"dim": int(X.shape[0]), "rows": X.tolist()}
