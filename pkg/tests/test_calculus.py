import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specfn import calculus as calc
from specfn.calculus import (DividedDiffMode, EngineConfig, TermSum, apply_D, apply_L,
                             canonical_word, delta_monomial, derivative_terms, mono_value,
                             monomial)
from specfn.errors import InputError, NumericalError, OrderCapError
from specfn.linalg import Flag, Spectrum, conjugate, rand_sym, random_orthogonal, w_matrix
from specfn.oracle import (coalescence_sweep, extrapolate_to_zero, fd_dirderiv, rel_err,
                           repeated_flags, separated_spectrum, sym_with_spectrum,
                           unit_direction)

X2 = np.array([[2.0, 1.0], [1.0, 2.0]])
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
MODES = list(DividedDiffMode)


def cfg(mode):
    return EngineConfig(mode=mode)


# ---------------------------------------------------------------------------
# values and gradients

def test_eval_examples():
    assert math.isclose(calc.eval_F("psum(2)", X2), 10.0)
    assert abs(calc.eval_F("logdet", np.eye(3))) < 1e-15
    X = rand_sym(4, 1)
    assert math.isclose(calc.eval_F("psum(1)", X), np.trace(X), abs_tol=1e-12)


def test_unsymmetric_function_rejected():
    with pytest.raises(InputError):
        calc.eval_F("r[1]", X2)


def test_gradient_examples():
    assert np.allclose(calc.gradient("psum(2)", X2), [[4, 2], [2, 4]])
    assert np.allclose(calc.gradient("logdet", np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    assert np.allclose(calc.gradient("psum(1)", rand_sym(3, 2)), np.eye(3))


def test_gradient_psum2_is_2X():
    X = rand_sym(5, 9)
    assert np.allclose(calc.gradient("psum(2)", X), 2 * X, atol=1e-10)


# ---------------------------------------------------------------------------
# eigenvalue / eigenprojection derivatives

def test_eigen_derivative_examples():
    rdot, pidot = calc.eigen_derivative(np.diag([3.0, 1.0]), SWAP)
    assert np.allclose(rdot, 0)
    assert np.allclose(pidot[0], [[0, .5], [.5, 0]])
    assert np.allclose(pidot[1], -pidot[0])
    rdot, pidot = calc.eigen_derivative(np.diag([3.0, 1.0]), np.diag([0.7, -2.0]))
    assert np.allclose(rdot, [0.7, -2.0])
    assert np.allclose(pidot, 0)


def test_eigen_derivative_coalescence_error():
    with pytest.raises(NumericalError, match="undefined at coalescence"):
        calc.eigen_derivative(np.eye(2), SWAP)


def test_eigen_derivative_vs_fd():
    from specfn.oracle import fd_eigen
    rng = np.random.default_rng(4)
    for _ in range(10):
        X = sym_with_spectrum(separated_spectrum(4, rng), rng)
        xi = unit_direction(4, rng)
        rdot, pidot = calc.eigen_derivative(X, xi)
        fr, fp = fd_eigen(X, xi)
        assert np.max(np.abs(rdot - fr)) < 1e-6
        assert np.max(np.abs(pidot - fp)) < 1e-6


# ---------------------------------------------------------------------------
# divided differences

def test_divided_difference_examples():
    f = "psum(3)"
    assert math.isclose(calc.divided_difference(f, None, [2.0, 1.0], 0, 1, "quotient"), 9.0)
    assert math.isclose(calc.divided_difference(f, None, [2.0, 2.0], 0, 1,
                                                "midpoint_integral"), 12.0)
    q = calc.divided_difference(f, None, [2.0, 1.0], 0, 1, DividedDiffMode.QUOTIENT)
    m = calc.divided_difference(f, None, [2.0, 1.0], 0, 1, DividedDiffMode.MIDPOINT_INTEGRAL)
    assert abs(q - m) < 1e-12


def test_divided_difference_errors():
    with pytest.raises(NumericalError):
        calc.divided_difference("psum(3)", None, [2.0, 2.0], 0, 1, "quotient")
    with pytest.raises(InputError):
        calc.divided_difference("psum(3)", (1, 0), [2.0, 1.0], 0, 1)
    with pytest.raises(InputError):
        calc.divided_difference("psum(3)", None, [2.0, 1.0], 0, 0)
    # auto falls back to the integral at a tie
    assert math.isclose(calc.divided_difference("psum(3)", None, [2.0, 2.0], 0, 1), 12.0)


def test_divided_difference_nonpolynomial_limit():
    # for logdet the limit of (1/a - 1/b)/(a - b) is -1/a^2
    v = calc.divided_difference("logdet", None, [3.0, 3.0, 1.0], 0, 1)
    assert math.isclose(v, -1 / 9, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# symbolic term algebra

def test_canonical_word_rotation_and_reversal():
    assert canonical_word((2, 0, 1)) == canonical_word((0, 1, 2))
    assert canonical_word((0, 2, 1)) == canonical_word((0, 1, 2))


def test_delta_of_single_letter():
    # delta_ij applied to (i) evaluates to 2 w_ij^2, with opposite sign for (j)
    w = w_matrix(Flag.from_vectors(random_orthogonal(3, np.random.default_rng(0))),
                 rand_sym(3, 1))
    plus = sum(float(c) * mono_value(m, w) for c, m in delta_monomial(monomial((0,)), 0, 1))
    minus = sum(float(c) * mono_value(m, w) for c, m in delta_monomial(monomial((1,)), 0, 1))
    assert math.isclose(plus, 2 * w[0, 1] ** 2)
    assert math.isclose(minus, -2 * w[0, 1] ** 2)


def test_first_iteration_is_gradient_contraction():
    ts = apply_L(apply_D(TermSum.of_function(3)))
    assert len(ts) == 3
    X = rand_sym(3, 4)
    xi = rand_sym(3, 5)
    G = calc.gradient("esym(2)", X)
    val = calc.dirderiv("esym(2)", X, xi, 1)
    assert math.isclose(val, np.sum(G * xi), rel_tol=1e-12)


def test_term_sums_cached():
    assert derivative_terms(3, 2) is derivative_terms(3, 2)


def test_termsum_matches_matrix_traces():
    # every monomial value equals the direct matrix-trace evaluation
    rng = np.random.default_rng(8)
    flag = Flag.from_vectors(random_orthogonal(3, rng))
    xi = rand_sym(3, rng)
    w = w_matrix(flag, xi)
    P = flag.projections
    for (node, mono), c in derivative_terms(3, 3).terms.items():
        direct = 1.0
        for word in mono:
            M = np.eye(3)
            for a in word:
                M = M @ P[a] @ xi
            direct *= np.trace(M)
        assert abs(mono_value(mono, w) - direct) < 1e-10


# ---------------------------------------------------------------------------
# directional derivatives

def test_psum2_second_and_third():
    rng = np.random.default_rng(0)
    for _ in range(5):
        X = rand_sym(4, rng)
        xi = rand_sym(4, rng)
        assert math.isclose(calc.dirderiv("psum(2)", X, xi, 2), 2 * np.sum(xi * xi),
                            rel_tol=1e-10)
        assert abs(calc.dirderiv("psum(2)", X, xi, 3)) < 1e-10


def test_psum3_examples():
    assert math.isclose(calc.dirderiv("psum(3)", X2, SWAP, 2), 24.0, rel_tol=1e-12)
    assert abs(calc.dirderiv("psum(3)", X2, SWAP, 3)) < 1e-12
    H = calc.hessian_apply("psum(3)", X2, SWAP)
    assert math.isclose(np.sum(H * SWAP), 24.0, rel_tol=1e-12)


def test_hessian_examples():
    xi = rand_sym(3, 3)
    assert np.allclose(calc.hessian_apply("psum(2)", rand_sym(3, 2), xi), 2 * xi)
    H = calc.hessian_apply("logdet", np.diag([2.0, 4.0]), np.eye(2))
    assert np.allclose(H, -np.diag([0.25, 1 / 16]))


def test_hessian_logdet_is_minus_XinvXiXinv():
    rng = np.random.default_rng(6)
    X = sym_with_spectrum(separated_spectrum(4, rng, shift_min=1.0), rng)
    xi = rand_sym(4, rng)
    Xi = np.linalg.inv(X)
    assert np.allclose(calc.hessian_apply("logdet", X, xi), -Xi @ xi @ Xi, atol=1e-10)


def test_reduction_identities():
    rng = np.random.default_rng(12)
    for f in ("esym(3)", "logdet", "exp(psum(2)/10) * esym(2)"):
        X = sym_with_spectrum(separated_spectrum(4, rng, shift_min=1.0), rng)
        xi = rand_sym(4, rng)
        assert rel_err(calc.dirderiv(f, X, xi, 0), calc.eval_F(f, X)) < 1e-12
        assert rel_err(calc.dirderiv(f, X, xi, 1), np.sum(calc.gradient(f, X) * xi)) < 1e-9
        assert rel_err(calc.dirderiv(f, X, xi, 2),
                       np.sum(calc.hessian_apply(f, X, xi) * xi)) < 1e-9


@pytest.mark.parametrize("f", ["psum(4)", "esym(3)", "logdet", "exp(psum(2)/10) * esym(2)",
                               "sqrt(psum(2) + 1)"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_dirderiv_vs_fd_of_lower_order(f, n):
    rng = np.random.default_rng(n)
    X = sym_with_spectrum(separated_spectrum(4, rng, shift_min=1.0), rng)
    xi = unit_direction(4, rng)
    val = calc.dirderiv(f, X, xi, n)
    ref = fd_dirderiv(lambda Y: calc.dirderiv(f, Y, xi, n - 1), X, xi, 1)
    assert rel_err(val, ref) < 1e-5


def test_psum4_third_closed_form_all_modes():
    rng = np.random.default_rng(3)
    X = rand_sym(4, rng)
    xi = rand_sym(4, rng)
    exact = 24 * np.trace(X @ xi @ xi @ xi)
    for mode in MODES:
        assert rel_err(calc.dirderiv("psum(4)", X, xi, 3, config=cfg(mode)), exact) < 1e-10


def test_coalescent_pair_matches_fd():
    # r = (2, 2, -4) scaled: a repeated pair
    rng = np.random.default_rng(1)
    X = sym_with_spectrum(np.array([2.0, 2.0, -4.0]) / 2, rng)
    xi = unit_direction(3, rng)
    val = calc.dirderiv("psum(4)", X, xi, 3)
    ref = fd_dirderiv(lambda Y: calc.dirderiv("psum(4)", Y, xi, 2), X, xi, 1)
    assert rel_err(val, ref) < 1e-5
    assert rel_err(val, 24 * np.trace(X @ xi @ xi @ xi)) < 1e-10


def test_triple_coalescence():
    rng = np.random.default_rng(2)
    X = sym_with_spectrum([1.5, 1.5, 1.5, -0.5], rng)
    xi = rand_sym(4, rng)
    for f, exact in (("psum(4)", 24 * np.trace(X @ xi @ xi @ xi)),
                     ("psum(3)", 6 * np.trace(xi @ xi @ xi))):
        # a forced quotient is meaningless at numerically equal eigenvalues
        for mode in (DividedDiffMode.AUTO, DividedDiffMode.MIDPOINT_INTEGRAL):
            assert rel_err(calc.dirderiv(f, X, xi, 3, config=cfg(mode)), exact) < 1e-9


def test_modes_agree_on_separated_spectra():
    rng = np.random.default_rng(7)
    for f in ("esym(3)", "logdet", "exp(psum(2)/10) * esym(2)"):
        X = sym_with_spectrum(separated_spectrum(4, rng, shift_min=1.0), rng)
        xi = rand_sym(4, rng)
        vals = [calc.dirderiv(f, X, xi, 3, config=cfg(m)) for m in MODES]
        for v in vals[1:]:
            assert rel_err(v, vals[0]) < 1e-9


def test_continuity_through_coalescence():
    rng = np.random.default_rng(9)
    for f in ("psum(4)", "esym(3)"):
        for n in (1, 2, 3):
            gaps, vals, v0 = coalescence_sweep(f, 4, n, rng)
            assert np.all(np.isfinite(vals))
            slopes = np.abs(np.diff(vals)) / -np.diff(gaps)
            # differences shrink like the gap: no blow-up near coalescence
            assert np.all(slopes <= 2 * slopes[0] + 1e-3)
            assert rel_err(v0, extrapolate_to_zero(gaps, vals)) < 1e-7


def test_values_at_plus_minus_s():
    # a path whose two eigenvalues cross at s = 0
    rng = np.random.default_rng(10)
    Q = random_orthogonal(3, rng)
    xi = rand_sym(3, rng)
    A = (Q * np.array([1.0, 1.0, -1.0])) @ Q.T
    B = np.outer(Q[:, 0], Q[:, 0]) - np.outer(Q[:, 1], Q[:, 1])
    for s in (1e-3, 1e-5, 1e-7):
        a = calc.dirderiv("psum(4)", A + s * B, xi, 2)
        b = calc.dirderiv("psum(4)", A - s * B, xi, 2)
        assert abs(a - b) <= 100 * s


def test_rotation_invariance():
    rng = np.random.default_rng(13)
    X = sym_with_spectrum(separated_spectrum(4, rng, shift_min=1.0), rng)
    xi = rand_sym(4, rng)
    for _ in range(10):
        Q = random_orthogonal(4, rng)
        Y, eta = conjugate(X, Q), conjugate(xi, Q)
        for f in ("logdet", "esym(3)"):
            assert abs(calc.eval_F(f, Y) - calc.eval_F(f, X)) <= 1e-9 * (1 + abs(calc.eval_F(f, X)))
            for n in (1, 2, 3):
                assert rel_err(calc.dirderiv(f, Y, eta, n), calc.dirderiv(f, X, xi, n)) < 1e-8


def test_flag_independence():
    rng = np.random.default_rng(14)
    Z, s1, s2 = repeated_flags([2.0, 2.0, 0.5, 0.5, -1.0], rng)
    xi = rand_sym(5, rng)
    assert not np.allclose(s1.flag.projections, s2.flag.projections)
    for f in ("psum(4)", "esym(3)", "exp(psum(2)/10)"):
        G1 = calc.gradient(f, Z, spectrum=s1)
        assert np.allclose(G1, calc.gradient(f, Z, spectrum=s2), atol=1e-9)
        for n in (1, 2, 3):
            a = calc.dirderiv(f, Z, xi, n, spectrum=s1)
            assert rel_err(a, calc.dirderiv(f, Z, xi, n, spectrum=s2)) < 1e-9


def test_order_cap():
    with pytest.raises(OrderCapError):
        calc.dirderiv("psum(6)", X2, SWAP, 5)
    big = EngineConfig(max_order=5)
    v = calc.dirderiv("psum(5)", X2, SWAP, 5, config=big)
    assert rel_err(v, 120 * np.trace(np.linalg.matrix_power(SWAP, 5))) < 1e-9


def test_fourth_order_psum4():
    rng = np.random.default_rng(5)
    X = rand_sym(3, rng)
    xi = rand_sym(3, rng)
    exact = 24 * np.trace(np.linalg.matrix_power(xi, 4))
    assert rel_err(calc.dirderiv("psum(4)", X, xi, 4), exact) < 1e-9


def test_engine_config_validation():
    with pytest.raises(InputError):
        EngineConfig(coalescence_tol=0)
    with pytest.raises(InputError):
        EngineConfig(quad_nodes=1)


def test_diagnostics_report_coalescent_pairs():
    X = sym_with_spectrum([1.0, 1.0, -2.0], 3)
    diag = calc.diagnostics(X)
    assert diag["coalescent_pairs"] == [[0, 1]]
    assert diag["mode_used"]["0,1"] == "midpoint_integral"
    assert diag["mode_used"]["0,2"] == "quotient"


def test_fd_consistency_check_logs(caplog):
    c = EngineConfig(fd_consistency_check=True)
    with caplog.at_level("WARNING"):
        calc.dirderiv("psum(3)", X2, SWAP, 2, config=c)
    assert not caplog.records


def test_spectrum_argument_mismatch():
    with pytest.raises(InputError):
        calc.eval_F("psum(2)", X2, spectrum=Spectrum([1.0, 0.0, 0.0], Flag.standard(3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10 ** 6), st.sampled_from(["psum(3)", "esym(2)"]))
def test_second_order_closed_forms(d, seed, f):
    rng = np.random.default_rng(seed)
    X = rand_sym(d, rng)
    xi = rand_sym(d, rng)
    if f == "psum(3)":
        exact = 6 * np.trace(X @ xi @ xi)
    else:
        # e2 = (p1^2 - p2)/2, so D^2 e2 = tr(xi)^2 - |xi|^2
        exact = np.trace(xi) ** 2 - np.sum(xi * xi)
    assert abs(calc.dirderiv(f, X, xi, 2) - exact) <= 1e-9 * max(1.0, abs(exact))


def test_sweep_variation_is_the_true_dependence():
    # along a fixed-frame gap sweep the exact D^3 Tr X^4 = 24 Tr(X xi^3) itself
    # changes by O(gap); the engine follows it at every gap down to a tie
    rng = np.random.default_rng(21)
    Q = random_orthogonal(4, rng)
    xi = unit_direction(4, rng)
    exact, engine = [], []
    for gap in [1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 0.0]:
        r = np.array([2.0, 0.5 + gap / 2, 0.5 - gap / 2, -1.0])
        X = (Q * r) @ Q.T
        X = 0.5 * (X + X.T)
        spec = Spectrum(r, Flag.from_vectors(Q))
        engine.append(calc.dirderiv("psum(4)", X, xi, 3, spectrum=spec))
        exact.append(24 * np.trace(X @ xi @ xi @ xi))
    assert np.allclose(engine, exact, rtol=1e-11, atol=1e-11)
    assert abs(exact[0] - exact[1]) > 1e-6 * (1 + abs(exact[1]))
