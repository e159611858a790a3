import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from specfn import calculus as calc
from specfn.errors import InputError, OrderCapError
from specfn.linalg import jacobi_eigh, rand_sym, random_orthogonal, conjugate, sym_with_spectrum
from specfn.newton import (PowerSumPoly, SymPoly, dr_dx_rows_check, esym_to_psums,
                           lift_polynomial, power_sums, power_sums_of, vandermonde_jacobian)

X2 = np.array([[2.0, 1.0], [1.0, 2.0]])


def test_power_sums_examples():
    ps = power_sums(X2)
    assert np.allclose(ps.p, [4, 10])
    assert np.allclose(ps.n, [4, 5])
    assert ps[2] == 10
    assert np.allclose(power_sums(np.eye(3)).p, 3)
    assert np.allclose(power_sums(np.zeros((3, 3)), 4).p, 0)
    with pytest.raises(InputError):
        power_sums(X2, 0)


def test_power_sums_match_spectrum():
    rng = np.random.default_rng(0)
    for d in range(1, 8):
        X = rand_sym(d, rng)
        a = power_sums(X, d + 2).p
        b = power_sums_of(jacobi_eigh(X).r, d + 2).p
        assert np.allclose(a, b, rtol=1e-9, atol=1e-9)
        assert abs(a[0] - np.trace(X)) < 1e-10


def test_vandermonde_examples():
    M, det = vandermonde_jacobian([2.0, 1.0])
    assert np.array_equal(M, [[1, 1], [2, 1]]) and det == -1.0
    assert vandermonde_jacobian([1.0, 0.0, -1.0])[1] == -2.0
    assert vandermonde_jacobian([1.0, 2.0, 1.0])[1] == 0.0


def test_vandermonde_is_jacobian_of_scaled_sums():
    rng = np.random.default_rng(1)
    for d in range(2, 7):
        r = rng.normal(size=d)
        M, det = vandermonde_jacobian(r)
        assert math.isclose(det, np.linalg.det(M), rel_tol=1e-9)
        h = 1e-6
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            fd = (power_sums_of(r + e).n - power_sums_of(r - e).n) / (2 * h)
            assert np.allclose(fd, M[:, i], atol=1e-6)


def test_esym_to_psums_examples():
    assert esym_to_psums(1, 3) == PowerSumPoly.p(1)
    p1, p2, p3 = (PowerSumPoly.p(k) for k in (1, 2, 3))
    assert esym_to_psums(2, 2) == (p1 * p1 - p2).scale(Fraction(1, 2))
    assert esym_to_psums(3, 3) == (p1 * p1 * p1 - 3 * p1 * p2 + 2 * p3).scale(Fraction(1, 6))
    with pytest.raises(InputError):
        esym_to_psums(4, 3)
    with pytest.raises(InputError):
        esym_to_psums(0, 3)


def test_esym_to_psums_numeric():
    rng = np.random.default_rng(2)
    for d in range(1, 9):
        r = rng.uniform(-1.5, 1.5, d)
        p = power_sums_of(r, d).p
        for k in range(1, d + 1):
            ref = sum(np.prod(c) for c in itertools.combinations(r, k))
            assert abs(esym_to_psums(k, d).evaluate(p) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_lift_examples():
    assert math.isclose(lift_polynomial(PowerSumPoly.p(2), X2), 10.0)
    X = rand_sym(4, 3)
    assert math.isclose(lift_polynomial(PowerSumPoly.p(1), X), np.trace(X))
    assert math.isclose(lift_polynomial(esym_to_psums(2, 2), X2), 3.0)
    assert math.isclose(lift_polynomial(SymPoly({(0, 1): 1}), X2), np.linalg.det(X2))


def test_lift_matches_eval_and_is_invariant():
    rng = np.random.default_rng(4)
    for d in range(2, 7):
        X = rand_sym(d, rng)
        Q = random_orthogonal(d, rng)
        for k in range(1, d + 1):
            a = lift_polynomial(esym_to_psums(k, d), X)
            b = calc.eval_F(f"esym({k})", X)
            assert abs(a - b) <= 1e-9 * max(1.0, abs(b))
            assert abs(lift_polynomial(esym_to_psums(k, d), conjugate(X, Q)) - a) <= 1e-10 * max(1, abs(a))


def test_lift_via_diag_source():
    p = SymPoly({(2, 1): 3, (0, 0, 1): -1}).to_psums(3)
    X = rand_sym(3, 5)
    assert math.isclose(lift_polynomial(p, X), calc.eval_F(p.to_source(), X), rel_tol=1e-9)


def test_symmetric_poly_vanishing_esym():
    # e_3 vanishes identically in two variables
    assert lift_polynomial(SymPoly({(0, 0, 1): 5, (1,): 1}), X2) == 4.0


def test_degree_cap():
    p = PowerSumPoly.p(5) * PowerSumPoly.p(5) * PowerSumPoly.p(5)
    with pytest.raises(OrderCapError):
        lift_polynomial(p, X2, degree_cap=10)


def test_sympoly_json_roundtrip():
    sp = SymPoly({(1, 2): Fraction(3, 4), (0, 1): -2})
    back = SymPoly.from_json(sp.to_json())
    assert back.terms == sp.terms
    assert SymPoly.from_json(json.dumps([{"coeff": 0.5, "exponents": [1]}])).terms == {(1,): Fraction(1, 2)}
    for bad in ('{"a": 1}', '[{"coeff": 1}]', '[{"coeff": 1, "exponents": [-1]}]'):
        with pytest.raises(InputError):
            SymPoly.from_json(bad)


def test_dr_dx_examples():
    X = np.diag([3.0, 1.0])
    # diagonal and off-diagonal motions
    assert dr_dx_rows_check(X) <= 1e-6
    res = dr_dx_rows_check(sym_with_spectrum([2.0, 1.0, -0.5, -3.0, 4.0], 7))
    assert res <= 1e-6


def test_dr_dx_skips_coalescent(caplog):
    with caplog.at_level("WARNING"):
        assert dr_dx_rows_check(np.eye(3)) is None
    assert "skipping" in caplog.text
