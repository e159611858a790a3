"""
Acceptance criteria 1-11, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.  Run standalone with
``python tests/test_acceptance.py`` to print the lines without pytest.
"""
import time

import numpy as np

from specfn import calculus as calc
from specfn.linalg import rand_sym, sym_with_spectrum
from specfn.newton import dr_dx_rows_check, esym_to_psums, lift_polynomial, vandermonde_jacobian
from specfn.oracle import (COALESCENCE_GAPS, POLY_CORPUS, coalescence_sweep, extrapolate_to_zero,
                           fd_eigen, rel_err, run_suite, separated_spectrum, unit_direction)
from specfn.radial import radial_dirderiv

SEED = 20240601
RESULTS = []


def report(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title} -- {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _suite_detail(rep):
    bad = sum(not r.passed for r in rep.records)
    return f"{len(rep.records)} checks, max rel err {rep.max_rel_err:.2e}, {bad} failing"


def test_criterion_01_gradient():
    t0 = time.perf_counter()
    rep = run_suite("gradient", SEED, 100)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 10.0
    assert report(1, "gradient vs FD (1e-6)", ok, f"{_suite_detail(rep)}, {elapsed:.2f}s")


def test_criterion_02_hessian():
    rep = run_suite("hessian", SEED, 100)
    fd = [r for r in rep.records if r.check == "hessian_vs_fd"]
    ex = [r for r in rep.records if r.check == "hessian_vs_dirderiv"]
    ok = rep.passed and len(fd) == len(ex) == 100
    detail = (f"vs FD max {max(r.rel_err for r in fd):.2e} (1e-5), "
              f"vs dirderiv max {max(r.rel_err for r in ex):.2e} (1e-9)")
    assert report(2, "Hessian vs FD and dirderiv", ok, detail)


def test_criterion_03_third_order():
    rep = run_suite("order3", SEED, 50)
    ok = rep.passed and len(rep.records) == 50
    assert report(3, "third order vs FD (1e-4)", ok, _suite_detail(rep))


def test_criterion_04_exact_identities():
    rng = np.random.default_rng([SEED, 4])
    worst = {"grad": 0.0, "d2": 0.0, "d3": 0.0, "psum3": 0.0}
    for _ in range(50):
        d = int(rng.integers(2, 7))
        X = rand_sym(d, rng)
        xi = rand_sym(d, rng)
        G = calc.gradient("psum(2)", X)
        worst["grad"] = max(worst["grad"], np.max(np.abs(G - 2 * X)) / max(1.0, np.max(np.abs(2 * X))))
        worst["d2"] = max(worst["d2"], rel_err(calc.dirderiv("psum(2)", X, xi, 2), 2 * np.sum(xi * xi)))
        worst["d3"] = max(worst["d3"], abs(calc.dirderiv("psum(2)", X, xi, 3)))
        exact = 6 * np.trace(X @ xi @ xi)
        worst["psum3"] = max(worst["psum3"],
                             abs(calc.dirderiv("psum(3)", X, xi, 2) - exact) / max(abs(exact), 1e-300))
    ok = (worst["grad"] <= 1e-10 and worst["d2"] <= 1e-10 and worst["d3"] <= 1e-10
          and worst["psum3"] <= 1e-9)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(4, "exact polynomial identities", ok, detail)


def test_criterion_05_dual_path():
    rep = run_suite("dualpath", SEED, 1000)
    ok = rep.passed and len(rep.records) == 1000
    assert report(5, "quotient vs midpoint integral (1e-9)", ok, _suite_detail(rep))


def test_criterion_06_coalescence():
    rng = np.random.default_rng([SEED, 6])
    step_fail, steps, finite, zero_worst = [], 0, True, 0.0
    for f in POLY_CORPUS:
        for n in (1, 2, 3):
            gaps, vals, v0 = coalescence_sweep(f, 4, n, rng, COALESCENCE_GAPS)
            finite &= bool(np.all(np.isfinite(vals)) and np.isfinite(v0))
            for k in range(len(gaps) - 1):
                steps += 1
                diff = abs(vals[k] - vals[k + 1])
                if diff > 1e-6 * (1 + abs(vals[k])):
                    step_fail.append((f, n, gaps[k], diff / (1 + abs(vals[k]))))
            ex = extrapolate_to_zero(gaps, vals)
            zero_worst = max(zero_worst, abs(v0 - ex) / max(1.0, abs(ex)))
    ok = finite and zero_worst <= 1e-7 and not step_fail
    widest = sorted({g for _, _, g, _ in step_fail}, reverse=True)
    detail = (f"finite={finite}, exact-vs-extrapolated {zero_worst:.1e} (1e-7), "
              f"{len(step_fail)}/{steps} gap steps above 1e-6(1+|v|)")
    if step_fail:
        detail += (f" at gaps {', '.join(f'{g:.0e}' for g in widest)}; "
                   f"worst {max(s for *_, s in step_fail):.1e}")
    assert report(6, "coalescence sweep", ok, detail)


def test_criterion_07_invariance():
    rep = run_suite("invariance", SEED, 100)
    rot = max(r.rel_err for r in rep.records if r.check.startswith("rotation"))
    flag = max(r.rel_err for r in rep.records if r.check.startswith("flag"))
    detail = f"rotation max {rot:.1e} (1e-8), flag max {flag:.1e} (1e-9), {len(rep.records)} checks"
    assert report(7, "rotation invariance and flag independence", rep.passed, detail)


def test_criterion_08_eigen_derivatives():
    rng = np.random.default_rng([SEED, 8])
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 7))
        X = sym_with_spectrum(separated_spectrum(d, rng), rng)
        xi = unit_direction(d, rng)
        rdot, pidot = calc.eigen_derivative(X, xi)
        fr, fp = fd_eigen(X, xi)
        worst = max(worst, np.max(np.abs(rdot - fr)), np.max(np.abs(pidot - fp)))
    assert report(8, "eigenvalue/eigenprojection derivatives vs FD (1e-6)", worst <= 1e-6,
                  f"50 cases, max abs err {worst:.1e}")


def test_criterion_09_radial():
    rep = run_suite("radial", SEED, 60)
    rng = np.random.default_rng([SEED, 9])
    closed = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 7))
        x, xi = rng.normal(size=d), rng.normal(size=d)
        closed = max(closed, abs(radial_dirderiv("r[1]^2", x, xi, 2) - 2 * xi @ xi))
    ok = rep.passed and closed <= 1e-12
    assert report(9, "radial engine vs FD and r^2 closed form", ok,
                  f"{_suite_detail(rep)}; |D^2 r^2 - 2|xi|^2| max {closed:.1e} (1e-12)")


def test_criterion_10_newton():
    rng = np.random.default_rng([SEED, 10])
    lift, vdm, drdx = 0.0, 0.0, 0.0
    for d in range(2, 7):
        for _ in range(4):
            r = separated_spectrum(d, rng)
            X = sym_with_spectrum(r, rng)
            for k in range(1, d + 1):
                b = calc.eval_F(f"esym({k})", X)
                lift = max(lift, rel_err(lift_polynomial(esym_to_psums(k, d), X), b))
            M, det = vandermonde_jacobian(r)
            prod = np.prod([r[j] - r[i] for i in range(d) for j in range(i + 1, d)])
            num = np.linalg.det(M)
            vdm = max(vdm, abs(det - prod) / abs(prod), abs(num - prod) / abs(prod))
            drdx = max(drdx, dr_dx_rows_check(X, trials=3, seed=int(rng.integers(1 << 30))))
    ok = lift <= 1e-9 and vdm <= 1e-9 and drdx <= 1e-6
    assert report(10, "Newton lift, Vandermonde, eigenvalue rows", ok,
                  f"lift {lift:.1e} (1e-9), det {vdm:.1e} (1e-9), dr/dx {drdx:.1e} (1e-6)")


def test_criterion_11_decay():
    rng = np.random.default_rng([SEED, 11])
    X0 = sym_with_spectrum(separated_spectrum(4, rng), rng)
    xi = unit_direction(4, rng)
    ts = [2.0 ** -k for k in range(11)]
    ratios = [abs(calc.dirderiv("psum(4)", t * X0, xi, 3)) / t for t in ts]
    spread = max(ratios) / min(ratios)
    assert report(11, "decay |D^3 F(tX0)| <= C t", spread <= 3.0,
                  f"C in [{min(ratios):.4g}, {max(ratios):.4g}], max/min {spread:.6f} (<= 3)")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
