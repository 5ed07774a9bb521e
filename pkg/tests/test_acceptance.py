"""Acceptance gate: one test per criterion, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary, and by
each test itself when run with ``-s``.
"""
import math
import os
import sys
import time

import numpy as np
import pytest

from rkhs_geometry import DHB, DruryArveson, FiniteLengthExample, Fock, Product, rescale
from rkhs_geometry.cli import main
from rkhs_geometry.kernels import exp_poly_scaling
from rkhs_geometry.metrics import (
    Curve,
    bs_length,
    curve_length,
    delta,
    inner_distance,
    length_constant,
    rho_disk,
    segment,
)
from rkhs_geometry.npkernels import ZeroSet, blaschke_product, maximal_multiplier, np_test
from rkhs_geometry.operators import SpanOperator, schatten_norm, span_basis, variation_along_curve
from rkhs_geometry.subspaces import (
    VanishOn,
    delta_sub,
    hardy_inner_delta,
    monotonicity_report,
    t_series_check,
)
from rkhs_geometry.suites import ball_points, disk_points, plane_points, run_suite


def line(n, ok, msg):
    print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {msg}")


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


@pytest.mark.criterion(1, "delta of the Hardy kernel is the pseudohyperbolic distance")
def test_c01_magic():
    rng = np.random.default_rng(101)
    z, w = disk_points(rng, 1000), disk_points(rng, 1000)
    err, dt = timed(lambda: float(np.max(np.abs(np.asarray(delta(DHB(1.0), z, w)) - np.asarray(rho_disk(z, w))))))
    line(1, err < 1e-12 and dt < 1, f"max err {err:.2e}, {dt:.3f} s")
    assert err < 1e-12
    assert dt < 1.0


@pytest.mark.criterion(2, "projection difference norms")
def test_c02_norm():
    r, dt = timed(lambda: run_suite("norm", seed=2, samples=300, tol=1e-10))
    line(2, r.passed and dt < 5, f"{r.checks} checks, max err {r.max_error:.2e}, {dt:.2f} s")
    assert r.checks == 1200 and r.passed, r.failures[:3]
    assert dt < 5.0


@pytest.mark.criterion(3, "commutator identity")
def test_c03_commutator():
    r, dt = timed(lambda: run_suite("commutator", seed=3, samples=300, tol=1e-10))
    line(3, r.passed and dt < 5, f"max err {r.max_error:.2e}, {dt:.2f} s")
    assert r.passed, r.failures[:3]
    assert dt < 5.0


@pytest.mark.criterion(4, "product law and bounds")
def test_c04_product():
    r, dt = timed(lambda: run_suite("product", seed=4, samples=500, tol=1e-12))
    line(4, r.passed and dt < 2, f"max err {r.max_error:.2e}, {dt:.2f} s")
    assert r.passed, r.failures[:3]
    assert dt < 2.0
    rng = np.random.default_rng(44)
    z, w = disk_points(rng, 500), disk_points(rng, 500)
    e = np.max(np.abs(np.asarray(delta(Product(DHB(1.0), DHB(1.0)), z, w)) - np.asarray(delta(DHB(2.0), z, w))))
    assert e <= 1e-13


@pytest.mark.criterion(5, "rescaling invariance")
def test_c05_rescaling():
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(5):
        coeffs = (rng.normal(size=3) + 1j * rng.normal(size=3)) * 0.5
        G = exp_poly_scaling(coeffs, f"random-{k}")
        for spec, pts in ((DHB(1.0), disk_points), (DHB(2.0), disk_points), (Fock(1.0), plane_points)):
            z, w = pts(rng, 100), pts(rng, 100)
            d0 = np.asarray(delta(spec, z, w))
            d1 = np.asarray(delta(rescale(spec, G), z, w))
            worst = max(worst, float(np.max(np.abs(d0 - d1))))
    line(5, worst <= 1e-12, f"max err {worst:.2e}")
    assert worst <= 1e-12


@pytest.mark.criterion(6, "delta nondecreasing in the kernel exponent")
def test_c06_power_monotone():
    rng = np.random.default_rng(6)
    z, w = disk_points(rng, 200), disk_points(rng, 200)
    dh = np.array([np.asarray(delta(DHB(a), z, w)) for a in (0.5, 1.0, 1.5, 2.0, 3.0)])
    z, w = plane_points(rng, 200), plane_points(rng, 200)
    fo = np.array([np.asarray(delta(Fock(b), z, w)) for b in (0.5, 1.0, 2.0)])
    worst = max(float(np.max(dh[:-1] - dh[1:])), float(np.max(fo[:-1] - fo[1:])))
    line(6, worst <= 1e-12, f"largest decrease {worst:.2e}")
    assert worst <= 1e-12


@pytest.mark.criterion(7, "third-order agreement of delta, delta_hat, delta_check")
def test_c07_same():
    r = run_suite("same", seed=7)
    line(7, r.passed, f"slopes {r.extra['slopes']}")
    assert r.passed, r.failures


def _test_curves(rng):
    a, b = disk_points(rng, 10, 0.8), disk_points(rng, 10, 0.8)
    curves = [segment(a[i], b[i]) for i in range(10)]
    for _ in range(10):
        c0 = 0.3 * np.exp(2j * np.pi * rng.uniform())
        r = 0.2 + 0.3 * rng.uniform()
        curves.append(Curve(lambda t, c0=c0, r=r: c0 + r * np.exp(1j * np.pi * t),
                            derivative=lambda t, r=r: 1j * np.pi * r * np.exp(1j * np.pi * t)))
    return curves


@pytest.mark.criterion(8, "inner distance and the length constant")
def test_c08_inner_distance():
    spec = DHB(1.0)
    r = inner_distance("delta", 0.0, 0.5, spec=spec)
    target = math.atanh(0.5)
    gap = r.value - delta(spec, 0.0, 0.5)
    c, resid, _ = length_constant(spec, _test_curves(np.random.default_rng(8)))
    ok = abs(r.value - target) <= 2e-3 and gap > 0.04 and resid < 1e-3
    line(8, ok, f"inner {r.value:.6f} vs {target:.6f}, gap {gap:.4f}, length constant {c:.6f} (resid {resid:.1e})")
    assert abs(r.value - target) <= 2e-3
    assert gap > 0.04
    assert resid < 1e-3


@pytest.mark.criterion(9, "finite Riemannian length to the boundary")
def test_c09_finite_length():
    # Implemented as stated; the computed length is about 1.181, outside the 5% band around 1.
    spec = FiniteLengthExample()
    res, dt = timed(lambda: bs_length(spec, segment(0.0, 1.0 - 1e-6)))
    ok = math.isfinite(res.value) and abs(res.value - 1.0) <= 0.05 and dt < 10
    line(9, ok, f"length {res.value:.6f} (target 1 within 5%), {dt:.2f} s")
    assert math.isfinite(res.value)
    assert dt < 10.0
    assert abs(res.value - 1.0) <= 0.05, f"bs_length = {res.value:.6f}, not within 5% of 1"


@pytest.mark.criterion(10, "Berezin transform Lipschitz bound, sharpness and variation")
def test_c10_berezin():
    r = run_suite("berezin", seed=10, samples=100, tol=1e-10)
    assert r.passed, r.failures[:3]
    rng = np.random.default_rng(1010)
    worst = -math.inf
    for g in _test_curves(rng):
        B = span_basis(DHB(1.0), disk_points(rng, 3))
        H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        A = SpanOperator(B, (H + H.conj().T) / 2)
        v = variation_along_curve(A, Curve(g.func, samples=16, max_level=12, derivative=g.derivative))
        worst = max(worst, v.value - v.bound)
    line(10, r.passed and worst <= 1e-8, f"{r.checks} checks, max excess {r.max_error:.1e}, variation margin {worst:.3e}")
    assert worst <= 1e-8


@pytest.mark.criterion(11, "complete Pick positivity, witness and maximal multiplier")
def test_c11_np():
    rng = np.random.default_rng(11)
    for a in (0.0, 0.5, 1.0):
        for _ in range(10):
            assert np_test(DHB(a), disk_points(rng, 6)).is_psd
    for n in (1, 2, 3, 4):
        for _ in range(10):
            pts = ball_points(rng, 6, n)
            assert np_test(DruryArveson(n), list(pts if n > 1 else pts[:, 0])).is_psd
    v = np_test(DHB(2.0), [0.5, -0.5])
    assert not v.is_psd and abs(v.min_eig + 0.125) <= 1e-12
    worst = 0.0
    for spec in (DHB(0.0), DHB(0.5), DHB(1.0)):
        for _ in range(30):
            x, y = disk_points(rng, 2)
            m = maximal_multiplier(spec, x, y)
            worst = max(worst, abs(m.value - delta(spec, x, y)))
    line(11, worst <= 1e-12, f"witness min eig {v.min_eig:.15f}, multiplier err {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(12, "Blaschke products of a geometric sequence")
def test_c12_zero_sets():
    S = ZeroSet("geometric", {"base": 2.0})
    hardy = blaschke_product(DHB(1.0), S, 0.0)
    dirichlet = blaschke_product(DHB(0.0), S, 0.0)
    pp = hardy.report.partial_products
    bounded = hardy.report.infimum > 0.05 and pp[-1] / pp[len(pp) // 2] > 0.999
    assert hardy.report.classification == "converges" and bounded
    assert dirichlet.report.classification == "diverges-to-zero"
    worst = max(abs(hardy(z)) for z in hardy.report.points[:20])
    worst = max(worst, max(abs(dirichlet(z)) for z in dirichlet.report.points[:20]))
    line(12, worst <= 1e-12, f"Hardy inf {hardy.report.infimum:.4f}, Dirichlet inf {dirichlet.report.infimum:.2e}, max |B(x_j)| {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(13, "subspace distances")
def test_c13_subspaces():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(200):
        zeros = tuple(disk_points(rng, int(rng.integers(1, 4)), 0.8))
        x, y = disk_points(rng, 2)
        dJ, dP = hardy_inner_delta(zeros, x, y, check=False)
        van = VanishOn(DHB(1.0), zeros)
        worst = max(worst, abs(dJ - rho_disk(x, y)), abs(dJ - delta_sub(van, "J", x, y)),
                    abs(dP - delta_sub(van, "Jperp", x, y)))
    assert worst <= 1e-10
    np_suite = run_suite("np-mono", seed=13)
    assert np_suite.passed, np_suite.failures[:3]
    spec = DHB(2.0)
    sub = VanishOn(spec, (0j,))
    pairs = list(zip(disk_points(rng, 200), disk_points(rng, 200)))
    rep = monotonicity_report(spec, sub, pairs)
    assert rep.claim == "bergman" and rep.passed
    small, large = t_series_check(0.1), t_series_check(0.9)
    assert small.lhs < small.rhs and large.lhs > large.rhs
    assert small.lhs_t6_error <= 0.02 and small.rhs_t6_error <= 0.02
    line(13, True, f"closed forms err {worst:.1e}, t^6 coefficients {small.lhs_t6:.4f} / {small.rhs_t6:.4f}")


@pytest.mark.criterion(14, "shape invariant")
def test_c14_shape():
    r = run_suite("shape", seed=14, samples=600, tol=1e-10)
    line(14, r.passed, f"{r.checks} checks, max err {r.max_error:.1e}")
    assert r.passed, r.failures[:3]


@pytest.mark.criterion(15, "CLI determinism and runtime")
def test_c15_cli_determinism(tmp_path, monkeypatch):
    outs = []
    t = time.perf_counter()
    codes = []
    for k, threads in enumerate(("1", "1", "4")):
        monkeypatch.setenv("RKHS_GEOMETRY_THREADS", threads)
        p = tmp_path / f"run{k}.json"
        codes.append(main(["identity-check", "--suite", "all", "--seed", "15", "--output", str(p)]))
        outs.append(p.read_bytes())
    dt = (time.perf_counter() - t) / 3
    ok = outs[0] == outs[1] == outs[2] and dt < 120 and codes == [0, 0, 0]
    line(15, ok, f"identical={outs[0] == outs[1] == outs[2]}, exit codes {codes}, {dt:.1f} s per run")
    assert outs[0] == outs[1] == outs[2]
    assert codes == [0, 0, 0]
    assert dt < 120


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
