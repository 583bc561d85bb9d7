#!/usr/bin/env python3
"""Smoke test for the solenoid_py extension module.

Builds the cdylib with cargo if needed, loads it, and exercises the main
operations end to end. Exits nonzero on any failure.

Usage: python3 python/smoke_test.py [--release]
"""

import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "solenoid-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    built = ROOT / "target" / profile / "libsolenoid_py.so"
    if not built.exists():  # macOS fallback
        built = ROOT / "target" / profile / "libsolenoid_py.dylib"
    stage = pathlib.Path(tempfile.mkdtemp(prefix="solenoid_py_"))
    shutil.copy(built, stage / "solenoid_py.so")
    sys.path.insert(0, str(stage))
    import solenoid_py

    return solenoid_py


def close(a, b, tol):
    return abs(a - b) < tol


def main():
    sp = load_module("--release" in sys.argv[1:])

    # circle functions
    cos1 = sp.CircleFunction.trig_poly([(1, 1.0, 0.0)])
    assert close(cos1.evaluate(0.0), 1.0, 1e-12)
    assert close(cos1.evaluate(0.25), 0.0, 1e-12)
    lo, hi, sup = cos1.extrema()
    assert close(lo, -1.0, 1e-9) and close(hi, 1.0, 1e-9) and close(sup, 1.0, 1e-9)
    coeffs = dict((k, (re, im)) for k, re, im in cos1.fourier(4))
    assert close(coeffs[1][0], 0.5, 1e-12) and close(coeffs[-1][0], 0.5, 1e-12)

    # cohomological operator round trip: tau = L_{1/2} cos resolves back
    tau = sp.apply_l(2, 0.5, cos1)
    mu, residual = sp.solve_l(2, 0.5, tau)
    assert residual < 1e-10
    assert close(mu.evaluate(0.0), 1.0, 1e-9)

    # Jordan parameter scan sees exactly the planted factor
    scan = sp.scan_jordan(2, tau)
    assert len(scan) == 1 and close(scan[0][0], 0.5, 1e-4) and scan[0][1] == 1

    # boundaries collapse onto the known graph in the Jordan case
    b = sp.boundaries(2, 0.5, tau, grid=2048, tol=1e-7)
    worst = max(
        abs(rp - math.cos(2 * math.pi * th))
        for th, rp in zip(b["theta"], b["rho_plus"])
    )
    assert worst < 1e-5, worst
    verdict = sp.classify(2, 0.5, tau, grid=2048, tol=1e-6)
    assert verdict["verdict"] == "JordanCurve", verdict

    # annulus regime
    verdict = sp.classify(2, 0.9, cos1, grid=2048, tol=1e-6)
    assert verdict["verdict"] == "ClosedAnnulus", verdict
    assert verdict["annulus_margin"] > 0

    # geometric-series anchor at the fixed point
    b = sp.boundaries(2, 0.9, cos1, grid=2048, tol=1e-6)
    assert close(b["rho_plus"][0], 10.0, 1e-4)

    # decomposition inverts a two-factor chain
    chain = sp.apply_l(2, 0.7, sp.apply_l(2, 0.5, cos1))
    d = sp.decompose(2, chain)
    factors = sorted(d["factors"], reverse=True)
    assert len(factors) == 2, factors
    assert close(factors[0], 0.7, 1e-3) and close(factors[1], 0.5, 1e-3)
    assert d["residual_irreducible"]

    # periodic orbits and witnesses
    orbits = sp.periodic_orbits(2, 2, cos1)
    sums = {o["period"]: o["birkhoff_sum"] for o in orbits}
    assert close(sums[1], 1.0, 1e-12) and close(sums[2], -1.0, 1e-12)
    w = sp.coboundary_witness(2, cos1, 4)
    assert w["verdict"] == "NotCoboundary"
    assert close(w["positive"][1], 1.0, 1e-10)
    assert close(w["negative"][1], -1.0, 1e-10)

    # sampled attractor stays in the boundary band
    pts = sp.sample_attractor(2, 0.9, cos1, n_points=2000, depth=128, seed=1)
    n = len(b["theta"])
    for th, t in pts:
        i = int(th * n) % n
        assert b["rho_minus"][i] - 2e-2 <= t <= b["rho_plus"][i] + 2e-2

    # contact set: the Jordan case touches everywhere, the annulus case not
    d_plus, k_plus = sp.contact_set(2, 0.5, tau, grid=512)
    assert len(d_plus) == 512, len(d_plus)
    d_plus, k_plus = sp.contact_set(2, 0.9, cos1, grid=512)
    assert 0 in d_plus and 0 in k_plus
    assert len(d_plus) < 512

    # fat-hole parameters satisfy every construction constraint
    params = sp.fat_hole_params(0.6)
    assert params["p"] == 4 and params["n_cap"] == 2
    assert params["violated_constraints"] == []
    fh = sp.CircleFunction.fat_hole(0.6)
    _, hi, _ = fh.extrema()
    assert close(hi, 3.0, 1e-2)

    print("solenoid_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
