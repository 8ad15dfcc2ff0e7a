#!/usr/bin/env python3
"""Benchmark: compiled per-mode kernel vs numpy fallback.

Two workloads:
  * trajectory -- 1000 random modes sampled at 100 times over [0, 200]
    (the envelope-suite shape: per-mode adaptivity matters little, batch
    call overhead matters a lot);
  * field -- every k != 0 mode of an nk x neta lattice integrated to a
    handful of output times (the linear-field shape: per-mode adaptive
    steps beat the shared-step scheme because each mode needs small steps
    only near its own critical time).

Run: python benchmarks/bench_kernels.py [--nk 128] [--neta 256]
"""
import argparse
import math
import time

import numpy as np

from stratlab._kernels import compiled, pyref


def _trajectory_workload(rng, n=1000):
    beta = 2.0
    om = rng.normal(size=n) + 1j * rng.normal(size=n)
    th = rng.normal(size=n) + 1j * rng.normal(size=n)
    nrm = np.sqrt(np.abs(om) ** 2 + np.abs(th) ** 2)
    om, th = om / nrm, th / nrm
    k = rng.integers(1, 9, size=n).astype(float)
    eta = rng.uniform(-50, 50, size=n)
    times = np.linspace(0.0, 200.0, 101)[1:]
    return dict(om0=om, th0=th, k=k, eta=eta, beta=beta, nu=0.0, kappa=0.0,
                t0=0.0, times=times, rtol=1e-10, atol=1e-12)


def _field_workload(rng, nk=128, neta=256):
    deta = 0.5
    kvals = np.rint(np.fft.fftfreq(nk) * nk)
    evals = np.fft.fftfreq(neta) * neta * deta
    rows = np.arange(1, nk // 2 + 1)
    k = np.repeat(kvals[rows], neta)
    eta = np.tile(evals, rows.size)
    n = k.size
    amp = np.exp(-0.5 * (k ** 2 + eta ** 2) / 4.0)
    om = np.zeros(n, complex)
    th = amp * np.exp(2j * np.pi * rng.random(n))
    times = np.linspace(0.0, 100.0, 11)[1:]
    return dict(om0=om, th0=th, k=k, eta=eta, beta=2.0, nu=0.0, kappa=0.0,
                t0=0.0, times=times, rtol=1e-8, atol=1e-14)


def _run(backend, wl):
    t0 = time.perf_counter()
    out, status, _ = backend.integrate_modes(
        wl["om0"], wl["th0"], wl["k"], wl["eta"], wl["beta"], wl["nu"],
        wl["kappa"], wl["t0"], wl["times"], wl["rtol"], wl["atol"])
    dt = time.perf_counter() - t0
    assert status == 0
    return dt, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nk", type=int, default=128)
    ap.add_argument("--neta", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    workloads = {
        "trajectory(1000 modes x 100 t)": _trajectory_workload(rng),
        f"field({args.nk}x{args.neta} lattice x 10 t)":
            _field_workload(rng, args.nk, args.neta),
    }
    backends = {"python": pyref}
    if compiled is not None:
        backends["compiled"] = compiled
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    print(f"{'workload':36s} {'backend':9s} {'best [s]':>10s} {'x vs py':>8s}")
    for wname, wl in workloads.items():
        base = None
        results = {}
        for bname, backend in backends.items():
            best = math.inf
            out_ref = None
            for _ in range(args.repeat):
                dt, out = _run(backend, wl)
                best = min(best, dt)
                out_ref = out
            results[bname] = (best, out_ref)
        py_best = results["python"][0]
        for bname, (best, out) in results.items():
            speed = py_best / best
            print(f"{wname:36s} {bname:9s} {best:10.3f} {speed:8.1f}")
        if len(results) == 2:
            a = results["python"][1]
            b = results["compiled"][1]
            diff = np.abs(a - b).max()
            scale = max(np.abs(a).max(), 1e-30)
            print(f"{'':36s} backends agree to {diff / scale:.2e} (rel)")


if __name__ == "__main__":
    main()
