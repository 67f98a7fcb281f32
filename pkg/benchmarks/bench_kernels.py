"""Timing comparison of the numba and numpy kernel backends.

The backend is fixed at import time by MINDEG_BACKEND, so each measurement
runs in a child process with the variable set. Three workloads:

* eigen: symmetric eigendecomposition, 24x24, 400 reps
* project: PSD projection, 24x24, 400 reps
* dykstra: 1000 alternating-projection iterations on the Gram slice of the
  degree-3 plane Veronese (10x10 Gram matrices, 55 svec coordinates)

Run: python3 benchmarks/bench_kernels.py
"""

import argparse
import json
import os
import subprocess
import sys
import time


def child(backend: str) -> dict:
    os.environ["MINDEG_BACKEND"] = backend
    import numpy as np

    from mindeg import kernels
    from mindeg.cones import GramSlice
    from mindeg.variety import veronese_model

    rng = np.random.Generator(np.random.Philox(20260816))
    mats = []
    for _ in range(400):
        B = rng.normal(size=(24, 24))
        mats.append(0.5 * (B + B.T))

    # warm up the JIT so compile time is not measured
    kernels.symmetric_eigen(mats[0])
    kernels.project_psd(mats[0])

    t0 = time.perf_counter()
    for M in mats:
        kernels.symmetric_eigen(M)
    t_eigen = time.perf_counter() - t0

    t0 = time.perf_counter()
    for M in mats:
        kernels.project_psd(M)
    t_project = time.perf_counter() - t0

    gs = GramSlice(veronese_model(2, 3))
    A = gs.a_float()
    nvars = gs.model.n + 1
    G = rng.normal(size=(nvars, nvars))
    b = A @ kernels.svec(G @ G.T)
    AAt_inv = np.linalg.inv(A @ A.T)
    Pmat = np.eye(A.shape[1]) - A.T @ (AAt_inv @ A)
    x_part = A.T @ (AAt_inv @ b)
    x = x_part.copy()
    p = np.zeros_like(x)
    kernels.dykstra_chunk(Pmat, x_part, x.copy(), p.copy(), 2, nvars)

    t0 = time.perf_counter()
    kernels.dykstra_chunk(Pmat, x_part, x, p, 1000, nvars)
    t_dykstra = time.perf_counter() - t0

    return {"backend": kernels.BACKEND, "eigen_s": t_eigen,
            "project_s": t_project, "dykstra_s": t_dykstra}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--child", choices=["numba", "numpy"])
    args = parser.parse_args()
    if args.child:
        print(json.dumps(child(args.child)))
        return 0

    results = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, MINDEG_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child", backend],
            capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print("backend %s unavailable:\n%s" % (backend, proc.stderr),
                  file=sys.stderr)
            continue
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    print("%-8s %12s %12s %12s" % ("backend", "eigen", "project", "dykstra"))
    for r in results:
        print("%-8s %11.4fs %11.4fs %11.4fs" % (
            r["backend"], r["eigen_s"], r["project_s"], r["dykstra_s"]))
    if len(results) == 2:
        base, other = results
        for key in ("eigen_s", "project_s", "dykstra_s"):
            ratio = base[key] / other[key] if other[key] > 0 else float("inf")
            print("%s: %s is %.2fx the speed of %s" % (
                key[:-2], other["backend"], ratio, base["backend"]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
