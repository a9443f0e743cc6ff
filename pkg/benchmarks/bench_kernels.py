"""Numba vs pure-numpy timings for every hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel is called once untimed (JIT compilation), the two results are
compared, then the best of ``--repeat`` runs is reported.
"""
import argparse
import timeit

import numpy as np

from spectral_perturb import _kernels as K


def cases(quick):
    rng = np.random.default_rng(0)
    n = 400 if quick else 2000
    a = np.cumsum(1.0 + rng.random(n))
    z = a + 0.3 + 0.2j * rng.standard_normal(n)
    w = np.ones(n)
    x = rng.standard_normal(n)
    t = np.cumsum(np.arange(1, 4 * n + 1, dtype=float) ** -0.6)
    stops = np.array([n, 2 * n, 4 * n])
    m = 48 if quick else 96
    S = np.triu(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    S[np.diag_indices(m)] = np.arange(m)
    theta = 2 * np.pi * np.arange(256) / 256
    nodes = m / 2 + (m / 2 + 3) * np.exp(1j * theta)
    weights = 1j * (m / 2 + 3) * np.exp(1j * theta) * (2 * np.pi / 256)
    return [
        ("cauchy_matrix", (a, z, w)),
        ("cauchy_matvec", (a, z, w, x)),
        ("lorentz_sum", (0.2, 1.0, 2_000_000 if quick else 20_000_000)),
        ("inverse_square_partial_sums", (t, 1.0, stops)),
        ("triangular_resolvent_sum", (S, nodes, weights)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small sizes, for smoke runs")
    args = ap.parse_args(argv)
    print(f"selected backend: {K.backend()}")
    print(f"{'kernel':30s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, call_args in cases(args.quick):
        f_np = getattr(K, "numpy_" + name)
        f_nb = getattr(K, "numba_" + name)
        r_nb = f_nb(*call_args)  # compile
        r_np = f_np(*call_args)
        diff = float(np.max(np.abs(np.asarray(r_np) - np.asarray(r_nb))))
        t_np = min(timeit.repeat(lambda: f_np(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*call_args), number=1, repeat=args.repeat))
        print(f"{name:30s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
