"""Timing of the numba and numpy implementations of the hot loops.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed on the
same inputs in both flavours after one warm-up call (which also triggers JIT
compilation); the outputs are checked for agreement before timing. A final
row times a full detector run with each backend selected through
``okgd._accel.USE_NUMBA``.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from okgd import _accel, _hot, detector, kernels, synth
from okgd.graph import sample_sbm


def _time(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(rng):
    x = rng.standard_normal((200, 3))
    atoms = rng.standard_normal((12, 3))
    yield "cross_kernel 200x12", (lambda: kernels._features_numpy(x, atoms, 1.3, False),
                                  lambda: kernels._features_loops(x, atoms, 1.3, False))

    n, width, n_win = 20, 10, 50
    f_pre = rng.random((n, n_win, width))
    f_post = rng.random((n, n_win, width))
    g, _ = sample_sbm(2, 10, 0.5, 0.05, seed=1)
    src, dst = g.edge_sources(), g.indices
    yield "window stats N=20 L=10", (lambda: _hot.stats_numpy(f_pre, f_post, src, dst),
                                      lambda: _hot.stats_loops(f_pre, f_post, src, dst))

    h_pre, h_post, H, cross = _hot.stats_numpy(f_pre, f_post, src, dst)
    sizes = np.full(n, width, dtype=np.int64)
    alpha = np.full(n, 0.01)
    order = np.arange(n, dtype=np.int64)
    theta = rng.standard_normal((n, width))
    args = (H, h_pre, h_post, cross, sizes, g.indptr, g.indices, g.edge_weights, g.degrees, 2.0, 10.0, alpha, order)
    yield "bsgd sweep N=20 L=10", (lambda: _hot.sweep_numpy(theta.copy(), *args),
                                    lambda: _hot.sweep_loops(theta.copy(), *args))


def full_run(use_numba: bool, seed: int = 0) -> float:
    sc = synth.make_random_location_scenario(5, seed, n_clusters=2, cluster_size=10, horizon=700)
    streams = synth.emit_frames(sc, seed)
    cfg = detector.DetectorConfig(n_pre=50, n_post=50, kappa=1e9)
    previous = _accel.USE_NUMBA
    _accel.USE_NUMBA = use_numba
    try:
        return _time(lambda: detector.run(streams, sc.graph, cfg), repeat=3)
    finally:
        _accel.USE_NUMBA = previous


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; both columns time the numpy code")
    rng = np.random.default_rng(0)
    print(f"{'case':28s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, (numpy_fn, numba_fn) in kernel_cases(rng):
        a, b = numpy_fn(), numba_fn()
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-12)
        t_np, t_nb = _time(numpy_fn, args.repeat), _time(numba_fn, args.repeat)
        print(f"{name:28s} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:8.1f}")
    t_np, t_nb = full_run(False), full_run(True)
    print(f"{'detector run 20 nodes':28s} {1e3 * t_np:12.1f} {1e3 * t_nb:12.1f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
