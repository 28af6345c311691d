"""Time the Gibbs factor kernel and a full bnmf chain on each backend.

    python benchmarks/bench_gibbs.py [--sizes 200x30,1000x200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from sca_kit import GibbsConfig, LatentSpec, bnmf_decompose, gen_latent_data
from sca_kit.decomposition import available_backends
from sca_kit.decomposition._backend import get_kernel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_case(S, V, C, backend, repeat):
    rng = np.random.default_rng(0)
    D = rng.random((S, V))
    R = rng.random((S, C))
    W = rng.random((C, V))
    B, G = D @ W.T, W @ W.T
    rate = np.ones((S, C))
    U = 1 - rng.random((S, C))
    kernel = get_kernel(backend)
    return best_of(lambda: kernel(R.copy(), B, G, 0.01, rate, U), repeat)


def chain_case(S, V, C, backend, repeat, sweeps):
    k = min(C, S, V)
    x = gen_latent_data(LatentSpec(m=S, n=V, k=k, seed=0)).x
    cfg = GibbsConfig(sweeps, sweeps // 2)
    return best_of(lambda: bnmf_decompose(x, C, cfg, seed=0, backend=backend), repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="200x30,1000x200,2000x500")
    ap.add_argument("--components", type=int, default=20)
    ap.add_argument("--sweeps", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'size':>10} {'C':>3} {'case':>7} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for size in args.sizes.split(","):
        S, V = (int(v) for v in size.split("x"))
        C = min(args.components, S, V)
        for case in ("kernel", "chain"):
            if case == "kernel":
                t = {b: kernel_case(S, V, C, b, args.repeat) for b in backends}
            else:
                t = {b: chain_case(S, V, C, b, args.repeat, args.sweeps) for b in backends}
            speed = f"{t['python'] / t['cython']:8.2f}x" if "cython" in t else "       -"
            print(f"{size:>10} {C:>3} {case:>7} " + " ".join(f"{t[b]:10.4f}" for b in backends) + "  " + speed)


if __name__ == "__main__":
    main()
