"""Time the compiled bitmask kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--hosts 40] [--repeat 3]

Hosts come from the seeded generator; each kernel is run over the same
inputs on both backends and the results are compared before timing.
"""
import argparse
import random
import sys
import timeit

from metafold import kernels
from metafold.gen import Bounds, random_expr, random_registry
from metafold.topology import topology


def make_hosts(n, max_edges, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        reg = random_registry(rng, 6)
        _, d = random_expr(rng, reg, Bounds(max_edges=max_edges))
        t = topology(d)
        if t.basis:
            out.append(t)
    return out


def workloads(hosts):
    opens = [kernels.python.open_family(t.basis, t.full) for t in hosts]
    rng = random.Random(0)
    masks = [[rng.getrandbits(len(t.ids)) for _ in range(200)] for t in hosts]
    return {
        "interior": lambda m: [m.interior(x, t.basis, t.full) for t, xs in zip(hosts, masks) for x in xs],
        "open_family": lambda m: [m.open_family(t.basis, t.full) for t in hosts],
        "residuation": lambda m: [m.residuation_failures(o, t.basis, t.full) for t, o in zip(hosts, opens)],
        "implies_max": lambda m: [m.implies_max_failures(o, t.basis, t.full) for t, o in zip(hosts, opens)],
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--hosts", type=int, default=40)
    ap.add_argument("--max-edges", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    if kernels.compiled is None:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1
    hosts = make_hosts(args.hosts, args.max_edges, args.seed)
    print(f"{len(hosts)} hosts, up to {args.max_edges} edges, best of {args.repeat}")
    print(f"{'kernel':<14}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, fn in workloads(hosts).items():
        if fn(kernels.python) != fn(kernels.compiled):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        tp = min(timeit.repeat(lambda: fn(kernels.python), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(kernels.compiled), number=1, repeat=args.repeat))
        print(f"{name:<14}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
