"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the pairwise event scan on nearly-linear tables and the simplex on
dominance programs, once per backend, and checks both give identical results.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit
from fractions import Fraction
from math import lcm

from nlum import _pykernels as py
from nlum import kernels
from nlum.lp import Constraint, LinearProgram, Relation, solve


def nl_table(n: int, rng: random.Random, den: int = 60) -> tuple[list[int], int]:
    """An HBM-like table scaled to integers, as the scan receives it."""
    weights = [rng.randint(0, den) for _ in range(n)]
    total = sum(weights) or 1
    a, b = Fraction(-1, 4), Fraction(3, 2)
    vals = []
    for m in range(1 << n):
        if m == 0:
            vals.append(Fraction(0))
        elif m == (1 << n) - 1:
            vals.append(Fraction(1))
        else:
            p = Fraction(sum(w for i, w in enumerate(weights) if m >> i & 1), total)
            vals.append(min(max(b * p + a, Fraction(0)), Fraction(1)))
    scale = lcm(*(v.denominator for v in vals))
    return [int(v * scale) for v in vals], scale


def dominance_program(n: int, rng: random.Random) -> LinearProgram:
    cons = [Constraint((Fraction(1),) * n, Relation.EQ, Fraction(1))]
    for m in range(1, 1 << n):
        if rng.random() < 0.5:
            size = bin(m).count("1")
            cons.append(Constraint(tuple(Fraction(m >> i & 1) for i in range(n)), Relation.GE,
                                   Fraction(size * rng.randint(0, 10), 10 * n + 5)))
    objective = tuple(Fraction(rng.randint(0, 1)) for _ in range(n))
    return LinearProgram(objective, tuple(cons))


def bench(label: str, fn_py, fn_cy, repeat: int) -> None:
    r_py, r_cy = fn_py(), fn_cy()
    if r_py != r_cy:
        sys.exit(f"{label}: backends disagree")
    t_py = min(timeit.repeat(fn_py, number=1, repeat=repeat))
    t_cy = min(timeit.repeat(fn_cy, number=1, repeat=repeat))
    print(f"{label:<34} python {t_py * 1e3:9.2f} ms   cython {t_cy * 1e3:9.2f} ms   x{t_py / t_cy:5.1f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if kernels.compiled_kernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    ck = kernels.compiled_kernels
    rng = random.Random(0)
    for n in (6, 8, 10):
        values, scale = nl_table(n, rng)
        for kind, name in ((py.TWO_MONOTONE, "2-monotone"), (py.SUBADDITIVE, "subadditive")):
            bench(f"scan {name}, n={n}",
                  lambda: py.scan_pairs(values, n, kind, scale),
                  lambda: ck.scan_pairs(values, n, kind, scale), args.repeat)
    for n in (4, 6, 8):
        programs = [dominance_program(n, rng) for _ in range(10)]
        bench(f"simplex x10, n={n}",
              lambda: [solve(p, backend="python") for p in programs],
              lambda: [solve(p, backend="cython") for p in programs], args.repeat)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
