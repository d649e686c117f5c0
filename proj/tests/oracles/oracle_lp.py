#!/usr/bin/env python3
"""Reference LP optima for the margin program, via scipy's HiGHS.

Replicates the library's counter RNG (SplitMix64 finalizer, positional
counter, Box-Muller with cached spare) so the constraint matrix and objective
direction match the C++ side bit for bit, then freezes objective values,
tight-set sizes and checksums for the solver tests.

Run:  python3 oracle_lp.py > lp_values.json
"""

import json
import math

import numpy as np
from scipy.optimize import linprog

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z &= MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


class Rng:
    def __init__(self, seed, stream):
        self.key = mix64((seed ^ mix64(stream)) & MASK)
        self.ctr = 0
        self.spare = None

    def u64(self):
        self.ctr += 1
        return mix64((self.key + self.ctr * GOLDEN) & MASK)

    def uniform(self):
        return ((self.u64() >> 11) + 0.5) * 2.0 ** -53

    def normal(self):
        if self.spare is not None:
            v, self.spare = self.spare, None
            return v
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        a = 2.0 * math.pi * u2
        self.spare = r * math.sin(a)
        return r * math.cos(a)

    def normals(self, count):
        return np.array([self.normal() for _ in range(count)])


STREAM_INSTANCE = 1
STREAM_DIRECTION = 2


def lp_case(n, m, kappa0, seed, dseed):
    x = Rng(seed, STREAM_INSTANCE).normals(m * n).reshape(m, n)
    v = Rng(dseed, STREAM_DIRECTION).normals(n)
    b = kappa0 * math.sqrt(n)
    res = linprog(
        -v,
        A_ub=-x,
        b_ub=np.full(m, -b),
        bounds=[(-1.0, 1.0)] * n,
        method="highs",
    )
    out = {
        "n": n,
        "m": m,
        "kappa0": kappa0,
        "seed": seed,
        "direction_seed": dseed,
        "status": int(res.status),
        "sum_x_row0": float(x[0].sum()),
        "sum_v": float(v.sum()),
    }
    if res.status == 0:
        theta = res.x
        margins = (x @ theta) / math.sqrt(n)
        out["objective"] = float(v @ theta)
        out["n_tight"] = int(np.sum(np.abs(theta) >= 1.0 - 1e-8))
        out["min_margin"] = float(margins.min())
    return out


def main():
    cases = {
        "small_a": lp_case(40, 8, 0.8, 101, 5),
        "small_b": lp_case(60, 24, 0.3, 202, 7),
        "neg_margin": lp_case(30, 12, -0.5, 303, 9),
        "infeasible": lp_case(20, 60, 1.2, 404, 11),
        "stage1_shape": lp_case(2000, 100, 3.42, 42, 1),
    }
    print(json.dumps(cases, indent=2))


if __name__ == "__main__":
    main()
