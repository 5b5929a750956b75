"""Chosen (n, m), operation counts and wall time against log(1/epsilon).

    python3 scripts/complexity_scan.py --exponents 6 12 24
"""
import argparse
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from lyapcert import numeric
from lyapcert.certify import certify_lift, lift_system
from lyapcert.kernel import OpCounter
from lyapcert.systemfile import SystemFile

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "example1.json"


@dataclass
class Config:
    exponents: list[int] = field(default_factory=lambda: [6, 12, 24, 48])
    precision: int = 256


def run(cfg: Config) -> None:
    A, P, M = SystemFile.load(FIXTURE).instantiate()
    rows = []
    with numeric.working_precision(cfg.precision):
        system = lift_system(A, P, M)
        for k in cfg.exponents:
            counter = OpCounter()
            start = time.perf_counter()
            cert = certify_lift(system, Fraction(1, 10 ** k), counter=counter)
            L = k * math.log(10)
            rows.append((k, cert.n, cert.m, counter.count, counter.count / L ** 3, time.perf_counter() - start))
    print(f"{'eps':>7s} {'n':>5s} {'m':>5s} {'ops':>12s} {'ops/L^3':>9s} {'sec':>7s}")
    for k, n, m, ops, r, sec in rows:
        print(f"{'1e-' + str(k):>7s} {n:5d} {m:5d} {ops:12d} {r:9.0f} {sec:7.1f}")
    if len(rows) > 1:
        L = np.array([k * math.log(10) for k, *_ in rows])
        slope, icpt = np.polyfit(L, [n for _, n, *_ in rows], 1)
        print(f"n ≈ {slope:.3f}·log(1/eps) + {icpt:.2f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exponents", type=int, nargs="+", default=Config().exponents)
    ap.add_argument("--precision", type=int, default=Config.precision)
    a = ap.parse_args()
    run(Config(a.exponents, a.precision))
