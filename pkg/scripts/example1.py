"""Certify the free-group walk exponent and compare it with Monte Carlo.

    python3 scripts/example1.py --epsilon 1e-30 --precision 256
"""
import argparse
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from lyapcert import numeric
from lyapcert.certify import LambdaOptions, compute_lambda, monte_carlo_lambda
from lyapcert.systemfile import SystemFile

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "example1.json"


@dataclass
class Config:
    epsilon: Fraction = Fraction(1, 10 ** 30)
    precision: int = 256
    mc_steps: int = 100_000
    mc_trials: int = 32
    seed: int = 2024
    system: Path = FIXTURE


def run(cfg: Config) -> None:
    sf = SystemFile.load(cfg.system)
    A, P, M = sf.instantiate()
    start = time.perf_counter()
    cert = compute_lambda(A, P, M, LambdaOptions(epsilon=cfg.epsilon, precision=cfg.precision))
    took = time.perf_counter() - start
    with numeric.working_precision(cfg.precision):
        print(f"lambda      = {numeric.decimal_string(cert.value, 40)}")
        print(f"lambda / 2  = {numeric.decimal_string(cert.scaled(Fraction(1, 2)).value, 40)}")
        print(f"bound       = {numeric.decimal_string(cert.total_bound, 4)}  (n = {cert.n}, m = {cert.m}, {took:.1f} s)")
    if cfg.mc_steps:
        mc = monte_carlo_lambda(A, P, cfg.mc_steps, cfg.mc_trials, cfg.seed)
        print(f"monte carlo = {mc.estimate:.6f} +/- {mc.stderr:.1e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=Fraction, default=Config.epsilon)
    ap.add_argument("--precision", type=int, default=Config.precision)
    ap.add_argument("--mc-steps", type=int, default=Config.mc_steps, help="0 skips the simulation")
    ap.add_argument("--system", type=Path, default=FIXTURE)
    a = ap.parse_args()
    run(Config(epsilon=a.epsilon, precision=a.precision, mc_steps=a.mc_steps, system=a.system))
