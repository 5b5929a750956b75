"""Taylor coefficients of the period-2 family exponent at t0 = 3.

    python3 scripts/example2_taylor.py --order 10 --epsilon 1e-20
"""
import argparse
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from lyapcert import numeric
from lyapcert.derivatives import OmegaData, check_omega, prepare, taylor
from lyapcert.systemfile import SystemFile

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "example2.json"


@dataclass
class Config:
    order: int = 10
    epsilon: Fraction = Fraction(1, 10 ** 20)
    precision: int = 128
    estimate: bool = False  # sample the Omega constants instead of using the file's


def run(cfg: Config) -> None:
    sf = SystemFile.load(FIXTURE)
    with numeric.working_precision(cfg.precision):
        fam = prepare(sf)
        if cfg.estimate:
            rep = check_omega(fam, sf.options["disk_radius"], sf.options["rho_bar"])
            print("omega conditions:", rep.conditions)
            omega = rep.omega_data()
        else:
            omega = OmegaData.from_options(sf.options, sf.base_point())
        start = time.perf_counter()
        res = taylor(fam, cfg.order, cfg.epsilon, omega)
        took = time.perf_counter() - start
        for q, (a, b) in enumerate(zip(res.coefficients, res.bounds)):
            print(f"a_{q:<2d} = {numeric.decimal_string(a, 30):>36s}   bound {numeric.decimal_string(b, 3)}")
    print(f"(N, M) = ({res.n}, {res.m}), {res.rigor}, {took:.2f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=Config.order)
    ap.add_argument("--epsilon", type=Fraction, default=Config.epsilon)
    ap.add_argument("--precision", type=int, default=Config.precision)
    ap.add_argument("--estimate", action="store_true")
    a = ap.parse_args()
    run(Config(a.order, a.epsilon, a.precision, a.estimate))
