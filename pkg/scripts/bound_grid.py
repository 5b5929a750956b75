"""Actual error against the analytic bound over an (n, m) grid.

Writes a CSV with one row per grid point; the reference value is the
partial sum at (400, 200).

    python3 scripts/bound_grid.py --out grid.csv
"""
import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

from lyapcert import numeric
from lyapcert.certify import error_bound, lift_system
from lyapcert.kernel import build_operator, partial_sum_coefficients
from lyapcert.systemfile import SystemFile

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "example1.json"


@dataclass
class Config:
    n_max: int = 128
    m_max: int = 64
    step: int = 2
    precision: int = 128
    out: Path = Path("bound_grid.csv")


def run(cfg: Config) -> int:
    A, P, M = SystemFile.load(FIXTURE).instantiate()
    ns = list(range(cfg.step, cfg.n_max + 1, cfg.step))
    bad = 0
    with numeric.working_precision(cfg.precision), open(cfg.out, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["n", "m", "error", "bound", "ratio"])
        system = lift_system(A, P, M)
        ref = partial_sum_coefficients(system, 400, 200)[0]
        for m in range(cfg.step, cfg.m_max + 1, cfg.step):
            _, marks = partial_sum_coefficients(system, ns[-1], m, 0, build_operator(system, m, 0), sums_at=ns)
            for n in ns:
                err = numeric.to_float(abs(marks[n][0] - ref))
                bound = numeric.to_float(error_bound(system, n, m))
                bad += err > bound
                out.writerow([n, m, f"{err:.3e}", f"{bound:.3e}", f"{err / bound:.4f}"])
    print(f"{len(ns) * (cfg.m_max // cfg.step)} points, {bad} violations -> {cfg.out}")
    return bad


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    ap.add_argument("--m-max", type=int, default=Config.m_max)
    ap.add_argument("--out", type=Path, default=Config.out)
    a = ap.parse_args()
    raise SystemExit(1 if run(Config(n_max=a.n_max, m_max=a.m_max, out=a.out)) else 0)
