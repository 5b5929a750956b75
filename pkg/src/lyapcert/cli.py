"""Command-line front end.

Every command reads a system file and prints JSON on stdout (``--human``
switches to a short text report). Exit codes: 0 success, 1 validation
failure, 2 numeric indeterminacy or an uncertified result, 3 I/O or parse
error.
"""
from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click
import flint

from . import numeric
from .certify import certify_lift, error_bound, lift_system, monte_carlo_lambda
from .derivatives import OmegaData, check_omega, prepare, taylor
from .errors import LyapcertError, MulticoneError, NumericError, ParseError, ValidationError
from .family import eval_constant, parse
from .lift import build_lift, constant
from .markov import validate
from .multicone import build_branch_system, select_class, validate_multicone
from .systemfile import SystemFile

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_IO


def _guarded(fn):
    """Map package errors onto exit codes with a JSON error record on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (LyapcertError, OSError) as exc:
            record = {"error": str(exc), "kind": type(exc).__name__}
            if isinstance(exc, MulticoneError):
                record["violations"] = [f"({i},{a},{j})" for i, a, j in exc.violations]
            click.echo(json.dumps(record), err=True)
            sys.exit(exit_code(exc))

    return wrapper


def _emit(doc: dict, human: bool, text: str) -> None:
    click.echo(text if human else json.dumps(doc, indent=2, ensure_ascii=False))


def _rational(text, what: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{what}: not a number: {text!r}") from exc


def _fmt(x) -> str:
    x = constant(x)
    if isinstance(x, (int, Fraction)):
        return str(x)
    return numeric.decimal_string(x, 20)


def _settings(sf: SystemFile, precision, mode, epsilon, default_eps="1e-15"):
    opts = sf.options
    bits = int(precision or opts.get("precision_bits", numeric.DEFAULT_PRECISION))
    mode = mode or opts.get("mode", "float")
    eps = _rational(epsilon or opts.get("epsilon", default_eps), "epsilon")
    if eps <= 0:
        raise ValidationError("epsilon must be positive")
    return bits, mode, eps


def _class_choice(sf: SystemFile, flag):
    return flag if flag is not None else sf.options.get("class_choice")


# -- reports -----------------------------------------------------------------------------

def check_report(sf: SystemFile, class_choice: int | None = None) -> dict:
    """Validation summary: sign table, recurrent classes, ρ, D and d at t₀."""
    A, P, M = sf.instantiate()
    if M is None:
        raise ValidationError("the system file has no multicone")
    validate(P).raise_for_failure()
    table = validate_multicone(A, P, M)
    branch = build_branch_system(table, P, M)
    cls = select_class(branch, class_choice)
    system = build_lift(A, P, M, branch, cls, sf.base_period)
    classes = [[str(branch.states[i]) for i in c] for c in branch.classes]
    summary = (f"{len(branch.states)} branch states, {len(classes)} recurrent "
               f"class{'es' if len(classes) != 1 else ''}, ρ = {_fmt(system.rho)}")
    if system.d > 1:
        summary += f", accelerated, d = {system.d}"
    return {
        "ok": True,
        "summary": summary,
        "letters": list(sf.alphabet),
        "branch_states": len(branch.states),
        "beta": [{"edge": f"({i},{a},{j})", "target_component": e.target_comp, "sign": e.sign}
                 for (i, a, j), e in sorted(table.items())],
        "recurrent_classes": classes,
        "chosen_class": classes.index([str(branch.states[i]) for i in cls]),
        "rho": _fmt(system.rho),
        "D": _fmt(system.D),
        "d": system.d,
        "lift_period": system.lift_period,
        "base_period": sf.base_period,
        "accelerated": system.d > 1,
    }


def lyapunov_certificate(sf: SystemFile, epsilon, *, precision: int, mode: str = "float",
                         class_choice: int | None = None, n: int | None = None, m: int | None = None):
    with numeric.working_precision(precision, mode):
        A, P, M = sf.instantiate()
        if M is None:
            raise ValidationError("the system file has no multicone")
        system = lift_system(A, P, M, class_choice, sf.base_period)
        return certify_lift(system, epsilon, n=n, m=m)


def verify_certificate(sf: SystemFile, cert: dict, class_choice: int | None = None) -> dict:
    """Recompute error_bound(n, m) for a stored certificate and compare."""
    bits = int(cert["precision_bits"])
    with numeric.working_precision(bits, cert.get("mode", "float")):
        A, P, M = sf.instantiate()
        system = lift_system(A, P, M, class_choice, sf.base_period)
        again = numeric.upper(error_bound(system, int(cert["n"]), int(cert["m"])))
        stored = flint.arb(cert["bound"])
        scale = numeric.real(_rational(cert.get("scale", "1"), "scale"))
        again = again * abs(scale)
        gap = abs(again - stored)
        agree = bool(gap <= numeric.real(Fraction(2) ** (24 - bits)) * abs(stored).max(flint.arb(1)))
        return {"stored": cert["bound"], "recomputed": numeric.decimal_string(again), "agree": agree}


# -- commands --------------------------------------------------------------------------------

file_arg = click.argument("file", type=click.Path(dir_okay=False, path_type=Path))
human_opt = click.option("--human", is_flag=True, help="Short text report instead of JSON.")
class_opt = click.option("--class", "class_choice", type=int, default=None, help="Recurrent class index.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Certified Lyapunov exponents of 2×2 Markov random matrix products."""


@main.command()
@file_arg
@class_opt
@human_opt
@_guarded
def check(file, class_choice, human):
    """Validate the chain and the multicone; report ρ, D and d."""
    sf = SystemFile.load(file)
    try:
        report = check_report(sf, _class_choice(sf, class_choice))
    except MulticoneError as exc:
        doc = {"ok": False, "error": str(exc), "violations": [f"({i},{a},{j})" for i, a, j in exc.violations]}
        _emit(doc, human, f"multicone invalid: {exc}")
        sys.exit(EXIT_VALIDATION)
    _emit(report, human, report["summary"])


@main.command()
@file_arg
@click.option("--epsilon", default=None, help="Target error (e.g. 1e-30 or 1/1000).")
@click.option("--precision", type=int, default=None, help="Working precision in bits.")
@click.option("--mode", type=click.Choice(["float", "interval"]), default=None)
@click.option("--scale", default=None, help="Known factor applied to λ (e.g. 1/2 for a drift ratio).")
@click.option("--n", "n_terms", type=int, default=None, help="Force the number of terms n.")
@click.option("--m", "m_trunc", type=int, default=None, help="Force the truncation order m.")
@click.option("--digits", type=int, default=None, help="Significant digits in the output.")
@class_opt
@human_opt
@_guarded
def lyapunov(file, epsilon, precision, mode, scale, n_terms, m_trunc, digits, class_choice, human):
    """Certified top Lyapunov exponent at t₀."""
    sf = SystemFile.load(file)
    bits, mode, eps = _settings(sf, precision, mode, epsilon)
    cert = lyapunov_certificate(sf, eps, precision=bits, mode=mode, class_choice=_class_choice(sf, class_choice),
                                n=n_terms, m=m_trunc)
    with numeric.working_precision(bits, mode):
        doc = cert.to_dict(digits)
        text = f"λ = {doc['value']}  (|error| ≤ {numeric.decimal_string(cert.total_bound, 6)}, n = {cert.n}, m = {cert.m})"
        if scale is not None:
            scaled = cert.scaled(_rational(scale, "scale"))
            doc["scaled"] = scaled.to_dict(digits)
            text += f"\n{scale}·λ = {doc['scaled']['value']}"
    _emit(doc, human, text)
    if not cert.ok:
        sys.exit(EXIT_NUMERIC)


@main.command("taylor")
@file_arg
@click.option("--order", type=int, default=None, help="Highest Taylor order Q.")
@click.option("--epsilon", default=None, help="Per-coefficient target error.")
@click.option("--radius", default=None, help="Disk radius c around t₀.")
@click.option("--rho-bar", default=None, help="ρ̄ in (ρ, 1).")
@click.option("--estimate", is_flag=True, help="Estimate the Ω-constants on the boundary circle.")
@click.option("--precision", type=int, default=None)
@click.option("--mode", type=click.Choice(["float", "interval"]), default=None)
@click.option("--digits", type=int, default=None)
@class_opt
@human_opt
@_guarded
def taylor_cmd(file, order, epsilon, radius, rho_bar, estimate, precision, mode, digits, class_choice, human):
    """Certified Taylor coefficients a₀ … a_Q of λ at t₀."""
    sf = SystemFile.load(file)
    opts = sf.options
    bits, mode, eps = _settings(sf, precision, mode, epsilon)
    order = int(order if order is not None else opts.get("order", 0))
    radius = radius if radius is not None else opts.get("disk_radius")
    rho_bar = rho_bar if rho_bar is not None else opts.get("rho_bar")
    if radius is None or rho_bar is None:
        raise ValidationError("the Taylor certifier needs a disk radius and rho_bar (--radius, --rho-bar)")
    report = None
    with numeric.working_precision(bits, mode):
        fam = prepare(sf, _class_choice(sf, class_choice))
        if estimate:
            report = check_omega(fam, radius, rho_bar)
            if not report.ok:
                failed = [k for k, v in report.conditions.items() if not v]
                raise ValidationError(f"Ω-conditions fail on the boundary circle: {failed}; try a smaller radius")
            omega = report.omega_data()
        else:
            if not opts.get("omega_constants"):
                raise ValidationError("the file has no omega_constants; add them or pass --estimate to sample "
                                      "them on the circle |z - t0| = c")
            if opts.get("disk_radius") is not None and not _same_number(radius, opts["disk_radius"]):
                raise ValidationError("omega_constants belong to the file's disk_radius; pass --estimate to use "
                                      "another radius")
            omega = OmegaData.from_options(opts, sf.base_point(), radius=radius, rho_bar=rho_bar)
        result = taylor(fam, order, eps, omega)
        doc = result.to_dict(digits)
    if report is not None:
        doc["omega_report"] = report.to_dict()
    lines = [f"a_{q} = {c['value']}  (≤ {c['bound']})" for q, c in enumerate(doc["coefficients"])]
    _emit(doc, human, "\n".join(lines + [f"n = {result.n}, m = {result.m}, {result.rigor}"]))
    if not result.ok:
        sys.exit(EXIT_NUMERIC)


def _same_number(a, b) -> bool:
    x, y = numeric.promote(eval_constant(parse(str(a))), eval_constant(parse(str(b))))
    return numeric.is_zero(x - y)


@main.command()
@file_arg
@click.option("--steps", type=int, default=100_000)
@click.option("--trials", type=int, default=32)
@click.option("--seed", type=int, default=0)
@click.option("--burn-in", type=int, default=None)
@human_opt
@_guarded
def simulate(file, steps, trials, seed, burn_in, human):
    """Monte Carlo estimate of λ (no certificate)."""
    sf = SystemFile.load(file)
    A, P, _ = sf.instantiate()
    res = monte_carlo_lambda(A, P, steps, trials, seed, burn_in)
    doc = res.to_dict()
    if sf.base_period != 1:
        doc["per_block_step"] = doc["estimate"]
        doc["estimate"] = res.estimate / sf.base_period
        doc["stderr"] = res.stderr / sf.base_period
        doc["base_period"] = sf.base_period
    _emit(doc, human, f"λ ≈ {doc['estimate']:.10f} ± {doc['stderr']:.2e} ({trials} × {steps} steps)")


@main.command("reduce-base")
@file_arg
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None)
@_guarded
def reduce_base(file, output):
    """Write the d-step block system of a periodic base chain."""
    sf = SystemFile.load(file)
    text = sf.reduce_base().dump(output)
    if output is None:
        click.echo(text, nl=False)


@main.command()
@file_arg
@click.argument("certificate", type=click.Path(dir_okay=False, path_type=Path))
@class_opt
@_guarded
def verify(file, certificate, class_choice):
    """Recompute the analytic bound of a stored certificate."""
    sf = SystemFile.load(file)
    try:
        cert = json.loads(Path(certificate).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{certificate}: invalid JSON ({exc.msg})", exc.pos) from exc
    doc = verify_certificate(sf, cert, _class_choice(sf, class_choice))
    click.echo(json.dumps(doc, indent=2))
    if not doc["agree"]:
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
