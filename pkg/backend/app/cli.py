"""Command-line front end: ``python -m app.cli <subcommand> ...``.

Results go to standard output (or --out); diagnostics and logs go to stderr.
Exit status: 0 success, 1 mathematical failure, 2 usage / parse error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blowup import check_validity
from .curvature import curvature_profile, curvature_sample
from .errors import CollapseError, InternalError
from .expression import parse_potential
from .flow import FlowOptions, FlowStatus, Verdict, classify, integrate, monotone_radius, sweep
from .potential import KahlerPotential
from .reports import OutputFormat, render_frame, render_json, render_record, write_output
from .settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of a flow run; the potential is parsed before any computation starts."""

    potential_text: str | None
    potential: KahlerPotential
    m: int
    R0: float
    opts: FlowOptions
    output_path: Path | None
    format: OutputFormat

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        defaults = FlowOptions()
        opts = FlowOptions(
            r_stop=args.r_stop if args.r_stop is not None else defaults.r_stop,
            rel_tol=args.rel_tol if args.rel_tol is not None else defaults.rel_tol,
            abs_tol=args.abs_tol if args.abs_tol is not None else defaults.abs_tol,
            max_steps=args.max_steps if args.max_steps is not None else defaults.max_steps,
            output_stride=args.stride if args.stride is not None else defaults.output_stride,
        )
        return cls(
            potential_text=args.potential,
            potential=_kahler(args),
            m=args.m,
            R0=args.r0,
            opts=opts,
            output_path=getattr(args, "out", None),
            format=_format(args),
        )


def _kahler(args: argparse.Namespace) -> KahlerPotential:
    if getattr(args, "flat", False):
        return KahlerPotential.flat()
    return KahlerPotential(parse_potential(args.potential))


def _format(args: argparse.Namespace, default: OutputFormat = OutputFormat.CSV) -> OutputFormat:
    return OutputFormat(args.format) if args.format else default


def cmd_validate(args: argparse.Namespace) -> int:
    report = check_validity(parse_potential(args.potential), S_max=args.s_max, samples=args.samples)
    if args.format == OutputFormat.JSON.value:
        write_output(render_json(report.to_dict()), None)
    else:
        lines = [f"g_S(0) = {report.g_S_at_0:.17g}"]
        if report.cond_extension:
            lines.append("extension (g_S(0) > 0): pass")
        else:
            lines.append(f"g_S(0) = {report.g_S_at_0:.17g}: extension condition fails")
        for name, ok, text in (
            ("positive_1", report.cond_positive_1, "1/S + g_S > 0"),
            ("positive_2", report.cond_positive_2, "g_S + S g_SS > 0"),
        ):
            lines.append(f"{name} ({text}): {'pass' if ok else 'fail'}")
        if report.first_violation_S is not None:
            lines.append(f"first violation at S = {report.first_violation_S:.17g}")
        print("\n".join(lines))
    return 0 if report.extends else 1


def cmd_curvature(args: argparse.Namespace) -> int:
    sample = curvature_sample(_kahler(args), args.m, args.radius)
    write_output(render_record(sample.to_dict(), _format(args)), args.out)
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    if not 0 < args.r_min < args.r_max:
        raise_usage(args, "--r-min and --r-max must satisfy 0 < r_min < r_max")
    radii = np.geomspace(args.r_min, args.r_max, args.samples)
    frame = curvature_profile(_kahler(args), args.m, radii)
    write_output(render_frame(frame, _format(args)), args.out)
    return 0


def cmd_monotone(args: argparse.Namespace) -> int:
    R_star = monotone_radius(_kahler(args), args.m, args.r_probe_max)
    print("inf" if math.isinf(R_star) else f"{R_star:.17g}")
    return 0


def cmd_flow(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    potential = config.potential
    traj = integrate(potential, config.m, config.R0, config.opts)
    text = render_frame(traj.to_frame(), config.format)
    if config.output_path is not None:
        write_output(text, config.output_path)
        summary_stream = sys.stdout
    else:
        write_output(text, None)
        summary_stream = sys.stderr
    if traj.status != FlowStatus.COLLAPSED:
        print(f"flow {traj.status.value} at R = {traj.final.R:.6g}, t = {traj.t_end:.6g}", file=summary_stream)
        return 1
    report = classify(potential, config.m, config.R0, traj)
    print(report.summary(), file=summary_stream)
    print(f"T_sing quadrature = {report.T_sing_quadrature:.10f}", file=summary_stream)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    potential = config.potential
    traj = integrate(potential, config.m, config.R0, config.opts)
    if traj.status != FlowStatus.COLLAPSED:
        print(f"flow {traj.status.value} at R = {traj.final.R:.6g}", file=sys.stderr)
        return 1
    report = classify(potential, config.m, config.R0, traj)
    if args.format == OutputFormat.JSON.value:
        write_output(render_json(report.to_dict()), None)
    elif args.format == OutputFormat.CSV.value:
        write_output(render_frame(report.to_frame(), OutputFormat.CSV), None)
    else:
        print(report.summary())
    if report.type_verdict != Verdict.TYPE_I:
        logger.warning("Verdict %s", report.type_verdict.value, extra={"R0": config.R0, "m": config.m})
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.steps < 2:
        raise_usage(args, "--steps must be >= 2")
    if not 0 < args.r0_min < args.r0_max:
        raise_usage(args, "--r0-min and --r0-max must satisfy 0 < r0_min < r0_max")
    r0_values = np.linspace(args.r0_min, args.r0_max, args.steps)
    frame = sweep(_kahler(args), args.m, r0_values, workers=args.workers)
    write_output(render_frame(frame, _format(args)), args.out)
    return 0 if frame["error"].isna().all() else 1


def raise_usage(args: argparse.Namespace, message: str) -> None:
    args.parser.error(message)


def _add_potential(parser: argparse.ArgumentParser, *, flat: bool = True) -> None:
    parser.add_argument(
        "--potential",
        help="radial potential g(S); the Kähler potential is log S + g(S). "
        "Write --potential=EXPR when EXPR starts with a minus sign",
    )
    if flat:
        parser.add_argument("--flat", action="store_true", help="use the flat potential f = S instead")


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("--out", type=Path)


def _add_flow_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int, required=True)
    parser.add_argument("--r0", type=float, required=True)
    parser.add_argument("--r-stop", type=float)
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--abs-tol", type=float)
    parser.add_argument("--max-steps", type=int)
    parser.add_argument("--stride", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collapse",
        description=f"{settings.app_name}: mean curvature flow of U(m)-invariant hyperspheres",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the Kähler conditions of g")
    _add_potential(p, flat=False)
    p.add_argument("--s-max", type=float, default=settings.validity_s_max)
    p.add_argument("--samples", type=int, default=settings.validity_samples)
    p.add_argument("--format", choices=[f.value for f in OutputFormat])
    p.set_defaults(handler=cmd_validate, flat=False)

    p = sub.add_parser("curvature", help="principal curvatures, H and |A|^2 at one radius")
    _add_potential(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    _add_output(p)
    p.set_defaults(handler=cmd_curvature)

    p = sub.add_parser("profile", help="curvature table over a geometric radius grid")
    _add_potential(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r-min", type=float, default=1e-3)
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=100)
    _add_output(p)
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("monotone", help="radius up to which H < 0")
    _add_potential(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r-probe-max", type=float, default=settings.monotone_probe_r_max)
    p.set_defaults(handler=cmd_monotone, format=None)

    p = sub.add_parser("flow", help="integrate the flow and write the trajectory")
    _add_potential(p)
    _add_flow_options(p)
    _add_output(p)
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("classify", help="integrate the flow and classify the singularity")
    _add_potential(p)
    _add_flow_options(p)
    p.add_argument("--format", choices=[f.value for f in OutputFormat])
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("sweep", help="T_sing and Type I limit over a range of initial radii")
    _add_potential(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r0-min", type=float, required=True)
    p.add_argument("--r0-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--workers", type=int, default=settings.sweep_workers)
    _add_output(p)
    p.set_defaults(handler=cmd_sweep)

    for subparser in sub.choices.values():
        subparser.set_defaults(parser=subparser)
    return parser


def join_leading_minus(argv: list[str]) -> list[str]:
    """Attach a value such as ``-log(1+S)`` to a preceding ``--potential``."""
    joined: list[str] = []
    items = iter(argv)
    for item in items:
        if item == "--potential":
            value = next(items, None)
            if value is not None and value.startswith("-") and not value.startswith("--") and value != "-h":
                joined.append(f"--potential={value}")
                continue
            joined.append(item)
            if value is not None:
                joined.append(value)
            continue
        joined.append(item)
    return joined


def _report_error(exc: CollapseError, fmt: str | None) -> None:
    if fmt == OutputFormat.JSON.value:
        print(render_json(exc.payload()), end="", file=sys.stderr)
    else:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        stream=sys.stderr,
    )
    logger.debug("Starting", extra={"app": settings.app_name, "app_env": settings.app_env})
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(join_leading_minus(argv))
        if not args.flat and not args.potential:
            args.parser.error("--potential is required unless --flat is given")
    except SystemExit as exc:
        return int(exc.code or 0)

    fmt = getattr(args, "format", None)
    try:
        return args.handler(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except CollapseError as exc:
        logger.debug("Command failed", extra={"command": args.command, "code": exc.code})
        _report_error(exc, fmt)
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected failure", extra={"command": args.command})
        _report_error(InternalError("unexpected failure; see log"), fmt)
        return 1


if __name__ == "__main__":
    sys.exit(main())
