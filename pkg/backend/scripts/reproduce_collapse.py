"""Reproduce the reference collapses: the Burns metric on the blow-up of C^2
and the round sphere of flat C^m.

Run independently:
  python backend/scripts/reproduce_collapse.py
"""

from __future__ import annotations

import argparse
from pathlib import Path
import sys

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str((ROOT / "backend").resolve()))

from app.expression import parse_potential  # noqa: E402
from app.flow import FlowStatus, classify, integrate  # noqa: E402
from app.potential import KahlerPotential  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description="Reproduce the Burns and flat-space collapses")
    parser.add_argument("--r0", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0], help="Burns initial radii")
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4], help="flat complex dimensions")
    args = parser.parse_args()

    cases = [(KahlerPotential(parse_potential("S")), 2, R0) for R0 in args.r0]
    cases += [(KahlerPotential.flat(), m, 1.0) for m in args.dims]

    failures = 0
    for kahler, m, R0 in cases:
        traj = integrate(kahler, m, R0)
        if traj.status != FlowStatus.COLLAPSED:
            failures += 1
            print(f"[{kahler.label}, m={m}] R0={R0:g}: {traj.status.value} at R={traj.final.R:.3e}")
            continue
        report = classify(kahler, m, R0, traj)
        closed = report.T_sing_closed_form
        print(
            f"[{kahler.label}, m={m}] R0={R0:g}: "
            f"T quadrature={report.T_sing_quadrature:.12f} "
            f"trajectory={report.T_sing_trajectory:.9f} "
            f"closed form={'-' if closed is None else f'{closed:.12f}'} "
            f"{report.type_verdict.value} limit={report.limit_estimate:.4f} (predicted {report.limit_predicted:.4f})"
        )

    print(f"Done. cases={len(cases)}, failures={failures}")


if __name__ == "__main__":
    main()
