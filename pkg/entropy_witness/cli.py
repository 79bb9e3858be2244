"""Command-line driver.

Every command resolves a :class:`~entropy_witness.config.RunConfig` from
defaults, an optional JSON file and flags, writes ``<out>/<command>.json``
plus CSV tables, and prints a short summary. Exit codes: 0 on success, 1 on
an error or a failed ``--check``, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .certificates import (
    MIXED_SIGN_BOUNDS,
    MIXED_SIGN_ENTROPY_FLOOR,
    TABLE_ONE,
    Certificate,
    certificate,
    mixed_sign_witness,
)
from .classical import classical_bound, classical_bound_table, min_classical_entropy
from .config import GridConfig, RunConfig, load_config
from .constants import (
    BOUND_TOL,
    CASES,
    CERTIFICATE_ENTROPY_TOL,
    CERTIFICATE_VALUE_TOL,
    CURVE_MONOTONE_TOL,
    CURVE_ORDER_TOL,
    DEFAULT_CURVE_POINTS,
    EXACT_SIM_TOL,
    MODES,
    SAMPLED_SIM_TOL,
    STRICT_MARGIN,
    TABLE_ENTROPY_TOL,
    TABLE_GAP_TOL,
    TABLE_QUANTUM_TOL,
)
from .exceptions import EntropyWitnessError, ValidationError
from .parser import RunParser
from .polsim import error_budget, run_protocol
from .qcore import von_neumann_entropy
from .qopt import entropy_curve, gap_report, quantum_maximum, solve_quantum
from .reports import matrix_to_dict, write_csv, write_json
from .tomo import average_state, reconstruct_dataset, tomo_settings
from .witness import quantum_value

logger = logging.getLogger(__name__)

COMMANDS = (
    "table1",
    "bounds",
    "curve",
    "counterexample",
    "simulate",
    "tomo",
    "errorbudget",
)
COUNTEREXAMPLES = ("hyp1-I4", "hyp1-R4", "hyp2")


@dataclass(frozen=True)
class Check:
    """One tolerance comparison made by ``--check``.

    ``relation`` is ``"near"`` (``|value - expected| <= tol``), ``"below"``
    (``value <= expected + tol``), ``"above"`` (``value > expected + tol``)
    or ``"finite"`` (``value`` is neither infinite nor ``nan``).
    """

    name: str
    value: float
    expected: float
    tol: float
    relation: str = "near"

    @classmethod
    def finite(cls, name: str, value: float) -> Check:
        """Check that ``value`` is a finite number."""
        return cls(name, value, math.nan, math.nan, "finite")

    @property
    def passed(self) -> bool:
        """Whether the comparison holds; ``nan`` values always fail."""
        if self.relation == "finite":
            return bool(np.isfinite(self.value))
        if math.isnan(self.value):
            return False
        if self.relation == "below":
            return self.value <= self.expected + self.tol
        if self.relation == "above":
            return self.value > self.expected + self.tol
        return abs(self.value - self.expected) <= self.tol

    def row(self) -> dict[str, Any]:
        """CSV row."""
        return {
            "check": self.name,
            "value": self.value,
            "expected": self.expected,
            "tolerance": self.tol,
            "relation": self.relation,
            "passed": self.passed,
        }


@dataclass
class Outcome:
    """Result of a command: JSON payload, CSV tables and checks."""

    payload: dict[str, Any]
    tables: dict[str, list[dict[str, Any]]]
    checks: list[Check]
    summary: list[str]


def _output_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out)


def _witness(cfg: RunConfig) -> Any:
    return RunParser().parse_witness(cfg.witness)


def cmd_table1(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Classical and quantum minima at the reference witness values."""
    rows, checks, summary = [], [], []
    for name in cfg.witnesses:
        W, h_ref, s_ref, gap_ref = TABLE_ONE[name]  # noqa: N806
        spec = RunParser().parse_witness(name)
        report = gap_report(spec, W, cfg.optimization)
        rows.append(report.to_dict())
        summary.append(
            f"{name}: W={W:.4g} H_min={report.H_min:.4f} "
            f"S_min={report.S_min:.4f} gap={report.gap:.4f}"
        )
        checks += [
            Check(f"{name} H_min", report.H_min, h_ref, TABLE_ENTROPY_TOL),
            Check(f"{name} S_min", report.S_min, s_ref, TABLE_QUANTUM_TOL),
            Check(f"{name} gap", report.gap, gap_ref, TABLE_GAP_TOL),
        ]
    return Outcome({"rows": rows}, {"table1": rows}, checks, summary)


def cmd_bounds(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Classical bounds ``L_d`` and their mixing ratios."""
    spec = _witness(cfg)
    table = classical_bound_table(spec, cfg.d_max)
    try:
        ratios = table.ratios()
    except ValidationError as e:
        logger.info(f"No mixing ratios for {spec.label}: {e}")
        ratios = {}
    rows = [{"d": d, "L": value} for d, value in sorted(table.L.items())]
    summary = [f"L_{d} = {value:.6g}" for d, value in sorted(table.L.items())]
    summary += [f"(L_{d} - L_2)/(L_2 - L_1) = {r:.4f}" for d, r in ratios.items()]

    checks = []
    values = [table.L[d] for d in sorted(table.L)]
    for d, (a, b) in enumerate(zip(values, values[1:]), start=2):
        checks.append(Check(f"L_{d} >= L_{d - 1}", a, b, 0.0, "below"))
    if spec.label == mixed_sign_witness().label:
        for d, expected in enumerate(MIXED_SIGN_BOUNDS, start=1):
            if d in table.L:
                checks.append(Check(f"L_{d}", table.L[d], expected, BOUND_TOL))

    payload = {
        "witness": spec.to_dict(),
        "L": {str(d): v for d, v in table.L.items()},
        "ratios": {str(d): r for d, r in ratios.items()},
        "quantum_maximum": quantum_maximum(spec),
    }
    return Outcome(payload, {"bounds": rows}, checks, summary)


def _curve_grid(args: argparse.Namespace, cfg: RunConfig, spec: Any) -> list[float]:
    if cfg.W is not None:
        return sorted(cfg.W)
    grid = cfg.grid
    if grid is None:
        points = args.points or DEFAULT_CURVE_POINTS
        start, stop = spec.column_sum_bound(), classical_bound(spec, spec.n)
        try:
            grid = GridConfig(start=start, stop=stop, points=points)
        except ValueError as e:
            raise ValidationError(
                f"No default grid for {spec.label}: {e}", field="grid"
            ) from e
    elif args.points:
        grid = grid.model_copy(update={"points": args.points})
    return grid.values()


def cmd_curve(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Minimal entropy curves over a grid of witness values."""
    spec = _witness(cfg)
    grid = _curve_grid(args, cfg, spec)
    kinds = ("classical", "quantum") if cfg.kind == "both" else (cfg.kind,)
    curves = {kind: entropy_curve(spec, kind, grid, cfg.optimization) for kind in kinds}

    rows = [
        {"kind": kind, **row} for kind, curve in curves.items() for row in curve.rows()
    ]
    checks = []
    for kind, curve in curves.items():
        values = curve.values()
        for k in range(1, len(values)):
            checks.append(
                Check(
                    f"{kind} non-decreasing at W={grid[k]:.6g}",
                    values[k - 1],
                    values[k],
                    CURVE_MONOTONE_TOL,
                    "below",
                )
            )
    if len(curves) == 2:
        quantum, classical = curves["quantum"].values(), curves["classical"].values()
        for w, s, h in zip(grid, quantum, classical):
            checks.append(Check(f"S <= H at W={w:.6g}", s, h, CURVE_ORDER_TOL, "below"))

    summary = [
        f"{kind}: {len(grid)} points, "
        f"{int(np.count_nonzero(np.isnan(curve.values())))} failed"
        for kind, curve in curves.items()
    ]
    payload = {kind: curve.to_dict() for kind, curve in curves.items()}
    return Outcome(payload, {"curve": rows}, checks, summary)


def _certificate_values(cert: Certificate) -> tuple[float, float]:
    ens = cert.ensemble()
    value = quantum_value(ens, cert.measurements(), cert.spec())
    return value, von_neumann_entropy(ens.average())


def _hyp1(
    name: str, low: Certificate, high: Certificate, cfg: RunConfig, optimize: bool
) -> tuple[dict[str, Any], list[Check]]:
    low_value, low_entropy = _certificate_values(low)
    high_value, high_entropy = _certificate_values(high)
    checks = [
        Check(f"{low.name} value", low_value, low.value, CERTIFICATE_VALUE_TOL),
        Check(f"{low.name} entropy", low_entropy, low.entropy, CERTIFICATE_ENTROPY_TOL),
        Check(f"{high.name} value", high_value, high.value, CERTIFICATE_VALUE_TOL),
        Check(
            f"{high.name} entropy", high_entropy, high.entropy, CERTIFICATE_ENTROPY_TOL
        ),
        Check(
            f"{high.name} entropy below {low.name}",
            high_entropy,
            low_entropy,
            -STRICT_MARGIN,
            "below",
        ),
    ]
    result: dict[str, Any] = {
        low.name: {"value": low_value, "entropy": low_entropy},
        high.name: {"value": high_value, "entropy": high_entropy},
    }
    if optimize:
        solution = solve_quantum(high.spec(), high.value, cfg.optimization)
        result["optimizer"] = {
            "W": high.value,
            "entropy": solution.entropy,
            "residual": solution.residual,
            "starts_converged": solution.starts_converged,
        }
        checks.append(
            Check(
                f"{name} optimizer entropy",
                solution.entropy,
                high.entropy,
                TABLE_QUANTUM_TOL,
                "below",
            )
        )
    return result, checks


def _hyp2() -> tuple[dict[str, Any], list[Check]]:
    spec = mixed_sign_witness()
    table = classical_bound_table(spec, spec.n)
    ratios = table.ratios()
    h_min, mixture = min_classical_entropy(spec, table.L[2])
    checks = [
        Check(f"L_{d}", table.L[d], expected, BOUND_TOL)
        for d, expected in enumerate(MIXED_SIGN_BOUNDS, start=1)
    ]
    checks.append(
        Check(
            "H_min above floor",
            h_min,
            MIXED_SIGN_ENTROPY_FLOOR,
            STRICT_MARGIN,
            "above",
        )
    )
    result = {
        "L": {str(d): v for d, v in table.L.items()},
        "ratios": {str(d): r for d, r in ratios.items()},
        "W": table.L[2],
        "H_min": h_min,
        "mixture": mixture.to_dict(),
    }
    return result, checks


def cmd_counterexample(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Evaluate the constructions showing that dimension does not fix entropy."""
    which = COUNTEREXAMPLES if cfg.which == "all" else (cfg.which,)
    payload: dict[str, Any] = {}
    checks: list[Check] = []
    for name in which:
        if name == "hyp1-I4":
            result, found = _hyp1(
                name, certificate("qubit-I4"), certificate("ququart-I4"), cfg, True
            )
        elif name == "hyp1-R4":
            result, found = _hyp1(
                name, certificate("qutrit-R4"), certificate("ququart-R4"), cfg, False
            )
        else:
            result, found = _hyp2()
        payload[name] = result
        checks += found
    summary = [
        f"{c.name}: {c.value:.4f} (reference {c.expected:.4f})" for c in checks
    ]
    rows = [c.row() for c in checks]
    return Outcome(payload, {"counterexample": rows}, checks, summary)


def _reference(case: str, mode: str) -> tuple[float, float]:
    cert = certificate(case)
    if mode == "classical" and cert.classical_entropy is not None:
        return cert.value, cert.classical_entropy
    return cert.value, cert.entropy


def cmd_simulate(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Simulated experiment for one case and mode."""
    report = run_protocol(cfg.case, cfg.mode, cfg.simulation)
    w_ref, h_ref = _reference(cfg.case, cfg.mode)
    tol = EXACT_SIM_TOL if cfg.simulation.exact else SAMPLED_SIM_TOL
    checks = [
        Check("w", report.value, w_ref, tol),
        Check("entropy", report.entropy, h_ref, tol),
    ]
    tables = {"simulate": report.rows()}
    if report.tomography is not None:
        tables["simulate_tomography"] = [
            {"state_index": x, "setting_index": j, "count": count}
            for (x, j), count in np.ndenumerate(report.tomography.counts)
        ]
    summary = [
        f"{cfg.case} {cfg.mode}: w={report.value:.4f} entropy={report.entropy:.4f}"
    ]
    return Outcome(report.to_dict(), tables, checks, summary)


def cmd_tomo(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Reconstruct states and their average from a counts CSV."""
    data = RunParser().parse_counts(cfg.counts)
    ts = tomo_settings(cfg.case)
    states = reconstruct_dataset(data, ts, cfg.simulation.tomography)
    avg = average_state(states)
    entropy = von_neumann_entropy(avg)
    rows = [
        {
            "state_index": x,
            "entropy": von_neumann_entropy(state),
            "purity": float(np.trace(state.entries @ state.entries).real),
        }
        for x, state in enumerate(states)
    ]
    rows.append({"state_index": "average", "entropy": entropy, "purity": math.nan})
    payload = {
        "case": cfg.case,
        "method": cfg.simulation.tomography,
        "states": [matrix_to_dict(state.entries) for state in states],
        "average": matrix_to_dict(avg.entries),
        "entropy": entropy,
    }
    checks = [Check("entropy", entropy, certificate(cfg.case).entropy, SAMPLED_SIM_TOL)]
    summary = [f"{cfg.case}: {len(states)} states, S(average)={entropy:.4f}"]
    return Outcome(payload, {"tomo": rows}, checks, summary)


def cmd_errorbudget(args: argparse.Namespace, cfg: RunConfig) -> Outcome:
    """Monte-Carlo spread of the simulated witness value and entropy."""
    budget = error_budget(cfg.case, cfg.mode, cfg.simulation, cfg.trials)
    rows = [
        {"trial": t, "w": w, "entropy": h}
        for t, (w, h) in enumerate(zip(budget.values, budget.entropies))
    ]
    checks = [
        Check.finite("std w", budget.std_value),
        Check.finite("std entropy", budget.std_entropy),
    ]
    summary = [
        f"{cfg.case} {cfg.mode}: std(w)={budget.std_value:.4g} "
        f"std(entropy)={budget.std_entropy:.4g} over {budget.trials} trials"
    ]
    return Outcome(budget.to_dict(), {"errorbudget": rows}, checks, summary)


HANDLERS: dict[str, Callable[[argparse.Namespace, RunConfig], Outcome]] = {
    "table1": cmd_table1,
    "bounds": cmd_bounds,
    "curve": cmd_curve,
    "counterexample": cmd_counterexample,
    "simulate": cmd_simulate,
    "tomo": cmd_tomo,
    "errorbudget": cmd_errorbudget,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per report."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument(
        "--check",
        action="store_true",
        default=None,
        help="exit 1 when a result is outside its reference tolerance",
    )
    common.add_argument("--starts", type=int, help="optimizer starts")
    common.add_argument("--workers", type=int, help="optimizer worker processes")

    parser = argparse.ArgumentParser(
        prog="entropy-witness",
        description="Entropy bounds of prepare-and-measure dimension witnesses",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    table1 = sub.add_parser("table1", parents=[common], help="reference minima")
    table1.add_argument(
        "--witness",
        dest="witnesses",
        nargs="+",
        type=str.upper,
        choices=list(TABLE_ONE),
        help="canonical witnesses",
    )

    bounds = sub.add_parser("bounds", parents=[common], help="classical bounds")
    bounds.add_argument("--witness", help="name or inline JSON")
    bounds.add_argument("--d-max", dest="d_max", type=int)

    curve = sub.add_parser("curve", parents=[common], help="entropy curves")
    curve.add_argument("--witness", help="name or inline JSON")
    curve.add_argument("--points", type=int)
    curve.add_argument("--start", type=float)
    curve.add_argument("--stop", type=float)
    curve.add_argument("--W", dest="W", help="comma-separated witness values")
    curve.add_argument("--kind", choices=["classical", "quantum", "both"])

    counter = sub.add_parser(
        "counterexample", parents=[common], help="dimension counter-examples"
    )
    counter.add_argument("--which", choices=[*COUNTEREXAMPLES, "all"])

    for name, text in (
        ("simulate", "simulated experiment"),
        ("tomo", "tomography from counts"),
        ("errorbudget", "Monte-Carlo error budget"),
    ):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--case", type=str.upper, choices=list(CASES))
        if name != "tomo":
            command.add_argument("--mode", choices=list(MODES))
        if name == "simulate":
            command.add_argument("--exact", action="store_true", default=None)
        if name == "tomo":
            command.add_argument("--counts", help="counts CSV")
            command.add_argument("--method", choices=["mle", "linear"])
        if name == "errorbudget":
            command.add_argument("--trials", type=int)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Config overrides from parsed flags; unset flags are ``None``."""
    get = vars(args).get
    overrides: dict[str, Any] = {
        key: get(key)
        for key in (
            "seed",
            "out",
            "check",
            "witnesses",
            "witness",
            "d_max",
            "kind",
            "which",
            "case",
            "mode",
            "trials",
            "counts",
        )
    }
    if get("W") is not None:
        overrides["W"] = RunParser().parse_values(get("W"))
    if get("start") is not None or get("stop") is not None:
        if get("start") is None or get("stop") is None:
            raise ValidationError("--start and --stop must be given together", "grid")
        overrides["grid"] = {
            "start": get("start"),
            "stop": get("stop"),
            "points": get("points") or DEFAULT_CURVE_POINTS,
        }
    optimization = {"starts": get("starts"), "workers": get("workers")}
    simulation = {"exact": get("exact"), "tomography": get("method")}
    overrides["optimization"] = {k: v for k, v in optimization.items() if v is not None}
    overrides["simulation"] = {k: v for k, v in simulation.items() if v is not None}
    return overrides


def _write(command: str, outcome: Outcome, cfg: RunConfig) -> list[Path]:
    out = _output_dir(cfg)
    payload = {**outcome.payload}
    if cfg.check:
        payload["checks"] = [c.row() for c in outcome.checks]
    written = [write_json(out / f"{command}.json", payload, cfg, command)]
    for name, rows in outcome.tables.items():
        written.append(write_csv(out / f"{name}.csv", rows))
    if cfg.check and outcome.checks:
        rows = [c.row() for c in outcome.checks]
        written.append(write_csv(out / f"{command}_checks.csv", rows))
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command == "tomo" and cfg.counts is None:
            parser.print_usage(sys.stderr)
            print("entropy-witness: error: tomo needs --counts", file=sys.stderr)
            return 2
        logger.info(f"Running {args.command} with seed {cfg.seed}")
        outcome = HANDLERS[args.command](args, cfg)
        paths = _write(args.command, outcome, cfg)
    except EntropyWitnessError as e:
        print(f"entropy-witness: error: {e}", file=sys.stderr)
        return 1

    for line in outcome.summary:
        print(line)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    if cfg.check:
        failed = [c for c in outcome.checks if not c.passed]
        for c in failed:
            print(
                f"check failed: {c.name}: {c.value:.6g} vs {c.expected:.6g} "
                f"({c.relation}, tol {c.tol:g})",
                file=sys.stderr,
            )
        if failed:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
