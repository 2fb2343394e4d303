"""Command-line entry point.

Subcommands mirror the experiment drivers:

    forgetting-dynamics validate  --preset fig3a
    forgetting-dynamics curve     --preset fig3a --out out/fig3a
    forgetting-dynamics heatmap   --preset fig4 --out out/fig4
    forgetting-dynamics overshoot --out out/phase --sigma2-sq 0.2:2.4:12

Exit codes: 0 on success, 2 on configuration errors, 3 when the closed
forms and the ODE integrator disagree (hard gate), 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .config import ContinualConfig, load_config, validate
from .errors import ConfigError, HardGateError, NonFiniteError
from .experiments import (
    SweepAxis,
    SweepSpec,
    default_heatmap_sweep,
    default_overshoot_sweep,
    learning_curve_experiment,
    forgetting_heatmap,
    overshoot_phase_diagram,
    preset,
    write_report,
)


def _add_common(parser: argparse.ArgumentParser, default_preset: str) -> None:
    parser.add_argument("--config", help="path to a flat JSON config file")
    parser.add_argument(
        "--preset", choices=sorted(experiments.PRESETS),
        help=f"named parameter set (default: {default_preset})",
    )
    parser.add_argument("--out", help="output directory for the report")
    parser.add_argument("--seeds", type=int, default=10, help="simulation replicates")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker threads for seed replicates (results identical)")
    parser.set_defaults(default_preset=default_preset)


def _resolve_config(args) -> ContinualConfig:
    if args.config and args.preset:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config:
        return load_config(args.config)
    return preset(args.preset or args.default_preset)


def _axis(name: str, text: str) -> SweepAxis:
    """Parse "lo:hi:count" (or a single value) into an axis."""
    parts = text.split(":")
    if len(parts) == 1:
        value = float(parts[0])
        return SweepAxis(name, value, value, 1)
    if len(parts) == 3:
        return SweepAxis(name, float(parts[0]), float(parts[1]), int(parts[2]))
    raise ConfigError(f"axis spec for {name} must be 'value' or 'lo:hi:count', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgetting-dynamics",
        description="Two-task teacher-student forgetting: theory, integrator, simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a config and print its resolved form")
    _add_common(p, "fig3a")
    p.add_argument("--allow-divergent", action="store_true",
                   help="accept effective learning rates at/beyond the stability limit")

    p = sub.add_parser("curve", help="learning-curve report: simulation vs theory vs integrator")
    _add_common(p, "fig3a")
    p.add_argument("--t2", type=float, default=6.0, help="task-2 horizon in time units")
    p.add_argument("--record-dt", type=float, default=0.1, help="sampling interval in time units")
    p.add_argument("--dt", type=float, default=1e-3, help="integrator step")
    p.add_argument("--exact-similarity", action="store_true",
                   help="pin teacher norms and overlap exactly instead of O(1/sqrt(n))")

    p = sub.add_parser("heatmap", help="forgetting value over the (r, q) grid")
    _add_common(p, "fig4")
    p.add_argument("--grid", type=int, default=26, help="points per axis")
    p.add_argument("--with-sim", action="store_true", help="add simulated end values per cell")
    p.add_argument("--sim-t2", type=float, default=10.0, help="task-2 horizon for cell simulations")

    p = sub.add_parser("overshoot", help="overshoot classification over (eta, r, sigma2_sq)")
    _add_common(p, "fig3a")
    p.add_argument("--eta", default="1.0", help="axis spec: value or lo:hi:count")
    p.add_argument("--r", default="0.5:1.0:11", help="axis spec: value or lo:hi:count")
    p.add_argument("--sigma2-sq", default="0.2:2.4:12", help="axis spec: value or lo:hi:count")
    p.add_argument("--with-sim", action="store_true",
                   help="verdicts from seed-averaged simulations instead of closed forms")

    return parser


def _require_out(args) -> str:
    if not args.out:
        raise ConfigError(f"--out is required for '{args.command}'")
    return args.out


def _run(args) -> int:
    if args.command == "validate":
        cfg = validate(_resolve_config(args), allow_divergent=args.allow_divergent)
        text = json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
        print(text)
        if args.out:
            import os

            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "config.json"), "w") as fh:
                fh.write(text + "\n")
        return 0

    if args.command == "curve":
        report = learning_curve_experiment(
            _resolve_config(args),
            seeds=args.seeds,
            t2=args.t2,
            record_dt=args.record_dt,
            dt=args.dt,
            exact_similarity=args.exact_similarity,
            n_jobs=args.jobs,
        )
        paths = write_report(report, _require_out(args), args.format)
        summary = report.meta["summary"]
        print(f"wrote {', '.join(paths)}")
        print(
            "classification={overshoot_classification} overshoot_detected={overshoot_detected} "
            "forgetting_value={forgetting_value}".format(**summary)
        )
        return 0

    if args.command == "heatmap":
        sweep = default_heatmap_sweep(_resolve_config(args), grid=args.grid)
        sweep = SweepSpec(base=sweep.base, axes=sweep.axes, replicates=args.seeds)
        report = forgetting_heatmap(sweep, with_sim=args.with_sim, sim_t2=args.sim_t2,
                                    n_jobs=args.jobs)
        paths = write_report(report, _require_out(args), args.format)
        print(f"wrote {', '.join(paths)}")
        return 0

    if args.command == "overshoot":
        axes = (
            _axis("eta", args.eta),
            _axis("r", args.r),
            _axis("sigma2_sq", args.sigma2_sq),
        )
        sweep = SweepSpec(base=_resolve_config(args), axes=axes, replicates=args.seeds)
        report = overshoot_phase_diagram(sweep, with_sim=args.with_sim, n_jobs=args.jobs)
        paths = write_report(report, _require_out(args), args.format)
        print(f"wrote {', '.join(paths)}")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except HardGateError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 3
    except NonFiniteError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
