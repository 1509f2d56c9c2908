"""Command line entry point: ``risopt optimize|sweep|pareto|validate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .channel import cascade, sample
from .exceptions import ConfigError, InfeasibleInstanceError, InfeasibleRunError, RISError, ValidationError
from .harness import ExperimentSpec, frontier_summary, pareto_experiment, run_scheme
from .model import dbm_to_watts, derive_constants, from_config, load_config, reference_config
from .objectives import Objective
from .optimizer import greedy, pareto_sweep
from .validation import run_oracle_suite


log = logging.getLogger("risopt")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3
PROFILES = {"full": 10_000, "ci": 500}


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value parameter file (overrides the reference setup)")
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--realizations", type=int, help="Monte Carlo realizations (default per --profile)")
    common.add_argument("--profile", choices=sorted(PROFILES), default="full")
    common.add_argument("--powers-dbm", type=_csv_floats)
    common.add_argument("--scheme", choices=["a", "b", "c"], action="append",
                        help="scheme to run; repeat for several (default: all)")
    common.add_argument("--objective", choices=["rate", "ee", "pareto"])
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="risopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="optimize one channel realization")
    sub.add_parser("sweep", parents=[common], help="scheme comparison and mean maximizers over transmit power")
    p = sub.add_parser("pareto", parents=[common], help="averaged rate/EE Pareto regions")
    p.add_argument("--p-cn-dbm", type=_csv_floats, default=[10.0, 15.0])
    p.add_argument("--weights", type=_csv_floats)
    sub.add_parser("validate", parents=[common], help="greedy vs exhaustive search on random instances")
    return parser


def _params(args):
    base = reference_config()
    return load_config(args.config, base) if args.config else from_config(base)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_optimize(args) -> int:
    params = _params(args)
    if args.powers_dbm:
        if len(args.powers_dbm) != 1:
            raise ConfigError("optimize takes a single --powers-dbm value")
        params = params.with_(p=dbm_to_watts(args.powers_dbm[0]))
    ch = sample(params, args.seed)
    cc = cascade(ch)
    dc = derive_constants(params, ch.h_F, cc.alpha_max)
    objective = args.objective or "rate"
    if objective == "pareto":
        pts = pareto_sweep(cc, dc, params.B)
        payload = {"objective": "pareto", "points": [p.__dict__ for p in pts]}
    else:
        payload = greedy(cc, dc, Objective.parse(objective), params.B).as_dict()
    payload["constants"] = {k: v for k, v in dc.__dict__.items()}
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = "".join(f"{k}: {json.dumps(v)}\n" for k, v in payload.items())
    _emit(text, args.out)
    return EXIT_OK


def _n_realizations(args) -> int:
    n = args.realizations if args.realizations is not None else PROFILES[args.profile]
    if n < 1:
        raise ConfigError("--realizations must be >= 1")
    return n


def _cmd_sweep(args) -> int:
    if args.objective == "pareto":
        raise ConfigError("use the 'pareto' command for the Pareto experiment")
    spec = ExperimentSpec(
        params=_params(args),
        power_sweep_dbm=args.powers_dbm or (0.0, 10.0, 20.0, 30.0, 40.0),
        n_realizations=_n_realizations(args),
        schemes=tuple(args.scheme or ("a", "b", "c")),
        master_seed=args.seed,
        objectives=(args.objective,) if args.objective else ("rate", "ee"),
        n_jobs=args.jobs,
    )
    res = run_scheme(spec)
    _emit(res.to_csv() if args.format == "csv" else res.to_json(), args.out)
    return EXIT_OK


def _cmd_pareto(args) -> int:
    spec = ExperimentSpec(
        params=_params(args),
        power_sweep_dbm=args.powers_dbm or (20.0, 30.0, 40.0),
        n_realizations=_n_realizations(args),
        master_seed=args.seed,
        objectives=("pareto",),
        p_cn_sweep_dbm=tuple(args.p_cn_dbm),
        weights=tuple(args.weights) if args.weights else None,
        n_jobs=args.jobs,
    )
    res = pareto_experiment(spec)
    _emit(res.to_csv("pareto") if args.format == "csv" else res.to_json("pareto"), args.out)
    for (power, p_cn), s in sorted(frontier_summary(res.pareto).items()):
        log.info("P=%g dBm P_cn=%g dBm: rate spread %.6g bit/s, non-dominated=%s", power, p_cn,
                 s["rate_spread"], s["non_dominated"])
    return EXIT_OK


def _cmd_validate(args) -> int:
    n = args.realizations if args.realizations is not None else 1000
    report = run_oracle_suite(n_instances=n, seed=args.seed)
    text = "\n".join(report.lines()) + "\n"
    _emit(text, args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


COMMANDS = {"optimize": _cmd_optimize, "sweep": _cmd_sweep, "pareto": _cmd_pareto, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleRunError, InfeasibleInstanceError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RISError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
