"""Command-line front end.

Flags use mW, mJ, ms and kbits; JSON documents are in SI units with the
unit in each key. Exit codes: 0 ok, 1 usage or malformed input,
2 infeasible problem or failed verification, 3 internal assertion.
Set ``EHRELAY_LOG_LEVEL`` (e.g. ``DEBUG``) to change logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional

from .baselines import BaselineKind, run_baseline
from .dwf import compute_dwf
from .exceptions import InfeasibleProblem, InvalidProfile
from .oracle import check_feasibility
from .policy import TransmissionPolicy
from .profile import ArrivalGenConfig, EhProfile, generate_poisson, require_valid
from .rate_model import DEFAULT_MODEL
from .rmax import RelayConstraints, rmax
from .sweep import DEFAULT_GRIDS, SweepConfig, run_sweep, to_csv
from .tmin import tmin

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3

MW = 1e-3
MJ = 1e-3
MS = 1e-3
KBIT = 1e3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(_read_text(path))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {what} from {path!r}: {exc}") from exc


def _load_profile(path: str) -> EhProfile:
    doc = _load_json(path, "profile")
    if isinstance(doc, dict) and "profile" in doc:
        doc = doc["profile"]
    try:
        return require_valid(EhProfile.from_dict(doc))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed profile: {exc}") from exc


def _constraints(args, fallback: Optional[dict] = None) -> Optional[RelayConstraints]:
    peak = args.peak_mw * MW if args.peak_mw is not None else None
    budget = args.budget_mj * MJ if args.budget_mj is not None else None
    if peak is None and budget is None:
        if fallback is not None:
            return RelayConstraints.from_dict(fallback)
        return None
    return RelayConstraints(peak, budget)


def _require_constraints(args) -> RelayConstraints:
    c = _constraints(args)
    if c is None:
        raise UsageError("give --peak-mw and/or --budget-mj")
    return c


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _positive(name):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text!r}")
        return v

    return parse


def _nonneg(name):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not v >= 0:
            raise argparse.ArgumentTypeError(f"{name} must be >= 0, got {text!r}")
        return v

    return parse


# --- subcommands ---------------------------------------------------------------


def cmd_dwf(args) -> int:
    profile = _load_profile(args.profile)
    d = compute_dwf(profile, args.horizon_ms * MS)
    _emit({"horizon_s": d.horizon, "decomposition": d.to_dict()})
    return EXIT_OK


def cmd_rmax(args) -> int:
    profile = _load_profile(args.profile)
    c = _require_constraints(args)
    horizon = args.horizon_ms * MS
    res = rmax(profile, horizon, c, DEFAULT_MODEL)
    _emit(
        {
            "objective": "rmax",
            "horizon_s": horizon,
            "constraints": c.to_dict(),
            "throughput_bits": res.throughput,
            "dwf_points_s": res.decomposition.point_times.tolist(),
            "policy": res.policy.to_dict(),
        }
    )
    return EXIT_OK


def cmd_tmin(args) -> int:
    profile = _load_profile(args.profile)
    c = _require_constraints(args)
    data = args.data_kbits * KBIT
    res = tmin(profile, data, c, DEFAULT_MODEL)
    _emit(
        {
            "objective": "tmin",
            "data_bits": data,
            "constraints": c.to_dict(),
            "completion_time_s": res.completion_time,
            "horizon_s": res.completion_time,
            "dwf_points_s": [] if res.decomposition is None else res.decomposition.point_times.tolist(),
            "policy": res.policy.to_dict(),
        }
    )
    return EXIT_OK


def cmd_baseline(args) -> int:
    profile = _load_profile(args.profile)
    c = _require_constraints(args)
    if args.objective == "rmax":
        if args.horizon_ms is None:
            raise UsageError("rmax baselines need --horizon-ms")
        target = args.horizon_ms * MS
    else:
        if args.data_kbits is None:
            raise UsageError("tmin baselines need --data-kbits")
        target = args.data_kbits * KBIT
    res = run_baseline(args.kind, args.objective, profile, target, c, DEFAULT_MODEL)
    doc = {"objective": args.objective, "kind": res.kind.value, "constraints": c.to_dict()}
    if args.objective == "rmax":
        doc.update(horizon_s=target, throughput_bits=res.throughput)
    else:
        doc.update(data_bits=target, completion_time_s=res.completion_time, horizon_s=res.completion_time)
    doc["policy"] = res.policy.to_dict()
    _emit(doc)
    return EXIT_OK


def cmd_verify(args) -> int:
    profile = _load_profile(args.profile)
    doc = _load_json(args.policy, "policy")
    if not isinstance(doc, dict):
        raise UsageError("policy document must be a JSON object")
    try:
        policy = TransmissionPolicy.from_dict(doc.get("policy", doc))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed policy: {exc}") from exc
    c = _constraints(args, doc.get("constraints"))
    horizon = args.horizon_ms * MS if args.horizon_ms is not None else doc.get("horizon_s")
    report = check_feasibility(policy, profile, c, horizon, DEFAULT_MODEL)
    _emit(report.to_dict())
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def cmd_gen_profile(args) -> int:
    cfg = ArrivalGenConfig(args.lambda_e, args.energy_unit_mj * MJ, args.horizon_ms * MS, args.seed)
    _emit(generate_poisson(cfg).to_dict())
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = DEFAULT_GRIDS[args.variable] if args.values is None else tuple(v * MW for v in args.values)
    cfg = SweepConfig(
        objective=args.objective,
        sweep_variable=args.variable,
        sweep_values=values,
        trials=args.trials,
        arrival_rate=args.lambda_e,
        eh_rate=args.eh_rate_mw * MW,
        horizon=args.horizon_ms * MS,
        data=args.data_kbits * KBIT,
        relay_peak=args.peak_mw * MW if args.peak_mw is not None else None,
        relay_energy=args.budget_mj * MJ if args.budget_mj is not None else None,
        seed=args.seed,
    )
    rows = run_sweep(cfg, jobs=args.jobs)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            to_csv(rows, fh)
    else:
        to_csv(rows, sys.stdout)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def _add_constraints(p) -> None:
    p.add_argument("--peak-mw", type=_positive("--peak-mw"), help="relay peak power in mW")
    p.add_argument("--budget-mj", type=_positive("--budget-mj"), help="relay total energy in mJ")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehrelay", description="Two-hop relay scheduling with an energy-harvesting source.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dwf", help="single-hop directional water-filling points of a profile")
    p.add_argument("--profile", required=True, help="profile JSON path, or - for stdin")
    p.add_argument("--horizon-ms", required=True, type=_positive("--horizon-ms"), help="horizon in ms")
    p.set_defaults(func=cmd_dwf)

    p = sub.add_parser("rmax", help="maximum throughput over a fixed horizon")
    p.add_argument("--profile", required=True, help="profile JSON path, or - for stdin")
    p.add_argument("--horizon-ms", required=True, type=_positive("--horizon-ms"), help="horizon in ms")
    _add_constraints(p)
    p.set_defaults(func=cmd_rmax)

    p = sub.add_parser("tmin", help="minimum time to deliver a fixed amount of data")
    p.add_argument("--profile", required=True, help="profile JSON path, or - for stdin")
    p.add_argument("--data-kbits", required=True, type=_nonneg("--data-kbits"), help="data to deliver in kbits")
    _add_constraints(p)
    p.set_defaults(func=cmd_tmin)

    p = sub.add_parser("baseline", help="comparison policies and the non-EH upper bound")
    p.add_argument("--kind", required=True, choices=[k.value for k in BaselineKind], help="baseline policy")
    p.add_argument("--objective", choices=("rmax", "tmin"), default="rmax", help="problem to solve (default rmax)")
    p.add_argument("--profile", required=True, help="profile JSON path, or - for stdin")
    p.add_argument("--horizon-ms", type=_positive("--horizon-ms"), help="horizon in ms (rmax)")
    p.add_argument("--data-kbits", type=_nonneg("--data-kbits"), help="data in kbits (tmin)")
    _add_constraints(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("verify", help="check a policy against every constraint")
    p.add_argument("--profile", required=True, help="profile JSON path")
    p.add_argument("--policy", default="-", help="policy or solver output JSON path (default: stdin)")
    p.add_argument("--horizon-ms", type=_positive("--horizon-ms"), help="horizon in ms (default: from the document)")
    _add_constraints(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-profile", help="draw a Poisson EH profile")
    p.add_argument("--lambda-e", required=True, type=_positive("--lambda-e"), help="arrival rate in 1/s")
    p.add_argument("--energy-unit-mj", required=True, type=_positive("--energy-unit-mj"), help="packet energy in mJ")
    p.add_argument("--horizon-ms", required=True, type=_positive("--horizon-ms"), help="window in ms")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.set_defaults(func=cmd_gen_profile)

    p = sub.add_parser("sweep", help="Monte Carlo sweep, CSV of mean objective per policy")
    p.add_argument("--objective", choices=("rmax", "tmin"), default="rmax", help="default rmax")
    p.add_argument("--variable", choices=sorted(DEFAULT_GRIDS), default="eh_rate", help="swept quantity")
    p.add_argument("--values", type=_positive("--values"), nargs="+", help="sweep values in mW (default grid if omitted)")
    p.add_argument("--trials", type=int, default=1000, help="trials per sweep value (default 1000)")
    p.add_argument("--lambda-e", type=_positive("--lambda-e"), default=1.0, help="arrival rate in 1/s (default 1)")
    p.add_argument("--eh-rate-mw", type=_positive("--eh-rate-mw"), default=3.0, help="average EH rate when not swept")
    p.add_argument("--horizon-ms", type=_positive("--horizon-ms"), default=100.0, help="horizon in ms (default 100)")
    p.add_argument("--data-kbits", type=_positive("--data-kbits"), default=20.0, help="tmin data in kbits (default 20)")
    p.add_argument("--peak-mw", type=_positive("--peak-mw"), default=10.0, help="relay peak power when not swept")
    p.add_argument("--budget-mj", type=_positive("--budget-mj"), help="relay energy budget in mJ (optional)")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("EHRELAY_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidProfile) as exc:
        print(f"ehrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleProblem as exc:
        print(f"ehrelay: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AssertionError as exc:
        print(f"ehrelay: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"ehrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
