"""Command-line surface: parameter sweeps, validation and simulation runs.

Subcommands: ``rates``, ``contour``, ``validate``, ``mc``, ``qsim``.  All
numeric CSV output uses the fixed ``%.6e`` format with stable headers and row
order; passing ``--out`` also writes a ``<out>.meta.json`` companion recording
the fully resolved parameter set.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import acceptance, fidelity, mcsim, rates
from .params import (ConfigError, ParameterSet, default_parameters,
                     load_config, to_dict, with_link)

_FMT = "%.6e"


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable on a fixed grid."""

    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"
    overrides: tuple[str, ...] = ()

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"{self.variable}: a sweep needs at least two points")
        if not self.start < self.stop:
            raise ValueError(f"{self.variable}: sweep start must be below stop")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.variable}: scale must be linear or log")
        if self.scale == "log" and self.start <= 0:
            raise ValueError(f"{self.variable}: log sweeps need a positive start")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop),
                               self.points)
        return np.linspace(self.start, self.stop, self.points)


def _fmt(value: float) -> str:
    return _FMT % value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="parameter file (flat key = value text)")
    common.add_argument("--param", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override one parameter; repeatable")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, default=1,
                        help="RNG seed for stochastic commands")
    common.add_argument("--trials", type=int, default=10_000,
                        help="Monte Carlo trial count")

    parser = argparse.ArgumentParser(
        prog="qdrepeater",
        description="performance model of a spin-photon repeater chain")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", parents=[common],
                             help="distribution rate vs distance sweep")
    p_rates.add_argument("--l-min-km", type=float, default=100.0)
    p_rates.add_argument("--l-max-km", type=float, default=1000.0)
    p_rates.add_argument("--l-points", type=int, default=19)
    p_rates.add_argument("--log", action="store_true",
                         help="logarithmic distance spacing")
    p_rates.add_argument("--source-rate", type=float, default=1e10,
                         help="direct-transmission source rate (Hz)")

    p_cont = sub.add_parser("contour", parents=[common],
                            help="overall fidelity on a Purcell x polarization grid")
    p_cont.add_argument("--fp-min", type=float, default=100.0)
    p_cont.add_argument("--fp-max", type=float, default=1000.0)
    p_cont.add_argument("--fp-points", type=int, default=10)
    p_cont.add_argument("--pol-min", type=float, default=None)
    p_cont.add_argument("--pol-max", type=float, default=None)
    p_cont.add_argument("--pol-points", type=int, default=None)
    p_cont.add_argument("--force", action="store_true",
                        help="compose even when validity warnings fire")

    sub.add_parser("validate", parents=[common],
                   help="run the full acceptance suite")

    p_mc = sub.add_parser("mc", parents=[common],
                          help="Monte Carlo waiting-time simulation")
    p_mc.add_argument("--n", type=int, default=None,
                      help="nesting level override")
    p_mc.add_argument("--p0", type=float, default=None,
                      help="override the derived link success probability")
    p_mc.add_argument("--p-swap", type=float, default=None,
                      help="override the derived swap success probability")
    p_mc.add_argument("--cutoff", type=float, default=None,
                      help="memory storage cutoff in seconds")

    sub.add_parser("qsim", parents=[common],
                   help="exact quantum-oracle consistency checks")
    return parser


def _load(args) -> ParameterSet:
    if args.config:
        return load_config(args.config, overrides=args.param)
    return default_parameters(overrides=args.param)


def _emit(text: str, args, ps: ParameterSet, argv: list[str]) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        meta = {"command": argv, "seed": args.seed,
                "parameters": to_dict(ps), "provenance": ps.provenance}
        with open(args.out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
    else:
        sys.stdout.write(text)


_CURVE_PRODUCTS = {"B": 0.72, "C": 0.5, "D": 0.4}


def cmd_rates(args, ps: ParameterSet, argv: list[str]) -> int:
    try:
        sweep = SweepSpec("L_km", args.l_min_km, args.l_max_km, args.l_points,
                          scale="log" if args.log else "linear")
    except ValueError as exc:
        print(f"invalid distance sweep: {exc}", file=sys.stderr)
        return 2
    grid = sweep.grid()

    lines = ["L_km,rate_direct,rate_B,rate_C,rate_D,rate_2plus2"]
    pair_scheme = with_link(ps, eta_s=0.65)
    for l_km in grid:
        L = l_km * 1e3
        row = [_fmt(l_km),
               _fmt(rates.direct_transmission_rate(L, args.source_rate,
                                                   ps.link.L_att))]
        for product in _CURVE_PRODUCTS.values():
            cfg = with_link(ps, L_total=L, p_emit=product, eta_c=1.0,
                            eta_s=product)
            row.append(_fmt(rates.mean_time_parallel(cfg).rate))
        row.append(_fmt(rates.mean_time_two_plus_two(
            with_link(pair_scheme, L_total=L)).rate))
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args, ps, argv)
    return 0


def _default_pol_grid() -> list[float]:
    grid = [round(0.80 + 0.01 * i, 2) for i in range(20)]  # 0.80 .. 0.99
    return grid + [0.999, 1.0]


def cmd_contour(args, ps: ParameterSet, argv: list[str]) -> int:
    try:
        if args.fp_min <= 0:
            raise ValueError("F_p: sweep must start above zero")
        fp_grid = SweepSpec("F_p", args.fp_min, args.fp_max,
                            args.fp_points).grid()
        if args.pol_min is not None:
            if args.pol_min < 0.80 or (args.pol_max or 1.0) > 1.0:
                raise ValueError("polarization grid must stay within "
                                 "[0.80, 1.0] (tabulated transfer data)")
            pol_grid = SweepSpec("polarization", args.pol_min, args.pol_max,
                                 args.pol_points or 0).grid()
        else:
            pol_grid = np.array(_default_pol_grid())
    except (TypeError, ValueError) as exc:
        print(f"invalid sweep: {exc}", file=sys.stderr)
        return 2

    contour = fidelity.fidelity_contour(ps, fp_grid, pol_grid,
                                        n_nest=ps.link.n_nest)
    warned = [(fp, pol, b.warnings) for fp, pol, b in contour.rows()
              if b.warnings]
    if warned and not args.force:
        fp, pol, notes = warned[0]
        print(f"refusing to compose out-of-regime budgets "
              f"(first at F_p={fp:g}, pol={pol:g}: {notes[0]}); "
              f"re-run with --force to override", file=sys.stderr)
        return 1
    for fp, pol, notes in warned:
        for note in notes:
            print(f"warning: F_p={fp:g} pol={pol:g}: {note}", file=sys.stderr)

    lines = ["F_p,polarization,F_ent,F_transfer,F_gate,F_readout,F_total"]
    for fp, pol, b in contour.rows():
        lines.append(",".join([_fmt(fp), _fmt(pol), _fmt(b.F_ent),
                               _fmt(b.F_transfer), _fmt(b.F_gate),
                               _fmt(b.F_readout), _fmt(b.F_total)]))
    _emit("\n".join(lines) + "\n", args, ps, argv)
    return 0


def cmd_validate(args, ps: ParameterSet, argv: list[str]) -> int:
    results = acceptance.run_all(print)
    budget = fidelity.fidelity_budget(ps)
    for note in budget.warnings:
        print(f"config warning: {note}")
    print(f"config F_total (n={budget.n_nest}) = {budget.F_total:.4f}"
          + ("  [out of validity regime]" if budget.warnings else ""))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def cmd_mc(args, ps: ParameterSet, argv: list[str]) -> int:
    link = ps.link if args.n is None else with_link(ps, n_nest=args.n).link
    analytic = rates.mean_time_parallel(
        ps if args.n is None else with_link(ps, n_nest=args.n))
    p0 = args.p0 if args.p0 is not None else analytic.p0
    p_swap = args.p_swap if args.p_swap is not None else analytic.p_swap
    slot = link.L0 / link.c_fiber + link.tau_init
    cutoff = args.cutoff if args.cutoff is not None else math.inf
    cfg = mcsim.ProtocolConfig(n_nest=link.n_nest, p0=p0, p_swap=p_swap,
                               slot_time=slot, trials=args.trials,
                               seed=args.seed, memory_cutoff=cutoff)
    records = mcsim.run_trials(cfg)
    stats = mcsim.timing_stats(records, cfg)
    if args.p0 is None and args.p_swap is None:
        target = analytic
    else:
        target = 1.5**cfg.n_nest * slot / (p0 * p_swap**cfg.n_nest)
    print(mcsim.compare_with_analytic(cfg, target, stats=stats))
    success = [r for r in records if r.success]
    if success:
        storage = np.array([r.max_storage_time for r in success])
        print(f"success fraction {len(success) / len(records):.4f}; "
              f"max-storage median {np.median(storage):.4g} s; "
              f"fraction exceeding 1 s: {(storage > 1.0).mean():.4f}")
    if args.out:
        lines = ["trial,total_time_s,swap_failures,max_storage_s"]
        for i, r in enumerate(records):
            lines.append(f"{i},{_fmt(r.total_time)},{r.swap_failures},"
                         f"{_fmt(r.max_storage_time)}")
        _emit("\n".join(lines) + "\n", args, ps, argv)
    return 0


def cmd_qsim(args, ps: ParameterSet, argv: list[str]) -> int:
    ok, detail = acceptance.check_quantum_oracle()
    for part in detail.split("; "):
        print(part)
    print("quantum oracle:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


_COMMANDS = {
    "rates": cmd_rates,
    "contour": cmd_contour,
    "validate": cmd_validate,
    "mc": cmd_mc,
    "qsim": cmd_qsim,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        ps = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    return _COMMANDS[args.command](args, ps, ["qdrepeater"] + argv)


if __name__ == "__main__":
    raise SystemExit(main())
