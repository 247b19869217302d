"""Command-line interface.

Subcommands map one-to-one onto the harness runners: ``variance-map`` and
``eigvals`` emit analytic artifacts, ``se-sim``/``se-theory``/``ns-compare``
run the rate estimators, and ``preset`` expands a named experiment family
into its CSV series.  All outputs are CSV with a leading configuration
comment line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness


def _add_geometry_flags(parser: argparse.ArgumentParser, receive: bool = True) -> None:
    parser.add_argument("--ns", type=int, default=None,
                        help="transmit surface patch count (near-square grid)")
    parser.add_argument("--delta-s", default=None, metavar="FRAC",
                        help="transmit patch spacing in wavelengths, e.g. 1/6")
    if receive:
        parser.add_argument("--nr", type=int, default=None,
                            help="receive surface patch count (near-square grid)")
        parser.add_argument("--delta-r", default=None, metavar="FRAC",
                            help="receive patch spacing in wavelengths, e.g. 1/3")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--users", type=int, default=None, help="number of users")
    parser.add_argument("--snr", default=None, metavar="A:B:STEP",
                        help="SNR grid in dB, a:b:step or a comma list")
    parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    parser.add_argument("--seed", type=int, default=None, help="root seed")
    parser.add_argument("--scheme", default=None, metavar="LIST",
                        help="comma list from mrt,zf,mmse,ns-zf")
    parser.add_argument("--iters", default=None, metavar="N[,N...]",
                        help="series order(s) for ns-zf")
    parser.add_argument("--config", default=None, metavar="JSON",
                        help="JSON settings file; flags override it")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holosim",
        description="Wavenumber-domain channel statistics and precoding benchmarks "
                    "for dense planar surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    vmap = sub.add_parser("variance-map", help="per-cell variance profile of a surface")
    _add_geometry_flags(vmap, receive=False)
    vmap.add_argument("--out", default="variance-map.csv", help="output CSV path")

    eig = sub.add_parser("eigvals", help="correlation spectrum of one user")
    _add_geometry_flags(eig)
    eig.add_argument("--out", default="eigvals.csv", help="output CSV path")

    sim = sub.add_parser("se-sim", help="Monte Carlo spectral efficiency")
    _add_geometry_flags(sim)
    _add_run_flags(sim)
    sim.add_argument("--theory", action="store_true",
                     help="also emit closed-form curves where available")
    sim.add_argument("--out", default="se-sim.csv", help="output CSV path")

    theory = sub.add_parser("se-theory", help="closed-form spectral efficiency")
    _add_geometry_flags(theory)
    _add_run_flags(theory)
    theory.add_argument("--out", default="se-theory.csv", help="output CSV path")

    nscmp = sub.add_parser("ns-compare", help="exact ZF versus series inversion")
    _add_geometry_flags(nscmp)
    _add_run_flags(nscmp)
    nscmp.add_argument("--out", default="ns-compare.csv", help="output CSV path")

    preset = sub.add_parser("preset", help="run a named experiment family")
    preset.add_argument("name", choices=harness.PRESET_NAMES)
    preset.add_argument("--scale", type=float, default=1.0,
                        help="patch-count multiplier for every surface")
    preset.add_argument("--trials", type=int, default=None, help="trial override")
    preset.add_argument("--seed", type=int, default=None, help="seed override")
    preset.add_argument("--out", default=".", help="output directory")
    return parser


def _config_from_args(args: argparse.Namespace) -> harness.ScenarioConfig:
    return harness.parse_config(
        path=getattr(args, "config", None),
        ns=args.ns,
        nr=getattr(args, "nr", None),
        delta_s=args.delta_s,
        delta_r=getattr(args, "delta_r", None),
        users=getattr(args, "users", None),
        snr=getattr(args, "snr", None),
        trials=getattr(args, "trials", None),
        seed=getattr(args, "seed", None),
        scheme=getattr(args, "scheme", None),
        iters=_single_order(getattr(args, "iters", None)),
    )


def _single_order(value) -> int | None:
    if value is None:
        return None
    return int(str(value).split(",")[0])


def _order_list(value, default: tuple[int, ...]) -> tuple[int, ...]:
    if value is None:
        return default
    try:
        orders = tuple(int(part) for part in str(value).split(","))
    except ValueError as exc:
        raise ValueError(f"invalid value for iters: {value!r}") from exc
    if not orders:
        raise ValueError(f"invalid value for iters: {value!r}")
    return orders


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns a process exit status."""
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "variance-map":
            config = harness.parse_config(ns=args.ns, delta_s=args.delta_s)
            harness.run_variance_map(config.tx, Path(args.out))
        elif args.command == "eigvals":
            config = _config_from_args(args)
            harness.run_eigvals(config, Path(args.out))
        elif args.command == "se-sim":
            config = _config_from_args(args)
            harness.run_se_sim(config, Path(args.out), include_theory=args.theory)
        elif args.command == "se-theory":
            config = _config_from_args(args)
            harness.run_se_theory(config, Path(args.out))
        elif args.command == "ns-compare":
            config = _config_from_args(args)
            orders = _order_list(args.iters, (2, 3, 4, 7))
            harness.run_ns_compare(config, orders, Path(args.out))
        else:
            return harness.run_preset(
                args.name,
                scale=args.scale,
                trials=args.trials,
                seed=args.seed,
                out=args.out,
            )
    except Exception as exc:  # noqa: BLE001 - CLI boundary turns failures into status
        print(f"holosim {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
