"""punclink command line: simulate sweeps and plot result files."""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    SimConfig,
    load_config,
    run_sweep,
    sidecar_path,
    write_csv,
    write_sidecar,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="punclink",
        description="Punctured-LDPC link simulator with an optional CPM inner loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER/FER sweep")
    sim.add_argument("--config", help="key = value config file")
    sim.add_argument("--mode", choices=["no-cpm", "cpm"])
    sim.add_argument("--code", help="registry name or alist:<path>")
    sim.add_argument("--delta", help="comma list of puncturing percentages")
    sim.add_argument("--ebn0", help="start:stop:step or comma list, in dB")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out", help="CSV output path (default results.csv)")
    sim.add_argument("--plot", help="also render a waterfall figure to this file")
    sim.add_argument("--quiet", action="store_true", help="suppress progress lines")

    plot = sub.add_parser("plot", help="render a waterfall figure from a CSV")
    plot.add_argument("results", help="CSV produced by punclink simulate")
    plot.add_argument("--out", default=None, help="figure path (default <csv>.png)")
    plot.add_argument("--no-fer", action="store_true", help="plot BER curves only")
    return parser


def _cmd_simulate(args) -> int:
    sim = load_config(args.config) if args.config else SimConfig()
    for name in ("mode", "code", "delta", "ebn0", "seed", "workers", "out"):
        value = getattr(args, name)
        if value is not None:
            setattr(sim, name, value)

    def progress(ctx, res):
        if args.quiet:
            return
        pt, acc = res.spec, res.acc
        print(
            f"delta={pt.delta_echo}% ebn0={pt.ebn0_db:g} dB: "
            f"{acc.frames} frames, {acc.frame_errors} frame errors "
            f"({res.wall_clock_s:.1f}s)",
            file=sys.stderr,
        )

    ctx, results = run_sweep(sim, progress=progress)
    write_csv(sim.out, ctx, results)
    write_sidecar(sidecar_path(sim.out), ctx, results)
    print(sim.out)
    if args.plot:
        from .plots import load_results_csv, render_ber_figure

        render_ber_figure(load_results_csv(sim.out), args.plot)
        print(args.plot)
    return 0


def _cmd_plot(args) -> int:
    from .plots import load_results_csv, render_ber_figure

    out = args.out or args.results + ".png"
    render_ber_figure(load_results_csv(args.results), out, show_fer=not args.no_fer)
    print(out)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_plot(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
