"""Command-line front end for the FER experiment harness.

Subcommands: ``run`` (one experiment), ``sweep`` (FER vs drive amplitude,
CSV plus an SVG plot), ``compare`` (shared vs dedicated decoding on the
same channel realizations).  Exit status is nonzero when an assertion
fails, e.g. when the two decoder modes disagree.  Set W2A_OWC_LOG to a
logging level name to control verbosity.
"""

import argparse
import logging
import os
import sys

from .config import ConfigError, load_settings
from .harness import compare_modes, run_experiment, sweep_vpp

log = logging.getLogger("w2a_owc.cli")


def _parse_vpp_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad vpp list '{text}'") from exc


def _common_overrides(args) -> dict:
    return {
        "seed": args.seed,
        "n_frames": args.frames,
        "mode": getattr(args, "mode", None),
    }


def _load(args, **extra):
    overrides = {k: v for k, v in {**_common_overrides(args), **extra}.items()}
    return load_settings(path=args.config, **overrides)


def cmd_run(args) -> int:
    settings = _load(args, vpp=args.vpp)
    report = run_experiment(settings, timeline_out=args.timeline_out)
    for line in report.lines():
        print(line)
    return 0


def cmd_sweep(args) -> int:
    settings = _load(args)
    results = sweep_vpp(settings, _parse_vpp_list(args.vpp_list), csv_out=args.out)
    for vpp, report in results:
        print(f"vpp={vpp:g}: avg_fer={report.average_fer:.6e}")
    print(f"csv written to {args.out}")
    if args.plot:
        _plot_sweep(results, args.plot)
        print(f"plot written to {args.plot}")
    return 0


def cmd_compare(args) -> int:
    settings = _load(args)
    try:
        comparisons = compare_modes(settings, _parse_vpp_list(args.vpp_list))
    except AssertionError as exc:
        print(f"comparison FAILED: {exc}", file=sys.stderr)
        return 1
    for comp in comparisons:
        print(f"vpp={comp.vpp:g}: shared avg_fer={comp.shared.average_fer:.6e} "
              f"individual avg_fer={comp.individual.average_fer:.6e} (identical)")
    return 0


def _plot_sweep(results, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    vpps = [v for v, _ in results]
    avg = [r.average_fer for _, r in results]
    fig, ax = plt.subplots(figsize=(6, 4))
    n_paths = results[0][1].n_paths
    for p in range(n_paths):
        ax.semilogy(vpps, [max(r.fer_per_path[p], 1e-12) for _, r in results],
                    marker="o", linestyle="--", label=f"path {p}")
    ax.semilogy(vpps, [max(a, 1e-12) for a in avg], marker="s", color="k",
                label="average")
    ax.set_xlabel("drive amplitude (Vpp)")
    ax.set_ylabel("frame error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="w2a-owc",
        description="Multi-channel water-to-air optical link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file (defaults apply without one)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--frames", type=int, default=None, help="frames per path")

    p_run = sub.add_parser("run", help="run one experiment")
    common(p_run)
    p_run.add_argument("--vpp", type=float, default=None)
    p_run.add_argument("--mode", choices=["shared", "individual"], default=None)
    p_run.add_argument("--timeline-out", default=None,
                       help="write the shared-decoder timeline to this file")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep drive amplitude")
    common(p_sweep)
    p_sweep.add_argument("--vpp-list", required=True, help="comma-separated Vpp values")
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.add_argument("--plot", default=None, help="SVG output path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="shared vs dedicated decoding")
    common(p_cmp)
    p_cmp.add_argument("--vpp-list", required=True)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("W2A_OWC_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
