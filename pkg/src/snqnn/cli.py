"""Command-line entry point: ``python -m snqnn <subcommand> [flags]``.

Exit codes: 0 on success, 2 on invalid input, 3 when a size limit is hit.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from . import harness
from .errors import CapacityError, ValidationError
from .harness import ExperimentConfig


def _n_range(text: str) -> tuple[int, int]:
    """``4..12``, ``4-12`` or ``4:12`` (inclusive)."""
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            try:
                return int(lo), int(hi)
            except ValueError:
                break
    raise argparse.ArgumentTypeError(f"bad range {text!r}; use lo..hi")


def _angle(tok: str) -> float:
    """``1.57``, ``pi``, ``pi/2``, ``3pi/4`` or ``0.5*pi``."""
    m = re.fullmatch(r"([0-9.]+)?\*?(pi)?(?:/([0-9.]+))?", tok.strip().lower())
    if not m or not (m.group(1) or m.group(2)):
        raise argparse.ArgumentTypeError(f"bad angle {tok!r}")
    try:
        val = float(m.group(1)) if m.group(1) else 1.0
        if m.group(2):
            val *= math.pi
        if m.group(3):
            val /= float(m.group(3))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad angle {tok!r}") from None
    return val


def _floats(text: str) -> tuple[float, ...]:
    return tuple(_angle(t) for t in text.split(","))


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snqnn", description="Experiments on permutation-equivariant quantum neural networks."
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in harness.EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--n", type=int)
        p.add_argument("--n-range", type=_n_range, dest="n_range")
        p.add_argument("--depth-rule", dest="depth_rule",
                       help="fixed L, or multiples of n / Te, e.g. 20, 3n, te, 5te")
        p.add_argument("--depths", type=_ints, help="comma-separated depth grid (train)")
        p.add_argument("--family", help="state family, e.g. regular:3, er:0.4, symmetric")
        p.add_argument("--obs", help="SumX, SumXX or ProdX")
        p.add_argument("--generator", help="SumX, SumY or SumZZ")
        p.add_argument("--samples", type=int, help="parameter draws per state")
        p.add_argument("--states", type=int, help="input states per system size")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (CSV)")
        p.add_argument("--p", type=float, help="Erdos-Renyi edge probability")
        p.add_argument("--phi", type=_floats, help="controlled-phase angle(s), e.g. pi,pi/2")
        p.add_argument("--restarts", type=int)
        p.add_argument("--M", type=int, dest="M", help="training set size")
        p.add_argument("--test-size", type=int, dest="test_size")
        p.add_argument("--trials", type=int)
        p.add_argument("--mu", type=int, help="gradient position (default: middle layer)")
        p.add_argument("--split", action="store_true", default=None,
                       help="also report connected/disconnected subsets")
        p.add_argument("--hea", action="store_true", default=None,
                       help="train the hardware-efficient baseline too")
        p.add_argument("--hea-params", type=int, dest="hea_params")
        p.add_argument("--maxiter", type=int)
        p.add_argument("--loss", choices=harness.LOSSES)
        p.add_argument("--margin", type=float)
        p.add_argument("--dump-config", action="store_true",
                       help="print the resolved config as JSON and exit")
    return parser


_NON_CONFIG = {"config", "dump_config"}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG and v is not None}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        values.pop("experiment")
        cfg = ExperimentConfig.from_json(text, **values)
        if cfg.experiment != args.experiment:
            raise ValidationError(
                f"config is for {cfg.experiment!r}, not {args.experiment!r}")
        return cfg
    if "n" not in values and "n_range" not in values:
        values["n_range"] = (4, 12) if args.experiment == "trainability-table" else None
        if values["n_range"] is None:
            raise ValidationError("give --n or --n-range")
    if args.experiment == "trainability-table" and "family" not in values:
        values["family"] = "table"
    return ExperimentConfig(**values)


def run(cfg: ExperimentConfig, stdout=None) -> None:
    stdout = stdout or sys.stdout
    exp = cfg.experiment
    if exp == "variance-scan":
        stdout.write(harness.write_csv(harness.cmd_variance_scan(cfg), cfg.out))
    elif exp == "compare-analytic":
        stdout.write(harness.write_csv(harness.cmd_compare_analytic(cfg), cfg.out))
    elif exp == "irrep-contributions":
        stdout.write(harness.write_csv(harness.cmd_irrep_contributions(cfg), cfg.out))
    elif exp == "qfim-scan":
        ranks, ovp = harness.cmd_qfim_scan(cfg)
        harness.write_csv(ranks, cfg.out)
        stdout.write(harness.write_csv(ovp, harness.sibling(cfg.out, "ovp.csv")))
    elif exp == "train":
        rows, trace, summary = harness.cmd_train(cfg)
        stdout.write(harness.write_csv(rows, cfg.out))
        harness.write_csv(trace, harness.sibling(cfg.out, "trace.csv"))
        text = json.dumps(summary, indent=2) + "\n"
        if cfg.out:
            Path(harness.sibling(cfg.out, "summary.json")).write_text(text)
        stdout.write(text)
    elif exp == "generalization":
        stdout.write(harness.write_csv(harness.cmd_generalization(cfg), cfg.out))
    elif exp == "trainability-table":
        rows = harness.cmd_trainability_table(cfg)
        cols = ["family", "label", "expected", "match", "delta_aic", "exp_slope", "exp_slope_se"]
        md = harness.markdown_table(rows, cols)
        if cfg.out and cfg.out.endswith(".md"):
            Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
            Path(cfg.out).write_text(md)
        else:
            harness.write_csv(rows, cfg.out)
        stdout.write(md)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_json())
            return 0
        run(cfg)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
