"""Command-line entry point: ``sweeplab <mode> [options]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .harness import ConfigError, ExperimentConfig, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

_FIELDS = {
    "N": int, "s": float, "r": float, "sample_size": int, "reps": int, "seed": int,
    "L": int, "q": float, "H": int, "workers": int, "out": str, "format": str, "preset": str,
    "J": lambda v: tuple(int(x) for x in str(v).split(",")),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--N", type=int, help="half the population size")
    p.add_argument("--s", type=float, help="selection coefficient in (0,1)")
    p.add_argument("--r", type=float, help="recombination probability in [0,1]")
    p.add_argument("--sample-size", dest="sample_size", type=int, help="number of sampled lineages")
    p.add_argument("--reps", type=int, help="replicates or draws")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sweeplab", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    moran = sub.add_parser("moran", help="conditioned Moran sweeps with ancestral trace")
    _common(moran)
    moran.add_argument("--J", type=_FIELDS["J"], help="comma-separated B-count levels for escape counts")
    qp = sub.add_parser("qp", help="independent coin-flip partition law")
    _common(qp)
    pb = sub.add_parser("paintbox", help="stick-breaking partition law")
    _common(pb)
    pb.add_argument("--L", type=int, help="number of levels (default floor(2Ns))")
    pb.add_argument("--q", type=float, help="per-level thinning probability")
    sk = sub.add_parser("skeleton", help="Yule skeleton partition law")
    _common(sk)
    sk.add_argument("--H", type=int, help="skeleton size")
    tb = sub.add_parser("table", help="reproduce a preset comparison table")
    _common(tb)
    tb.add_argument("--preset", choices=("sweep-2004",), default=None)
    tb.add_argument("--L", type=int, help="paintbox levels")
    va = sub.add_parser("validate", help="small-population occupancy and one-step checks")
    _common(va)
    return parser


def read_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _FIELDS[key](value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _FIELDS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    mode = args.mode
    if mode == "paintbox" and values.get("q"):
        mode = "paintbox_thinned"
    return ExperimentConfig(mode=mode, **values).validate()


def _writable(path: str) -> bool:
    target = path if os.path.exists(path) else (os.path.dirname(os.path.abspath(path)))
    return os.path.isdir(os.path.dirname(os.path.abspath(path))) and os.access(target, os.W_OK)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            stream=sys.stderr, format="%(asctime)s %(message)s",
        )
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"sweeplab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"sweeplab: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if cfg.out and not _writable(cfg.out):
        print(f"sweeplab: cannot write output: {cfg.out}", file=sys.stderr)
        return EXIT_IO
    report = run_experiment(cfg)
    try:
        if cfg.out:
            report.write(cfg.out, cfg.format)
        else:
            sys.stdout.write(report.to_csv() if cfg.format == "csv" else report.to_json())
    except OSError as exc:
        print(f"sweeplab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
