"""``evdkit`` command line.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import bench
from .bench import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY, BenchConfig, ConfigError, VerificationError
from .matrix import DISTRIBUTIONS

COMMANDS = {
    "tridiag": bench.cmd_tridiag,
    "evd": bench.cmd_evd,
    "syr2k-bench": bench.cmd_syr2k_bench,
    "tune": bench.cmd_tune,
    "verify": bench.cmd_verify,
    "gen": bench.cmd_gen,
}


def _int_list(text: str):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which already matches the config-error code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=256, help="matrix dimension (default 256)")
    common.add_argument("--bandwidth", type=int, default=None, help="band width b (default 32)")
    common.add_argument("--blocksize", type=int, default=None, help="DBR block size nb (default 512)")
    common.add_argument("--workers", type=int, default=None, help="threads (default $EVDKIT_WORKERS or core count)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dist", choices=DISTRIBUTIONS, default="gaussian")
    common.add_argument("--input", default=None, help="read A from a SYMF/1 file")
    common.add_argument("--output", default=None, help="write the command's artifact here")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--verify", action="store_true", help="accumulate Q and check the residual")
    common.add_argument("--oracle", action="store_true", help="compare eigenvalues with Jacobi (n <= 512)")
    common.add_argument("--flat-panel-updates", action="store_true", help="disable recursive panel updates")
    common.add_argument("--serial-chase", action="store_true", help="force the serial bulge-chasing path")
    common.add_argument("--accumulate-q", action="store_true")

    p = _Parser(prog="evdkit", description="Two-stage symmetric eigensolver benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("tridiag", parents=[common], help="dense -> band -> tridiagonal")
    sub.add_parser("evd", parents=[common], help="tridiagonalize, then eigenvalues by QR iteration")
    s = sub.add_parser("syr2k-bench", parents=[common], help="recursive vs naive rank-2k update")
    s.add_argument("--k", type=_int_list, default=(16, 64, 256), help="inner dimensions, e.g. 16,64,256")
    t = sub.add_parser("tune", parents=[common], help="grid sweep over (b, nb)")
    t.add_argument("--grid-b", type=_int_list, default=(4, 8, 16))
    t.add_argument("--grid-nb", type=_int_list, default=(32, 64))
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--sizes", type=_int_list, default=(64, 128, 256))
    sub.add_parser("gen", parents=[common], help="write a random matrix as SYMF/1")
    return p


def config_from_args(ns: argparse.Namespace) -> BenchConfig:
    cfg = BenchConfig(
        command=ns.command, n=ns.n, b=ns.bandwidth, nb=ns.blocksize, workers=ns.workers,
        seed=ns.seed, dist=ns.dist, input=ns.input, output=ns.output, fmt=ns.fmt,
        verify=ns.verify, oracle=ns.oracle, flat_panel_updates=ns.flat_panel_updates,
        serial_chase=ns.serial_chase, accumulate_q=ns.accumulate_q,
    )
    for name in ("k", "grid_b", "grid_nb", "sizes"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        reports = COMMANDS[cfg.command](cfg)
    except VerificationError as exc:
        if exc.reports:
            sys.stdout.write(bench.format_reports(exc.reports, cfg.fmt))
        print(f"evdkit: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, ValueError) as exc:
        print(f"evdkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"evdkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if reports and cfg.command != "verify":
        sys.stdout.write(bench.format_reports(reports, cfg.fmt))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
