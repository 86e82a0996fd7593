"""Benchmark and verification harness behind the ``evdkit`` command.

Every command returns a list of :class:`RunReport` rows. Rows are printed as
CSV (fixed column order) or as one JSON object per line.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import io as mio
from .band_reduction import DbrConfig, dbr, recursive_panel_schedule
from .bulge import chase_parallel, chase_serial, default_workers
from .flops import flop_model
from .matrix import (
    DISTRIBUTIONS,
    EPS,
    SymmetricMatrix,
    make_band,
    make_symmetric,
    similarity_residual,
    tol_orth,
    trace,
)
from .pipeline import tridiagonalize
from .rank2k import syr2k_naive, syr2k_recursive
from .tridiag_eig import eig_qr, jacobi_oracle

SCHEMA_VERSION = 1
CSV_COLUMNS = ("schema_version", "stage", "n", "b", "nb", "workers", "seconds", "gflops", "residual", "seed")
STAGES = ("dbr", "chase", "eig", "total", "syr2k", "direct")
VERIFY_RESIDUAL = 1e-12
ORACLE_MAX_N = 512

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4

REPORT_SCHEMA = {
    "type": "object",
    "required": list(CSV_COLUMNS),
    "properties": {
        "schema_version": {"type": "integer", "const": SCHEMA_VERSION},
        "stage": {"enum": list(STAGES)},
        "n": {"type": "integer", "minimum": 1},
        "b": {"type": "integer", "minimum": 0},
        "nb": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "seconds": {"type": "number", "minimum": 0},
        "gflops": {"type": ["number", "null"]},
        "residual": {"type": ["number", "null"]},
        "seed": {"type": "integer"},
        "extra": {"type": "object"},
    },
}


class ConfigError(ValueError):
    pass


class VerificationError(RuntimeError):
    def __init__(self, msg, reports=None):
        super().__init__(msg)
        self.reports = reports or []


@dataclass
class RunReport:
    stage: str
    n: int
    b: int
    nb: int
    workers: int
    seconds: float
    gflops: float = float("nan")
    residual: float = float("nan")
    seed: int = 0
    schema_version: int = SCHEMA_VERSION
    # not part of the CSV; carried in JSON only
    extra: Dict = field(default_factory=dict)

    @classmethod
    def timed(cls, stage, n, b, nb, workers, seconds, seed, k=0, residual=float("nan"), **extra):
        flops = flop_model(stage, n, b, nb, k)
        gf = flops / seconds / 1e9 if seconds > 0 and not math.isnan(flops) else float("nan")
        return cls(stage, n, b, nb, workers, seconds, gf, residual, seed, extra=dict(extra))

    def as_json(self) -> dict:
        d = asdict(self)
        # JSON has no NaN; null stands for "not computed"
        for key in ("gflops", "residual"):
            if isinstance(d[key], float) and not math.isfinite(d[key]):
                d[key] = None
        return d


@dataclass
class BenchConfig:
    command: str
    n: int = 256
    b: Optional[int] = None
    nb: Optional[int] = None
    workers: Optional[int] = None
    seed: int = 0
    dist: str = "gaussian"
    input: Optional[str] = None
    output: Optional[str] = None
    fmt: str = "csv"
    verify: bool = False
    oracle: bool = False
    flat_panel_updates: bool = False
    serial_chase: bool = False
    accumulate_q: bool = False
    k: Tuple[int, ...] = (16, 64, 256)
    grid_b: Tuple[int, ...] = (4, 8, 16)
    grid_nb: Tuple[int, ...] = (32, 64)
    sizes: Tuple[int, ...] = (64, 128, 256)

    DEFAULT_B = 32
    DEFAULT_NB = 512

    def resolve_workers(self) -> int:
        if self.workers is not None:
            w = self.workers
        else:
            try:
                w = default_workers()
            except ValueError:
                raise ConfigError(f"EVDKIT_WORKERS must be an integer, got {os.environ.get('EVDKIT_WORKERS')!r}")
        if w < 1:
            raise ConfigError(f"workers must be >= 1, got {w}")
        return w

    def band_params(self, n: int) -> Tuple[int, int]:
        """(b, nb) for an n x n run.

        Explicit values are validated as given. Unset values fall back to the
        defaults, clamped so small matrices still run.
        """
        if n < 3:
            return 1, 1
        nb = self.nb if self.nb is not None else min(self.DEFAULT_NB, n - 1)
        b = self.b if self.b is not None else min(self.DEFAULT_B, nb)
        if not (1 <= b <= nb < n):
            raise ConfigError(f"need 1 <= bandwidth <= blocksize < n, got b={b}, nb={nb}, n={n}")
        return b, nb

    def validate(self) -> None:
        if self.n is not None and self.n < 1:
            raise ConfigError(f"--n must be >= 1, got {self.n}")
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.dist!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.input is not None and not os.path.exists(self.input):
            raise FileNotFoundError(f"input file not found: {self.input}")
        self.resolve_workers()


def format_reports(reports: Sequence[RunReport], fmt: str = "csv") -> str:
    if fmt == "json":
        return "".join(json.dumps(r.as_json()) + "\n" for r in reports)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        d = asdict(r)
        w.writerow([_csv_value(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _csv_value(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return x


def load_matrix(cfg: BenchConfig) -> SymmetricMatrix:
    if cfg.input is not None:
        return mio.read_symf(cfg.input)
    return make_symmetric(cfg.n, cfg.seed, cfg.dist)


def _warm_up(accumulate_q: bool) -> None:
    # loads the compiled chase kernels so the first timed run does not pay for it
    bm = make_band(8, 2, seed=0)
    chase_serial(bm, accumulate_q=accumulate_q)
    chase_parallel(bm, workers=2, accumulate_q=accumulate_q)


def _tridiag_reports(cfg: BenchConfig, a: SymmetricMatrix):
    n = a.n
    b, nb = cfg.band_params(n)
    workers = cfg.resolve_workers()
    accq = cfg.accumulate_q or cfg.verify
    _warm_up(accq)
    res = tridiagonalize(
        a, b, nb, workers=workers, accumulate_q=accq,
        recursive_panels=not cfg.flat_panel_updates, serial_chase=cfg.serial_chase,
    )
    resid = similarity_residual(a, res.q, res.t) if accq else float("nan")
    s = res.seconds
    reports = [
        RunReport.timed("dbr", n, b, nb, workers, s["dbr"], cfg.seed),
        RunReport.timed("chase", n, b, nb, workers, s["chase"], cfg.seed),
        RunReport.timed("total", n, b, nb, workers, s["total"], cfg.seed, residual=resid),
    ]
    if accq:
        reports[-1].extra["orthogonality"] = res.q.orthogonality_error()
    return reports, res


def _check_verify(cfg, reports, res, n):
    if not cfg.verify:
        return
    total = reports[-1]
    orth = res.q.orthogonality_error()
    if not (total.residual <= VERIFY_RESIDUAL and orth <= max(tol_orth(n), VERIFY_RESIDUAL)):
        raise VerificationError(
            f"verification failed: residual {total.residual:.3e} (limit {VERIFY_RESIDUAL:.0e}), "
            f"orthogonality {orth:.3e}",
            reports,
        )


def cmd_tridiag(cfg: BenchConfig) -> List[RunReport]:
    a = load_matrix(cfg)
    reports, res = _tridiag_reports(cfg, a)
    if cfg.output:
        mio.write_trid(cfg.output, res.t)
    _check_verify(cfg, reports, res, a.n)
    return reports


def cmd_evd(cfg: BenchConfig) -> List[RunReport]:
    a = load_matrix(cfg)
    n = a.n
    reports, res = _tridiag_reports(cfg, a)
    t0 = time.perf_counter()
    ev = eig_qr(res.t)
    secs = time.perf_counter() - t0
    b, nb, workers = reports[0].b, reports[0].nb, reports[0].workers
    eig_row = RunReport.timed("eig", n, b, nb, workers, secs, cfg.seed, iterations=ev.iterations, converged=ev.converged)
    reports.insert(2, eig_row)
    total = reports[-1]
    total.seconds += secs
    if cfg.output:
        np.savetxt(cfg.output, ev.values, fmt="%.17g")
    if not ev.converged:
        raise VerificationError("tridiagonal QR iteration did not converge", reports)
    if cfg.oracle:
        if n > ORACLE_MAX_N:
            raise ConfigError(f"--oracle is limited to n <= {ORACLE_MAX_N}, got n={n}")
        ref = jacobi_oracle(a)
        dev = float(np.max(np.abs(ev.values - ref.values)))
        eig_row.residual = dev / max(a.norm(), np.finfo(float).tiny)
        eig_row.extra["max_deviation"] = dev
        if not eig_row.residual <= 1e-11:
            raise VerificationError(f"eigenvalue deviation {eig_row.residual:.3e} > 1e-11 * ||A||_F", reports)
    _check_verify(cfg, reports, res, n)
    return reports


def cmd_syr2k_bench(cfg: BenchConfig) -> List[RunReport]:
    n = cfg.n
    nb = cfg.nb if cfg.nb is not None else 64
    if nb < 1:
        raise ConfigError(f"--blocksize must be >= 1, got {nb}")
    workers = cfg.resolve_workers()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    reports = []
    for k in cfg.k:
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        A = np.asfortranarray(rng.standard_normal((n, k)))
        B = np.asfortranarray(rng.standard_normal((n, k)))
        C0 = np.asfortranarray(rng.standard_normal((n, n)))
        c_ref = C0.copy(order="F")
        t0 = time.perf_counter()
        syr2k_naive(A, B, c_ref, alpha=-1.0)
        t_naive = time.perf_counter() - t0
        c = C0.copy(order="F")
        t0 = time.perf_counter()
        syr2k_recursive(A, B, c, alpha=-1.0, nb=nb, workers=workers)
        t_rec = time.perf_counter() - t0
        low = np.tril_indices(n)
        dev = np.linalg.norm(c[low] - c_ref[low]) / np.linalg.norm(c_ref[low])
        reports.append(
            RunReport.timed("syr2k", n, 0, nb, workers, t_rec, cfg.seed, k=k, residual=float(dev),
                            k_inner=k, naive_seconds=t_naive)
        )
        if not dev <= 1e-13:
            raise VerificationError(f"syr2k deviation {dev:.3e} > 1e-13 at k={k}", reports)
    return reports


def cmd_tune(cfg: BenchConfig) -> List[RunReport]:
    a = load_matrix(cfg)
    n = a.n
    workers = cfg.resolve_workers()
    rows: List[RunReport] = []
    for b in cfg.grid_b:
        for nb in cfg.grid_nb:
            if not (1 <= b <= nb < n):
                continue
            if not rows:
                _warm_up(False)
            res = tridiagonalize(
                a, b, nb, workers=workers,
                recursive_panels=not cfg.flat_panel_updates, serial_chase=cfg.serial_chase,
            )
            s = res.seconds
            rows.append(
                RunReport.timed("total", n, b, nb, workers, s["total"], cfg.seed,
                                dbr_seconds=s["dbr"], chase_seconds=s["chase"], role="grid")
            )
    if not rows:
        raise ConfigError(f"no (b, nb) pair in the grid satisfies b <= nb < n={n}")
    best = min(rows, key=lambda r: r.seconds)
    winner = RunReport(**{**asdict(best), "extra": {**best.extra, "role": "winner"}})
    return rows + [winner]


# (name, check) pairs; each check returns (passed, detail)
Check = Callable[[], Tuple[bool, str]]


def _verify_checks(a: SymmetricMatrix, workers: int, cfg: BenchConfig) -> List[Tuple[str, Check]]:
    n = a.n
    b, nb = cfg.band_params(n) if (cfg.b is not None or cfg.nb is not None) else _small_params(n)
    scale = max(a.norm(), np.finfo(float).tiny)
    state: Dict = {}

    def pipeline():
        if "res" not in state:
            state["res"] = tridiagonalize(a, b, nb, workers=workers, accumulate_q=True)
        return state["res"]

    def residual():
        r = similarity_residual(a, pipeline().q, pipeline().t)
        return r <= VERIFY_RESIDUAL, f"{r:.2e}"

    def orthogonality():
        e = pipeline().q.orthogonality_error()
        return e <= tol_orth(n), f"{e:.2e} (limit {tol_orth(n):.2e})"

    def trace_kept():
        d = abs(trace(a) - trace(pipeline().t))
        return d <= 1e-10 * scale, f"{d:.2e}"

    def eigen():
        ev = eig_qr(pipeline().t)
        if n > ORACLE_MAX_N:
            return ev.converged, "oracle skipped (n too large)"
        ref = jacobi_oracle(a)
        dev = float(np.max(np.abs(ev.values - ref.values)))
        return ev.converged and dev <= 1e-11 * scale, f"{dev / scale:.2e}"

    def parallel_equals_serial():
        if n < 3:
            return True, "n < 3"
        bm, _ = dbr(a, DbrConfig(b, nb))
        ts, _ = chase_serial(bm)
        tp, _ = chase_parallel(bm, workers=max(workers, 2))
        d = max(np.max(np.abs(ts.d - tp.d)), np.max(np.abs(ts.e - tp.e), initial=0.0))
        return d <= 1e-12 * bm.norm(), f"{d:.2e}"

    def schedules_agree():
        if n < 3:
            return True, "n < 3"
        br, _ = dbr(a, DbrConfig(b, nb, recursive_panels=True))
        bf, _ = dbr(a, DbrConfig(b, nb, recursive_panels=False))
        d = float(np.max(np.abs(br.bands - bf.bands)))
        return d <= 1e-12 * scale, f"{d:.2e}"

    def bandwidth():
        if n < 3:
            return True, "n < 3"
        bm, q = dbr(a, DbrConfig(b, nb, accumulate_q=True))
        full = q.q.T @ a.data @ q.q
        i, j = np.indices((n, n))
        off = float(np.max(np.abs(full[np.abs(i - j) > b]), initial=0.0))
        return off <= 100 * n * EPS * scale, f"{off:.2e}"

    def syr2k():
        k = max(1, min(16, n))
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
        A, B = rng.standard_normal((n, k)), rng.standard_normal((n, k))
        c1 = np.asfortranarray(rng.standard_normal((n, n)))
        c2 = c1.copy(order="F")
        syr2k_naive(A, B, c1)
        syr2k_recursive(A, B, c2, nb=max(1, min(32, n)))
        low = np.tril_indices(n)
        d = np.linalg.norm(c1[low] - c2[low]) / np.linalg.norm(c1[low])
        return d <= 1e-13, f"{d:.2e}"

    def panel_counts():
        h = recursive_panel_schedule(32, 256).k_histogram()
        f = recursive_panel_schedule(32, 256, recursive=False).k_histogram()
        return h == {32: 4, 64: 2, 128: 1} and f == {32: 7}, f"{h} / {f}"

    return [
        ("similarity residual", residual),
        ("Q orthogonality", orthogonality),
        ("trace conservation", trace_kept),
        ("eigenvalues vs Jacobi", eigen),
        ("parallel chase == serial chase", parallel_equals_serial),
        ("recursive == flat panel schedule", schedules_agree),
        ("band reduction bandwidth", bandwidth),
        ("syr2k recursive == naive", syr2k),
        ("panel schedule counts", panel_counts),
    ]


def _small_params(n: int) -> Tuple[int, int]:
    if n < 3:
        return 1, 1
    nb = min(16, n - 1)
    return min(4, nb), nb


def cmd_verify(cfg: BenchConfig, out=print) -> List[RunReport]:
    """Run the invariant suite and print one PASS/FAIL line per invariant."""
    workers = cfg.resolve_workers()
    if cfg.input is not None:
        mats = [mio.read_symf(cfg.input)]
    else:
        mats = [make_symmetric(n, cfg.seed, cfg.dist) for n in cfg.sizes]
    failed = 0
    reports = []
    for a in mats:
        t0 = time.perf_counter()
        for name, check in _verify_checks(a, workers, cfg):
            ok, detail = check()
            failed += not ok
            out(f"{'PASS' if ok else 'FAIL'}  n={a.n:<5d} {name}: {detail}")
        b, nb = _small_params(a.n)
        reports.append(RunReport("total", a.n, b, nb, workers, time.perf_counter() - t0, seed=cfg.seed,
                                 extra={"role": "verify"}))
    if failed:
        raise VerificationError(f"{failed} invariant check(s) failed", reports)
    return reports


def cmd_gen(cfg: BenchConfig) -> List[RunReport]:
    if not cfg.output:
        raise ConfigError("gen needs --output")
    a = make_symmetric(cfg.n, cfg.seed, cfg.dist)
    mio.write_symf(cfg.output, a)
    return []
