"""Latency benchmark harness and its CSV schema."""

from __future__ import annotations

import csv
import hashlib
import io
import os
import platform
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from . import backends
from .codes import CssCode
from .decoder import ConfigError, Decoder, DecoderConfig
from .noise import NoiseModel, extract_syndromes, sample_errors

__all__ = [
    "CSV_COLUMNS",
    "THRESHOLD_US",
    "BenchRecord",
    "BenchRun",
    "run_bench",
    "write_csv",
    "read_bench_csv",
    "host_descriptor",
]

THRESHOLD_US = 63.0

CSV_COLUMNS = (
    "code", "n", "k", "d", "mode", "alpha", "imax", "early_term", "batch", "threads",
    "trials", "min_us", "mean_us", "median_us", "p99_us", "max_us", "conv_rate",
    "kernel_frac", "under_63us",
)


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark row. Latencies are per decode, amortized over the batch;
    ``trials`` counts timed batch calls (warmup calls excluded)."""

    code: str
    n: int
    k: int
    d: Optional[int]
    mode: str
    alpha: float
    imax: int
    early_term: bool
    batch: int
    threads: int
    trials: int
    warmup: int
    min_us: float
    mean_us: float
    median_us: float
    p99_us: float
    max_us: float
    conv_rate: float
    kernel_frac: float
    host: str
    backend: str

    @property
    def under_threshold(self) -> bool:
        return round(self.mean_us, 3) < THRESHOLD_US

    def csv_row(self) -> dict:
        row = {c: getattr(self, c) for c in CSV_COLUMNS if c != "under_63us"}
        row["d"] = "" if self.d is None else self.d
        row["early_term"] = str(self.early_term).lower()
        for c in ("min_us", "mean_us", "median_us", "p99_us", "max_us"):
            row[c] = f"{row[c]:.3f}"
        row["conv_rate"] = f"{self.conv_rate:.6f}"
        row["kernel_frac"] = f"{self.kernel_frac:.4f}"
        row["under_63us"] = str(self.under_threshold).lower()
        return row

    def to_json(self) -> dict:
        out = asdict(self)
        out["under_63us"] = self.under_threshold
        return out


@dataclass
class BenchRun:
    record: BenchRecord
    e_hat: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    # iterations_used of every timed decode, warmup excluded
    all_iterations: np.ndarray

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.e_hat, self.converged, self.iterations):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def host_descriptor(backend: str) -> str:
    cpu = platform.processor() or platform.machine()
    return f"{platform.system()} {cpu} cpus={os.cpu_count()} py{platform.python_version()} backend={backend}"


def run_bench(
    code: CssCode,
    *,
    mode: str = "float",
    batch: int = 1,
    threads: int = 1,
    warmup: int = 100,
    measure: int = 1000,
    alpha: float = 0.8,
    imax: int = 10,
    early_term: bool = False,
    p: float = 0.01,
    seed: int = 0,
    backend: Optional[str] = None,
) -> BenchRun:
    """Time ``measure`` batch decodes of the combined X/Z graph after ``warmup``.

    Inputs are syndromes of independent X/Z noise at rate ``p``. Each timed
    call covers copy-in of the syndrome rows, the kernel and construction of
    the outcome objects; the kernel share is reported separately.
    """
    if measure < 1:
        raise ConfigError("measure must be at least 1")
    if warmup < 0 or batch < 1 or threads < 1:
        raise ConfigError("warmup must be >= 0, batch and threads >= 1")
    cfg = DecoderConfig(max_iterations=imax, alpha=alpha, early_termination=early_term,
                        arithmetic=mode)
    decoder = Decoder(code.graph_combined, cfg, backend=backend)
    pool_batches = 8
    ex, ez = sample_errors(NoiseModel("independent", p, seed), code.n_phys, batch * pool_batches)
    sx, sz = extract_syndromes(code, ex, ez)
    pool = np.hstack([sx, sz]).reshape(pool_batches, batch, -1)

    for i in range(warmup):
        decoder.decode_batch(pool[i % pool_batches], workers=threads)

    lat = np.empty(measure)
    kernel = total = 0.0
    n_conv = 0
    outs_e, outs_c, outs_i = [], [], []
    all_iters: list[int] = []
    for i in range(measure):
        t: dict = {}
        t0 = time.perf_counter()
        outcomes = decoder.decode_batch(pool[i % pool_batches], workers=threads, timings=t)
        lat[i] = (time.perf_counter() - t0) / batch
        kernel += t["kernel_s"]
        total += t["total_s"]
        n_conv += sum(o.converged for o in outcomes)
        all_iters.extend(o.iterations_used for o in outcomes)
        if i < pool_batches:
            outs_e.append(np.stack([o.e_hat.bits() for o in outcomes]))
            outs_c.append([o.converged for o in outcomes])
            outs_i.append([o.iterations_used for o in outcomes])
    decoder.close()
    lat_us = lat * 1e6
    rec = BenchRecord(
        code=code.name, n=code.params.n, k=code.params.k, d=code.params.d, mode=mode,
        alpha=alpha, imax=imax, early_term=early_term, batch=batch, threads=threads,
        trials=measure, warmup=warmup,
        min_us=float(lat_us.min()), mean_us=float(lat_us.mean()),
        median_us=float(np.median(lat_us)), p99_us=float(np.percentile(lat_us, 99)),
        max_us=float(lat_us.max()), conv_rate=n_conv / (measure * batch),
        kernel_frac=kernel / total if total > 0 else 0.0,
        host=host_descriptor(decoder.backend), backend=decoder.backend,
    )
    return BenchRun(rec, np.concatenate(outs_e), np.concatenate(outs_c),
                    np.concatenate(outs_i), np.asarray(all_iters))


def write_csv(records: Iterable[BenchRecord], fh: TextIO) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.csv_row())


def read_bench_csv(text: str) -> list[dict]:
    """Parse and validate bench CSV text; raises ValueError naming the bad row."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"header mismatch: {reader.fieldnames}")
    rows = []
    for lineno, raw in enumerate(reader, start=2):
        try:
            row = {
                "code": raw["code"],
                "n": int(raw["n"]), "k": int(raw["k"]),
                "d": int(raw["d"]) if raw["d"] else None,
                "mode": raw["mode"], "alpha": float(raw["alpha"]), "imax": int(raw["imax"]),
                "early_term": _bool(raw["early_term"]), "batch": int(raw["batch"]),
                "threads": int(raw["threads"]), "trials": int(raw["trials"]),
                "conv_rate": float(raw["conv_rate"]), "kernel_frac": float(raw["kernel_frac"]),
                "under_63us": _bool(raw["under_63us"]),
            }
            for c in ("min_us", "mean_us", "median_us", "p99_us", "max_us"):
                row[c] = float(raw[c])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"row at line {lineno}: {exc}") from None
        if not row["min_us"] <= row["median_us"] <= row["p99_us"] <= row["max_us"]:
            raise ValueError(f"row at line {lineno}: latency order violated")
        if row["under_63us"] != (row["mean_us"] < THRESHOLD_US):
            raise ValueError(f"row at line {lineno}: threshold flag disagrees with mean")
        if row["mode"] not in ("float", "int8", "int16"):
            raise ValueError(f"row at line {lineno}: unknown mode {row['mode']!r}")
        rows.append(row)
    return rows


def _bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def compare_backends(code: CssCode, **kwargs) -> dict[str, BenchRun]:
    """Run the same benchmark on every available backend."""
    return {name: run_bench(code, backend=name, **kwargs) for name in backends.available()}
