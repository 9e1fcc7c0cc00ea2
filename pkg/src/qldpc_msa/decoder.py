"""Scaled min-sum syndrome decoding on Tanner graphs.

The decoder runs a flooding schedule: every check node updates from the
previous variable-to-check messages, then every variable node updates, then
the posterior and hard decision are formed and the syndrome is re-checked.
A syndrome bit enters the check update as a sign, ``1 - 2*s``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _fallback, backends
from .codes import CssCode, TannerGraph
from .gf2 import DimensionError, Gf2Vector, _pack_rows

__all__ = [
    "ConfigError",
    "DecoderConfig",
    "DecoderState",
    "DecodeOutcome",
    "BatchResult",
    "CssDecodeResult",
    "Decoder",
    "syndrome_sign",
    "check_node_update",
    "variable_node_update",
    "posterior_and_decision",
    "quantize_messages",
    "prior_from_error_rate",
    "decode",
    "decode_batch",
    "decode_css",
    "decode_css_batch",
    "FLOAT_LARGE",
    "SATURATION",
    "DEFAULT_QUANT_SCALE",
]

ARITHMETIC_MODES = ("float", "int8", "int16")
SATURATION = {"int8": 127, "int16": 32767}
DEFAULT_QUANT_SCALE = {"int8": 8.0, "int16": 256.0}
_INT_DTYPE = {"int8": np.int8, "int16": np.int16}
# Check-to-variable magnitude for a degree-one check (float mode).
FLOAT_LARGE = 64.0
# alpha is applied in integer modes as (mag * round(alpha * 2**10) + 2**9) >> 10
ALPHA_FRAC_BITS = 10


class ConfigError(ValueError):
    """Invalid decoder configuration."""


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder settings.

    ``prior`` is None for the uniform prior of 1 on every variable, or an
    explicit per-variable sequence. In integer modes every message is stored
    as ``round(value * quant_scale)`` saturated to the type's symmetric range.
    """

    max_iterations: int = 10
    alpha: float = 0.8
    early_termination: bool = True
    prior: Optional[tuple[float, ...]] = None
    arithmetic: str = "float"
    quant_scale: Optional[float] = None

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.arithmetic not in ARITHMETIC_MODES:
            raise ConfigError(f"arithmetic must be one of {ARITHMETIC_MODES}, got {self.arithmetic!r}")
        if self.quant_scale is not None and not self.quant_scale > 0:
            raise ConfigError(f"quant_scale must be positive, got {self.quant_scale}")
        if self.prior is not None:
            prior = tuple(float(x) for x in self.prior)
            if not all(math.isfinite(x) for x in prior):
                raise ConfigError("prior values must be finite")
            object.__setattr__(self, "prior", prior)

    @property
    def integer(self) -> bool:
        return self.arithmetic != "float"

    @property
    def scale(self) -> float:
        if not self.integer:
            return 1.0
        return self.quant_scale if self.quant_scale is not None else DEFAULT_QUANT_SCALE[self.arithmetic]

    @property
    def alpha_fixed(self) -> int:
        return int(round(self.alpha * (1 << ALPHA_FRAC_BITS)))


@dataclass
class DecoderState:
    """Final message state of one decode (for inspection and tests)."""

    q: np.ndarray
    r: np.ndarray
    gamma: np.ndarray
    Q: np.ndarray
    e_hat: np.ndarray
    iteration: int


@dataclass(frozen=True)
class DecodeOutcome:
    e_hat: Gf2Vector
    converged: bool
    iterations_used: int
    final_syndrome_residual: Gf2Vector


class BatchResult(NamedTuple):
    """Raw batch output: estimates (B, N) and per-block flags (B, blocks)."""

    e_hat: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray


class CssDecodeResult(NamedTuple):
    e_x: Gf2Vector
    e_z: Gf2Vector
    outcomes: tuple[DecodeOutcome, DecodeOutcome]


# --- node-level rules ---------------------------------------------------------


def syndrome_sign(s):
    """Map syndrome bits to signs: 0 -> +1, 1 -> -1 (elementwise for arrays)."""
    arr = np.asarray(s)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("syndrome bits must be 0 or 1")
    out = 1 - 2 * arr.astype(np.int64)
    return int(out) if out.ndim == 0 else out


def check_node_update(q_in: Sequence[float], s_m: int, alpha: float) -> np.ndarray:
    """Outgoing check-to-variable messages of one check node.

    ``r[e] = alpha * sign(s_m) * prod_{j != e} sign(q_j) * min_{j != e} |q_j|``
    with sign(0) = +1, evaluated with one sign pass and one two-minima pass.
    """
    q = np.asarray(q_in, dtype=np.float64)
    if q.size == 0:
        raise ValueError("a check node needs at least one edge")
    sigma = syndrome_sign(s_m)
    neg = q < 0
    total = sigma * (-1 if neg.sum() % 2 else 1)
    own = np.where(neg, -1.0, 1.0)
    if q.size == 1:
        return alpha * (total * own) * FLOAT_LARGE
    mag = np.abs(q)
    i1 = int(np.argmin(mag))
    min1 = mag[i1]
    min2 = np.min(np.delete(mag, i1))
    excl = np.full(q.size, min1)
    excl[i1] = min2
    return (total * own) * (alpha * excl)


def variable_node_update(gamma_n: float, r_in: Sequence[float]) -> np.ndarray:
    """``q[e] = gamma_n + sum_{i != e} r_i`` for each incoming edge."""
    r = [float(x) for x in r_in]
    if not r:
        return np.array([float(gamma_n)])
    out = []
    for e in range(len(r)):
        acc = float(gamma_n)
        for i, x in enumerate(r):
            if i != e:
                acc += x
        out.append(acc)
    return np.array(out)


def posterior_and_decision(gamma_n: float, r_in: Sequence[float]) -> tuple[float, int]:
    """A-posteriori value and hard decision (1 iff the value is negative)."""
    acc = float(gamma_n)
    for x in r_in:
        acc += float(x)
    return acc, int(acc < 0)


def quantize_messages(values, arithmetic: str, quant_scale: Optional[float] = None) -> np.ndarray:
    """``round(value * scale)`` saturated to the symmetric range of the type."""
    if arithmetic not in SATURATION:
        raise ConfigError(f"{arithmetic!r} is not an integer mode")
    scale = quant_scale if quant_scale is not None else DEFAULT_QUANT_SCALE[arithmetic]
    sat = SATURATION[arithmetic]
    scaled = np.rint(np.asarray(values, dtype=np.float64) * scale)
    return np.clip(scaled, -sat, sat).astype(_INT_DTYPE[arithmetic])


def prior_from_error_rate(p: float, n: int) -> tuple[float, ...]:
    """Log-likelihood prior ``log((1-p)/p)`` repeated for ``n`` variables."""
    if not 0 < p < 0.5:
        raise ConfigError("error rate must lie in (0, 0.5)")
    return (math.log((1 - p) / p),) * n


# --- decoder --------------------------------------------------------------------


def _as_bit_rows(syndromes, length: int) -> np.ndarray:
    if isinstance(syndromes, np.ndarray) and syndromes.ndim == 2:
        arr = np.ascontiguousarray(syndromes, dtype=np.uint8)
        if arr.shape[1] != length:
            raise DimensionError(f"syndromes have length {arr.shape[1]}, graph has {length} checks")
        return arr
    rows = list(syndromes)
    out = np.zeros((len(rows), length), dtype=np.uint8)
    for i, s in enumerate(rows):
        bits = s.bits() if isinstance(s, Gf2Vector) else np.asarray(s, dtype=np.uint8)
        if bits.shape != (length,):
            raise DimensionError(f"syndrome {i} has length {bits.size}, graph has {length} checks")
        out[i] = bits
    return out


def _residual(graph: TannerGraph, e_hat: np.ndarray, syn: np.ndarray) -> np.ndarray:
    bits = e_hat[:, graph.edge_var].astype(np.int64)
    csum = np.zeros((bits.shape[0], bits.shape[1] + 1), dtype=np.int64)
    np.cumsum(bits, axis=1, out=csum[:, 1:])
    par = (csum[:, graph.check_ptr[1:]] - csum[:, graph.check_ptr[:-1]]) & 1
    return (par.astype(np.uint8) ^ syn).astype(np.uint8)


class Decoder:
    """Min-sum decoder bound to one graph and configuration.

    Instances are immutable after construction and safe to share; every call
    allocates its own message buffers.
    """

    def __init__(
        self,
        graph: TannerGraph,
        config: Optional[DecoderConfig] = None,
        *,
        backend: Optional[str] = None,
    ):
        self.graph = graph
        self.config = config or DecoderConfig()
        self.kernel = backends.get(backend) if backend else backends.DEFAULT
        self.gamma_real = self._resolve_prior()
        cfg = self.config
        if cfg.integer:
            self.gamma = quantize_messages(self.gamma_real, cfg.arithmetic, cfg.scale)
            if np.any((self.gamma == 0) & (self.gamma_real != 0)):
                raise ConfigError(
                    f"quant_scale={cfg.scale} rounds a nonzero prior to 0; the decoder would be inert"
                )
        else:
            self.gamma = self.gamma_real
        self.gamma.flags.writeable = False
        self._pools: dict[int, ThreadPoolExecutor] = {}

    @property
    def backend(self) -> str:
        return backends.name_of(self.kernel)

    def _resolve_prior(self) -> np.ndarray:
        g = self.graph
        prior = self.config.prior
        if prior is None:
            return np.ones(g.num_vars, dtype=np.float64)
        arr = np.asarray(prior, dtype=np.float64)
        if arr.size == g.num_vars:
            return arr
        sizes = set(np.diff(g.block_var_ptr).tolist())
        if g.num_blocks > 1 and sizes == {arr.size}:
            return np.tile(arr, g.num_blocks)
        raise ConfigError(f"prior has {arr.size} entries, graph has {g.num_vars} variables")

    def _kernel_args(self, kernel, syn, e_hat, iters, conv, state=None):
        g, cfg = self.graph, self.config
        head = (g.check_ptr, g.edge_var, g.var_ptr, g.var_edges, g.block_check_ptr, g.block_var_ptr, syn)
        if cfg.integer:
            args = head + (self.gamma, cfg.alpha_fixed, cfg.max_iterations, cfg.early_termination,
                           SATURATION[cfg.arithmetic], e_hat, iters, conv)
            fn = kernel.minsum_int
        else:
            args = head + (self.gamma, cfg.alpha, cfg.max_iterations, cfg.early_termination,
                           FLOAT_LARGE, e_hat, iters, conv)
            fn = kernel.minsum_float
        if state is not None:
            return fn, args, {"state": state}
        return fn, args, {}

    def _pool(self, workers: int) -> ThreadPoolExecutor:
        pool = self._pools.get(workers)
        if pool is None:
            pool = self._pools[workers] = ThreadPoolExecutor(max_workers=workers)
        return pool

    def decode_array(self, syndromes: np.ndarray, workers: int = 1) -> BatchResult:
        """Decode a (B, M) 0/1 array. Rows are split into contiguous chunks
        across ``workers`` threads; results do not depend on the split."""
        g = self.graph
        syn = _as_bit_rows(syndromes, g.num_checks)
        B = syn.shape[0]
        e_hat = np.zeros((B, g.num_vars), dtype=np.uint8)
        iters = np.zeros((B, g.num_blocks), dtype=np.int32)
        conv = np.zeros((B, g.num_blocks), dtype=np.uint8)
        if B == 0:
            return BatchResult(e_hat, conv.astype(bool), iters)
        workers = max(1, min(int(workers), B))
        if workers == 1:
            fn, args, kw = self._kernel_args(self.kernel, syn, e_hat, iters, conv)
            fn(*args, **kw)
        else:
            bounds = np.linspace(0, B, workers + 1).astype(int)
            futures = []
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                fn, args, kw = self._kernel_args(
                    self.kernel, syn[lo:hi], e_hat[lo:hi], iters[lo:hi], conv[lo:hi]
                )
                futures.append(self._pool(workers).submit(fn, *args, **kw))
            for f in futures:
                f.result()
        return BatchResult(e_hat, conv.astype(bool), iters)

    def _outcomes(self, syn: np.ndarray, res: BatchResult) -> list[DecodeOutcome]:
        n, m = self.graph.num_vars, self.graph.num_checks
        e_words = _pack_rows(res.e_hat)
        r_words = _pack_rows(_residual(self.graph, res.e_hat, syn))
        conv = res.converged.all(axis=1).tolist()
        iters = res.iterations.max(axis=1).tolist()
        return [
            DecodeOutcome(Gf2Vector._wrap(n, e_words[i].copy()), conv[i], iters[i],
                          Gf2Vector._wrap(m, r_words[i].copy()))
            for i in range(syn.shape[0])
        ]

    def decode(self, syndrome) -> DecodeOutcome:
        return self.decode_batch([syndrome])[0]

    def decode_batch(self, syndromes, workers: int = 1, timings: Optional[dict] = None
                     ) -> list[DecodeOutcome]:
        """Decode many syndromes; elementwise identical to repeated ``decode``.

        If ``timings`` is given, ``total_s`` (copy-in to outcomes) and
        ``kernel_s`` (kernel call only) are accumulated into it.
        """
        t0 = time.perf_counter()
        syn = _as_bit_rows(syndromes, self.graph.num_checks)
        t1 = time.perf_counter()
        res = self.decode_array(syn, workers=workers)
        t2 = time.perf_counter()
        out = self._outcomes(syn, res)
        t3 = time.perf_counter()
        if timings is not None:
            timings["kernel_s"] = timings.get("kernel_s", 0.0) + (t2 - t1)
            timings["total_s"] = timings.get("total_s", 0.0) + (t3 - t0)
        return out

    def decode_with_state(self, syndrome) -> tuple[DecodeOutcome, DecoderState]:
        """Decode one syndrome on the numpy path and return the final messages."""
        g = self.graph
        syn = _as_bit_rows([syndrome], g.num_checks)
        dtype = self.gamma.dtype
        state = {
            "q": np.zeros((1, g.num_edges), dtype=dtype),
            "r": np.zeros((1, g.num_edges), dtype=dtype),
            "Q": np.zeros((1, g.num_vars), dtype=dtype),
        }
        e_hat = np.zeros((1, g.num_vars), dtype=np.uint8)
        iters = np.zeros((1, g.num_blocks), dtype=np.int32)
        conv = np.zeros((1, g.num_blocks), dtype=np.uint8)
        fn, args, kw = self._kernel_args(_fallback, syn, e_hat, iters, conv, state=state)
        fn(*args, **kw)
        res = BatchResult(e_hat, conv.astype(bool), iters)
        outcome = self._outcomes(syn, res)[0]
        return outcome, DecoderState(
            q=state["q"][0], r=state["r"][0], gamma=np.array(self.gamma), Q=state["Q"][0],
            e_hat=e_hat[0], iteration=int(iters.max()),
        )

    def close(self) -> None:
        for pool in self._pools.values():
            pool.shutdown()
        self._pools.clear()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def decode(graph: TannerGraph, syndrome, config: Optional[DecoderConfig] = None,
           backend: Optional[str] = None) -> DecodeOutcome:
    return Decoder(graph, config, backend=backend).decode(syndrome)


def decode_batch(graph: TannerGraph, syndromes, config: Optional[DecoderConfig] = None,
                 workers: int = 1, backend: Optional[str] = None) -> list[DecodeOutcome]:
    return Decoder(graph, config, backend=backend).decode_batch(syndromes, workers=workers)


def _split_outcome(graph: TannerGraph, block: int, e_hat, syn, conv, iters) -> DecodeOutcome:
    v0, v1 = graph.block_var_ptr[block], graph.block_var_ptr[block + 1]
    c0, c1 = graph.block_check_ptr[block], graph.block_check_ptr[block + 1]
    residual = _residual(graph, e_hat[None, :], syn[None, :])[0]
    return DecodeOutcome(
        e_hat=Gf2Vector.from_bits(e_hat[v0:v1]),
        converged=bool(conv[block]),
        iterations_used=int(iters[block]),
        final_syndrome_residual=Gf2Vector.from_bits(residual[c0:c1]),
    )


def _css_syndromes(code: CssCode, s_x, s_z) -> np.ndarray:
    mx, mz = code.hz.rows, code.hx.rows
    sx = _as_bit_rows(s_x, mx) if isinstance(s_x, np.ndarray) and s_x.ndim == 2 else None
    if sx is not None:
        sz = _as_bit_rows(s_z, mz)
        if sz.shape[0] != sx.shape[0]:
            raise DimensionError("X and Z syndrome batches differ in size")
        return np.hstack([sx, sz])
    return np.hstack([_as_bit_rows([s_x], mx), _as_bit_rows([s_z], mz)])


def decode_css(code: CssCode, s_x, s_z, config: Optional[DecoderConfig] = None,
               backend: Optional[str] = None) -> CssDecodeResult:
    """Decode X errors from ``s_x = H_Z e_X`` and Z errors from ``s_z = H_X e_Z``
    in one call on the block-diagonal graph; each half stops independently."""
    graph = code.graph_combined
    syn = _css_syndromes(code, s_x, s_z)
    res = Decoder(graph, config, backend=backend).decode_array(syn)
    ox = _split_outcome(graph, 0, res.e_hat[0], syn[0], res.converged[0], res.iterations[0])
    oz = _split_outcome(graph, 1, res.e_hat[0], syn[0], res.converged[0], res.iterations[0])
    return CssDecodeResult(ox.e_hat, oz.e_hat, (ox, oz))


def decode_css_batch(code: CssCode, s_x: np.ndarray, s_z: np.ndarray,
                     config: Optional[DecoderConfig] = None, workers: int = 1,
                     decoder: Optional[Decoder] = None) -> BatchResult:
    """Batch form of :func:`decode_css` returning raw arrays.

    ``e_hat`` is ``e_X ++ e_Z`` per row; converged/iterations columns are
    (X, Z).
    """
    syn = _css_syndromes(code, np.atleast_2d(s_x), np.atleast_2d(s_z))
    dec = decoder or Decoder(code.graph_combined, config)
    return dec.decode_array(syn, workers=workers)
