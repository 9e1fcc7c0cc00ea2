"""Monte-Carlo decoding campaigns under independent or depolarizing Pauli noise."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional

import numpy as np

from .codes import CssCode
from .decoder import Decoder, DecoderConfig, decode_css_batch
from .gf2 import DimensionError, Gf2Vector, SparseGf2Matrix, mat_vec_mul_batch

__all__ = [
    "NOISE_KINDS",
    "NoiseModel",
    "Classification",
    "TrialResult",
    "CampaignResult",
    "sample_error",
    "sample_errors",
    "extract_syndromes",
    "classify_residual",
    "classify_batch",
    "brute_force_coset_leader",
    "run_campaign",
]

NOISE_KINDS = ("independent", "depolarizing")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "independent"
    p: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def rng(self, trial: int) -> np.random.Generator:
        """Generator for one trial; depends only on (seed, trial)."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(trial,)))


class Classification(str, Enum):
    EXACT = "exact"
    STABILIZER = "stabilizer"
    LOGICAL_X = "logical-X"
    LOGICAL_Z = "logical-Z"
    LOGICAL_BOTH = "logical-both"
    NON_CONVERGED = "non-converged"

    @property
    def is_failure(self) -> bool:
        return self not in (Classification.EXACT, Classification.STABILIZER)


def _sample_bits(model: NoiseModel, n: int, rng: np.random.Generator):
    if model.kind == "independent":
        ex = rng.random(n) < model.p
        ez = rng.random(n) < model.p
    else:
        hit = rng.random(n) < model.p
        pauli = rng.integers(0, 3, size=n)  # 0: X, 1: Y, 2: Z
        ex = hit & (pauli != 2)
        ez = hit & (pauli != 0)
    return ex.astype(np.uint8), ez.astype(np.uint8)


def sample_error(model: NoiseModel, n: int, trial: int = 0) -> tuple[Gf2Vector, Gf2Vector]:
    """Sample (e_X, e_Z) on ``n`` qubits; Y errors set both bits."""
    ex, ez = _sample_bits(model, n, model.rng(trial))
    return Gf2Vector.from_bits(ex), Gf2Vector.from_bits(ez)


def sample_errors(model: NoiseModel, n: int, trials: range | int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked (trials, n) arrays of X and Z error bits."""
    trials = range(trials) if isinstance(trials, int) else trials
    ex = np.zeros((len(trials), n), dtype=np.uint8)
    ez = np.zeros((len(trials), n), dtype=np.uint8)
    for i, t in enumerate(trials):
        ex[i], ez[i] = _sample_bits(model, n, model.rng(t))
    return ex, ez


def extract_syndromes(code: CssCode, e_x, e_z):
    """``s_X = H_Z e_X`` and ``s_Z = H_X e_Z``; vectors in, vectors out, arrays in, arrays out."""
    if isinstance(e_x, Gf2Vector):
        sx = mat_vec_mul_batch(code.hz, e_x.bits()[None, :])[0]
        sz = mat_vec_mul_batch(code.hx, e_z.bits()[None, :])[0]
        return Gf2Vector.from_bits(sx), Gf2Vector.from_bits(sz)
    return (
        mat_vec_mul_batch(code.hz, np.atleast_2d(e_x)),
        mat_vec_mul_batch(code.hx, np.atleast_2d(e_z)),
    )


def _combine(logical_x: np.ndarray, logical_z: np.ndarray, exact: np.ndarray) -> list[Classification]:
    out = []
    for lx, lz, ex in zip(logical_x, logical_z, exact):
        if lx and lz:
            out.append(Classification.LOGICAL_BOTH)
        elif lx:
            out.append(Classification.LOGICAL_X)
        elif lz:
            out.append(Classification.LOGICAL_Z)
        elif ex:
            out.append(Classification.EXACT)
        else:
            out.append(Classification.STABILIZER)
    return out


def classify_batch(code: CssCode, e_x, e_hat_x, e_z, e_hat_z) -> list[Classification]:
    """Classify residuals row-wise.

    An X residual is harmless iff it lies in the row space of H_X (it is a
    product of X stabilizers); likewise Z residuals and H_Z.
    """
    rx = np.atleast_2d(e_x) ^ np.atleast_2d(e_hat_x)
    rz = np.atleast_2d(e_z) ^ np.atleast_2d(e_hat_z)
    if rx.shape[1] != code.n_phys or rz.shape[1] != code.n_phys:
        raise DimensionError(f"residuals must have length {code.n_phys}")
    logical_x = ~code.x_stabilizers.contains_batch(rx)
    logical_z = ~code.z_stabilizers.contains_batch(rz)
    exact = ~(rx.any(axis=1) | rz.any(axis=1))
    return _combine(logical_x, logical_z, exact)


def classify_residual(code: CssCode, e_x: Gf2Vector, e_hat_x: Gf2Vector,
                      e_z: Gf2Vector, e_hat_z: Gf2Vector) -> Classification:
    return classify_batch(code, e_x.bits(), e_hat_x.bits(), e_z.bits(), e_hat_z.bits())[0]


def brute_force_coset_leader(H: SparseGf2Matrix, s: Gf2Vector,
                             w_max: Optional[int] = None) -> set[Gf2Vector]:
    """All minimum-weight ``e`` with ``H e^T = s`` by direct enumeration.

    Checks every support of weight 0, 1, ... up to ``w_max`` (all weights when
    None) and stops at the first weight with a solution. Uses dense integer
    arithmetic so it shares no code path with the sparse routines.
    """
    n = H.cols
    if w_max is None:
        if n > 20:
            raise ValueError("exhaustive search is limited to n <= 20; pass w_max")
        w_max = n
    elif n > 30:
        raise ValueError("bounded-weight search is limited to n <= 30")
    if len(s) != H.rows:
        raise DimensionError(f"syndrome length {len(s)} != {H.rows} checks")
    dense = H.to_dense().astype(np.int64)
    target = np.array(list(s), dtype=np.int64)
    for w in range(w_max + 1):
        found = set()
        for support in itertools.combinations(range(n), w):
            col_sum = dense[:, list(support)].sum(axis=1) % 2 if w else np.zeros(H.rows, np.int64)
            if np.array_equal(col_sum, target):
                bits = np.zeros(n, dtype=np.uint8)
                bits[list(support)] = 1
                found.add(Gf2Vector.from_bits(bits))
        if found:
            return found
    return set()


@dataclass
class TrialResult:
    trial: int
    e_x: np.ndarray
    e_z: np.ndarray
    e_hat_x: np.ndarray
    e_hat_z: np.ndarray
    s_x: np.ndarray
    s_z: np.ndarray
    converged_x: bool
    converged_z: bool
    iterations_x: int
    iterations_z: int
    classification: Classification


@dataclass
class CampaignResult:
    code: str
    noise: NoiseModel
    trials: int
    counts: dict[str, int] = field(default_factory=dict)
    converged: int = 0
    total_iterations: int = 0
    undecoded_failures: int = 0

    @property
    def failures(self) -> int:
        return sum(n for c, n in self.counts.items() if Classification(c).is_failure)

    @property
    def logical_error_rate(self) -> float:
        """Fraction of trials that end in a logical fault or fail to converge."""
        return self.failures / self.trials if self.trials else 0.0

    @property
    def undecoded_error_rate(self) -> float:
        """Same classification applied to the raw error with no correction."""
        return self.undecoded_failures / self.trials if self.trials else 0.0

    @property
    def convergence_rate(self) -> float:
        return self.converged / self.trials if self.trials else 0.0

    @property
    def mean_iterations(self) -> float:
        return self.total_iterations / self.trials if self.trials else 0.0

    def summary(self) -> dict:
        return {
            "code": self.code,
            "noise": self.noise.kind,
            "p": self.noise.p,
            "seed": self.noise.seed,
            "trials": self.trials,
            "logical_error_rate": self.logical_error_rate,
            "undecoded_error_rate": self.undecoded_error_rate,
            "convergence_rate": self.convergence_rate,
            "mean_iterations": self.mean_iterations,
            "counts": {c.value: self.counts.get(c.value, 0) for c in Classification},
        }


def _chunks(total: int, size: int) -> Iterator[range]:
    for lo in range(0, total, size):
        yield range(lo, min(total, lo + size))


def run_campaign(code: CssCode, model: NoiseModel, trials: int,
                 config: Optional[DecoderConfig] = None, *, workers: int = 1,
                 chunk: int = 2048, on_trial: Optional[Callable[[TrialResult], None]] = None,
                 backend: Optional[str] = None) -> CampaignResult:
    """Sample, decode and classify ``trials`` independent error patterns.

    Trial ``t`` always draws from ``model.rng(t)``, so aggregates do not depend
    on chunking or worker count. ``on_trial`` receives every trial in order.
    """
    if trials < 0:
        raise ValueError("trials must be non-negative")
    decoder = Decoder(code.graph_combined, config, backend=backend)
    n = code.n_phys
    result = CampaignResult(code=code.name, noise=model, trials=trials)
    for block in _chunks(trials, chunk):
        ex, ez = sample_errors(model, n, block)
        sx, sz = extract_syndromes(code, ex, ez)
        res = decode_css_batch(code, sx, sz, workers=workers, decoder=decoder)
        hx_hat, hz_hat = res.e_hat[:, :n], res.e_hat[:, n:]
        classes = classify_batch(code, ex, hx_hat, ez, hz_hat)
        raw = classify_batch(code, ex, np.zeros_like(ex), ez, np.zeros_like(ez))
        result.undecoded_failures += sum(c.is_failure for c in raw)
        for i, t in enumerate(block):
            cls = classes[i]
            if not res.converged[i].all():
                cls = Classification.NON_CONVERGED
            else:
                result.converged += 1
            result.counts[cls.value] = result.counts.get(cls.value, 0) + 1
            result.total_iterations += int(res.iterations[i].max())
            if on_trial is not None:
                on_trial(
                    TrialResult(
                        trial=t, e_x=ex[i], e_z=ez[i], e_hat_x=hx_hat[i], e_hat_z=hz_hat[i],
                        s_x=sx[i], s_z=sz[i],
                        converged_x=bool(res.converged[i, 0]),
                        converged_z=bool(res.converged[i, 1]),
                        iterations_x=int(res.iterations[i, 0]),
                        iterations_z=int(res.iterations[i, 1]),
                        classification=cls,
                    )
                )
    return result
