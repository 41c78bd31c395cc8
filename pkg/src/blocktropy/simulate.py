"""Seeded sampling from equilibrium Markov chains on word states.

Paths are drawn from the row-stochastic kernel carried by SpectralData: the
initial (k-1)-word comes from the stationary state law (or is fixed), then
one appended symbol per step by inverse-CDF lookup.  Replica r of a batch
uses an independent generator seeded ``seed XOR r`` (numpy PCG64), and the
batch sampler consumes each replica's uniform stream in exactly the order
the single-path sampler would, so batched and one-at-a-time runs are
bitwise identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .blocks import window_codes, word_to_index
from .pressure import MarkovPotential, SpectralData

__all__ = [
    "RNG_NAME",
    "SamplerSpec",
    "birkhoff_sum",
    "birkhoff_sums",
    "read_path_file",
    "sample_path",
    "sample_paths",
    "write_path_file",
]

#: The generator family backing all sampling, recorded in every report.
RNG_NAME = "numpy.random.PCG64"

_PATH_MAGIC = b"BKTP"


@dataclass(frozen=True)
class SamplerSpec:
    """Everything needed to draw one path reproducibly."""

    spectral: SpectralData
    n: int
    seed: int
    init: Union[str, tuple[int, ...]] = "stationary"

    def __post_init__(self) -> None:
        k = self.spectral.potential.k
        if self.n < k - 1:
            raise ValueError("path length must be at least k-1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        row_defect = float(np.max(np.abs(self.spectral.kernel.sum(axis=1) - 1.0)))
        if row_defect > 1e-12:
            raise ValueError(f"kernel rows sum to 1 only within {row_defect:.3e}")
        if self.init != "stationary":
            if len(self.init) != k - 1:
                raise ValueError("fixed initial word must have length k-1")


def sample_paths(
    sd: SpectralData,
    n: int,
    seed: int,
    replicas: int = 1,
    init: Union[str, tuple[int, ...]] = "stationary",
    replica_offset: int = 0,
) -> np.ndarray:
    """Sample ``replicas`` equilibrium paths of length n as an (R, n) array.

    Replica r (globally indexed ``replica_offset + r``) is driven by
    ``numpy.random.default_rng(seed ^ (replica_offset + r))``; the offset
    lets callers process a large replica range in memory-bounded groups
    without changing any path.
    """
    SamplerSpec(sd, n, seed, init)  # validate once
    A = sd.potential.alphabet_size
    k = sd.potential.k
    V = A ** (k - 1)
    R = replicas
    gens = [
        np.random.default_rng((seed ^ (replica_offset + r)) & 0xFFFFFFFFFFFFFFFF)
        for r in range(R)
    ]
    dtype = np.int8 if A <= 127 else np.int64
    out = np.zeros((R, n), dtype=dtype)

    states = np.zeros(R, dtype=np.int64)
    if k >= 2:
        if init == "stationary":
            cum_q = np.cumsum(sd.vertex_stationary)
            draws = np.array([g.random() for g in gens])
            states = np.minimum(
                np.searchsorted(cum_q, draws, side="right"), V - 1
            ).astype(np.int64)
        else:
            states[:] = word_to_index(init, A)
        tmp = states.copy()
        for j in range(k - 1):
            out[:, k - 2 - j] = (tmp % A).astype(dtype)
            tmp //= A

    steps = n - (k - 1)
    cum_kernel = np.cumsum(sd.kernel, axis=1)
    cum_kernel[:, -1] = 1.0  # guard the inverse CDF against rounding
    pos = k - 1
    chunk = 8192
    done = 0
    while done < steps:
        t_block = min(chunk, steps - done)
        uniforms = np.empty((R, t_block))
        for r, g in enumerate(gens):
            uniforms[r] = g.random(t_block)
        for t in range(t_block):
            rows = cum_kernel[states]
            symbols = (uniforms[:, t, None] >= rows).sum(axis=1)
            symbols = np.minimum(symbols, A - 1)
            out[:, pos] = symbols.astype(dtype)
            states = (states * A + symbols) % V
            pos += 1
        done += t_block
    return out


def sample_path(spec: SamplerSpec) -> np.ndarray:
    """Draw the single path described by ``spec`` (1-d array of symbols)."""
    return sample_paths(spec.spectral, spec.n, spec.seed, 1, spec.init)[0]


def birkhoff_sum(x: Sequence[int] | np.ndarray, phi: MarkovPotential) -> float:
    """Windowed running sum of phi along x: sum over the n-k+1 contiguous
    k-windows (no wraparound, unlike the estimators' cyclic counts)."""
    x = np.asarray(x)
    codes = window_codes(x, phi.k, phi.alphabet_size)
    return float(phi.values[codes].sum())


def birkhoff_sums(paths: np.ndarray, phi: MarkovPotential) -> np.ndarray:
    """Row-wise :func:`birkhoff_sum` for an (R, n) batch of paths."""
    codes = window_codes(paths, phi.k, phi.alphabet_size)
    return phi.values[codes].sum(axis=1)


def write_path_file(
    path: str, x: np.ndarray, alphabet_size: int, seed: int
) -> None:
    """Write a sample to a flat binary file: magic, |A|, n, seed header and
    one byte per symbol."""
    if alphabet_size > 255:
        raise ValueError("path files support alphabets up to 255 symbols")
    x = np.asarray(x)
    with open(path, "wb") as fh:
        fh.write(_PATH_MAGIC)
        fh.write(struct.pack("<QQQ", alphabet_size, x.size, seed))
        fh.write(x.astype(np.uint8).tobytes())


def read_path_file(path: str) -> tuple[np.ndarray, int, int]:
    """Inverse of :func:`write_path_file`: returns (symbols, |A|, seed)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _PATH_MAGIC:
            raise ValueError("not a path file (bad magic)")
        alphabet_size, n, seed = struct.unpack("<QQQ", fh.read(24))
        data = np.frombuffer(fh.read(n), dtype=np.uint8)
    if data.size != n:
        raise ValueError("truncated path file")
    if data.size and int(data.max()) >= alphabet_size:
        raise ValueError("path file contains out-of-alphabet symbols")
    return data.astype(np.int64), int(alphabet_size), int(seed)
