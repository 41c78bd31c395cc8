"""Block distributions over words of a finite alphabet.

Words of length k over the alphabet {0, ..., A-1} are identified with their
base-A integer codes,

    code(a_1 ... a_k) = sum_i a_i * A**(k - i),

so a distribution on k-blocks is just a vector of A**k weights in code order.
All estimators in this package use *cyclic* windows: a sample x_1 ... x_n is
read around a circle, giving exactly n windows of every length.  Empirical
block measures built this way are stationary by construction, which keeps the
downstream identities exact instead of exact-up-to-boundary-terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BlockDistribution",
    "block_schedule",
    "cyclic_window_codes",
    "empirical_block_measure",
    "index_to_word",
    "marginalize",
    "stationarity_defect",
    "tv_distance",
    "window_codes",
    "word_to_index",
]

#: Absolute tolerance for "weights sum to one" checks.
_MASS_TOL = 1e-12

#: Absolute tolerance below which a stationarity defect is considered zero.
_BALANCE_TOL = 1e-12


def word_to_index(word: Sequence[int], alphabet_size: int) -> int:
    """Return the base-``alphabet_size`` code of ``word``.

    The first symbol is the most significant digit.
    """
    code = 0
    for a in word:
        if not 0 <= a < alphabet_size:
            raise ValueError(f"symbol {a} outside alphabet of size {alphabet_size}")
        code = code * alphabet_size + int(a)
    return code


def index_to_word(code: int, k: int, alphabet_size: int) -> tuple[int, ...]:
    """Inverse of :func:`word_to_index` for words of length ``k``."""
    if not 0 <= code < alphabet_size**k:
        raise ValueError(f"code {code} out of range for {k}-words")
    out = []
    for _ in range(k):
        out.append(code % alphabet_size)
        code //= alphabet_size
    return tuple(reversed(out))


@dataclass(frozen=True)
class BlockDistribution:
    """A probability distribution on k-blocks, weights in word-code order.

    ``weights[c]`` is the mass of the word with code ``c``.  Construction
    validates nonnegativity and unit mass; if ``stationary`` is set, the
    two (k-1)-marginals (sum out the last symbol / sum out the first) must
    agree to within 1e-12.
    """

    alphabet_size: int
    k: int
    weights: np.ndarray
    stationary: bool = False

    def __post_init__(self) -> None:
        if self.alphabet_size < 2:
            raise ValueError("alphabet must have at least two symbols")
        if self.k < 1:
            raise ValueError("block length k must be >= 1")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.alphabet_size**self.k,):
            raise ValueError(
                f"expected {self.alphabet_size ** self.k} weights for k={self.k}, "
                f"got shape {w.shape}"
            )
        if np.any(w < -_MASS_TOL):
            raise ValueError("negative weight in block distribution")
        w = np.maximum(w, 0.0)
        if abs(w.sum() - 1.0) > _MASS_TOL * max(1.0, w.size**0.5):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.stationary and self.k >= 2:
            defect = stationarity_defect(self)
            if defect > _BALANCE_TOL:
                raise ValueError(
                    f"distribution marked stationary but defect is {defect:.3e}"
                )

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights))

    def prob(self, word: Sequence[int]) -> float:
        """Mass of an explicit word, given as a sequence of symbols."""
        if len(word) != self.k:
            raise ValueError(f"expected a {self.k}-word, got length {len(word)}")
        return float(self.weights[word_to_index(word, self.alphabet_size)])


def window_codes(x: np.ndarray, k: int, alphabet_size: int) -> np.ndarray:
    """Codes of the n-k+1 contiguous k-windows of ``x`` (no wraparound)."""
    x = np.asarray(x)
    n = x.shape[-1]
    if n < k:
        raise ValueError(f"sample of length {n} has no {k}-windows")
    m = n - k + 1
    codes = np.zeros(x.shape[:-1] + (m,), dtype=np.int64)
    for j in range(k):
        codes *= alphabet_size
        codes += x[..., j : j + m]
    return codes


def cyclic_window_codes(x: np.ndarray, k: int, alphabet_size: int) -> np.ndarray:
    """Codes of all n cyclic k-windows of ``x`` (window i starts at x_i).

    Accepts a single sample of shape (n,) or a batch of shape (R, n); the
    window axis is always the last one.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1:
        raise ValueError("empty sample")
    if k > n:
        raise ValueError(f"block length {k} exceeds sample length {n}")
    padded = np.concatenate([x, x[..., : k - 1]], axis=-1) if k > 1 else x
    codes = np.zeros(x.shape[:-1] + (n,), dtype=np.int64)
    for j in range(k):
        codes *= alphabet_size
        codes += padded[..., j : j + n]
    return codes


def empirical_block_measure(
    x: Sequence[int] | np.ndarray, k: int, alphabet_size: int
) -> BlockDistribution:
    """Empirical k-block distribution of a sample, using cyclic windows.

    Each of the n cyclic windows contributes weight 1/n, so the result is
    stationary exactly (every weight is a multiple of 1/n and the two
    (k-1)-marginals coincide).
    """
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1:
        raise ValueError("expected a single 1-d sample")
    if x.size and (x.min() < 0 or x.max() >= alphabet_size):
        raise ValueError("sample contains symbols outside the alphabet")
    codes = cyclic_window_codes(x, k, alphabet_size)
    counts = np.bincount(codes, minlength=alphabet_size**k)
    return BlockDistribution(
        alphabet_size, k, counts / x.size, stationary=True
    )


def marginalize(nu: BlockDistribution, side: str) -> BlockDistribution:
    """Sum out one symbol of a k-block distribution (k >= 2).

    ``side="right"`` removes the last symbol, leaving the distribution of
    the first k-1; ``side="left"`` removes the first symbol.  For a
    stationary input the two agree, and the output is stationary again.
    """
    if nu.k < 2:
        raise ValueError("cannot marginalize a 1-block distribution")
    A = nu.alphabet_size
    if side == "right":
        w = nu.weights.reshape(A ** (nu.k - 1), A).sum(axis=1)
    elif side == "left":
        w = nu.weights.reshape(A, A ** (nu.k - 1)).sum(axis=0)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return BlockDistribution(A, nu.k - 1, w, stationary=nu.stationary)


def stationarity_defect(nu: BlockDistribution) -> float:
    """Max over (k-1)-words w of |sum_b nu(w b) - sum_b nu(b w)|.

    Zero exactly when the k-block law is the k-marginal of a stationary
    process; 1-block distributions are vacuously stationary (defect 0).
    """
    if nu.k < 2:
        return 0.0
    A = nu.alphabet_size
    right = nu.weights.reshape(A ** (nu.k - 1), A).sum(axis=1)
    left = nu.weights.reshape(A, A ** (nu.k - 1)).sum(axis=0)
    return float(np.max(np.abs(right - left)))


def tv_distance(nu: BlockDistribution, mu: BlockDistribution) -> float:
    """Unnormalized L1 distance sum_w |nu(w) - mu(w)|, in [0, 2]."""
    if (nu.alphabet_size, nu.k) != (mu.alphabet_size, mu.k):
        raise ValueError("distributions live on different block spaces")
    return float(np.abs(nu.weights - mu.weights).sum())


def block_schedule(n: int, alphabet_size: int, epsilon: float) -> int:
    """Admissible block length k(n) = max(1, floor((1-eps) ln n / ln A)).

    Guarantees A**k(n) <= n**(1-eps) whenever the floor is >= 1, so block
    counts grow polynomially slower than the sample.  Clamped to 1 for tiny
    samples.
    """
    if n < 1:
        raise ValueError("sample size must be positive")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if alphabet_size < 2:
        raise ValueError("alphabet must have at least two symbols")
    return max(1, math.floor((1.0 - epsilon) * math.log(n) / math.log(alphabet_size)))
