"""Plug-in entropy and relative-entropy estimators on block distributions.

Everything is in nats.  For a k-block law nu with (k-1)-marginal nu' (last
symbol summed out):

    H_k(nu)        = -sum_w nu(w) ln nu(w)              (block entropy)
    h_k(nu)        = H_k(nu) - H_{k-1}(nu')             (conditional entropy)
    D_k(nu | rho)  = sum_w nu(w) ln(nu(w)/rho(w))       (relative entropy)
    Delta_k        = D_k - D_{k-1}                      (conditional form)

with the conventions H_0 = 0 and D_0 = 0, so h_1 = H_1 and Delta_1 = D_1.
Relative entropies return +inf when nu charges a word that rho does not;
that is a divergence signal, not an overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .blocks import BlockDistribution, empirical_block_measure, marginalize

__all__ = [
    "EntropyRecord",
    "conditional_block_entropy",
    "conditional_relative_entropy",
    "continuity_bound",
    "measure_functional",
    "plug_in_estimates",
    "relative_block_entropy",
    "shannon_block_entropy",
    "MEASURE_FUNCTIONALS",
]


def shannon_block_entropy(nu: BlockDistribution) -> float:
    """H_k(nu) = -sum nu ln nu, with 0 ln 0 = 0."""
    w = nu.weights
    pos = w > 0
    return float(-(w[pos] * np.log(w[pos])).sum())


def conditional_block_entropy(nu: BlockDistribution) -> float:
    """h_k(nu) = H_k(nu) - H_{k-1} of the last-symbol marginal (H_0 = 0).

    For the k-marginal of a (k-1)-step Markov measure this equals the
    entropy rate of the process.
    """
    hk = shannon_block_entropy(nu)
    if nu.k == 1:
        return hk
    return hk - shannon_block_entropy(marginalize(nu, "right"))


def relative_block_entropy(nu: BlockDistribution, rho: BlockDistribution) -> float:
    """D_k(nu | rho); +inf if nu's support is not contained in rho's."""
    if (nu.alphabet_size, nu.k) != (rho.alphabet_size, rho.k):
        raise ValueError("distributions live on different block spaces")
    p, q = nu.weights, rho.weights
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float((p[pos] * (np.log(p[pos]) - np.log(q[pos]))).sum())


def conditional_relative_entropy(
    nu: BlockDistribution, rho: BlockDistribution
) -> float:
    """Delta_k = D_k(nu|rho) - D_{k-1} of the last-symbol marginals (D_0 = 0).

    Nonnegative for stationary nu whenever rho is the k-marginal of a
    (k-1)-step Markov measure.
    """
    dk = relative_block_entropy(nu, rho)
    if nu.k == 1:
        return dk
    dkm1 = relative_block_entropy(marginalize(nu, "right"), marginalize(rho, "right"))
    if math.isinf(dk) and math.isinf(dkm1):
        return math.inf
    return dk - dkm1


@dataclass(frozen=True)
class EntropyRecord:
    """One row of estimates for a sample: entropies and, when a reference
    law was supplied, relative entropies."""

    n: int
    k: int
    block_entropy: float
    cond_entropy: float
    rel_entropy: Optional[float] = None
    rel_cond_entropy: Optional[float] = None

    CSV_HEADER = "n,k,block_entropy,cond_entropy,rel_entropy,rel_cond_entropy"

    def csv_row(self, fmt) -> str:
        cells = [str(self.n), str(self.k), fmt(self.block_entropy), fmt(self.cond_entropy)]
        for v in (self.rel_entropy, self.rel_cond_entropy):
            cells.append("" if v is None else fmt(v))
        return ",".join(cells)


def plug_in_estimates(
    x: Sequence[int] | np.ndarray,
    k: int,
    alphabet_size: int,
    rho_k: Optional[BlockDistribution] = None,
) -> EntropyRecord:
    """Empirical H_k, h_k (and D_k, Delta_k against ``rho_k`` if given)
    from the cyclic k-block counts of one sample."""
    x = np.asarray(x, dtype=np.int64)
    pi_k = empirical_block_measure(x, k, alphabet_size)
    hk = shannon_block_entropy(pi_k)
    cond = conditional_block_entropy(pi_k)
    rel = rel_cond = None
    if rho_k is not None:
        rel = relative_block_entropy(pi_k, rho_k)
        rel_cond = conditional_relative_entropy(pi_k, rho_k)
    return EntropyRecord(int(x.size), k, hk, cond, rel, rel_cond)


def continuity_bound(delta: float, k: int, alphabet_size: int) -> float:
    """Upper bound on |H_k(nu) - H_k(mu)| when tv_distance(nu, mu) <= delta.

    Equals -2 delta ln(delta / A**k) and requires delta <= 1/e, where the
    bound is monotone increasing in delta.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta > 1.0 / math.e:
        raise ValueError("continuity bound requires delta <= 1/e")
    if delta == 0.0:
        return 0.0
    return -2.0 * delta * math.log(delta / alphabet_size**k)


#: Functionals of a k-block law used by the deviation machinery: per-step
#: conditional entropy, per-symbol block entropy, per-symbol relative
#: entropy, and the conditional relative entropy.
MEASURE_FUNCTIONALS = ("conditional", "average", "relative_conditional", "relative_average")


def measure_functional(
    name: str, nu: BlockDistribution, rho_k: Optional[BlockDistribution] = None
) -> float:
    """Evaluate one of :data:`MEASURE_FUNCTIONALS` on a k-block law."""
    if name == "conditional":
        return conditional_block_entropy(nu)
    if name == "average":
        return shannon_block_entropy(nu) / nu.k
    if rho_k is None:
        raise ValueError(f"functional {name!r} needs a reference distribution")
    if name == "relative_conditional":
        return conditional_relative_entropy(nu, rho_k)
    if name == "relative_average":
        return relative_block_entropy(nu, rho_k) / nu.k
    raise ValueError(f"unknown functional {name!r}")
