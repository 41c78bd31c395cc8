"""End-to-end experiment harness.

Wires the sampler, the plug-in estimators, and the spectral theory into one
reproducible pipeline: draw seeded equilibrium paths over a grid of lengths,
estimate block/conditional/relative entropies against the exact equilibrium
references, compare scaled-cumulant curves three ways (exhaustive finite-n
enumeration, Monte Carlo, spectral formula), histogram estimates into
empirical rate points, and run decomposition/variance audits.  Everything is
driven by a single JSON-serializable ExperimentConfig and lands in a report
directory as report.json plus four CSV tables.

Seed discipline: every stage derives its generator seed from the master seed
via a fixed 64-bit mix of a stage tag and the path length, and each table row
records the exact per-replica seed that produced it.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Optional, Sequence

import numpy as np

from .blocks import (
    block_schedule,
    cyclic_window_codes,
    marginalize,
    window_codes,
)
from .entropy import (
    MEASURE_FUNCTIONALS,
    EntropyRecord,
    plug_in_estimates,
)
from .pressure import (
    MarkovPotential,
    SpectralData,
    equilibrium_blocks,
    normalize_potential,
    pressure,
)
from .rates import (
    asymptotic_variance,
    entropy_rate_function,
    entropy_scgf,
    information_scgf,
    relative_rate_function,
    zero_temperature_entropy,
)
from .simulate import RNG_NAME, birkhoff_sum, birkhoff_sums, sample_paths
from .typegraphs import enumerate_strings_chunk

__all__ = [
    "AuditRow",
    "ExperimentConfig",
    "LdpReport",
    "LlnSummary",
    "McScgf",
    "RateRow",
    "SampleRow",
    "ScgfRow",
    "VarianceAudit",
    "decomposition_audit",
    "empirical_rate",
    "exact_finite_scgf",
    "mc_scgf",
    "potential_from_config",
    "run_ldp",
    "run_lln",
    "variance_audit",
    "write_report",
]

_MASK64 = (1 << 64) - 1
_EXACT_STRING_CAP = 1 << 22
_CHUNK_CELLS = 1 << 22
_STAGE_LLN = 1
_STAGE_SCGF = 2
_STAGE_VARIANCE = 3

_CONFIG_KEYS = (
    "potential",
    "seed",
    "beta",
    "epsilon",
    "n_grid",
    "replicas",
    "t_grid",
    "u_grid",
    "functional",
    "exact_n",
    "exact_k",
    "scgf_n",
    "scgf_replicas",
    "bin_width",
    "variance_n",
    "variance_replicas",
    "threads",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one full experiment run."""

    potential: Mapping[str, object]
    seed: int = 20260816
    beta: float = 1.0
    epsilon: float = 0.2
    n_grid: tuple[int, ...] = (512, 2048, 8192)
    replicas: int = 64
    t_grid: tuple[float, ...] = (-0.5, -0.25, 0.0, 0.5, 1.0, 2.0)
    u_grid: tuple[float, ...] = ()
    functional: str = "conditional"
    exact_n: int = 14
    exact_k: int = 2
    scgf_n: int = 256
    scgf_replicas: int = 512
    bin_width: float = 0.02
    variance_n: int = 4096
    variance_replicas: int = 500
    threads: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.potential, Mapping):
            raise ValueError("potential must be a mapping")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        if any(n < 2 for n in self.n_grid):
            raise ValueError("every n in n_grid must be at least 2")
        if any(b >= a for b, a in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if not self.t_grid:
            raise ValueError("t_grid must be nonempty")
        if self.functional not in MEASURE_FUNCTIONALS:
            raise ValueError(f"unknown functional {self.functional!r}")
        if self.exact_k < 1 or self.exact_n < self.exact_k:
            raise ValueError("need exact_n >= exact_k >= 1")
        if self.scgf_n < self.exact_k:
            raise ValueError("scgf_n must be at least exact_k")
        if self.scgf_replicas < 2:
            raise ValueError("scgf_replicas must be at least 2")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        if self.variance_n < 2 or self.variance_replicas < 2:
            raise ValueError("variance stage needs n >= 2 and replicas >= 2")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "ExperimentConfig":
        unknown = sorted(set(data) - set(_CONFIG_KEYS))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        if "potential" not in data:
            raise ValueError("config requires a potential entry")
        kwargs: dict[str, object] = {}
        for key in _CONFIG_KEYS:
            if key not in data:
                continue
            value = data[key]
            if key in ("n_grid", "t_grid", "u_grid"):
                value = tuple(value)  # type: ignore[arg-type]
            kwargs[key] = value
        return cls(**kwargs)  # type: ignore[arg-type]

    def to_json_dict(self) -> dict[str, object]:
        return {
            "potential": dict(self.potential),
            "seed": self.seed,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "n_grid": list(self.n_grid),
            "replicas": self.replicas,
            "t_grid": list(self.t_grid),
            "u_grid": list(self.u_grid),
            "functional": self.functional,
            "exact_n": self.exact_n,
            "exact_k": self.exact_k,
            "scgf_n": self.scgf_n,
            "scgf_replicas": self.scgf_replicas,
            "bin_width": self.bin_width,
            "variance_n": self.variance_n,
            "variance_replicas": self.variance_replicas,
            "threads": self.threads,
        }


def potential_from_config(spec: Mapping[str, object]) -> MarkovPotential:
    """Build a normalized potential from its JSON description.

    Forms: {"type": "markov", "transition": rows} for a k=2 chain potential
    ln P[a, b]; {"type": "bernoulli", "p": probs} for k=1; or
    {"type": "values", "alphabet_size": A, "k": k, "values": [...]} with
    either "normalized": true (values already sum to one row-wise in
    exponential) or "normalize": true (fold the correction in here).
    """
    kind = spec.get("type")
    if kind == "markov":
        rows = np.asarray(spec["transition"], dtype=float)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise ValueError("transition must be a square matrix")
        if rows.shape[0] < 2:
            raise ValueError("alphabet must have at least 2 symbols")
        if np.any(rows <= 0):
            raise ValueError("transition entries must be strictly positive")
        if np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("transition rows must sum to 1")
        rows = rows / rows.sum(axis=1, keepdims=True)
        return MarkovPotential(
            rows.shape[0], 2, np.log(rows).ravel(), normalized=True
        )
    if kind == "bernoulli":
        p = np.asarray(spec["p"], dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("p must list at least 2 probabilities")
        if np.any(p <= 0):
            raise ValueError("probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        p = p / p.sum()
        return MarkovPotential(p.size, 1, np.log(p), normalized=True)
    if kind == "values":
        alphabet_size = int(spec["alphabet_size"])
        k = int(spec["k"])
        values = np.asarray(spec["values"], dtype=float)
        if bool(spec.get("normalized", False)):
            return MarkovPotential(alphabet_size, k, values, normalized=True)
        raw = MarkovPotential(alphabet_size, k, values)
        if bool(spec.get("normalize", False)):
            return normalize_potential(raw)[0]
        if raw.normalization_defect() <= 1e-8:
            return MarkovPotential(alphabet_size, k, values, normalized=True)
        raise ValueError(
            "potential values are not normalized; set \"normalize\": true "
            "to fold the correction in"
        )
    raise ValueError(f"unknown potential type {kind!r}")


def _effective_spectral(
    config: ExperimentConfig,
) -> tuple[MarkovPotential, SpectralData]:
    """Resolve the config to a normalized potential (with beta folded in)
    and its spectral data at inverse temperature 1."""
    phi = potential_from_config(config.potential)
    if config.beta != 1.0:
        raw = MarkovPotential(
            phi.alphabet_size, phi.k, config.beta * phi.values
        )
        phi = normalize_potential(raw)[0]
    return phi, pressure(phi, 1.0)


def _stage_seed(seed: int, stage: int, n: int) -> int:
    """Deterministic 64-bit stream selector: one stream per (stage, n)."""
    mixed = (stage * 0x9E3779B97F4A7C15 + n * 0xBF58476D1CE4E5B9) & _MASK64
    return (seed ^ mixed) & _MASK64


def _record_functional(record: EntropyRecord, functional: str) -> float:
    if functional == "conditional":
        return record.cond_entropy
    if functional == "average":
        return record.block_entropy / record.k
    if functional == "relative_conditional":
        value = record.rel_cond_entropy
    elif functional == "relative_average":
        value = record.rel_entropy / record.k  # type: ignore[operator]
    else:
        raise ValueError(f"unknown functional {functional!r}")
    if value is None:
        raise ValueError("relative functionals need a reference law")
    return value


@dataclass(frozen=True)
class SampleRow:
    n: int
    k: int
    replica: int
    seed: int
    record: EntropyRecord


@dataclass(frozen=True)
class LlnSummary:
    n: int
    k: int
    mean_abs_dev: float
    median_abs_dev: float
    median_cond: float
    reference_entropy: float


@dataclass(frozen=True)
class McScgf:
    estimate: float
    stderr: float
    high_variance: bool


@dataclass(frozen=True)
class ScgfRow:
    t: float
    exact: Optional[float]
    mc: float
    stderr: float
    high_variance: bool
    entropy_scgf: float
    information_scgf: float


@dataclass(frozen=True)
class RateRow:
    u: float
    empirical: Optional[float]
    entropy_rate: float
    relative_rate: float


@dataclass(frozen=True)
class AuditRow:
    n: int
    k: int
    lhs: float
    birkhoff: float
    delta: float
    residual: float
    bound: float


@dataclass(frozen=True)
class VarianceAudit:
    theory: float
    empirical: float
    z: float


@dataclass(frozen=True)
class LdpReport:
    config: ExperimentConfig
    samples: tuple[SampleRow, ...] = ()
    lln: tuple[LlnSummary, ...] = ()
    scgf: tuple[ScgfRow, ...] = ()
    rate: tuple[RateRow, ...] = ()
    audit: tuple[AuditRow, ...] = ()
    variance: Optional[VarianceAudit] = None
    summary: Mapping[str, object] = field(default_factory=dict)


def _replica_group_size(n: int) -> int:
    return max(1, (1 << 24) // max(n, 1))


def run_lln(config: ExperimentConfig) -> LdpReport:
    """Estimate entropies over the n-grid and summarize the convergence.

    For each path length n the block order is k(n) from the schedule, every
    replica gets its own recorded seed, and the per-replica records carry
    all four plug-in estimates against the exact equilibrium k-blocks.
    """
    phi, sd = _effective_spectral(config)
    A = phi.alphabet_size
    samples: list[SampleRow] = []
    summaries: list[LlnSummary] = []
    for n in config.n_grid:
        k = block_schedule(n, A, config.epsilon)
        rho_k = equilibrium_blocks(sd, k)
        seed_n = _stage_seed(config.seed, _STAGE_LLN, n)
        group = _replica_group_size(n)
        devs: list[float] = []
        conds: list[float] = []
        for start in range(0, config.replicas, group):
            count = min(group, config.replicas - start)
            paths = sample_paths(
                sd, n, seed_n, count, replica_offset=start
            )
            for local in range(count):
                replica = start + local
                record = plug_in_estimates(paths[local], k, A, rho_k)
                samples.append(
                    SampleRow(
                        n=n,
                        k=k,
                        replica=replica,
                        seed=(seed_n ^ replica) & _MASK64,
                        record=record,
                    )
                )
                devs.append(abs(record.cond_entropy - sd.entropy))
                conds.append(record.cond_entropy)
        summaries.append(
            LlnSummary(
                n=n,
                k=k,
                mean_abs_dev=float(np.mean(devs)),
                median_abs_dev=float(np.median(devs)),
                median_cond=float(np.median(conds)),
                reference_entropy=sd.entropy,
            )
        )
    return LdpReport(config=config, samples=tuple(samples), lln=tuple(summaries))


def _logsumexp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -math.inf
    top = float(np.max(values))
    if not math.isfinite(top):
        return top  # all -inf (or a genuine +inf dominates everything)
    return top + math.log(float(np.exp(values - top).sum()))


def _counts_functional(
    counts: np.ndarray,
    n: int,
    k: int,
    alphabet_size: int,
    functional: str,
    log_rho_k: Optional[np.ndarray],
    log_rho_km1: Optional[np.ndarray],
) -> np.ndarray:
    """Vectorized per-row measure functional from cyclic k-block counts."""
    counts = counts.astype(float)
    safe = np.where(counts > 0, counts, 1.0)
    clogc = (counts * np.log(safe)).sum(axis=1)
    block_h = math.log(n) - clogc / n
    if functional == "average":
        return block_h / k
    if k >= 2:
        lower = counts.reshape(-1, alphabet_size ** (k - 1), alphabet_size).sum(
            axis=2
        )
        safe1 = np.where(lower > 0, lower, 1.0)
        clogc1 = (lower * np.log(safe1)).sum(axis=1)
        lower_h = math.log(n) - clogc1 / n
    else:
        lower = None
        lower_h = np.zeros(counts.shape[0])
    if functional == "conditional":
        return block_h - lower_h
    assert log_rho_k is not None
    rel_k = clogc / n - math.log(n) - counts @ log_rho_k / n
    if functional == "relative_average":
        return rel_k / k
    if k >= 2:
        assert lower is not None and log_rho_km1 is not None
        rel_km1 = clogc1 / n - math.log(n) - lower @ log_rho_km1 / n
    else:
        rel_km1 = np.zeros(counts.shape[0])
    return rel_k - rel_km1


def exact_finite_scgf(
    phi: MarkovPotential,
    n: int,
    k: int,
    t: float,
    functional: str = "conditional",
    sd: Optional[SpectralData] = None,
) -> float:
    """Exhaustive finite-n scaled cumulant generating value.

    Enumerates every string of length n, weights it by its exact equilibrium
    probability, and returns (1/n) ln E[exp(n t F)] for the chosen estimate
    functional F computed from cyclic k-block counts.  Feasible only while
    A**n stays at or below 2**22 strings.
    """
    if not phi.normalized:
        raise ValueError("exact SCGF needs a normalized potential")
    A = phi.alphabet_size
    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= n")
    if A**n > _EXACT_STRING_CAP:
        raise ValueError("alphabet**n exceeds the exhaustive enumeration cap")
    if functional not in MEASURE_FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    if sd is None:
        sd = pressure(phi, 1.0)

    log_rho_k = log_rho_km1 = None
    if functional.startswith("relative"):
        rho_k = equilibrium_blocks(sd, k)
        if np.any(rho_k.weights <= 0):
            raise ValueError("relative functionals need a full-support law")
        log_rho_k = np.log(rho_k.weights)
        if k >= 2:
            log_rho_km1 = np.log(marginalize(rho_k, "right").weights)

    d = phi.k
    with np.errstate(divide="ignore"):
        log_q = np.log(sd.vertex_stationary)
        log_kernel = np.log(sd.kernel).ravel()

    n_words = A**k
    total = A**n
    rows = max(1, _CHUNK_CELLS // max(n_words, n))
    chunk_sums: list[float] = []
    mass_sums: list[float] = []
    offsets_cache: dict[int, np.ndarray] = {}
    for lo in range(0, total, rows):
        hi = min(lo + rows, total)
        x = enumerate_strings_chunk(lo, hi, n, A)
        m = x.shape[0]
        codes = cyclic_window_codes(x, k, A)
        if m not in offsets_cache:
            offsets_cache[m] = np.arange(m, dtype=np.int64)[:, None] * n_words
        counts = np.bincount(
            (codes + offsets_cache[m]).ravel(), minlength=m * n_words
        ).reshape(m, n_words)
        f_vals = _counts_functional(
            counts, n, k, A, functional, log_rho_k, log_rho_km1
        )
        path_codes = window_codes(x, d, A)
        log_mass = log_q[path_codes[:, 0] // A] + log_kernel[path_codes].sum(
            axis=1
        )
        chunk_sums.append(_logsumexp(log_mass + n * t * f_vals))
        mass_sums.append(_logsumexp(log_mass))
    # Dividing by the enumerated total mass (exactly 1 in exact arithmetic)
    # cancels the shared rounding of the normalization, so t = 0 returns 0.0.
    return (_logsumexp(np.array(chunk_sums)) - _logsumexp(np.array(mass_sums))) / n


def mc_scgf(
    sd: SpectralData,
    n: int,
    k: int,
    t: float,
    functional: str,
    replicas: int,
    seed: int,
) -> McScgf:
    """Monte Carlo scaled cumulant estimate with a delta-method stderr.

    Averages exp(n t F) over seeded replicas; the relative spread of those
    exponential weights drives both the standard error and the high-variance
    flag (flagged when a few paths dominate the average, the usual failure
    mode of naive tilted-mean estimation at large t).
    """
    A = sd.potential.alphabet_size
    rho_k = None
    if functional.startswith("relative"):
        rho_k = equilibrium_blocks(sd, k)
    values = np.empty(replicas)
    group = _replica_group_size(n)
    for start in range(0, replicas, group):
        count = min(group, replicas - start)
        paths = sample_paths(sd, n, seed, count, replica_offset=start)
        for local in range(count):
            record = plug_in_estimates(paths[local], k, A, rho_k)
            values[start + local] = _record_functional(record, functional)
    scaled = n * t * values
    top = float(scaled.max())
    weights = np.exp(scaled - top)
    mean_w = float(weights.mean())
    estimate = (top + math.log(mean_w)) / n
    spread = float(weights.std(ddof=1)) / mean_w
    stderr = spread / math.sqrt(replicas) / n
    return McScgf(
        estimate=estimate,
        stderr=stderr,
        high_variance=bool(spread / math.sqrt(replicas) > 0.5),
    )


def empirical_rate(
    values: Sequence[float] | np.ndarray, n: int, bin_width: float
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram estimates into aligned bins and return rate points.

    Bins are [i*w, (i+1)*w); each observed range bin yields the decay
    exponent -(1/n) ln(frequency), with +inf marking interior bins no
    replica hit.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("need at least one value")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    idx = np.floor(values / bin_width).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    centers = (np.arange(lo, hi + 1) + 0.5) * bin_width
    with np.errstate(divide="ignore"):
        rates = -np.log(counts / values.size) / n
    return centers, rates


def decomposition_audit(
    x: np.ndarray,
    phi: MarkovPotential,
    k: int,
    sd: Optional[SpectralData] = None,
) -> AuditRow:
    """Split the conditional-entropy estimation error into its three parts.

    lhs is the plug-in error h_hat_k - h(rho); the Birkhoff term is minus
    the centered running average of the potential; the delta term is minus
    the relative conditional entropy of the empirical blocks against the
    equilibrium; the residual is whatever the two tracked terms leave over,
    reported next to the 10*k/n yardstick.
    """
    if not phi.normalized:
        raise ValueError("decomposition audit needs a normalized potential")
    if sd is None:
        sd = pressure(phi, 1.0)
    x = np.asarray(x)
    n = x.size
    d = phi.k
    if k < d:
        raise ValueError("audit block order must be at least the potential's")
    record = plug_in_estimates(
        x, k, phi.alphabet_size, equilibrium_blocks(sd, k)
    )
    assert record.rel_cond_entropy is not None
    if record.rel_cond_entropy < -1e-9:
        raise RuntimeError("relative conditional entropy came out negative")
    lhs = record.cond_entropy - sd.entropy
    birkhoff = -(birkhoff_sum(x, phi) - (n - d + 1) * sd.potential_mean) / n
    delta = -record.rel_cond_entropy
    residual = lhs - birkhoff - delta
    return AuditRow(
        n=n,
        k=k,
        lhs=lhs,
        birkhoff=birkhoff,
        delta=delta,
        residual=residual,
        bound=10.0 * k / n,
    )


def variance_audit(
    phi: MarkovPotential,
    n: int,
    replicas: int,
    seed: int,
    sd: Optional[SpectralData] = None,
) -> VarianceAudit:
    """Compare the spectral asymptotic variance against replica scatter.

    The empirical side is n times the variance of the per-path running
    averages of the potential; the z-score scales the gap by the normal
    sampling error of a variance over that many replicas.
    """
    if not phi.normalized:
        raise ValueError("variance audit needs a normalized potential")
    if sd is None:
        sd = pressure(phi, 1.0)
    theory = asymptotic_variance(phi)
    sums = np.empty(replicas)
    group = _replica_group_size(n)
    for start in range(0, replicas, group):
        count = min(group, replicas - start)
        paths = sample_paths(sd, n, seed, count, replica_offset=start)
        sums[start : start + count] = birkhoff_sums(paths, phi)
    empirical = float(np.var(sums / n, ddof=1)) * n
    scale = theory * math.sqrt(2.0 / (replicas - 1))
    if scale > 0:
        z = (empirical - theory) / scale
    else:
        z = 0.0 if abs(empirical) < 1e-12 else math.inf
    return VarianceAudit(theory=theory, empirical=empirical, z=float(z))


def run_ldp(config: ExperimentConfig) -> LdpReport:
    """Run the whole pipeline and assemble the report.

    Stages: the LLN pass over the n-grid, the three-way SCGF table over the
    t-grid, the rate table (empirical histogram points at the largest n
    merged with the theory grid), one decomposition audit per n (replica 0's
    path, bitwise the same as the LLN run), and the variance audit.
    """
    phi, sd = _effective_spectral(config)
    A = phi.alphabet_size
    lln_report = run_lln(config)

    scgf_rows: list[ScgfRow] = []
    exact_ok = (
        A**config.exact_n <= _EXACT_STRING_CAP
        and config.exact_n >= config.exact_k
    )
    for index, t in enumerate(config.t_grid):
        exact = (
            exact_finite_scgf(
                phi, config.exact_n, config.exact_k, t, config.functional, sd
            )
            if exact_ok
            else None
        )
        mc = mc_scgf(
            sd,
            config.scgf_n,
            config.exact_k,
            t,
            config.functional,
            config.scgf_replicas,
            _stage_seed(config.seed, _STAGE_SCGF + 100 * (index + 1), config.scgf_n),
        )
        scgf_rows.append(
            ScgfRow(
                t=t,
                exact=exact,
                mc=mc.estimate,
                stderr=mc.stderr,
                high_variance=mc.high_variance,
                entropy_scgf=entropy_scgf(phi, t),
                information_scgf=information_scgf(phi, t),
            )
        )

    n_max = config.n_grid[-1]
    cond_values = [
        row.record.cond_entropy for row in lln_report.samples if row.n == n_max
    ]
    centers, emp_rates = empirical_rate(cond_values, n_max, config.bin_width)
    if config.u_grid:
        theory_grid = np.asarray(config.u_grid, dtype=float)
    else:
        theory_grid = np.linspace(0.0, math.log(A), 21)
    rate_points: dict[float, Optional[float]] = {
        float(u): None for u in theory_grid
    }
    for center, emp in zip(centers, emp_rates):
        rate_points[float(center)] = float(emp)
    rate_rows = [
        RateRow(
            u=u,
            empirical=emp,
            entropy_rate=entropy_rate_function(phi, u),
            relative_rate=relative_rate_function(phi, u),
        )
        for u, emp in sorted(rate_points.items())
    ]

    audit_rows: list[AuditRow] = []
    for n in config.n_grid:
        k = block_schedule(n, A, config.epsilon)
        seed_n = _stage_seed(config.seed, _STAGE_LLN, n)
        path = sample_paths(sd, n, seed_n, 1)[0]
        audit_rows.append(decomposition_audit(path, phi, k, sd))

    var_audit = variance_audit(
        phi,
        config.variance_n,
        config.variance_replicas,
        _stage_seed(config.seed, _STAGE_VARIANCE, config.variance_n),
        sd,
    )

    zero_temp, zero_temp_converged = zero_temperature_entropy(phi)
    summary: dict[str, object] = {
        "pressure": sd.pressure,
        "entropy": sd.entropy,
        "mean_potential": sd.potential_mean,
        "zero_temperature_entropy": zero_temp,
        "zero_temperature_converged": zero_temp_converged,
        "sigma2_theory": var_audit.theory,
        "sigma2_empirical": var_audit.empirical,
        "variance_z": var_audit.z,
        "lln": [
            {
                "n": row.n,
                "k": row.k,
                "mean_abs_dev": row.mean_abs_dev,
                "median_abs_dev": row.median_abs_dev,
                "median_cond": row.median_cond,
                "reference_entropy": row.reference_entropy,
            }
            for row in lln_report.lln
        ],
        "max_audit_ratio": max(
            abs(row.residual) * row.n / row.k for row in audit_rows
        ),
        "high_variance_t": [
            row.t for row in scgf_rows if row.high_variance
        ],
    }
    return LdpReport(
        config=config,
        samples=lln_report.samples,
        lln=lln_report.lln,
        scgf=tuple(scgf_rows),
        rate=tuple(rate_rows),
        audit=tuple(audit_rows),
        variance=var_audit,
        summary=summary,
    )


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: str, header: str, rows: Sequence[Sequence[object]]) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(report: LdpReport, out_dir: str) -> dict[str, str]:
    """Write report.json and the four CSV tables into out_dir.

    All floats carry 12 significant digits; the timestamp lives only in
    report.json so the tables stay byte-identical across reruns.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "report": os.path.join(out_dir, "report.json"),
        "samples": os.path.join(out_dir, "samples.csv"),
        "scgf": os.path.join(out_dir, "scgf.csv"),
        "rate": os.path.join(out_dir, "rate.csv"),
        "audit": os.path.join(out_dir, "audit.csv"),
    }
    payload = {
        "config": report.config.to_json_dict(),
        "rng": RNG_NAME,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "summary": report.summary,
    }
    with open(paths["report"], "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_csv(
        paths["samples"],
        "n,k,replica,seed," + EntropyRecord.CSV_HEADER.split(",", 2)[2],
        [
            (
                row.n,
                row.k,
                row.replica,
                row.seed,
                row.record.block_entropy,
                row.record.cond_entropy,
                row.record.rel_entropy,
                row.record.rel_cond_entropy,
            )
            for row in report.samples
        ],
    )
    _write_csv(
        paths["scgf"],
        "t,exact_n,mc,stderr,entropy_scgf,information_scgf",
        [
            (row.t, row.exact, row.mc, row.stderr, row.entropy_scgf, row.information_scgf)
            for row in report.scgf
        ],
    )
    _write_csv(
        paths["rate"],
        "u,emp_rate,entropy_rate_theory,relative_rate_theory",
        [
            (row.u, row.empirical, row.entropy_rate, row.relative_rate)
            for row in report.rate
        ],
    )
    _write_csv(
        paths["audit"],
        "n,k,lhs,birkhoff,delta,residual,bound",
        [
            (row.n, row.k, row.lhs, row.birkhoff, row.delta, row.residual, row.bound)
            for row in report.audit
        ],
    )
    return paths
