"""Scaled cumulant generating functions and large-deviation rate curves.

All functions take a *normalized* potential (see pressure.py), for which the
pressure vanishes and the equilibrium entropy is -E[phi].  The SCGFs:

    entropy_scgf(t)      (t+1) * P_top(phi / (t+1))   for t > -1,
                         max mean cycle of phi        for t <= -1;
    information_scgf(t)  P_top((1-t) * phi);
    relative_scgf(t)     0 for t <= 1, (1-t) * (min mean cycle) for t > 1.

Their Legendre duals are the rate functions for conditional-entropy and
relative-entropy estimators: ``entropy_rate_function`` (strictly convex
between the zero-temperature entropy and ln A, linear below) and
``relative_rate_function`` (the identity on its domain).  Extreme cycle
means come from Karp's minimum-mean-cycle recursion, independent of any
eigenvalue machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import measure_functional
from .blocks import BlockDistribution
from .pressure import (
    ConvergenceError,
    MarkovPotential,
    ReducibilityError,
    SpectralData,
    equilibrium_blocks,
    pressure,
    relative_entropy_rate,
)

__all__ = [
    "RateCurve",
    "asymptotic_variance",
    "entropy_curve",
    "entropy_rate_function",
    "entropy_scgf",
    "extreme_mean",
    "fixed_k_rate_lower",
    "information_scgf",
    "legendre",
    "rate_curve",
    "relative_rate_function",
    "relative_scgf",
    "renyi_scgf",
    "zero_temperature_entropy",
]

#: Default bisection ceiling for inverse-temperature searches.
_BETA_MAX = 256.0

#: Betas used for the zero-temperature (large-beta) entropy estimate.
_ZERO_TEMP_BETAS = (64.0, 128.0, 256.0)

_CURVE_KINDS = (
    "entropy_rate",
    "relative_rate",
    "entropy_scgf",
    "information_scgf",
    "relative_scgf",
)


def _require_normalized(phi: MarkovPotential) -> None:
    if not phi.normalized:
        raise ValueError("this operation requires a normalized potential")


def extreme_mean(phi: MarkovPotential, which: str = "min") -> float:
    """Minimum or maximum mean-weight directed cycle of the word graph.

    Karp's recursion on (k-1)-word vertices: D_m(v) = cheapest m-arc walk
    into v from anywhere, then

        min mean cycle = min_v max_m (D_V(v) - D_m(v)) / (V - m).

    The full word graph is strongly connected with every vertex on a cycle,
    so no reachability exceptions arise.  Maximization runs on -phi.
    """
    if which not in ("min", "max"):
        raise ValueError("which must be 'min' or 'max'")
    sign = 1.0 if which == "min" else -1.0
    A, k = phi.alphabet_size, phi.k
    V = A ** (k - 1)
    w = sign * phi.values
    arcs = np.arange(A**k)
    heads, tails = arcs % V, arcs // A
    D = np.full((V + 1, V), np.inf)
    D[0] = 0.0
    for m in range(1, V + 1):
        cand = D[m - 1][tails] + w
        np.minimum.at(D[m], heads, cand)
    ratios = (D[V][None, :] - D[:V]) / (V - np.arange(V))[:, None]
    mu = float(np.min(np.max(ratios, axis=0)))
    return sign * mu


def entropy_scgf(phi: MarkovPotential, t: float) -> float:
    """SCGF dual to the conditional-entropy rate function.

    (t+1) P_top(phi/(t+1)) above t = -1; frozen at the maximum cycle mean
    below, where the estimator cannot deviate any further.
    """
    _require_normalized(phi)
    if t > -1.0:
        return (t + 1.0) * pressure(phi, 1.0 / (t + 1.0)).pressure
    return extreme_mean(phi, "max")


def information_scgf(phi: MarkovPotential, t: float) -> float:
    """SCGF P_top((1-t) phi) of the per-symbol information content."""
    _require_normalized(phi)
    return pressure(phi, 1.0 - t).pressure


def relative_scgf(phi: MarkovPotential, t: float) -> float:
    """SCGF dual to the relative-entropy rate function: zero up to t = 1,
    then (1-t) times the minimum cycle mean."""
    _require_normalized(phi)
    if t <= 1.0:
        return 0.0
    return (1.0 - t) * extreme_mean(phi, "min")


def renyi_scgf(sd: SpectralData, t: float, n: int | None = None) -> float:
    """Renyi-sum route to the entropy SCGF, from the equilibrium kernel.

    Computes (t+1)/n * ln sum over n-strings of rho([a_1..a_n])**(1/(t+1))
    through the powered-weight kernel matrix B[u, v] = Q(b|u)**s; with
    ``n=None`` returns the n -> infinity limit (t+1) ln lambda(B).  Agrees
    with entropy_scgf in the limit, with an O(1/n) finite-n gap.
    """
    if t <= -1.0:
        raise ValueError("the Renyi route needs t > -1")
    s = 1.0 / (t + 1.0)
    A, k = sd.potential.alphabet_size, sd.potential.k
    V = A ** (k - 1)
    powered = np.where(sd.kernel > 0, np.where(sd.kernel > 0, sd.kernel, 1.0) ** s, 0.0)
    B = np.zeros((V, V))
    arcs = np.arange(A**k)
    np.add.at(B, (arcs // A, arcs % V), powered.ravel())
    if n is None:
        from .pressure import _perron

        lam, _ = _perron(B)
        return (t + 1.0) * math.log(lam)
    if n < k:
        raise ValueError("need n >= k")
    with np.errstate(divide="ignore"):
        row = np.exp(s * np.log(np.maximum(sd.vertex_stationary, 0.0)))
    row = np.where(sd.vertex_stationary > 0, row, 0.0)
    log_scale = 0.0
    for _ in range(n - k + 1):
        row = row @ B
        total = float(row.sum())
        row /= total
        log_scale += math.log(total)
    return (t + 1.0) * (math.log(float(row.sum())) + log_scale) / n


def entropy_curve(
    phi: MarkovPotential,
    beta_grid: np.ndarray | list[float],
    require_strict: bool = False,
) -> list[tuple[float, float]]:
    """Equilibrium entropy h(beta) along a grid of inverse temperatures.

    Strictly decreasing in beta unless the potential is constant; pass
    ``require_strict=True`` to reject that degenerate case up front.
    """
    _require_normalized(phi)
    if require_strict and phi.is_constant():
        raise ValueError(
            "degenerate case: a constant potential has a flat entropy curve"
        )
    return [(float(b), pressure(phi, float(b)).entropy) for b in beta_grid]


def zero_temperature_entropy(phi: MarkovPotential) -> tuple[float, bool]:
    """Large-beta entropy limit, estimated at beta = 64, 128, 256.

    Returns the beta = 256 value and a convergence flag: True when the
    consecutive gaps have closed below 1e-4 (Cauchy check), False when the
    limit has visibly not settled yet.
    """
    h = [pressure(phi, b).entropy for b in _ZERO_TEMP_BETAS]
    gap = max(abs(h[1] - h[0]), abs(h[2] - h[1]))
    return h[2], gap < 1e-4


def _largest_feasible_tilt(
    phi: MarkovPotential, beta_max: float
) -> tuple[float, SpectralData]:
    """Largest tilt in (0, beta_max] with a computable transfer spectrum.

    Strong tilting underflows transfer-matrix entries once beta times the
    potential's spread nears the float64 exponent range, at which point the
    matrix is numerically reducible.  Halving back into the feasible range
    costs only an exponentially small tail of the zero-temperature limit.
    """
    beta = float(beta_max)
    while True:
        try:
            return beta, pressure(phi, beta)
        except (ConvergenceError, ReducibilityError):
            if beta <= 8.0:
                raise
            beta *= 0.5


def entropy_rate_function(
    phi: MarkovPotential, u: float, beta_max: float = _BETA_MAX
) -> float:
    """Rate function for deviations of the conditional-entropy estimator.

    On [h_inf, ln A] the unique beta with h(rho_beta) = u is found by
    bisection (h is monotone in beta) and the rate is the relative entropy
    -E_{rho_beta}[phi] - u.  Below the zero-temperature entropy h_inf
    (estimated at the largest numerically feasible tilt up to beta_max)
    the rate continues linearly as -u - maxmean(phi); outside [0, ln A]
    the level is unreachable and the rate is +inf.
    """
    _require_normalized(phi)
    ln_a = math.log(phi.alphabet_size)
    slack = 1e-12
    if u < -slack or u > ln_a + slack:
        return math.inf
    u = min(max(u, 0.0), ln_a)
    beta_cap, sd_cap = _largest_feasible_tilt(phi, beta_max)
    h_floor = sd_cap.entropy
    if u < h_floor:
        return -u - extreme_mean(phi, "max")
    lo, hi = 0.0, beta_cap
    sd = pressure(phi, 0.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        sd_mid = pressure(phi, mid)
        if sd_mid.entropy > u:
            lo = mid
            sd = sd_mid
        else:
            hi = mid
            sd = sd_mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return max(0.0, -sd.potential_mean - u)


def relative_rate_function(phi: MarkovPotential, u: float) -> float:
    """Rate function of the relative-entropy estimator: the identity on
    [0, -minmean(phi)], +inf outside."""
    _require_normalized(phi)
    endpoint = -extreme_mean(phi, "min")
    slack = 1e-12
    if u < -slack or u > endpoint + slack:
        return math.inf
    return min(max(u, 0.0), endpoint)


@dataclass(frozen=True)
class RateCurve:
    """A rate function or SCGF tabulated on a grid (values may be inf)."""

    kind: str
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in _CURVE_KINDS:
            raise ValueError(f"kind must be one of {_CURVE_KINDS}, got {self.kind!r}")
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        g.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)


def rate_curve(
    phi: MarkovPotential, kind: str, grid: np.ndarray | list[float]
) -> RateCurve:
    """Tabulate one of the named rate functions / SCGFs on a grid."""
    fn = {
        "entropy_rate": entropy_rate_function,
        "relative_rate": relative_rate_function,
        "entropy_scgf": entropy_scgf,
        "information_scgf": information_scgf,
        "relative_scgf": relative_scgf,
    }[kind]
    values = [fn(phi, float(x)) for x in grid]
    return RateCurve(kind, np.asarray(grid, dtype=float), np.asarray(values))


def legendre(curve: RateCurve, x: float) -> float:
    """Numerical Legendre transform sup_u (x*u - curve(u)) over the grid."""
    finite = np.isfinite(curve.values)
    if not finite.any():
        raise ValueError("Legendre transform of a curve with no finite values")
    return float(np.max(x * curve.grid[finite] - curve.values[finite]))


def asymptotic_variance(
    phi: MarkovPotential, route: str = "information", step: float = 1e-3
) -> float:
    """Central-limit variance of Birkhoff sums of phi, as the curvature at
    zero of an SCGF.

    Richardson-extrapolated central second difference (steps h and h/2) of
    ``information_scgf`` by default; ``route="entropy"`` differentiates
    ``entropy_scgf`` instead, and the two must agree (same curvature).
    """
    _require_normalized(phi)
    fn = {"information": information_scgf, "entropy": entropy_scgf}[route]

    def second_diff(h: float) -> float:
        return (fn(phi, h) - 2.0 * fn(phi, 0.0) + fn(phi, -h)) / (h * h)

    return (4.0 * second_diff(step / 2.0) - second_diff(step)) / 3.0


def fixed_k_rate_lower(
    phi: MarkovPotential,
    k_fixed: int,
    functional: str,
    u: float,
    grid_size: int | None = None,
    tol: float = 1e-3,
) -> float:
    """Upper-bounding oracle for the contracted fixed-block-length rate.

    Searches (k_fixed - 1)-step Markov measures over a transition-
    probability grid, minimizing the specific relative entropy against the
    equilibrium of ``phi`` subject to the chosen functional of the k_fixed-
    block marginal lying within ``tol`` of ``u``.  Restricted to binary
    alphabets and k_fixed <= 2, where the brute-force grid is dense enough
    to be informative; returns +inf when nothing on the grid is feasible.
    The true contracted rate need not be convex, and this search refines
    downward — treat the result as an upper bound.
    """
    _require_normalized(phi)
    if phi.alphabet_size != 2 or k_fixed not in (1, 2):
        raise ValueError("fixed-k search supports alphabet size 2 and k_fixed <= 2")
    sd = pressure(phi, 1.0)
    rho_ref = equilibrium_blocks(sd, k_fixed)
    best = math.inf
    if k_fixed == 1:
        g = grid_size or 2000
        for i in range(1, g):
            p = i / g
            nu = BlockDistribution(2, 1, np.array([1.0 - p, p]), stationary=True)
            if abs(measure_functional(functional, nu, rho_ref) - u) > tol:
                continue
            best = min(best, relative_entropy_rate(nu, phi))
    else:
        g = grid_size or 120
        for i in range(1, g):
            a = i / g  # P(1 | 0)
            for j in range(1, g):
                b = j / g  # P(0 | 1)
                p0 = b / (a + b)
                p1 = 1.0 - p0
                w = np.array(
                    [p0 * (1 - a), p0 * a, p1 * b, p1 * (1 - b)]
                )
                nu = BlockDistribution(2, 2, w, stationary=True)
                if abs(measure_functional(functional, nu, rho_ref) - u) > tol:
                    continue
                best = min(best, relative_entropy_rate(nu, phi))
    return best
