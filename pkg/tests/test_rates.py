"""SCGFs, Legendre rate functions, cycle means, asymptotic variance."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

import blocktropy as bt

from conftest import CHAIN_ENTROPY

CHAIN_MAX_MEAN = math.log(0.9)
CHAIN_MIN_MEAN = (math.log(0.1) + math.log(0.2)) / 2.0


def _cycle_mean_oracle(phi: bt.MarkovPotential, which: str) -> float:
    """Exhaustive mean over all vertex-simple cycles of the word graph."""
    means = [
        sum(phi.values[a] for a in cyc) / len(cyc)
        for cyc in bt.enumerate_simple_cycles(phi.alphabet_size, phi.k)
    ]
    return min(means) if which == "min" else max(means)


def test_extreme_mean_chain_frozen(chain_potential):
    assert bt.extreme_mean(chain_potential, "max") == pytest.approx(
        CHAIN_MAX_MEAN, abs=1e-12
    )
    assert bt.extreme_mean(chain_potential, "min") == pytest.approx(
        CHAIN_MIN_MEAN, abs=1e-12
    )
    with pytest.raises(ValueError):
        bt.extreme_mean(chain_potential, "median")


def test_extreme_mean_matches_cycle_enumeration(make_potential):
    rng = np.random.default_rng(21)
    for _ in range(60):
        A = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        phi, _ = bt.normalize_potential(make_potential(rng, A, k))
        for which in ("min", "max"):
            assert bt.extreme_mean(phi, which) == pytest.approx(
                _cycle_mean_oracle(phi, which), abs=1e-10
            )


def test_entropy_scgf_chain(chain_potential, chain_spectral):
    assert bt.entropy_scgf(chain_potential, 0.0) == pytest.approx(0.0, abs=1e-12)
    # closed form at t=1 through the square-root kernel eigenvalue
    a, b = math.sqrt(0.9), math.sqrt(0.8)
    lam = ((a + b) + math.sqrt((a - b) ** 2 + 4 * math.sqrt(0.02))) / 2.0
    assert bt.entropy_scgf(chain_potential, 1.0) == pytest.approx(
        2.0 * math.log(lam), abs=1e-12
    )
    assert 2.0 * math.log(lam) == pytest.approx(0.5225623705603178, abs=1e-12)
    # frozen branch below t = -1
    assert bt.entropy_scgf(chain_potential, -1.0) == pytest.approx(
        CHAIN_MAX_MEAN, abs=1e-12
    )
    assert bt.entropy_scgf(chain_potential, -3.0) == pytest.approx(
        CHAIN_MAX_MEAN, abs=1e-12
    )
    # slope at zero is the equilibrium entropy: R'(0) = h
    step = 1e-5
    slope = (
        bt.entropy_scgf(chain_potential, step)
        - bt.entropy_scgf(chain_potential, -step)
    ) / (2 * step)
    assert slope == pytest.approx(CHAIN_ENTROPY, abs=1e-6)


def test_renyi_scgf_routes(chain_potential, chain_spectral):
    for t in (-0.5, 0.5, 1.0, 3.0):
        assert bt.renyi_scgf(chain_spectral, t) == pytest.approx(
            bt.entropy_scgf(chain_potential, t), abs=1e-9
        )
    # finite-n values approach the limit with shrinking gap
    limit = bt.renyi_scgf(chain_spectral, 1.0)
    gaps = [abs(bt.renyi_scgf(chain_spectral, 1.0, n) - limit) for n in (16, 32, 64)]
    assert gaps[0] > gaps[1] > gaps[2]
    with pytest.raises(ValueError):
        bt.renyi_scgf(chain_spectral, -1.0)
    with pytest.raises(ValueError):
        bt.renyi_scgf(chain_spectral, 1.0, n=1)


def test_information_scgf_chain(chain_potential):
    assert bt.information_scgf(chain_potential, 0.0) == pytest.approx(0.0, abs=1e-12)
    # at t = 1 the potential drops out: topological pressure ln A
    assert bt.information_scgf(chain_potential, 1.0) == pytest.approx(
        math.log(2.0), abs=1e-12
    )


def test_relative_scgf_chain(chain_potential):
    for t in (-1.0, 0.0, 0.5, 1.0):
        assert bt.relative_scgf(chain_potential, t) == 0.0
    assert bt.relative_scgf(chain_potential, 3.0) == pytest.approx(
        -2.0 * CHAIN_MIN_MEAN, abs=1e-12
    )
    raw = bt.MarkovPotential(2, 2, np.array([0.1, -0.2, 0.3, 0.0]))
    with pytest.raises(ValueError):
        bt.relative_scgf(raw, 0.5)


def test_entropy_rate_function_chain(chain_potential, chain_spectral):
    # zero exactly at the equilibrium entropy
    assert bt.entropy_rate_function(chain_potential, CHAIN_ENTROPY) == pytest.approx(
        0.0, abs=1e-9
    )
    # at u = 0 the linear branch gives -maxmean
    assert bt.entropy_rate_function(chain_potential, 0.0) == pytest.approx(
        -CHAIN_MAX_MEAN, abs=1e-9
    )
    # at u = ln A the minimizer is the uniform measure: cross-check against
    # the independent relative-entropy-rate computation
    unif = bt.BlockDistribution(2, 1, np.array([0.5, 0.5]), stationary=True)
    assert bt.entropy_rate_function(chain_potential, math.log(2.0)) == pytest.approx(
        bt.relative_entropy_rate(unif, chain_potential), abs=1e-6
    )
    assert bt.entropy_rate_function(chain_potential, -0.1) == math.inf
    assert bt.entropy_rate_function(chain_potential, math.log(2.0) + 0.1) == math.inf
    # decreasing left of h, increasing right of h
    us = [0.05, 0.15, 0.25, 0.35]
    vals = [bt.entropy_rate_function(chain_potential, u) for u in us]
    assert vals[0] > vals[1] > vals[2] > vals[3]
    us2 = [0.45, 0.55, 0.65]
    vals2 = [bt.entropy_rate_function(chain_potential, u) for u in us2]
    assert vals2[0] < vals2[1] < vals2[2]


def test_relative_rate_function_chain(chain_potential):
    endpoint = -CHAIN_MIN_MEAN
    for u in (0.0, 0.3, 1.0, endpoint):
        assert bt.relative_rate_function(chain_potential, u) == pytest.approx(
            u, abs=1e-12
        )
    assert bt.relative_rate_function(chain_potential, -0.05) == math.inf
    assert bt.relative_rate_function(chain_potential, endpoint + 0.05) == math.inf


def test_rate_curve_and_legendre(chain_potential):
    grid = np.linspace(0.0, math.log(2.0), 40)
    curve = bt.rate_curve(chain_potential, "entropy_rate", grid)
    assert curve.kind == "entropy_rate"
    # grid Legendre transform lower-bounds the true SCGF
    for t in (-0.5, 0.0, 0.5, 1.0, 2.0):
        assert bt.legendre(curve, t) <= bt.entropy_scgf(chain_potential, t) + 1e-9
    # and is tight at t = 0 where the sup sits at u = h (in-grid maximum 0)
    assert bt.legendre(curve, 0.0) == pytest.approx(0.0, abs=1e-4)
    with pytest.raises(ValueError):
        bt.RateCurve("nonsense", grid, grid)
    with pytest.raises(ValueError):
        bt.RateCurve("entropy_rate", grid, grid[:-1])
    empty = bt.RateCurve("entropy_rate", np.array([0.1]), np.array([math.inf]))
    with pytest.raises(ValueError):
        bt.legendre(empty, 1.0)


def test_entropy_curve_monotone(chain_potential):
    pts = bt.entropy_curve(chain_potential, [0.0, 0.5, 1.0, 2.0, 4.0])
    hs = [h for _, h in pts]
    assert hs[0] == pytest.approx(math.log(2.0), abs=1e-12)
    assert all(a > b for a, b in zip(hs, hs[1:]))
    flat = bt.MarkovPotential(2, 1, np.log([0.5, 0.5]), normalized=True)
    with pytest.raises(ValueError):
        bt.entropy_curve(flat, [0.0, 1.0], require_strict=True)


def test_asymptotic_variance_chain(chain_potential):
    v_info = bt.asymptotic_variance(chain_potential, "information")
    v_entr = bt.asymptotic_variance(chain_potential, "entropy")
    assert v_info == pytest.approx(0.49854083516986947, abs=1e-6)
    assert abs(v_info - v_entr) < 1e-6
    # a constant potential has no fluctuations at all
    flat = bt.MarkovPotential(2, 1, np.log([0.5, 0.5]), normalized=True)
    assert bt.asymptotic_variance(flat) == pytest.approx(0.0, abs=1e-6)


def test_zero_temperature_entropy(chain_potential):
    h_inf, converged = bt.zero_temperature_entropy(chain_potential)
    assert converged and abs(h_inf) < 1e-6
    flat = bt.MarkovPotential(2, 1, np.log([0.5, 0.5]), normalized=True)
    h_flat, conv_flat = bt.zero_temperature_entropy(flat)
    assert conv_flat and h_flat == pytest.approx(math.log(2.0), abs=1e-12)


def test_fixed_k_rate_lower(chain_potential):
    # the grid search over depth-limited competitors upper-bounds the true
    # rate and approaches it as the allowed depth grows
    u = 0.55
    true_rate = bt.entropy_rate_function(chain_potential, u)
    up1 = bt.fixed_k_rate_lower(chain_potential, 1, "conditional", u)
    up2 = bt.fixed_k_rate_lower(chain_potential, 2, "conditional", u)
    assert up1 >= up2 >= true_rate - 1e-9
    assert up2 <= true_rate + 0.02
    with pytest.raises(ValueError):
        bt.fixed_k_rate_lower(chain_potential, 3, "conditional", u)
    trip = bt.MarkovPotential(3, 1, np.log(np.full(3, 1 / 3)), normalized=True)
    with pytest.raises(ValueError):
        bt.fixed_k_rate_lower(trip, 1, "conditional", 0.5)


def test_scgf_t_one_is_renyi_collision_point(chain_potential, chain_spectral):
    # two independent routes to the same number: eigenvalue of the powered
    # kernel versus rescaled pressure
    direct = 2.0 * bt.pressure(chain_potential, 0.5).pressure
    assert bt.renyi_scgf(chain_spectral, 1.0) == pytest.approx(direct, abs=1e-12)