"""Gaussian-process statistics: overlaps, covariance references, tails.

Slow sampled checks run at n = 4 or less with a few thousand draws; the
assertions stay at 4-5 batch standard errors so the suite is deterministic
in practice for the pinned seeds.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from spcirc.errors import CapacityError, DomainError
from spcirc.gp_stats import (
    StateSpec,
    algebra_overlap,
    algebra_overlap_info,
    anticoncentration_check,
    concentration_tail,
    exact_covariance,
    moment_bound,
    rng_stream,
    run_gp_experiment,
    select_theorem,
    state_overlap,
    twisted_overlap,
    wick_fourth_moments,
)
from spcirc.pauli import PauliString
from spcirc.sampler import RngStream


def fig_family(n):
    """Basis state plus two single-excitation superpositions; every pair
    overlaps and every twisted overlap vanishes."""
    return [
        StateSpec.computational_basis(n, 0),
        StateSpec.superposition_pair(n, 2),
        StateSpec.superposition_pair(n, 3),
    ]


def random_pure(n, gen):
    v = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
    return StateSpec.from_statevector(n, v / np.linalg.norm(v))


# -- overlaps -----------------------------------------------------------------

def test_basis_state_algebra_overlap_is_half():
    for n in (2, 3, 4):
        s = StateSpec.computational_basis(n, 0)
        for method in ("identity", "pauli"):
            info = algebra_overlap_info(s, s, method=method)
            assert info.method == method
            assert info.value == pytest.approx(0.5, abs=1e-12)


def test_overlap_routes_agree_on_random_pure_states():
    gen = np.random.default_rng(2024)
    n = 3
    for _ in range(6):
        a, b = random_pure(n, gen), random_pure(n, gen)
        fast = algebra_overlap(a, b, method="identity")
        slow = algebra_overlap(a, b, method="pauli")
        assert fast == pytest.approx(slow, abs=1e-10)
        # dense density-matrix route hits the same number
        ad = StateSpec.from_density(n, a.density_matrix())
        bd = StateSpec.from_density(n, b.density_matrix())
        assert algebra_overlap(ad, bd) == pytest.approx(fast, abs=1e-10)


def test_maximally_mixed_has_zero_algebra_overlap():
    n = 3
    mixed = StateSpec.from_density(n, np.eye(2**n) / 2**n)
    info = algebra_overlap_info(mixed, mixed)
    assert info.method == "pauli"
    assert info.value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        algebra_overlap(mixed, mixed, method="identity")


def test_twisted_overlap_frozen_values():
    b00 = StateSpec.computational_basis(2, 0)
    b01 = StateSpec.computational_basis(2, 1)
    b10 = StateSpec.computational_basis(2, 2)
    assert twisted_overlap(b00, b01) == pytest.approx(0.0, abs=1e-12)
    assert twisted_overlap(b00, b10) == pytest.approx(-1.0, abs=1e-12)
    assert algebra_overlap(b00, b10) == pytest.approx(-0.5, abs=1e-12)
    # dense route agrees with the pure-state shortcut
    d00 = StateSpec.from_density(2, b00.density_matrix())
    d10 = StateSpec.from_density(2, b10.density_matrix())
    assert twisted_overlap(d00, d10) == pytest.approx(-1.0, abs=1e-12)


def test_overlap_size_mismatch():
    a = StateSpec.computational_basis(2, 0)
    b = StateSpec.computational_basis(3, 0)
    for fn in (state_overlap, twisted_overlap, algebra_overlap):
        with pytest.raises(DomainError):
            fn(a, b)


def test_pauli_route_capacity():
    a = StateSpec.computational_basis(9, 0)
    with pytest.raises(CapacityError):
        algebra_overlap(a, a, method="pauli")


# -- covariance references -----------------------------------------------------

def test_exact_covariance_frozen_n4():
    states = [
        StateSpec.computational_basis(4, 0),
        StateSpec.superposition_pair(4, 2),
    ]
    cov = exact_covariance(states)
    want = np.array([[1 / 17, 1 / 34], [1 / 34, 1 / 17]])
    assert np.abs(cov - want).max() <= 1e-12


def test_select_theorem_branches():
    n = 4
    d = 2**n
    name, cov = select_theorem(fig_family(n))
    assert name == "overlapping-states"
    assert cov[0, 0] == pytest.approx(1.0 / d)
    assert cov[0, 1] == pytest.approx(0.5 / d)

    disjoint = [
        StateSpec.computational_basis(n, 0),
        StateSpec.computational_basis(n, 1),
    ]
    name, cov = select_theorem(disjoint)
    assert name == "vanishing-cross-overlaps"
    assert cov[0, 1] == 0.0
    assert cov[0, 0] == pytest.approx(1.0 / d)

    twisted = [
        StateSpec.computational_basis(n, 0),
        StateSpec.computational_basis(n, 1 << (n - 1)),
    ]
    name, cov = select_theorem(twisted)
    assert name == "general"
    assert cov[0, 1] == pytest.approx(2.0 * (-0.5) / d)


# -- the sampled experiment ------------------------------------------------------

@pytest.fixture(scope="module")
def gp_run():
    states = fig_family(4)
    obs = PauliString.single(4, 2, "Y")
    return run_gp_experiment(states, obs, 2000, RngStream(7, "gp-test"))


def test_gp_mean_is_centered(gp_run):
    assert np.all(np.abs(gp_run.mean_vector) <= 4.0 * gp_run.mean_se + 1e-3)


def test_gp_covariance_matches_exact(gp_run):
    err = np.abs(gp_run.covariance - gp_run.exact_covariance)
    assert np.all(err <= 5.0 * gp_run.covariance_se + 2e-3)


def test_gp_theory_selection_and_shapes(gp_run):
    assert gp_run.theory_name == "overlapping-states"
    assert gp_run.theory_covariance.shape == (3, 3)
    assert gp_run.values.shape == (2000, 3)
    assert gp_run.state_labels == ("basis[0]", "pair[q2]", "pair[q3]")
    assert gp_run.observable == "IYII"


def test_gp_fourth_moment_near_gaussian(gp_run):
    assert np.all(gp_run.fourth_moment_ratio >= 0.8)
    assert np.all(gp_run.fourth_moment_ratio <= 1.2)


def test_gp_wick_pairings(gp_run):
    emp, theory = wick_fourth_moments(gp_run.values)
    scale = np.abs(theory).max()
    assert np.abs(emp - theory).max() <= 0.35 * scale


def test_gp_reproducible_and_schedule_independent():
    states = fig_family(3)
    obs = PauliString.single(3, 2, "Y")
    a = run_gp_experiment(states, obs, 200, RngStream(11), threads=1)
    b = run_gp_experiment(states, obs, 200, RngStream(11), threads=1)
    c = run_gp_experiment(states, obs, 200, RngStream(11), threads=2)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.values, c.values)
    d = run_gp_experiment(states, obs, 200, RngStream(12), threads=1)
    assert not np.array_equal(a.values, d.values)


def test_gp_input_validation():
    states = fig_family(3)
    x_obs = PauliString.single(3, 2, "X")  # even rest-Y count: outside the algebra
    with pytest.raises(DomainError):
        run_gp_experiment(states, x_obs, 100, RngStream(0))
    skew = PauliString.from_label("iYII")
    with pytest.raises(DomainError):
        run_gp_experiment(states, skew, 100, RngStream(0))
    with pytest.raises(DomainError):
        run_gp_experiment(states, PauliString.single(4, 2, "Y"), 100, RngStream(0))
    with pytest.raises(DomainError):
        run_gp_experiment([], PauliString.single(3, 2, "Y"), 100, RngStream(0))
    with pytest.raises(DomainError):
        run_gp_experiment(states, PauliString.single(3, 2, "Y"), 5, RngStream(0))


def test_gp_capacity():
    states = [StateSpec.computational_basis(13, 0)]
    with pytest.raises(CapacityError):
        run_gp_experiment(states, PauliString.single(13, 2, "Y"), 40, RngStream(0))


def test_rng_stream_coercion():
    assert rng_stream(5) == RngStream(5)
    s = RngStream(3, "x")
    assert rng_stream(s) is s
    with pytest.raises(DomainError):
        rng_stream(np.random.default_rng(0))


def test_wick_on_synthetic_gaussian():
    gen = np.random.default_rng(99)
    cov = np.array([[1.0, 0.3], [0.3, 0.5]])
    draws = gen.multivariate_normal(np.zeros(2), cov, size=20000)
    emp, theory = wick_fourth_moments(draws)
    want = np.outer(np.diag(cov), np.diag(cov)) + 2.0 * cov**2
    assert np.abs(theory - want).max() <= 0.1
    assert np.abs(emp - theory).max() <= 0.35


# -- concentration ------------------------------------------------------------------

def test_moment_bound_values():
    assert moment_bound(0.5, 4, 1.0, 2) == pytest.approx(0.25)
    assert moment_bound(0.5, 4, 1.0, 5) == pytest.approx(3 * 0.25**2)
    got = moment_bound(0.5, 16, np.array([0.25, 0.5]), 2)
    assert np.allclose(got, [1.0 / 16 / 0.0625, 1.0 / 16 / 0.25])
    with pytest.raises(DomainError):
        moment_bound(0.5, 4, 1.0, 1)


def test_concentration_tail_table():
    n = 4
    d = 2**n
    state = StateSpec.computational_basis(n, 0)
    obs = PauliString.single(n, 2, "Y")
    sigma = math.sqrt(1.0 / d)  # 2 Tr_g / d with Tr_g = 1/2
    thresholds = np.linspace(0.5 * sigma, 5.0 * sigma, 12)
    table = concentration_tail(state, obs, 1200, thresholds, RngStream(23))
    assert table.sigma_squared == pytest.approx(sigma**2, abs=1e-12)
    assert np.all(np.diff(table.empirical) <= 1e-12)
    assert np.allclose(table.bound_t2, sigma**2 / thresholds**2, atol=1e-12)
    assert np.allclose(
        table.bound_t4, 3.0 * (sigma**2 / thresholds**2) ** 2, atol=1e-12
    )
    # Chebyshev bound must dominate the empirical tail on this grid
    assert np.all(table.empirical <= table.bound_t2 + 1e-12)
    # Gaussian reference equals the numerically integrated normal tail
    for c, g in zip(table.thresholds, table.gaussian):
        tail, _ = integrate.quad(
            lambda t: 2.0 / (sigma * math.sqrt(2 * math.pi))
            * math.exp(-(t**2) / (2 * sigma**2)),
            c,
            np.inf,
        )
        assert g == pytest.approx(tail, abs=1e-9)
    # empirical tail tracks the Gaussian reference within batching noise
    mid = slice(2, 8)
    assert np.all(
        np.abs(table.empirical[mid] - table.gaussian[mid])
        <= 5.0 * table.empirical_se[mid] + 0.02
    )


def test_concentration_tail_mixed_state_is_degenerate():
    n = 2
    mixed = StateSpec.from_density(n, np.eye(4) / 4)
    obs = PauliString.single(n, 2, "Y")
    with np.errstate(invalid="ignore"):
        table = concentration_tail(mixed, obs, 100, [0.1, 0.5], RngStream(1))
    assert table.sigma_squared == pytest.approx(0.0, abs=1e-12)
    assert np.all(table.empirical == 0.0)
    assert np.all(table.gaussian == 0.0)
    assert np.all(table.bound_t2 == 0.0)


def test_concentration_threshold_validation():
    state = StateSpec.computational_basis(2, 0)
    obs = PauliString.single(2, 2, "Y")
    with pytest.raises(DomainError):
        concentration_tail(state, obs, 100, [0.0, 0.5], RngStream(0))


# -- anti-concentration -----------------------------------------------------------

def test_anticoncentration_table():
    n = 3
    d = 2**n
    table = anticoncentration_check(n, 2000, [0.0, 0.25, 0.5, 1.0], RngStream(31))
    assert table.z_haar == pytest.approx(2.0 / (d + 1))
    assert table.empirical[0] == 1.0  # every probability clears alpha = 0
    assert np.all(np.diff(table.empirical) <= 1e-12)
    assert np.allclose(table.bound, (1.0 - table.alphas) ** 2 / 2.0)
    assert np.all(table.empirical >= table.bound)
    assert abs(table.z_estimate - table.z_haar) <= 5.0 * table.z_se
    assert table.sample_count == 2000 and table.x_index == 0


def test_anticoncentration_validation():
    with pytest.raises(DomainError):
        anticoncentration_check(3, 100, [1.5], RngStream(0))
    with pytest.raises(DomainError):
        anticoncentration_check(3, 100, [0.5], RngStream(0), x_index=8)
    with pytest.raises(CapacityError):
        anticoncentration_check(13, 100, [0.5], RngStream(0))


# -- state construction guards ----------------------------------------------------

def test_state_spec_validation():
    with pytest.raises(DomainError):
        StateSpec.from_statevector(2, np.ones(4))
    with pytest.raises(DomainError):
        StateSpec.computational_basis(2, 4)
    with pytest.raises(DomainError):
        StateSpec.superposition_pair(3, 4)
    with pytest.raises(DomainError):
        StateSpec.from_density(2, np.eye(4))  # trace 4
    rho = np.eye(4) / 4
    rho = rho.astype(complex)
    rho[0, 1] = 0.3
    with pytest.raises(DomainError):
        StateSpec.from_density(2, rho)  # not Hermitian
    bad = np.diag([0.7, 0.5, -0.2, 0.0]).astype(complex)
    with pytest.raises(DomainError):
        StateSpec.from_density(2, bad)  # negative weight
    with pytest.raises(DomainError):
        StateSpec(2, "dense", True)
