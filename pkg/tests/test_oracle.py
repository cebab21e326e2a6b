import numpy as np
import pytest

from conftest import RANDOM_PARAMS, random_positive_spec
from kreinqbh import (
    ConfigError,
    DoubleChain,
    ImagHopChain,
    InstabilityError,
    Interpolation,
    QBHSpec,
    SingularPointError,
    build_model,
    build_ring,
    dft_blocks,
    dynamical_matrices,
    finite_cm,
    ring_modal_matrix,
    ring_qpv_cm,
    verification_suite,
)
from kreinqbh.oracle import Check, default_models, spectrum_deviation


def test_decoupled_ring_is_block_diagonal():
    rd = build_ring(QBHSpec.from_couplings({(0,): 1.5}), 5)
    np.testing.assert_array_equal(rd.G, np.kron(np.eye(5), np.diag([1.5, -1.5])))
    assert rd.pseudo_hermiticity_residual() == 0.0


def test_ring_wraps_couplings(harmonic_375):
    rd = build_ring(harmonic_375, 6)
    # site 5 couples forward to site 0 through the periodic boundary
    assert np.any(rd.G[10:12, 0:2] != 0) and np.all(rd.G[4:6, 0:2] == 0)


@pytest.mark.parametrize("name", list(RANDOM_PARAMS))
def test_dft_blocks_match_bloch_matrices(name, rng):
    spec = build_model(RANDOM_PARAMS[name](rng))
    rd = build_ring(spec, 12)
    ks = 2 * np.pi * np.arange(12) / 12
    np.testing.assert_allclose(dft_blocks(rd), dynamical_matrices(spec, ks[:, None]), atol=1e-13)
    assert spectrum_deviation(spec, rd) < 1e-10


def test_dft_blocks_multiband(rng):
    spec = random_positive_spec(rng, d=2, R=2)
    rd = build_ring(spec, 9)
    ks = 2 * np.pi * np.arange(9) / 9
    np.testing.assert_allclose(dft_blocks(rd), dynamical_matrices(spec, ks[:, None]), atol=1e-13)
    assert rd.pseudo_hermiticity_residual() < 1e-14


def test_modal_matrix_is_tau3_orthonormal(harmonic_375):
    rd = build_ring(harmonic_375, 10)
    L = ring_modal_matrix(rd)
    np.testing.assert_allclose(L.conj().T @ rd.tau3_big @ L, np.diag(np.r_[np.ones(10), -np.ones(10)]),
                               atol=1e-10)


@pytest.mark.parametrize("name", list(RANDOM_PARAMS))
def test_ring_covariance_matches_momentum_pipeline(name, rng):
    spec = build_model(RANDOM_PARAMS[name](rng))
    for N in (8, 13):
        np.testing.assert_allclose(ring_qpv_cm(build_ring(spec, N)).gamma, finite_cm(spec, N).gamma, atol=1e-9)


def test_ring_covariance_multiband(rng):
    spec = random_positive_spec(rng, d=2)
    np.testing.assert_allclose(ring_qpv_cm(build_ring(spec, 10)).gamma, finite_cm(spec, 10).gamma, atol=1e-9)


def test_imaginary_hopping_does_not_change_the_vacuum():
    base = ImagHopChain(1.0, 0.375, 0.0)
    ref = ring_qpv_cm(build_ring(build_model(base), 16)).gamma
    hot = ring_qpv_cm(build_ring(build_model(ImagHopChain(1.0, 0.375, 1.2 * base.gamma_c)), 16)).gamma
    np.testing.assert_allclose(hot, ref, atol=1e-9)


def test_ring_rejects_short_rings_and_higher_dimensions(rng):
    spec = random_positive_spec(rng, R=2)
    with pytest.raises(ConfigError, match="wrap-around"):
        build_ring(spec, 4)
    with pytest.raises(ConfigError, match="one-dimensional"):
        build_ring(QBHSpec.from_couplings({(0, 0): 1.0, (1, 0): 0.1}), 8)


def test_ring_rejects_exceptional_point():
    with pytest.raises(SingularPointError) as e:
        ring_qpv_cm(build_ring(build_model(Interpolation(1.0, 2.0, 1.0, 0.5)), 8))
    assert e.value.classification == "EP"


def test_ring_rejects_krein_collision():
    with pytest.raises(SingularPointError) as e:
        ring_qpv_cm(build_ring(build_model(DoubleChain(0.0, 0.0, 1.0, 2.0)), 8))
    assert e.value.classification == "KC"


def test_ring_rejects_dynamical_instability():
    with pytest.raises(InstabilityError, match="complex"):
        ring_qpv_cm(build_ring(build_model(Interpolation(1.0, 2.0, 1.0, 0.6)), 8))


def test_verification_suite_passes():
    checks = verification_suite()
    assert len(checks) == 4 * len(default_models()) * 3
    failed = [c for c in checks if not c.passed]
    assert not failed, failed


def test_verification_suite_flags_singular_models():
    checks = verification_suite({"ep": build_model(Interpolation(1.0, 2.0, 1.0, 0.5))}, N_values=(8,))
    cov = [c for c in checks if c.name == "covariance"]
    assert len(cov) == 1 and np.isnan(cov[0].value) and not cov[0].passed


def test_check_pass_logic():
    assert Check("x", "m", 8, 1e-13, 1e-12).passed
    assert not Check("x", "m", 8, 2e-12, 1e-12).passed
    assert not Check("x", "m", 8, float("inf"), 1e-12).passed
