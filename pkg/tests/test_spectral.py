import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import RANDOM_PARAMS, random_positive_spec
from kreinqbh import (
    DEFAULT_TOL,
    BZGrid,
    Classification,
    ConfigError,
    DoubleChain,
    HarmonicChain,
    ImagHopChain,
    Interpolation,
    QBHSpec,
    UnsupportedOperation,
    band_data,
    band_rows,
    build_model,
    diagonalize,
    dynamical_matrices,
    eval_bloch,
    kpr,
    krein_gap,
    pauli_decompose,
    spec_classification,
    stability_report,
    thermodynamic_verdict,
)
from kreinqbh.spectral import _tau3, charge_conjugation_residual


def stack(spec: QBHSpec, copies: int = 2) -> QBHSpec:
    """Block-diagonal copy of a single-band spec, forcing the dense path."""
    hop = {r: np.kron(np.eye(copies), m) for r, m in spec.hopping.items()}
    pair = {r: np.kron(np.eye(copies), m) for r, m in spec.pairing.items()}
    return QBHSpec.from_couplings(hop, pair, D=spec.D, d=copies * spec.d, R=spec.R)


# --- Bloch matrices -------------------------------------------------------


def test_number_conserving_bloch_matrix():
    bp = eval_bloch(QBHSpec.from_couplings({(0,): 0.8}), [0.3])
    np.testing.assert_allclose(bp.g, np.diag([0.8, -0.8]), atol=1e-15)


def test_harmonic_bloch_matrix_at_zero():
    bp = eval_bloch(build_model(HarmonicChain(1.0, 0.4)), [0.0])
    np.testing.assert_allclose(bp.g, [[0.6, -0.4], [0.4, -0.6]], atol=1e-15)


def test_interpolation_bloch_matrix_at_half_pi():
    bp = eval_bloch(build_model(Interpolation(1.0, 1.0, 1.0, 0.5)), [np.pi / 2])
    np.testing.assert_allclose(bp.g, [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)


def test_momentum_shape_checked(harmonic_375):
    with pytest.raises(ConfigError, match="components"):
        eval_bloch(harmonic_375, [0.1, 0.2])


@given(seed=st.integers(0, 2**31 - 1), d=st.integers(1, 3))
def test_pseudo_hermiticity_and_charge_conjugation(seed, d):
    rng = np.random.default_rng(seed)
    spec = random_positive_spec(rng, d=d, R=2)
    k = rng.uniform(-np.pi, np.pi)
    assert eval_bloch(spec, [k]).pseudo_hermiticity_residual() < 1e-13
    assert charge_conjugation_residual(spec, [k]) < 1e-13


def test_pauli_decomposition_reconstructs_g(rng):
    spec = random_positive_spec(rng)
    bp = eval_bloch(spec, [0.7])
    np.testing.assert_allclose(pauli_decompose(bp).matrix(), bp.g, atol=1e-14)


def test_pauli_decomposition_single_band_only(rng):
    with pytest.raises(UnsupportedOperation):
        pauli_decompose(eval_bloch(random_positive_spec(rng, d=2), [0.0]))


# --- diagonalization ------------------------------------------------------


def test_diagonal_g_is_regular():
    sp = diagonalize(eval_bloch(QBHSpec.from_couplings({(0,): 1.5}), [0.0]))
    np.testing.assert_allclose(sp.eigenvalues, [1.5, -1.5])
    np.testing.assert_array_equal(sp.krein_signatures, [1, -1])
    assert sp.classification is Classification.REGULAR


def test_harmonic_dispersion(harmonic_375):
    ks = np.linspace(-np.pi, np.pi, 41)
    bd = band_data(harmonic_375, ks[:, None])
    np.testing.assert_allclose(bd.omega[:, 0], np.sqrt(1 - 0.75 * np.cos(ks)), atol=1e-14)
    assert bd.omega[20, 0] == pytest.approx(0.5, abs=1e-15)
    assert np.all(bd.codes == 0)


def test_modal_matrix_is_tau3_orthonormal(harmonic_375):
    for method in ("closed", "dense"):
        sp = diagonalize(eval_bloch(harmonic_375, [0.9]), method=method)
        L = sp.eigenvectors
        np.testing.assert_allclose(L.conj().T @ _tau3(1) @ L, _tau3(1), atol=1e-13)
        np.testing.assert_allclose(L @ np.diag(sp.eigenvalues) @ np.linalg.inv(L),
                                   eval_bloch(harmonic_375, [0.9]).g, atol=1e-13)


def test_interpolation_ep_at_s2():
    spec = build_model(Interpolation(1.0, 2.0, 1.0, 0.5))
    sp = diagonalize(eval_bloch(spec, [0.0]))
    assert sp.classification is Classification.EP
    assert sp.eigenvalues[0] == sp.eigenvalues[1]
    np.testing.assert_allclose(sp.eigenvectors[:, 0], sp.eigenvectors[:, 1])
    assert kpr(sp)[0] == 0.0


@pytest.mark.parametrize("copies", [1, 2])
def test_double_chain_kc_and_ep(copies):
    kc = stack(build_model(DoubleChain(0.0, 0.0, 1.0, 1.0)), copies)
    ep = stack(build_model(DoubleChain(0.0, 1.0, 1.0, 1.0)), copies)
    assert diagonalize(eval_bloch(kc, [0.0])).classification is Classification.KC
    assert diagonalize(eval_bloch(ep, [0.0])).classification is Classification.EP
    assert diagonalize(eval_bloch(ep, [0.5])).classification is Classification.REGULAR


def test_complex_unstable_point():
    spec = build_model(Interpolation(1.0, 2.0, 1.0, 0.6))
    for method in ("closed", "dense"):
        sp = diagonalize(eval_bloch(spec, [0.0]), method=method)
        assert sp.classification is Classification.UNSTABLE
        assert abs(sp.eigenvalues[0].imag) > 0.1


def test_stacked_spec_matches_closed_form(rng):
    spec = build_model(RANDOM_PARAMS["interpolation"](rng))
    two = stack(spec)
    ks = np.linspace(-np.pi, np.pi, 33)[:, None]
    one_bd, two_bd = band_data(spec, ks), band_data(two, ks)
    np.testing.assert_allclose(two_bd.omega, np.repeat(one_bd.omega, 2, axis=1), atol=1e-12)
    np.testing.assert_allclose(two_bd.kpr, np.repeat(one_bd.kpr, 2, axis=1), atol=1e-10)


def test_harmonic_stable_everywhere_below_critical():
    spec = build_model(HarmonicChain(1.0, 0.49))
    assert spec_classification(spec) is Classification.REGULAR


def test_dense_method_rejects_closed_for_multiband(rng):
    with pytest.raises(UnsupportedOperation):
        diagonalize(eval_bloch(random_positive_spec(rng, d=2), [0.0]), method="closed")


# --- KPR ------------------------------------------------------------------


def test_kpr_is_one_without_pairing(rng):
    spec = QBHSpec.from_couplings({(0,): 2.0, (1,): 0.3 + 0.2j})
    bd = band_data(spec, BZGrid.uniform(65).points)
    np.testing.assert_allclose(bd.kpr, 1.0, atol=1e-15)


def test_kpr_one_on_fock_vacuum_line():
    spec = build_model(DoubleChain(0.4, 0.4, 1.3, 1.3))
    np.testing.assert_allclose(band_data(spec, BZGrid.uniform(65).points).kpr, 1.0, atol=1e-14)


def test_kpr_vanishes_along_quadratic_path():
    vals = [band_data(build_model(DoubleChain(t**2, t, 1.0, 1.0)), np.zeros((1, 1))).kpr[0, 0]
            for t in (0.1, 0.01, 0.001)]
    assert vals[0] > vals[1] > vals[2]
    # KPR ~ 2 sqrt(t) along this path
    assert vals[2] < 0.1
    assert vals[1] / vals[2] == pytest.approx(np.sqrt(10), rel=0.05)


def test_kpr_in_unit_interval(rng):
    for name, draw in RANDOM_PARAMS.items():
        bd = band_data(build_model(draw(rng)), BZGrid.uniform(129).points)
        assert np.all((bd.kpr > 0) & (bd.kpr <= 1 + 1e-14)), name


# --- Krein gap ------------------------------------------------------------


def test_gap_harmonic_closed_form():
    assert krein_gap(build_model(HarmonicChain(1.0, 0.375))).direct == pytest.approx(1.0, abs=1e-12)


def test_gap_interpolation_closed_form():
    Om, J, Dl = 1.0, 2.0, 1.0
    s = 0.6 * Om / (Dl + 0.6 * Om)  # alpha = 0.6
    gap = krein_gap(build_model(Interpolation(Om, J, Dl, s)))
    assert gap.direct == pytest.approx(1.6 * Om * (1 - s), abs=1e-12)


@pytest.mark.parametrize("K1, K2", [(1.0, 1.0), (0.5, 3.0)])
def test_gap_double_chain_closed_form(K1, K2):
    assert krein_gap(build_model(DoubleChain(0.25, 0.25, K1, K2))).direct == pytest.approx(1.0, abs=1e-12)


def test_gap_refinement_finds_off_grid_minimum():
    # imaginary hopping tilts the band so its minimum leaves k = 0
    spec = build_model(ImagHopChain(1.0, 0.375, 0.3))
    coarse = krein_gap(spec, BZGrid.uniform(33), refine=False)
    fine = krein_gap(spec, BZGrid.uniform(33))
    dense = krein_gap(spec, BZGrid.uniform(200001), refine=False)
    assert fine.direct <= coarse.direct
    assert fine.direct == pytest.approx(dense.direct, abs=1e-9)


def test_indirect_gap_bounded_by_direct(rng):
    for name, draw in RANDOM_PARAMS.items():
        g = krein_gap(build_model(draw(rng)))
        assert 0 <= g.indirect <= g.direct + 1e-15, name


def test_indirect_gap_vanishes_when_unbounded():
    g = krein_gap(build_model(Interpolation(1.0, 2.0, 1.0, 0.4)))
    assert g.stable and g.direct > 0.5
    assert g.indirect == 0.0


def test_gap_zero_when_unstable():
    g = krein_gap(build_model(DoubleChain(0.0, 1.0, 1.0, 1.0)))
    assert not g.stable and g.direct == 0.0


def test_gap_grid_dimension_checked(harmonic_375):
    with pytest.raises(ConfigError, match="dimension"):
        krein_gap(harmonic_375, BZGrid.uniform(9, D=2))


def test_grid_must_be_odd():
    with pytest.raises(ConfigError, match="odd"):
        BZGrid.uniform(64)


def test_multiband_gap_matches_single_band(rng):
    spec = build_model(RANDOM_PARAMS["double"](rng))
    a, b = krein_gap(spec), krein_gap(stack(spec))
    assert b.direct == pytest.approx(a.direct, abs=1e-10)


# --- stability reports ----------------------------------------------------


def test_interpolation_bounded_below_before_s1():
    ip = Interpolation(1.0, 2.0, 1.0, 0.3)
    assert ip.s < ip.s1
    rep = stability_report(build_model(ip))
    assert rep.dynamically_stable and rep.thermo == "BoundedBelow"


def test_interpolation_unbounded_between_s1_and_s2():
    rep = stability_report(build_model(Interpolation(1.0, 2.0, 1.0, 0.4)))
    assert rep.dynamically_stable and rep.thermo == "Unbounded"


def test_imaghop_gamma_c_is_the_semidefiniteness_edge():
    ip = ImagHopChain(1.0, 0.375, 0.0)
    ks = BZGrid.uniform(200001).points
    from kreinqbh import pauli_components

    d0, d1, d2, d3 = pauli_components(build_model(ip), ks)
    s2 = np.sin(ks[:, 0]) ** 2
    with np.errstate(divide="ignore"):
        ratio = np.where(s2 > 0, (d3**2 - d2**2) / s2, np.inf)
    assert ip.gamma_c == pytest.approx(np.sqrt(ratio.min()), rel=1e-9)


def test_imaghop_thermodynamic_flip_at_gamma_c():
    base = ImagHopChain(1.0, 0.375, 0.0)
    gc = base.gamma_c
    below = stability_report(build_model(ImagHopChain(1.0, 0.375, 0.99 * gc)))
    above = stability_report(build_model(ImagHopChain(1.0, 0.375, 1.01 * gc)))
    assert below.thermo == "BoundedBelow" and above.thermo == "Unbounded"
    assert below.dynamically_stable and above.dynamically_stable


def test_double_chain_ep_report():
    rep = stability_report(build_model(DoubleChain(0.0, 1.0, 1.0, 1.0)))
    assert not rep.dynamically_stable
    (k, cls), = rep.singular_momenta
    assert cls is Classification.EP and k[0] == 0.0
    assert rep.to_dict()["singular_momenta"][0]["classification"] == "EP"


def test_thermodynamic_verdict_multiband(rng):
    spec = random_positive_spec(rng, d=2)
    assert thermodynamic_verdict(spec, BZGrid.uniform(65).points) == "BoundedBelow"
    neg = QBHSpec.from_couplings({r: -m for r, m in spec.hopping.items()},
                                 {r: -m for r, m in spec.pairing.items()})
    assert thermodynamic_verdict(neg, BZGrid.uniform(65).points) == "BoundedAbove"


@pytest.mark.parametrize(
    "o1, o2, expected",
    [(0.0, 0.0, Classification.KC), (0.0, 0.3, Classification.EP), (0.3, 0.0, Classification.EP),
     (0.3, 0.3, Classification.REGULAR)],
)
def test_spec_classification(o1, o2, expected):
    assert spec_classification(build_model(DoubleChain(o1, o2, 1.0, 2.0))) is expected


def test_band_rows_layout(harmonic_375):
    rows = band_rows(harmonic_375, BZGrid.uniform(5))
    assert len(rows) == 10
    k, band, re, im, sig, kp = rows[4]
    assert (k, band, sig) == (0.0, 0, 1) and re == pytest.approx(0.5)
    assert np.isnan(rows[5][5]) and rows[5][4] == -1


def test_dynamical_matrices_batch(rng):
    spec = random_positive_spec(rng, d=2, R=2)
    ks = rng.uniform(-np.pi, np.pi, size=(5, 1))
    gs = dynamical_matrices(spec, ks)
    for i in range(5):
        np.testing.assert_array_equal(gs[i], eval_bloch(spec, ks[i]).g)


def test_tolerances_are_configurable():
    spec = build_model(DoubleChain(1e-7, 1.0, 1.0, 1.0))
    bd_default = band_data(spec, np.zeros((1, 1)))
    loose = type(DEFAULT_TOL)(coll=1e-6)
    assert bd_default.classification(0) is Classification.REGULAR
    assert band_data(spec, np.zeros((1, 1)), loose).classification(0) is Classification.EP
