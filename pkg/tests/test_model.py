import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kreinqbh import (
    ConfigError,
    DoubleChain,
    HarmonicChain,
    ImagHopChain,
    Interpolation,
    QBHSpec,
    QuadratureForm,
    build_model,
    from_quadrature,
    load_model_file,
    make_params,
    model_parameters,
    pauli_components,
    save_model_file,
    spec_from_dict,
    spec_to_dict,
    to_quadrature,
)


def test_decoupled_oscillators_have_only_onsite_hopping():
    spec = build_model(HarmonicChain(1.0, 0.0))
    assert spec.number_conserving
    assert list(spec.hopping) == [(0,)]
    assert spec.K((0,))[0, 0] == 1.0


def test_harmonic_pauli_components():
    Om, J = 1.3, 0.4
    ks = np.linspace(-np.pi, np.pi, 17)[:, None]
    d0, d1, d2, d3 = pauli_components(build_model(HarmonicChain(Om, J)), ks)
    c = np.cos(ks[:, 0])
    np.testing.assert_allclose(d0, 0, atol=1e-15)
    np.testing.assert_allclose(d1, 0, atol=1e-15)
    np.testing.assert_allclose(d2, -J * c, atol=1e-15)
    np.testing.assert_allclose(d3, Om - J * c, atol=1e-15)


def test_imaghop_adds_only_d0():
    Om, J, g = 1.0, 0.375, 0.7
    ks = np.linspace(-np.pi, np.pi, 13)[:, None]
    base = pauli_components(build_model(HarmonicChain(Om, J)), ks)
    mod = pauli_components(build_model(ImagHopChain(Om, J, g)), ks)
    np.testing.assert_allclose(mod[0], g * np.sin(ks[:, 0]), atol=1e-15)
    for a, b in zip(base[1:], mod[1:]):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_interpolation_pauli_components():
    Om, J, Dl, s = 1.1, 2.0, 0.7, 0.3
    ks = np.linspace(-np.pi, np.pi, 13)[:, None]
    d0, d1, d2, d3 = pauli_components(build_model(Interpolation(Om, J, Dl, s)), ks)
    np.testing.assert_allclose(d0, J * s * np.sin(ks[:, 0]), atol=1e-15)
    np.testing.assert_allclose(d1, Dl * s * np.cos(ks[:, 0]), atol=1e-15)
    np.testing.assert_allclose(d2, 0, atol=1e-15)
    np.testing.assert_allclose(d3, Om * (1 - s), atol=1e-15)


@pytest.mark.parametrize(
    "cls, kwargs, match",
    [
        (HarmonicChain, dict(Omega=1.0, J=0.6), "Omega >= 2J"),
        (HarmonicChain, dict(Omega=1.0, J=-0.1), "Omega >= 2J"),
        (Interpolation, dict(Omega=1.0, J=1.0, Delta=1.0, s=1.2), "s in"),
        (Interpolation, dict(Omega=0.0, J=1.0, Delta=1.0, s=0.2), "Omega > 0"),
        (DoubleChain, dict(Omega1=-0.1, Omega2=1.0, K1=1.0, K2=1.0), ">= 0"),
    ],
)
def test_parameter_domains_rejected(cls, kwargs, match):
    with pytest.raises(ConfigError, match=match):
        cls(**kwargs)


def test_derived_parameters():
    assert HarmonicChain(2.0, 0.75).alpha == pytest.approx(0.75)
    ip = Interpolation(1.0, 2.0, 1.0, 0.25)
    assert ip.alpha == pytest.approx(1 / 3)
    assert ip.s1 == pytest.approx(1 / 3)
    assert ip.s2 == pytest.approx(0.5)
    g = ImagHopChain(1.0, 0.375, 0.0).gamma_c
    assert g**2 == pytest.approx(0.5 * (1 + np.sqrt(1 - 0.75**2)))
    # without hopping tau3 g = Omega +- gamma |sin k|
    assert ImagHopChain(2.0, 0.0, 0.0).gamma_c == pytest.approx(2.0)


def test_single_oscillator_quadrature_form():
    q = to_quadrature(QBHSpec.from_couplings({(0,): 1.7}, D=1, d=1, R=1))
    assert q.Hxx[(0,)][0, 0] == pytest.approx(1.7)
    assert q.Hpp[(0,)][0, 0] == pytest.approx(1.7)
    assert q.Hxp[(0,)][0, 0] == 0


def test_harmonic_quadrature_form():
    Om, J = 1.0, 0.4
    q = to_quadrature(build_model(HarmonicChain(Om, J)))
    assert q.block("xx", (0,))[0, 0] == pytest.approx(Om)
    assert q.block("xx", (1,))[0, 0] == pytest.approx(-J)
    assert q.block("xx", (-1,))[0, 0] == pytest.approx(-J)
    assert q.block("pp", (0,))[0, 0] == pytest.approx(Om)
    assert q.block("pp", (1,))[0, 0] == pytest.approx(0)
    assert all(np.all(m == 0) for m in q.Hxp.values())


def test_interpolation_quadrature_form():
    Om, J, Dl, s = 1.0, 2.0, 0.5, 0.4
    q = to_quadrature(build_model(Interpolation(Om, J, Dl, s)))
    assert q.block("xx", (0,))[0, 0] == pytest.approx((1 - s) * Om)
    assert q.block("pp", (0,))[0, 0] == pytest.approx((1 - s) * Om)
    assert q.block("xp", (1,))[0, 0] == pytest.approx(s * (J + Dl) / 2)
    assert q.block("xp", (-1,))[0, 0] == pytest.approx(-s * (J - Dl) / 2)


def test_from_quadrature_identity_form():
    one = {(0,): np.eye(1)}
    spec = from_quadrature(QuadratureForm(1, 1, one, one, {}), R=1)
    assert spec.K((0,))[0, 0] == 1.0
    assert spec.number_conserving


def test_from_quadrature_recovers_harmonic_chain():
    Om, J = 1.0, 0.3
    q = QuadratureForm(1, 1, {(0,): [[Om]], (1,): [[-J]], (-1,): [[-J]]}, {(0,): [[Om]]}, {})
    spec = from_quadrature(q, R=1)
    ref = build_model(HarmonicChain(Om, J))
    ks = np.linspace(-np.pi, np.pi, 9)[:, None]
    for a, b in zip(spec.fourier(ks), ref.fourier(ks)):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_from_quadrature_rejects_asymmetric():
    q = QuadratureForm(1, 1, {(0,): [[1.0]], (1,): [[0.3]], (-1,): [[0.2]]}, {(0,): [[1.0]]}, {})
    with pytest.raises(ConfigError, match="not symmetric"):
        from_quadrature(q)


@st.composite
def quadrature_forms(draw):
    d = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    Hxx, Hpp, Hxp = {}, {}, {}
    for r in (0, 1):
        a, b = rng.normal(size=(d, d)), rng.normal(size=(d, d))
        if r == 0:
            a, b = a + a.T, b + b.T
        Hxx[(r,)], Hpp[(r,)] = a, b
        Hxx[(-r,)], Hpp[(-r,)] = a.T, b.T
        Hxp[(r,)] = rng.normal(size=(d, d))
        if r:
            Hxp[(-r,)] = rng.normal(size=(d, d))
    return QuadratureForm(1, d, Hxx, Hpp, Hxp)


@given(quadrature_forms())
def test_quadrature_round_trip(q):
    back = to_quadrature(from_quadrature(q, R=1))
    for name in ("xx", "pp", "xp"):
        for r in [(-1,), (0,), (1,)]:
            np.testing.assert_allclose(back.block(name, r), q.block(name, r), atol=1e-12)


def test_from_couplings_accepts_redundant_consistent_pairs():
    spec = QBHSpec.from_couplings({(0,): 1.0, (1,): 0.2 + 0.1j, (-1,): 0.2 - 0.1j}, {(1,): 0.3, (-1,): 0.3})
    assert set(spec.hopping) == {(0,), (1,)}


@pytest.mark.parametrize(
    "hop, pair, match",
    [
        ({(0,): 1.0, (1,): 0.2j, (-1,): 0.2j}, {}, "K_-r"),
        ({(0,): 1.0}, {(1,): 0.3, (-1,): 0.4}, "Delta_-r"),
        ({(0,): 1.0 + 0.5j}, {}, "Hermitian"),
        ({(0,): 1.0, (2,): 0.1}, {}, "range"),
    ],
)
def test_from_couplings_rejects_invalid(hop, pair, match):
    with pytest.raises(ConfigError, match=match):
        QBHSpec.from_couplings(hop, pair, D=1, d=1, R=1)


def test_onsite_pairing_must_be_symmetric():
    with pytest.raises(ConfigError, match="symmetric"):
        QBHSpec.from_couplings({(0,): np.eye(2)}, {(0,): [[0, 1], [0, 0]]}, D=1, d=2, R=1)


def test_fourier_matches_direct_sum(rng):
    from conftest import random_positive_spec

    spec = random_positive_spec(rng, d=2, R=2)
    ks = rng.uniform(-np.pi, np.pi, size=(7, 1))
    Kk, Dk = spec.fourier(ks)
    for i, k in enumerate(ks[:, 0]):
        K = sum(np.exp(1j * k * r[0]) * spec.K(r) for r in spec.offsets())
        Dl = sum(np.exp(1j * k * r[0]) * spec.Delta(r) for r in spec.offsets())
        np.testing.assert_allclose(Kk[i], K, atol=1e-13)
        np.testing.assert_allclose(Dk[i], Dl, atol=1e-13)


def test_hermiticity_residual_vanishes(rng):
    from conftest import random_positive_spec

    assert random_positive_spec(rng, d=3, R=2).hermiticity_residual() == 0.0


def test_model_registry():
    assert model_parameters("double") == ("Omega1", "Omega2", "K1", "K2")
    with pytest.raises(ConfigError, match="unknown model"):
        model_parameters("ladder")
    with pytest.raises(ConfigError, match="missing"):
        make_params("harmonic", Omega=1.0)
    with pytest.raises(ConfigError, match="no parameter"):
        make_params("harmonic", Omega=1.0, J=0.1, s=0.3)


def test_model_file_round_trip(tmp_path, rng):
    from conftest import random_positive_spec

    spec = random_positive_spec(rng, d=2, R=2)
    path = tmp_path / "m.json"
    save_model_file(spec, path)
    back = load_model_file(path)
    ks = np.linspace(-np.pi, np.pi, 11)[:, None]
    for a, b in zip(spec.fourier(ks), back.fourier(ks)):
        np.testing.assert_array_equal(a, b)


def test_model_reference_document():
    spec = spec_from_dict({"model": "harmonic", "params": {"Omega": 1.0, "J": 0.25}})
    assert spec_to_dict(spec) == spec_to_dict(build_model(HarmonicChain(1.0, 0.25)))


def test_unreadable_model_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="cannot read"):
        load_model_file(p)
    p.write_text(json.dumps({"D": 1, "d": 1}))
    with pytest.raises(ConfigError, match="lacks field"):
        load_model_file(p)
