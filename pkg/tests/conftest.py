import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kreinqbh import (
    DoubleChain,
    HarmonicChain,
    ImagHopChain,
    Interpolation,
    QBHSpec,
    build_model,
)

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def random_harmonic(rng, alpha_max=0.95):
    Om = rng.uniform(0.5, 2.0)
    alpha = rng.uniform(0.0, alpha_max)
    return HarmonicChain(Om, alpha * Om / 2)


def random_interpolation(rng, alpha_max=0.95):
    Om, J, Dl = rng.uniform(0.5, 2.0), rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)
    alpha = rng.uniform(0.0, alpha_max)
    return Interpolation(Om, J, Dl, alpha * Om / (Dl + alpha * Om))


def random_double(rng):
    return DoubleChain(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0))


def random_imaghop(rng):
    h = random_harmonic(rng)
    return ImagHopChain(h.Omega, h.J, rng.uniform(0.0, 2.0))


RANDOM_PARAMS = {
    "harmonic": random_harmonic,
    "interpolation": random_interpolation,
    "double": random_double,
    "imaghop": random_imaghop,
}


def random_positive_spec(rng, d=1, R=1, onsite=4.0, coupling=0.3) -> QBHSpec:
    """Generic complex spec with tau3 g(k) positive definite at every k."""

    def cplx(shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    A = cplx((d, d))
    K0 = onsite * np.eye(d) + 0.3 * (A + A.conj().T) / 2
    B = cplx((d, d))
    D0 = coupling * (B + B.T) / 2
    hop = {(0,): K0}
    pair = {(0,): D0}
    for r in range(1, R + 1):
        hop[(r,)] = coupling * cplx((d, d)) / (2 * r)
        pair[(r,)] = coupling * cplx((d, d)) / (2 * r)
    return QBHSpec.from_couplings(hop, pair, D=1, d=d, R=R)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def harmonic_375():
    return build_model(HarmonicChain(1.0, 0.375))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    results: dict[int, list] = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or rep.when != "call":
                continue
            entry = results.setdefault(props["criterion"], [True, 0.0])
            entry[0] &= status == "passed"
            entry[1] += props.get("elapsed", 0.0)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, elapsed = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s)")
