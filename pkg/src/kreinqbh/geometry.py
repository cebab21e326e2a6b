"""Pseudo-Hermitian quantum geometric tensor over Hamiltonian parameters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, SingularPointError
from .model import DoubleChain, HarmonicChain, Interpolation, QBHSpec, build_model
from .spectral import DEFAULT_TOL, Tolerances, _tau3, diagonalize, eval_bloch

SpecFamily = Callable[..., QBHSpec]


def interpolation_alpha_family(Omega: float = 1.0, J: float = 1.0, s: float = 0.5) -> SpecFamily:
    """alpha -> interpolation model with Delta = alpha Omega (1 - s) / s."""
    return lambda alpha: build_model(Interpolation(Omega, J, alpha * Omega * (1 - s) / s, s))


def harmonic_alpha_family(Omega: float = 1.0) -> SpecFamily:
    return lambda alpha: build_model(HarmonicChain(Omega, alpha * Omega / 2))


def double_chain_family(K1: float = 1.0, K2: float = 1.0) -> SpecFamily:
    return lambda Omega1, Omega2: build_model(DoubleChain(Omega1, Omega2, K1, K2))


def _particle_vector(family: SpecFamily, params: Mapping[str, float], k, band: int, tol: Tolerances):
    sp = diagonalize(eval_bloch(family(**params), k), tol)
    if not sp.regular:
        raise SingularPointError(
            f"{sp.classification.value} inside the finite-difference stencil at {dict(params)}",
            k, sp.classification.value,
        )
    return sp.particle_vectors[:, band]


def _align(v: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rotate the phase of v so that ref^dag v is real and positive."""
    ov = np.vdot(ref, v)
    return v if ov == 0 else v * (abs(ov) / ov)


def _derivatives(family, params, names, k, h_fd, band, tol, phase_noise=None):
    base = dict(params)
    b0 = _particle_vector(family, base, k, band, tol)
    if phase_noise is not None:
        b0 = b0 * np.exp(1j * phase_noise())
    ders = []
    for name in names:
        h = h_fd * max(1.0, abs(base[name]))
        vs = []
        for sgn in (1, -1):
            p = dict(base)
            p[name] = base[name] + sgn * h
            v = _particle_vector(family, p, k, band, tol)
            if phase_noise is not None:
                v = v * np.exp(1j * phase_noise())
            vs.append(_align(v, b0))
        ders.append((vs[0] - vs[1]) / (2 * h))
    return b0, ders


def _chi(b: np.ndarray, ders: Sequence[np.ndarray]) -> np.ndarray:
    t3 = _tau3(len(b) // 2)
    n = len(ders)
    chi = np.empty((n, n), complex)
    for m in range(n):
        lm = ders[m].conj() @ t3  # (d_mu beta^L)^dag
        for v in range(n):
            chi[m, v] = lm @ ders[v] - (lm @ b) * (b.conj() @ t3 @ ders[v])
    return chi


def qgt(family: SpecFamily, params: Mapping[str, float], k, mu: str, nu: str, h_fd: float = 1e-5,
        band: int = 0, tol: Tolerances = DEFAULT_TOL) -> complex:
    """chi_{mu nu} at momentum k by central differences with phase-aligned eigenvectors."""
    for n in (mu, nu):
        if n not in params:
            raise ConfigError(f"unknown parameter {n!r}")
    names = [mu] if mu == nu else [mu, nu]
    b, ders = _derivatives(family, params, names, np.atleast_1d(k), h_fd, band, tol)
    chi = _chi(b, ders)
    return complex(chi[0, 0] if mu == nu else chi[0, 1])


@dataclass(frozen=True, eq=False)
class QMTResult:
    k: np.ndarray
    params: dict
    names: tuple[str, ...]
    g_LR: np.ndarray
    chi: np.ndarray

    def component(self, mu: str, nu: str) -> float:
        return float(self.g_LR[self.names.index(mu), self.names.index(nu)])


def qmt(family: SpecFamily, params: Mapping[str, float], k, h_fd: float = 1e-5, band: int = 0,
        names: Sequence[str] | None = None, tol: Tolerances = DEFAULT_TOL, phase_noise=None) -> QMTResult:
    """Quantum metric g = (chi + chi^T) / 2 over the named parameters.

    ``phase_noise`` (a zero-argument callable returning a phase) randomizes
    eigenvector phases before gauge alignment; it exists to test gauge
    independence.
    """
    names = tuple(names or params.keys())
    k = np.atleast_1d(np.asarray(k, float))
    b, ders = _derivatives(family, params, names, k, h_fd, band, tol, phase_noise)
    chi = _chi(b, ders)
    g = 0.5 * (chi + chi.T)
    return QMTResult(k, dict(params), names, g.real, chi)


def qmt_divergence_scan(family: SpecFamily, param_grid: Mapping[str, Sequence[float]], k_c,
                        pair: tuple[str, str] | None = None, h_fd: float = 1e-5,
                        threshold: float = 1e6, fixed: Mapping[str, float] | None = None) -> list[dict]:
    """|g_{mu nu}| over the tensor product of ``param_grid`` at momentum ``k_c``.

    Rows carry the parameter values, the magnitude and a divergence flag set
    when the magnitude exceeds ``threshold`` or the stencil hits a singular
    point.
    """
    names = list(param_grid)
    pair = pair or (names[0], names[-1])
    grids = np.meshgrid(*[np.asarray(param_grid[n], float) for n in names], indexing="ij")
    rows = []
    for vals in zip(*(g.ravel() for g in grids)):
        p = dict(fixed or {})
        p.update(dict(zip(names, map(float, vals))))
        try:
            res = qmt(family, p, k_c, h_fd, names=tuple(dict.fromkeys([pair[0], pair[1]])))
            mag = abs(res.component(*pair))
        except SingularPointError:
            mag = np.inf
        rows.append({**{n: p[n] for n in names}, "k": float(np.atleast_1d(k_c)[0]),
                     "g": mag, "divergent": bool(not np.isfinite(mag) or mag > threshold)})
    return rows
