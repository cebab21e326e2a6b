"""Finite periodic chains: covariance matrices, entanglement and fidelity.

Covariance matrices use the ordering [x_1..x_N, p_1..p_N] (with band index
running fastest inside each site when d > 1) and the anticommutator
normalization, so the vacuum has gamma = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import cholesky, eigh, eigvalsh

from .correlations import gamma_k
from .errors import ConfigError, NumericalFailure, SingularPointError
from .model import QBHSpec
from .spectral import DEFAULT_TOL, Tolerances

NU_SNAP = 1e-12


def symplectic_form(n_modes: int) -> np.ndarray:
    """Sigma = [[0, 1], [-1, 0]] in (x..., p...) ordering."""
    e = np.eye(n_modes)
    z = np.zeros((n_modes, n_modes))
    return np.block([[z, e], [-e, z]])


@dataclass(frozen=True, eq=False)
class FiniteCM:
    N: int
    gamma: np.ndarray
    d: int = 1

    @property
    def modes(self) -> int:
        return self.N * self.d

    def purity_residual(self) -> float:
        return purity_residual(self.gamma)

    def uncertainty_min_eig(self) -> float:
        return uncertainty_min_eig(self.gamma)

    def restrict(self, sites: Iterable[int]) -> np.ndarray:
        idx = region_indices(self.N, self.d, sites)
        return self.gamma[np.ix_(idx, idx)]


def purity_residual(gamma: np.ndarray) -> float:
    """max |(Sigma gamma)^2 + 1|, zero for pure Gaussian states."""
    n = gamma.shape[0] // 2
    S = symplectic_form(n) @ gamma
    return float(np.max(np.abs(S @ S + np.eye(2 * n))))


def uncertainty_min_eig(gamma: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian matrix gamma + i Sigma."""
    n = gamma.shape[0] // 2
    return float(eigvalsh(gamma + 1j * symplectic_form(n))[0])


def region_indices(N: int, d: int, sites: Iterable[int]) -> np.ndarray:
    sites = [int(s) % N for s in sites]
    if len(set(sites)) != len(sites):
        raise ConfigError("region lists a site twice")
    modes = [s * d + b for s in sites for b in range(d)]
    return np.array(modes + [N * d + m for m in modes], int)


def finite_cm(spec: QBHSpec, N: int, tol: Tolerances = DEFAULT_TOL) -> FiniteCM:
    """QPV covariance of the periodic ring with N sites (D = 1)."""
    if spec.D != 1:
        raise ConfigError("finite rings are one-dimensional")
    if N < 4:
        raise ConfigError("finite_cm requires N >= 4")
    if N <= 2 * spec.R:
        raise ConfigError(f"ring of N={N} sites is too short for coupling range R={spec.R}")
    ks = 2 * np.pi * np.arange(N) / N
    try:
        G = gamma_k(spec, ks[:, None], tol)
    except SingularPointError as e:
        j = int(np.argmin(np.abs(ks - np.atleast_1d(e.k)[0])))
        raise SingularPointError(
            f"{e.classification} at discrete momentum k_{j} = 2 pi {j}/{N}", e.k, e.classification
        ) from None
    blocks = np.fft.fft(G, axis=0) / N  # blocks[r] couples site j to j + r
    if np.iscomplexobj(blocks):
        blocks = blocks.real
    d = spec.d
    nd = N * d
    gam = np.zeros((2 * nd, 2 * nd))
    for a in range(N):
        for b in range(N):
            B = blocks[(b - a) % N]
            ia, ib = a * d, b * d
            gam[ia : ia + d, ib : ib + d] = B[:d, :d]
            gam[ia : ia + d, nd + ib : nd + ib + d] = B[:d, d:]
            gam[nd + ia : nd + ia + d, ib : ib + d] = B[d:, :d]
            gam[nd + ia : nd + ia + d, nd + ib : nd + ib + d] = B[d:, d:]
    return FiniteCM(N, 0.5 * (gam + gam.T), d)


def symplectic_eigs(gamma_B: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues (positive spectrum of i Sigma gamma), descending."""
    gamma_B = np.asarray(gamma_B, float)
    n2 = gamma_B.shape[0]
    if gamma_B.shape != (n2, n2) or n2 % 2:
        raise ConfigError("covariance block must be square with even size")
    try:
        Lc = cholesky(0.5 * (gamma_B + gamma_B.T), lower=True)
    except np.linalg.LinAlgError:
        raise ConfigError("covariance block is not positive definite") from None
    ev = eigvalsh(1j * Lc.T @ symplectic_form(n2 // 2) @ Lc)
    return np.sort(ev[ev > 0])[::-1]


def _sites(N: int, B) -> list[int]:
    if isinstance(B, range):
        return list(B)
    if isinstance(B, tuple) and len(B) == 2 and all(isinstance(x, (int, np.integer)) for x in B):
        return list(range(B[0], B[1]))
    return [int(s) for s in B]


def _entropy_terms(nu: np.ndarray) -> np.ndarray:
    nu = np.where(np.abs(nu - 1) <= NU_SNAP, 1.0, nu)
    if np.any(nu < 1 - NU_SNAP):
        raise NumericalFailure(f"symplectic eigenvalue {nu.min():.3e} below 1 violates the uncertainty principle")
    a, b = (nu + 1) / 2, (nu - 1) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = a * np.log(a) - np.where(b > 0, b * np.log(b), 0.0)
    return np.where(nu == 1.0, 0.0, t)


def entropy_from_symplectic(nu: Sequence[float]) -> float:
    """S = sum S(nu) in nats."""
    return float(np.sum(_entropy_terms(np.asarray(nu, float))))


@dataclass(frozen=True)
class EntanglementResult:
    symplectic_eigs: np.ndarray
    entropy: float
    log_negativity: float


def _check_region(N: int, sites: list[int]):
    if not sites or len(set(s % N for s in sites)) >= N:
        raise ConfigError("region must be a proper nonempty subset of the ring")


def entanglement_entropy(cm: FiniteCM, B) -> float:
    """Von Neumann entropy (nats) of the reduced state on region B."""
    sites = _sites(cm.N, B)
    _check_region(cm.N, sites)
    return entropy_from_symplectic(symplectic_eigs(cm.restrict(sites)))


def log_negativity(cm: FiniteCM, B) -> float:
    """Logarithmic negativity -sum log min(1, nu) over the partially transposed CM.

    The partial transpose flips the sign of every p on B.
    """
    sites = _sites(cm.N, B)
    _check_region(cm.N, sites)
    theta = np.ones(2 * cm.modes)
    idx = region_indices(cm.N, cm.d, sites)
    theta[idx[len(idx) // 2 :]] = -1
    nu = symplectic_eigs(theta[:, None] * cm.gamma * theta[None, :])
    nu = np.where(np.abs(nu - 1) <= NU_SNAP, 1.0, nu)
    return float(-np.sum(np.log(np.minimum(1.0, nu))))


def entanglement(cm: FiniteCM, B) -> EntanglementResult:
    sites = _sites(cm.N, B)
    _check_region(cm.N, sites)
    nu = symplectic_eigs(cm.restrict(sites))
    return EntanglementResult(nu, entropy_from_symplectic(nu), log_negativity(cm, sites))


def bisection(N: int) -> range:
    """First half of the ring; odd N is split as floor(N/2) with a warning."""
    if N % 2:
        warnings.warn(f"odd N={N}: bisecting as {N // 2} + {N - N // 2} sites", RuntimeWarning, stacklevel=2)
    return range(N // 2)


def fidelity(gamma1: np.ndarray, gamma2: np.ndarray, purity_tol: float = 1e-8) -> float:
    """Fidelity det((gamma1 + gamma2)/2)^(-1/4) of two pure zero-mean Gaussian states."""
    g1 = np.asarray(gamma1, float)
    g2 = np.asarray(gamma2, float)
    if g1.shape != g2.shape:
        raise ConfigError("covariance matrices differ in size")
    for name, g in (("first", g1), ("second", g2)):
        r = purity_residual(g)
        if r > purity_tol:
            raise ConfigError(f"{name} state is not pure (residual {r:.2e})")
    ev = eigh(0.5 * (g1 + g2 + g1.T + g2.T) / 2, eigvals_only=True)
    if ev[0] <= 0:
        raise ConfigError("average covariance is not positive definite")
    return float(np.exp(-0.25 * np.sum(np.log(ev))))
