"""Independent finite-ring validator.

The real-space dynamical matrix of a periodic ring is assembled directly from
the coupling coefficients and diagonalized as one dense matrix.  Nothing here
uses the momentum-space formulas, so agreement with them is a genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InstabilityError, SingularPointError
from .gaussian import FiniteCM
from .model import QBHSpec


@dataclass(frozen=True, eq=False)
class RingDynamical:
    """G with i d/dt phi = G phi for phi = (phi_1, ..., phi_N), phi_m = (a_m, a_m^dag)."""

    N: int
    d: int
    G: np.ndarray
    tau3_big: np.ndarray

    def pseudo_hermiticity_residual(self) -> float:
        t = self.tau3_big
        return float(np.max(np.abs(self.G.conj().T - t @ self.G @ t)))


def _g_r(spec: QBHSpec, r: tuple[int]) -> np.ndarray:
    K, Dl = spec.K(r), spec.Delta(r)
    return np.block([[K, Dl], [-Dl.conj(), -K.conj()]])


def build_ring(spec: QBHSpec, N: int) -> RingDynamical:
    """Circulant-block G with block (m, m+r) equal to g_r."""
    if spec.D != 1:
        raise ConfigError("the ring oracle handles one-dimensional lattices")
    if N <= 2 * spec.R:
        raise ConfigError(f"N={N} must exceed 2R={2 * spec.R} to avoid coupling wrap-around")
    d2 = 2 * spec.d
    G = np.zeros((N * d2, N * d2), complex)
    offsets = spec.offsets() or [(0,)]
    for m in range(N):
        for r in offsets:
            n = (m + r[0]) % N
            G[m * d2 : (m + 1) * d2, n * d2 : (n + 1) * d2] += _g_r(spec, r)
    t3 = np.kron(np.eye(N), np.diag(np.r_[np.ones(spec.d), -np.ones(spec.d)]))
    return RingDynamical(N, spec.d, G, t3)


def dft_blocks(rd: RingDynamical) -> np.ndarray:
    """Diagonal blocks of F G F^dag at k_j = 2 pi j / N."""
    N, d2 = rd.N, 2 * rd.d
    m = np.arange(N)
    F = np.exp(-2j * np.pi * np.outer(m, m) / N) / np.sqrt(N)
    Fb = np.kron(F, np.eye(d2))
    T = Fb @ rd.G @ Fb.conj().T
    return np.array([T[j * d2 : (j + 1) * d2, j * d2 : (j + 1) * d2] for j in range(N)])


def ring_modal_matrix(rd: RingDynamical, tol: float = 1e-8) -> np.ndarray:
    """tau3-orthonormal modal matrix of G (particles then holes).

    Eigenvectors are grouped by eigenvalue; within each group the tau3 Gram
    matrix must be definite, and the group is orthonormalized by a Cholesky
    factorization of it (Gram-Schmidt in matrix form).
    """
    lam, V = np.linalg.eig(rd.G)
    scale = max(1.0, float(np.max(np.abs(rd.G).sum(axis=1))))
    # roundoff splits an exceptional point by ~sqrt(eps) into the complex plane
    if np.max(np.abs(lam.imag)) > 1e-6 * scale:
        i = int(np.argmax(np.abs(lam.imag)))
        raise InstabilityError(f"complex eigenvalue {lam[i]:.6g} in ring spectrum")
    order = np.argsort(lam.real)
    lam, V = lam.real[order], V[:, order] / np.linalg.norm(V[:, order], axis=0)
    t3 = rd.tau3_big
    groups, start = [], 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] > tol * scale:
            groups.append(range(start, i))
            start = i
    pos, neg = [], []
    for gidx in groups:
        Vc = V[:, list(gidx)]
        Gm = Vc.conj().T @ t3 @ Vc
        Gm = 0.5 * (Gm + Gm.conj().T)
        ev = np.linalg.eigvalsh(Gm)
        if np.min(np.abs(ev)) < 1e-6:
            raise SingularPointError(
                f"eigenvectors coalesce at eigenvalue {lam[gidx[0]]:.6g} (exceptional point)", None, "EP"
            )
        if ev[0] < 0 < ev[-1]:
            raise SingularPointError(
                f"opposite Krein signatures collide at eigenvalue {lam[gidx[0]]:.6g} "
                f"(pair {lam[gidx[0]]:.6g}, {lam[gidx[-1]]:.6g})", None, "KC",
            )
        s = 1.0 if ev[0] > 0 else -1.0
        Lc = np.linalg.cholesky(s * Gm)
        W = Vc @ np.linalg.inv(Lc).conj().T
        (pos if s > 0 else neg).append(W)
    P = np.hstack(pos) if pos else np.zeros((len(lam), 0))
    Q = np.hstack(neg) if neg else np.zeros((len(lam), 0))
    if P.shape[1] != Q.shape[1]:
        raise SingularPointError("unequal numbers of particle and hole modes", None, "EP")
    return np.hstack([P, Q])


def ring_qpv_cm(rd: RingDynamical) -> FiniteCM:
    """QPV covariance of the ring from its modal matrix, in [x..., p...] ordering."""
    L = ring_modal_matrix(rd)
    C = L @ L.conj().T
    d, N = rd.d, rd.N
    u = np.kron(np.array([[1, 1j], [1, -1j]]) / np.sqrt(2), np.eye(d))
    U = np.kron(np.eye(N), u)
    gam_site = U.conj().T @ C @ U  # per-site (x_m, p_m) blocks
    if np.max(np.abs(gam_site.imag)) > 1e-8:
        raise SingularPointError("ring covariance is not real; modal matrix is inconsistent")
    gam_site = gam_site.real
    # reorder (site, quadrature, band) -> (quadrature, site, band)
    perm = np.array([m * 2 * d + q * d + b for q in range(2) for m in range(N) for b in range(d)])
    gam = gam_site[np.ix_(perm, perm)]
    return FiniteCM(N, 0.5 * (gam + gam.T), d)


def ring_spectrum(rd: RingDynamical) -> np.ndarray:
    return np.sort_complex(np.linalg.eigvals(rd.G))


# --------------------------------------------------------------------------
# verification suite


@dataclass(frozen=True)
class Check:
    name: str
    model: str
    N: int
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.threshold)


def default_models() -> dict[str, QBHSpec]:
    """Built-in models at representative stable parameters."""
    from .model import DoubleChain, HarmonicChain, ImagHopChain, Interpolation, build_model

    return {
        "harmonic": build_model(HarmonicChain(1.0, 0.375)),
        "imaghop": build_model(ImagHopChain(1.0, 0.375, 0.3)),
        "interpolation": build_model(Interpolation(1.0, 2.0, 1.0, 0.3)),
        "double": build_model(DoubleChain(0.3, 0.5, 1.0, 2.0)),
    }


def spectrum_deviation(spec: QBHSpec, rd: RingDynamical) -> float:
    from .spectral import dynamical_matrices

    ks = 2 * np.pi * np.arange(rd.N) / rd.N
    ref = np.sort_complex(np.concatenate(np.linalg.eigvals(dynamical_matrices(spec, ks[:, None]))))
    return float(np.max(np.abs(ref - ring_spectrum(rd))))


def verification_suite(models: dict[str, QBHSpec] | None = None, N_values=(8, 16, 64)) -> list[Check]:
    """Cross-check ring diagonalization against the momentum-space pipeline."""
    from .gaussian import finite_cm
    from .spectral import dynamical_matrices

    models = models or default_models()
    out: list[Check] = []
    for name, spec in models.items():
        for N in N_values:
            rd = build_ring(spec, N)
            out.append(Check("pseudo-hermiticity", name, N, rd.pseudo_hermiticity_residual(), 1e-12))
            ks = 2 * np.pi * np.arange(N) / N
            blocks = dft_blocks(rd)
            ref = dynamical_matrices(spec, ks[:, None])
            out.append(Check("dft-blocks", name, N, float(np.max(np.abs(blocks - ref))), 1e-12))
            out.append(Check("spectrum", name, N, spectrum_deviation(spec, rd), 1e-10))
            try:
                dev = float(np.max(np.abs(ring_qpv_cm(rd).gamma - finite_cm(spec, N).gamma)))
            except (SingularPointError, InstabilityError):
                dev = float("nan")
            out.append(Check("covariance", name, N, dev, 1e-10))
    return out
