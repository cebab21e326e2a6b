"""Bloch dynamical matrix, Krein-aware diagonalization and stability analysis."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, NumericalFailure, UnsupportedOperation
from .model import QBHSpec


class Classification(str, enum.Enum):
    REGULAR = "Regular"
    EP = "EP"
    KC = "KC"
    UNSTABLE = "ComplexUnstable"


_CODES = (Classification.REGULAR, Classification.EP, Classification.KC, Classification.UNSTABLE)


@dataclass(frozen=True)
class Tolerances:
    """Relative thresholds; ``imag``, ``coll``, ``kc`` and ``cluster`` are
    multiplied by the model scale QBHSpec.scale = max_k ||g(k)||_inf, ``kpr`` is absolute.

    ``cluster`` groups nearly equal eigenvalues for the multi-band
    classification before their Krein Gram matrix is inspected.
    """

    imag: float = 1e-9
    coll: float = 1e-8
    kc: float = 1e-8
    kpr: float = 1e-6
    cluster: float = 1e-6


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class BZGrid:
    """Uniform tensor grid with an odd number of points per axis, containing k = 0.

    Points are 2 pi j / n for j = -(n-1)/2 .. (n-1)/2, so the grid is closed
    under k -> -k.
    """

    shape: tuple[int, ...]

    def __post_init__(self):
        if not self.shape or any(n < 1 for n in self.shape):
            raise ConfigError("BZ grid must have at least one point per axis")
        if any(n % 2 == 0 for n in self.shape):
            raise ConfigError("BZ grid sizes must be odd so that k = 0 and -k are sampled")

    @classmethod
    def default(cls, D: int) -> "BZGrid":
        return cls({1: (1025,), 2: (129, 129)}.get(D, (33,) * D))

    @classmethod
    def uniform(cls, n: int, D: int = 1) -> "BZGrid":
        return cls((n,) * D)

    @property
    def D(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> np.ndarray:
        return 2 * np.pi / np.asarray(self.shape, float)

    def axis(self, i: int) -> np.ndarray:
        n = self.shape[i]
        return 2 * np.pi * (np.arange(n) - (n - 1) // 2) / n

    @property
    def points(self) -> np.ndarray:
        """(M, D) array in C order over the axes."""
        axes = [self.axis(i) for i in range(self.D)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.D)

    def mirror_index(self) -> np.ndarray:
        """Index map j -> index of -k_j."""
        idx = np.arange(int(np.prod(self.shape))).reshape(self.shape)
        return idx[tuple(slice(None, None, -1) for _ in self.shape)].ravel()


# --------------------------------------------------------------------------
# Bloch matrices


def _tau3(d: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(d), -np.ones(d)])


def _tau1(d: int) -> np.ndarray:
    e = np.eye(d)
    z = np.zeros((d, d))
    return np.block([[z, e], [e, z]])


@dataclass(frozen=True, eq=False)
class BlochPoint:
    k: np.ndarray
    Kk: np.ndarray
    Dk: np.ndarray
    g: np.ndarray
    h: np.ndarray
    scale: float = 1.0

    @property
    def d(self) -> int:
        return self.Kk.shape[0]

    def pseudo_hermiticity_residual(self) -> float:
        t3 = _tau3(self.d)
        return float(np.max(np.abs(self.g.conj().T - t3 @ self.g @ t3)))


def dynamical_matrices(spec: QBHSpec, ks: np.ndarray) -> np.ndarray:
    """g(k) for a stack of momenta, shape (M, 2d, 2d)."""
    ks = np.asarray(ks, float).reshape(-1, spec.D)
    Kk, Dk = spec.fourier(ks)
    Km, Dm = spec.fourier(-ks)
    top = np.concatenate([Kk, Dk], axis=2)
    bot = np.concatenate([-Dm.conj(), -Km.conj()], axis=2)
    return np.concatenate([top, bot], axis=1)


def eval_bloch(spec: QBHSpec, k) -> BlochPoint:
    """Bloch data at a single momentum."""
    k = np.atleast_1d(np.asarray(k, float))
    if k.shape != (spec.D,):
        raise ConfigError(f"momentum must have {spec.D} components")
    Kk, Dk = spec.fourier(k[None])
    g = dynamical_matrices(spec, k[None])[0]
    h = _tau3(spec.d) @ g
    return BlochPoint(k, Kk[0], Dk[0], g, h, spec.scale)


def charge_conjugation_residual(spec: QBHSpec, k) -> float:
    """max |g*(k) + tau1 g(-k) tau1|."""
    k = np.atleast_1d(np.asarray(k, float))
    gp, gm = dynamical_matrices(spec, np.stack([k, -k]))
    t1 = _tau1(spec.d)
    return float(np.max(np.abs(gp.conj() + t1 @ gm @ t1)))


@dataclass(frozen=True)
class PauliDecomposition:
    """g = d0 + i d1 sigma1 + i d2 sigma2 + d3 sigma3 (single band)."""

    d0: float
    d1: float
    d2: float
    d3: float

    @property
    def E2(self) -> float:
        rho = np.hypot(self.d1, self.d2)
        return float((abs(self.d3) - rho) * (abs(self.d3) + rho))

    @property
    def E(self) -> float:
        return float(np.sqrt(max(self.E2, 0.0)))

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.d0 + self.d3, 1j * self.d1 + self.d2],
                [1j * self.d1 - self.d2, self.d0 - self.d3],
            ]
        )


def _pauli_from_g(g: np.ndarray) -> tuple[np.ndarray, ...]:
    d0 = 0.5 * (g[..., 0, 0] + g[..., 1, 1])
    d3 = 0.5 * (g[..., 0, 0] - g[..., 1, 1])
    d2 = 0.5 * (g[..., 0, 1] - g[..., 1, 0])
    d1 = -0.5j * (g[..., 0, 1] + g[..., 1, 0])
    return d0.real, d1.real, d2.real, d3.real


def pauli_decompose(bp: BlochPoint) -> PauliDecomposition:
    if bp.d != 1:
        raise UnsupportedOperation("Pauli decomposition is defined only for single-band models")
    return PauliDecomposition(*(float(x) for x in _pauli_from_g(bp.g)))


def pauli_components(spec: QBHSpec, ks: np.ndarray) -> tuple[np.ndarray, ...]:
    """Vectorized (d0, d1, d2, d3) over momenta for a single-band spec."""
    if spec.d != 1:
        raise UnsupportedOperation("Pauli decomposition is defined only for single-band models")
    return _pauli_from_g(dynamical_matrices(spec, ks))


# --------------------------------------------------------------------------
# diagonalization


@dataclass(frozen=True, eq=False)
class SpectralPoint:
    """Eigen-data of g(k).

    Columns of ``eigenvectors`` are ordered particles first (ascending
    energy), then holes.  For a Regular point this is the tau3-normalized
    modal matrix L with L^dag tau3 L = tau3.
    """

    k: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    krein_signatures: np.ndarray
    particle_bands: np.ndarray | None
    kpr: np.ndarray
    classification: Classification
    pauli: PauliDecomposition | None = None
    scale: float = 1.0

    @property
    def d(self) -> int:
        return len(self.eigenvalues) // 2

    @property
    def particle_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.d]

    @property
    def hole_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, self.d :]

    @property
    def regular(self) -> bool:
        return self.classification is Classification.REGULAR


def _canonical_phase(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] != 0:
            V[:, j] *= abs(V[i, j]) / V[i, j]
    return V


def _classify_d1(d0, d1, d2, d3, scale: float, tol: Tolerances):
    """Vectorized single-band classification.

    The collision test is applied to the linear cone distance |d3| - |(d1, d2)|
    before any imaginary part is examined: near an exceptional point the
    eigenvalue splitting behaves like a square root of rounding noise.
    """
    rho = np.hypot(d1, d2)
    q = np.abs(d3) - rho
    coll = np.abs(q) <= tol.coll * scale
    kc = coll & (np.maximum(np.maximum(np.abs(d1), np.abs(d2)), np.abs(d3)) < tol.kc * scale)
    unstable = (q < 0) & ~coll
    code = np.zeros(np.shape(q), dtype=int)
    code[coll & ~kc] = 1
    code[kc] = 2
    code[unstable] = 3
    E = np.sqrt(np.clip(q * (q + 2 * rho), 0, None))
    E = np.where(coll, 0.0, E)
    return code, E


def _spectral_d1(k, pd: PauliDecomposition, scale: float, tol: Tolerances) -> SpectralPoint:
    d0, d1, d2, d3 = pd.d0, pd.d1, pd.d2, pd.d3
    code, E = _classify_d1(*(np.float64(x) for x in (d0, d1, d2, d3)), scale, tol)
    cls = _CODES[int(code)]
    E = float(E)
    s = 1.0 if d3 >= 0 else -1.0
    if cls is Classification.REGULAR:
        a = E + abs(d3)
        n = np.sqrt(2 * E * a)
        bp = np.array([a, s * (-d2 + 1j * d1)]) / n
        bm = np.array([s * (-d2 - 1j * d1), a]) / n
        lam = np.array([d0 + s * E, d0 - s * E], complex)
        return SpectralPoint(
            k, lam, np.column_stack([bp, bm]), np.array([1, -1]),
            np.array([d0 + s * E]), np.array([E / abs(d3)]), cls, pd, scale,
        )
    if cls is Classification.KC:
        return SpectralPoint(
            k, np.array([d0, d0], complex), np.eye(2, dtype=complex), np.array([1, -1]),
            np.array([d0]), np.array([0.0]), cls, pd, scale,
        )
    if cls is Classification.EP:
        v = np.array([abs(d3), s * (-d2 + 1j * d1)])
        v = v / np.linalg.norm(v)
        return SpectralPoint(
            k, np.array([d0, d0], complex), np.column_stack([v, v]), np.array([0, 0]),
            np.array([d0]), np.array([0.0]), cls, pd, scale,
        )
    im = np.sqrt(max(-(abs(d3) - np.hypot(d1, d2)) * (abs(d3) + np.hypot(d1, d2)), 0.0))
    lam = np.array([d0 + 1j * im, d0 - 1j * im])
    _, V = np.linalg.eig(pd.matrix())
    return SpectralPoint(
        k, lam, _canonical_phase(V), np.array([0, 0]), None, np.array([0.0]), cls, pd, scale,
    )


def _spectral_dense(k, g: np.ndarray, scale: float, tol: Tolerances, lam=None, V=None) -> SpectralPoint:
    """General-d diagonalization with Krein-signature bookkeeping."""
    n = g.shape[0]
    d = n // 2
    t3 = _tau3(d)
    if lam is None:
        try:
            lam, V = np.linalg.eig(g)
        except np.linalg.LinAlgError as e:
            raise NumericalFailure(f"eigensolver failed at k={np.asarray(k).tolist()}: {e}") from None
    V = V / np.linalg.norm(V, axis=0)
    order = np.lexsort((lam.imag, lam.real))
    lam, V = lam[order], V[:, order]

    # cluster nearly equal eigenvalues (chain linkage along the sorted list)
    clusters: list[list[int]] = [[0]]
    for i in range(1, n):
        if abs(lam[i] - lam[clusters[-1][-1]]) < tol.cluster * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    status = Classification.REGULAR
    rank = {Classification.REGULAR: 0, Classification.KC: 1, Classification.EP: 2, Classification.UNSTABLE: 3}
    newV = np.zeros_like(V)
    sig = np.zeros(n, dtype=int)
    for c in clusters:
        Vc = V[:, c]
        G = Vc.conj().T @ t3 @ Vc
        G = 0.5 * (G + G.conj().T)
        mu, W = np.linalg.eigh(G)
        if np.max(np.abs(lam[c].imag)) > 0.5 * tol.cluster * scale:
            # conjugate partner sits in another cluster; its Krein norm is zero
            cstat = Classification.UNSTABLE
            newV[:, c] = Vc
        elif np.min(np.abs(mu)) < tol.kpr:
            cstat = Classification.EP
            newV[:, c] = Vc
        elif np.max(np.abs(lam[c].imag)) > tol.imag * scale:
            cstat = Classification.UNSTABLE
            newV[:, c] = Vc
        else:
            newV[:, c] = Vc @ (W / np.sqrt(np.abs(mu)))
            sig[c] = np.sign(mu).astype(int)
            spread = np.ptp(lam[c].real) if len(c) > 1 else 0.0
            if np.any(mu > 0) and np.any(mu < 0) and spread < tol.coll * scale:
                cstat = Classification.KC
            else:
                cstat = Classification.REGULAR
        if rank[cstat] > rank[status]:
            status = cstat

    if status in (Classification.REGULAR, Classification.KC):
        kprs = 1.0 / np.sum(np.abs(newV) ** 2, axis=0)
        if np.any(kprs < tol.kpr) or np.count_nonzero(sig > 0) != d:
            status = Classification.EP
    lam = lam.copy()
    if status is Classification.UNSTABLE:
        return SpectralPoint(k, lam, _canonical_phase(newV), sig, None, np.zeros(d), status, None, scale)
    if status is Classification.EP:
        lam_r = np.sort(lam.real)
        return SpectralPoint(
            k, lam, _canonical_phase(newV), sig, lam_r[d:], np.zeros(d), status, None, scale
        )

    newV = _canonical_phase(newV)
    pos = np.flatnonzero(sig > 0)
    neg = np.flatnonzero(sig < 0)
    pos = pos[np.lexsort((newV[0, pos].real, lam[pos].real))]
    neg = neg[np.lexsort((newV[0, neg].real, -lam[neg].real))]
    idx = np.r_[pos, neg]
    L = newV[:, idx]
    kpr = 1.0 / np.sum(np.abs(L[:, :d]) ** 2, axis=0)
    if status is Classification.KC:
        kpr = np.zeros(d)
    return SpectralPoint(
        k, lam[idx].real.astype(complex), L, sig[idx], lam[pos].real, kpr, status, None, scale
    )


def diagonalize(bp: BlochPoint, tol: Tolerances = DEFAULT_TOL, method: str = "auto") -> SpectralPoint:
    """Eigen-decomposition of g(k).

    ``method`` is ``"auto"`` (closed form for one band, dense otherwise),
    ``"closed"`` or ``"dense"``.
    """
    if method not in ("auto", "closed", "dense"):
        raise ConfigError(f"unknown diagonalization method {method!r}")
    if bp.d == 1 and method != "dense":
        return _spectral_d1(bp.k, pauli_decompose(bp), bp.scale, tol)
    if method == "closed":
        raise UnsupportedOperation("closed-form eigenvectors exist only for single-band models")
    return _spectral_dense(bp.k, bp.g, bp.scale, tol)


def classify_point(sp: SpectralPoint, pd: PauliDecomposition | None = None,
                   tol: Tolerances | None = None) -> Classification:
    """Classification of a diagonalized point.

    With a Pauli decomposition (single band) the cone-distance rule is
    re-applied, optionally under different tolerances; otherwise the
    classification stored by :func:`diagonalize` is returned.
    """
    if pd is None:
        return sp.classification
    code, _ = _classify_d1(pd.d0, pd.d1, pd.d2, pd.d3, sp.scale, tol or DEFAULT_TOL)
    return _CODES[int(code)]


def kpr(sp: SpectralPoint) -> np.ndarray:
    """Krein phase rigidity per particle band; 0 at EPs, KCs and unstable points."""
    if not sp.regular:
        return np.zeros(sp.d)
    return sp.kpr.copy()


# --------------------------------------------------------------------------
# batched band data


@dataclass(frozen=True, eq=False)
class BandData:
    """Particle bands, classification codes and KPR sampled on a set of momenta."""

    ks: np.ndarray
    omega: np.ndarray  # (M, d); nan where complex-unstable
    codes: np.ndarray  # (M,) indices into Classification order Regular, EP, KC, Unstable
    kpr: np.ndarray  # (M, d)

    def classification(self, i: int) -> Classification:
        return _CODES[int(self.codes[i])]


def band_data(spec: QBHSpec, ks: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> BandData:
    ks = np.asarray(ks, float).reshape(-1, spec.D)
    scale = spec.scale
    if spec.d == 1:
        d0, d1, d2, d3 = pauli_components(spec, ks)
        code, E = _classify_d1(d0, d1, d2, d3, scale, tol)
        s = np.where(d3 >= 0, 1.0, -1.0)
        omega = np.where(code == 3, np.nan, d0 + s * E)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            k_ = np.where(code == 0, E / np.abs(d3), 0.0)[:, None]
        return BandData(ks, omega, code, k_)
    gs = dynamical_matrices(spec, ks)
    try:
        lams, Vs = np.linalg.eig(gs)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"batched eigensolver failed: {e}") from None
    omega = np.full((len(ks), spec.d), np.nan)
    codes = np.zeros(len(ks), int)
    kp = np.zeros((len(ks), spec.d))
    for i in range(len(ks)):
        sp = _spectral_dense(ks[i], gs[i], scale, tol, lams[i], Vs[i])
        codes[i] = _CODES.index(sp.classification)
        if sp.particle_bands is not None:
            omega[i] = sp.particle_bands
        kp[i] = sp.kpr
    return BandData(ks, omega, codes, kp)


def spectral_points(spec: QBHSpec, ks: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> list[SpectralPoint]:
    return [diagonalize(eval_bloch(spec, k), tol) for k in np.asarray(ks, float).reshape(-1, spec.D)]


# --------------------------------------------------------------------------
# Krein gaps and stability


@dataclass(frozen=True)
class KreinGap:
    direct: float
    indirect: float
    argmin_k: np.ndarray
    stable: bool
    indirect_argmin: tuple[np.ndarray, np.ndarray] | None = None


def _direct_objective(spec: QBHSpec, tol: Tolerances):
    def f(k: np.ndarray) -> float:
        bd = band_data(spec, np.stack([k, -k]), tol)
        if np.any(bd.codes == 3):
            return 0.0
        w = bd.omega
        return float(np.min(np.abs(w[0][:, None] + w[1][None, :])))

    return f


def _band_objective(spec: QBHSpec, tol: Tolerances):
    def f(k: np.ndarray, n: int) -> float:
        bd = band_data(spec, k[None], tol)
        return float(bd.omega[0, n])

    return f


def _minimize_in_cell(f, k0: np.ndarray, h: np.ndarray, sweeps: int) -> tuple[np.ndarray, float]:
    """Coordinate-wise bounded scalar minimization within one grid cell."""
    k = k0.astype(float).copy()
    best = f(k)
    for _ in range(sweeps):
        for ax in range(len(k)):
            def g(x, ax=ax):
                kk = k.copy()
                kk[ax] = x
                return f(kk)

            res = minimize_scalar(
                g, bounds=(k0[ax] - h[ax], k0[ax] + h[ax]), method="bounded",
                options={"xatol": 1e-14, "maxiter": 200},
            )
            if res.fun < best:
                best = float(res.fun)
                k[ax] = res.x
    return k, best


def krein_gap(spec: QBHSpec, grid: BZGrid | None = None, tol: Tolerances = DEFAULT_TOL,
              refine: bool = True) -> KreinGap:
    """Direct and indirect Krein gaps with local refinement of the direct minimum."""
    grid = grid or BZGrid.default(spec.D)
    if grid.D != spec.D:
        raise ConfigError(f"grid dimension {grid.D} does not match spec dimension {spec.D}")
    ks = grid.points
    if len(ks) == 0:
        raise ConfigError("empty BZ grid")
    bd = band_data(spec, ks, tol)
    bad = np.flatnonzero((bd.codes == 1) | (bd.codes == 3))
    if len(bad):
        return KreinGap(0.0, 0.0, ks[bad[0]].copy(), False)
    stable = True
    w = bd.omega
    wm = w[grid.mirror_index()]
    pair = np.min(np.abs(w[:, :, None] + wm[:, None, :]), axis=(1, 2))
    j = int(np.argmin(pair))
    direct, kmin = float(pair[j]), ks[j].copy()
    if refine and direct > 0 and stable:
        kr, val = _minimize_in_cell(_direct_objective(spec, tol), kmin, grid.spacing, 2)
        if val < direct:
            direct, kmin = val, kr

    # indirect: sort-and-merge of the sampled band values against their negatives
    vals = w.ravel()
    sv = np.sort(vals)
    neg = -sv[::-1]
    pos = np.clip(np.searchsorted(sv, neg), 1, len(sv) - 1)
    indirect = float(np.min(np.minimum(np.abs(sv[pos] - neg), np.abs(sv[pos - 1] - neg))))
    pair_k = None
    if refine and indirect > 0:
        # each sorted band is continuous on the torus, so its range is the
        # interval between its refined extrema; the indirect gap is the distance
        # of 0 from the sum of two such intervals
        band = _band_objective(spec, tol)
        lo, hi, klo, khi = [], [], [], []
        for n in range(spec.d):
            j0, j1 = int(np.argmin(w[:, n])), int(np.argmax(w[:, n]))
            k0, v0 = _minimize_in_cell(lambda k: band(k, n), ks[j0], grid.spacing, 2)
            k1, v1 = _minimize_in_cell(lambda k: -band(k, n), ks[j1], grid.spacing, 2)
            lo.append(min(v0, w[j0, n]))
            hi.append(max(-v1, w[j1, n]))
            klo.append(k0)
            khi.append(k1)
        best = np.inf
        for n in range(spec.d):
            for m in range(spec.d):
                cand = max(0.0, lo[n] + lo[m], -(hi[n] + hi[m]))
                if cand < best:
                    best = cand
                    pair_k = (klo[n], klo[m]) if lo[n] + lo[m] > 0 else (khi[n], khi[m])
        indirect = min(indirect, best)
    indirect = min(indirect, direct)
    return KreinGap(direct, indirect, kmin, stable, pair_k)


@dataclass(frozen=True)
class StabilityReport:
    dynamically_stable: bool
    thermo: str
    krein_gap_direct: float
    krein_gap_indirect: float
    gap_argmin_k: np.ndarray
    singular_momenta: list[tuple[np.ndarray, Classification]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dynamically_stable": self.dynamically_stable,
            "thermo": self.thermo,
            "krein_gap_direct": self.krein_gap_direct,
            "krein_gap_indirect": self.krein_gap_indirect,
            "gap_argmin_k": [float(x) for x in self.gap_argmin_k],
            "singular_momenta": [
                {"k": [float(x) for x in k], "classification": c.value} for k, c in self.singular_momenta
            ],
        }


def thermodynamic_verdict(spec: QBHSpec, ks: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> str:
    """BoundedBelow / BoundedAbove / Unbounded from the sign of tau3 g(k) over ``ks``."""
    eps = tol.coll * spec.scale
    if spec.d == 1:
        d0, d1, d2, d3 = pauli_components(spec, ks)
        r = np.sqrt(d0**2 + d1**2 + d2**2)
        lo, hi = d3 - r, d3 + r
    else:
        gs = dynamical_matrices(spec, ks)
        hs = _tau3(spec.d)[None] @ gs
        ev = np.linalg.eigvalsh(0.5 * (hs + np.conj(np.swapaxes(hs, 1, 2))))
        lo, hi = ev[:, 0], ev[:, -1]
    if np.all(lo >= -eps):
        return "BoundedBelow"
    if np.all(hi <= eps):
        return "BoundedAbove"
    return "Unbounded"


def stability_report(spec: QBHSpec, grid: BZGrid | None = None, tol: Tolerances = DEFAULT_TOL) -> StabilityReport:
    grid = grid or BZGrid.default(spec.D)
    ks = grid.points
    bd = band_data(spec, ks, tol)
    gap = krein_gap(spec, grid, tol)
    singular = [(ks[i].copy(), bd.classification(i)) for i in np.flatnonzero(bd.codes != 0)]
    dyn = not np.any((bd.codes == 1) | (bd.codes == 3))
    if dyn and gap.direct <= tol.coll * spec.scale:
        # refined minimum lies off-grid on a collision
        sp = diagonalize(eval_bloch(spec, gap.argmin_k), tol)
        if not sp.regular and not any(np.allclose(k, gap.argmin_k) for k, _ in singular):
            singular.append((gap.argmin_k.copy(), sp.classification))
        dyn = sp.classification in (Classification.REGULAR, Classification.KC)
    return StabilityReport(
        dynamically_stable=dyn,
        thermo=thermodynamic_verdict(spec, ks, tol),
        krein_gap_direct=gap.direct if dyn else 0.0,
        krein_gap_indirect=gap.indirect if dyn else 0.0,
        gap_argmin_k=gap.argmin_k,
        singular_momenta=singular,
    )


def band_rows(spec: QBHSpec, grid: BZGrid | None = None, tol: Tolerances = DEFAULT_TOL) -> list[tuple]:
    """Rows (k_1..k_D, band, Re w, Im w, signature, KPR) for every eigenvalue.

    Particle bands come first (band index 0..d-1), holes after.
    """
    grid = grid or BZGrid.default(spec.D)
    rows = []
    for k in grid.points:
        sp = diagonalize(eval_bloch(spec, k), tol)
        for n in range(2 * spec.d):
            kp = float(sp.kpr[n]) if n < spec.d else float("nan")
            rows.append((*map(float, k), n, float(sp.eigenvalues[n].real),
                         float(sp.eigenvalues[n].imag), int(sp.krein_signatures[n]), kp))
    return rows


def spec_classification(spec: QBHSpec, grid: BZGrid | None = None, tol: Tolerances = DEFAULT_TOL) -> Classification:
    """Worst point classification over the grid (ComplexUnstable > EP > KC > Regular)."""
    grid = grid or BZGrid.default(spec.D)
    codes = band_data(spec, grid.points, tol).codes
    for c in (3, 1, 2):
        if np.any(codes == c):
            return _CODES[c]
    return Classification.REGULAR
