"""Quasiparticle-vacuum covariance matrices, correlators and correlation lengths.

Covariances are anticommutators Gamma = <{R, R^T}> of the quadrature vector
R = (x_1..x_d, p_1..p_d) per site.  Correlators such as <x_j x_{j+r}> are the
symmetrized products, i.e. half of the corresponding Gamma entry.
"""

from __future__ import annotations

import ast
import operator
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .errors import ConfigError, NumericalFailure, SingularPointError
from .model import QBHSpec
from .spectral import (
    DEFAULT_TOL,
    BZGrid,
    Classification,
    SpectralPoint,
    Tolerances,
    _spectral_dense,
    _tau3,
    band_data,
    diagonalize,
    dynamical_matrices,
    eval_bloch,
    krein_gap,
    pauli_components,
)


def nambu_to_quadrature(d: int) -> np.ndarray:
    """U with (a, a^dag) = U (x, p)."""
    return np.kron(np.array([[1, 1j], [1, -1j]]) / np.sqrt(2), np.eye(d))


# --------------------------------------------------------------------------
# momentum space


@dataclass(frozen=True, eq=False)
class MomentumCM:
    k: np.ndarray
    gamma: np.ndarray
    c_bosonic: np.ndarray


def _require_regular(sp: SpectralPoint):
    if not sp.regular:
        raise SingularPointError(
            f"{sp.classification.value} at k={np.asarray(sp.k).tolist()}: QPV covariance undefined",
            sp.k, sp.classification.value,
        )


def qpv_cm_momentum(spec: QBHSpec, k, tol: Tolerances = DEFAULT_TOL) -> MomentumCM:
    """QPV covariance at one momentum, in quadrature and Nambu bases.

    For d > 1 the quadrature block is complex Hermitian in general.
    """
    sp = diagonalize(eval_bloch(spec, k), tol)
    _require_regular(sp)
    L = sp.eigenvectors
    C = L @ L.conj().T
    if spec.d == 1:
        p = sp.pauli
        E = (abs(p.d3) - np.hypot(p.d1, p.d2)) * (abs(p.d3) + np.hypot(p.d1, p.d2))
        E = np.sqrt(E)
        gam = np.sign(p.d3) / E * np.array([[p.d3 - p.d2, -p.d1], [-p.d1, p.d3 + p.d2]])
    else:
        U = nambu_to_quadrature(spec.d)
        # Hermitian; real only when Gamma_r = Gamma_{-r}
        gam = U.conj().T @ C @ U
        gam = 0.5 * (gam + gam.conj().T)
    return MomentumCM(np.atleast_1d(np.asarray(k, float)), gam, C)


def _d1_numerator(spec: QBHSpec, ks: np.ndarray):
    """Single-band N(k) and E(k) with Gamma(k) = N(k) / E(k)."""
    d0, d1, d2, d3 = pauli_components(spec, ks)
    rho = np.hypot(d1, d2)
    E = np.sqrt(np.clip((np.abs(d3) - rho) * (np.abs(d3) + rho), 0, None))
    s = np.where(d3 >= 0, 1.0, -1.0)
    N = np.empty((len(d0), 2, 2))
    N[:, 0, 0] = s * (d3 - d2)
    N[:, 1, 1] = s * (d3 + d2)
    N[:, 0, 1] = N[:, 1, 0] = -s * d1
    return N, E


def gamma_k(spec: QBHSpec, ks: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Quadrature covariance Gamma(k) on a stack of momenta, shape (M, 2d, 2d).

    Raises :class:`SingularPointError` at the first non-Regular momentum.
    """
    ks = np.asarray(ks, float).reshape(-1, spec.D)
    bd = band_data(spec, ks, tol)
    bad = np.flatnonzero(bd.codes != 0)
    if len(bad):
        j = int(bad[0])
        raise SingularPointError(
            f"{bd.classification(j).value} at k={ks[j].tolist()} (index {j})", ks[j], bd.classification(j).value
        )
    if spec.d == 1:
        N, E = _d1_numerator(spec, ks)
        return N / E[:, None, None]
    gs = dynamical_matrices(spec, ks)
    lams, Vs = np.linalg.eig(gs)
    U = nambu_to_quadrature(spec.d)
    out = np.empty((len(ks), 2 * spec.d, 2 * spec.d), complex)
    for i in range(len(ks)):
        L = _spectral_dense(ks[i], gs[i], spec.scale, tol, lams[i], Vs[i]).eigenvectors
        out[i] = U.conj().T @ L @ L.conj().T @ U
    return out


# --------------------------------------------------------------------------
# Krein projector


@dataclass(frozen=True, eq=False)
class KreinProjector:
    k: np.ndarray
    P: np.ndarray

    def covariance(self) -> np.ndarray:
        """C(k) = (2P - 1) tau3."""
        d = self.P.shape[0] // 2
        return (2 * self.P - np.eye(2 * d)) @ _tau3(d)


def krein_projector(sp: SpectralPoint) -> KreinProjector:
    """P = sum_n beta_{n,+} beta_{n,+}^dag tau3."""
    _require_regular(sp)
    B = sp.particle_vectors
    return KreinProjector(np.asarray(sp.k), B @ B.conj().T @ _tau3(sp.d))


def resolution_of_identity(sp: SpectralPoint) -> np.ndarray:
    """sum_n (beta_+ beta_+^dag - beta_- beta_-^dag) tau3, which equals 1."""
    _require_regular(sp)
    Bp, Bm = sp.particle_vectors, sp.hole_vectors
    return (Bp @ Bp.conj().T - Bm @ Bm.conj().T) @ _tau3(sp.d)


# --------------------------------------------------------------------------
# real space


@dataclass(frozen=True)
class QuadratureSettings:
    """Brillouin-zone integration controls.

    ``mode`` is ``"auto"`` (adaptive panels when the Krein gap is below
    ``adaptive_below``), ``"trapezoid"`` or ``"adaptive"``.
    """

    tol: float = 1e-10
    start_points: int = 64
    max_points: int = 2**20
    mode: str = "auto"
    adaptive_below: float = 0.01
    adaptive_epsabs: float = 1e-12
    # a pure absolute target stalls on tall near-critical peaks
    adaptive_epsrel: float = 1e-12
    adaptive_limit: int = 20000


@dataclass(frozen=True, eq=False)
class RealSpaceCM:
    """Gamma blocks per separation r, Gamma_r = <{R_j, R_{j+r}^T}>.

    ``errors`` holds the per-entry absolute quadrature error estimate.
    Divergent entries (at exact exceptional points) are +inf.
    """

    D: int
    d: int
    separations: list[tuple[int, ...]]
    blocks: np.ndarray
    errors: np.ndarray
    method: str = "trapezoid"
    points: int = 0
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index.update({r: i for i, r in enumerate(self.separations)})

    def block(self, r) -> np.ndarray:
        r = tuple(np.atleast_1d(r).astype(int).tolist())
        try:
            return self.blocks[self._index[r]]
        except KeyError:
            raise ConfigError(f"separation {r} was not computed") from None

    def entry(self, name: str, r, bands: tuple[int, int] = (0, 0)) -> float:
        a, b = _block_slice(name, self.d, bands)
        return float(self.block(r)[a, b])

    def correlator(self, name: str, r, bands: tuple[int, int] = (0, 0)) -> float:
        """Symmetrized correlator, e.g. <x_j x_{j+r}> = Gamma_xx(r) / 2."""
        return 0.5 * self.entry(name, r, bands)

    def series(self, name: str, bands: tuple[int, int] = (0, 0), axis: int = 0):
        """(r, Gamma_name(r)) for r >= 0 along one lattice axis."""
        a, b = _block_slice(name, self.d, bands)
        rs, vals = [], []
        for r, i in sorted(self._index.items()):
            if r[axis] >= 0 and all(c == 0 for j, c in enumerate(r) if j != axis):
                rs.append(r[axis])
                vals.append(self.blocks[i][a, b])
        return np.asarray(rs), np.asarray(vals)

    @property
    def max_error(self) -> float:
        finite = np.isfinite(self.blocks)
        return float(np.max(self.errors[finite])) if finite.any() else 0.0


def _block_slice(name: str, d: int, bands: tuple[int, int]) -> tuple[int, int]:
    if name not in ("xx", "pp", "xp", "px"):
        raise ConfigError(f"unknown block {name!r}; use xx, pp, xp or px")
    off = {"x": 0, "p": d}
    return off[name[0]] + bands[0], off[name[1]] + bands[1]


def _separations(D: int, r_max: int) -> list[tuple[int, ...]]:
    axis = range(-r_max, r_max + 1)
    return [tuple(int(c) for c in r) for r in np.stack(np.meshgrid(*([axis] * D), indexing="ij"), -1).reshape(-1, D)]


def _trapezoid(spec: QBHSpec, r_max: int, quad: QuadratureSettings, tol: Tolerances):
    D, d = spec.D, spec.d
    seps = _separations(D, r_max)
    idx = np.array(seps)
    M = quad.start_points
    while M <= 2 * r_max + 1:
        M *= 2
    cap = int(round(quad.max_points ** (1.0 / D)))
    prev = None
    err = None
    while True:
        axis = 2 * np.pi * np.arange(M) / M
        ks = np.stack(np.meshgrid(*([axis] * D), indexing="ij"), -1).reshape(-1, D)
        G = gamma_k(spec, ks, tol).reshape((M,) * D + (2 * d, 2 * d))
        F = np.fft.fftn(G, axes=tuple(range(D))) / M**D
        cur = F[tuple((idx % M).T)]
        cur = cur.real if np.iscomplexobj(cur) else cur
        if prev is not None:
            err = np.abs(cur - prev)
            if np.max(err) < quad.tol or 2 * M > cap:
                break
        elif 2 * M > cap:
            err = np.full_like(cur, np.nan)
            break
        prev = cur
        M *= 2
    return seps, cur, err, M


def _breakpoints(spec: QBHSpec, tol: Tolerances) -> np.ndarray:
    grid = BZGrid.default(1)
    ks = grid.points
    bd = band_data(spec, ks, tol)
    pts = {-np.pi, 0.0, np.pi}
    for i in np.flatnonzero(bd.codes != 0):
        pts.add(float(ks[i, 0]))
    if not np.any(bd.codes == 3):
        gap = krein_gap(spec, grid, tol)
        k0 = float(gap.argmin_k[0])
        pts.update({k0, -k0})
    return np.array(sorted(p for p in pts if -np.pi <= p <= np.pi))


def _poles(spec: QBHSpec, brk: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints where E(k) vanishes, with the numerator N(k) there."""
    N, E = _d1_numerator(spec, brk[:, None])
    zero = E <= _POLE_TOL * spec.scale
    return brk[zero], N[zero]


_POLE_TOL = 1e-6


def _adaptive(spec: QBHSpec, r_max: int, quad: QuadratureSettings, tol: Tolerances):
    if spec.D != 1 or spec.d != 1:
        raise ConfigError("adaptive Brillouin-zone quadrature is implemented for D = 1, d = 1")
    brk = _breakpoints(spec, tol)
    _, Np = _poles(spec, brk)
    div = np.any(np.abs(Np) > _POLE_TOL * spec.scale, axis=0) if len(Np) else np.zeros((2, 2), bool)
    rs = np.arange(-r_max, r_max + 1)

    def f(k):
        N, E = _d1_numerator(spec, np.array([[k]]))
        G = np.where(E[0] > 0, N[0] / E[0], 0.0)
        G = np.where(div, 0.0, G)
        return np.cos(k * rs)[:, None, None] * G[None] / (2 * np.pi)

    val, err = quad_vec(
        f, -np.pi, np.pi, points=brk[1:-1], epsabs=quad.adaptive_epsabs, epsrel=quad.adaptive_epsrel,
        norm="max", limit=quad.adaptive_limit,
    )
    val = np.where(div[None], np.inf, val)
    errs = np.full(val.shape, float(err))
    return [(int(r),) for r in rs], val, errs


def real_space_cm(
    spec: QBHSpec, r_max: int, quad: QuadratureSettings | None = None, tol: Tolerances = DEFAULT_TOL
) -> RealSpaceCM:
    """Gamma_r for all separations with |r|_inf <= r_max.

    Gapped specs use the periodic trapezoid rule with grid doubling.  Near or
    at a gap closing (single-band chains) adaptive Gauss-Kronrod panels split
    at the gap-minimizing and singular momenta are used; entries with a
    non-integrable pole come back as +inf.
    """
    quad = quad or QuadratureSettings()
    if r_max < 0:
        raise ConfigError("r_max must be non-negative")
    mode = quad.mode
    if mode == "auto":
        if spec.D == 1 and spec.d == 1:
            gap = krein_gap(spec, BZGrid.default(1), tol)
            mode = "adaptive" if (not gap.stable or gap.direct < quad.adaptive_below) else "trapezoid"
        else:
            mode = "trapezoid"
    if mode == "trapezoid":
        seps, vals, errs, M = _trapezoid(spec, r_max, quad, tol)
        if np.any(errs > quad.tol):
            warnings.warn(
                f"trapezoid quadrature not converged to {quad.tol:g} (max error {np.nanmax(errs):.2e})",
                RuntimeWarning, stacklevel=2,
            )
        return RealSpaceCM(spec.D, spec.d, seps, vals, errs, "trapezoid", M)
    if mode == "adaptive":
        seps, vals, errs = _adaptive(spec, r_max, quad, tol)
        return RealSpaceCM(spec.D, spec.d, seps, vals, errs, "adaptive", 0)
    raise ConfigError(f"unknown quadrature mode {quad.mode!r}")


# --------------------------------------------------------------------------
# composite correlators


@dataclass(frozen=True)
class StencilTerm:
    quadrature: str  # "x" or "p"
    offset: tuple[int, ...]
    coefficient: float = 1.0
    band: int = 0


_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*\*\s*)?"
    r"([xp])(?:\[(\d+)\])?\s*@\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*"
)


def parse_stencil(text: str) -> list[StencilTerm]:
    """Parse ``"x@0+p@1"``-style stencils.

    Each term is ``[sign][coef*]q[band]@offset`` with ``q`` in {x, p}, an
    optional band index in brackets and a comma-separated offset for D > 1,
    e.g. ``"0.5*x[1]@0,1 - p@0,0"``.
    """
    terms, pos = [], 0
    text = text.strip()
    if not text:
        raise ConfigError("empty stencil")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"cannot parse stencil {text!r} at position {pos}")
        if terms and m.group(1) is None:
            raise ConfigError(f"missing '+' or '-' between stencil terms in {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        off = tuple(int(c) for c in m.group(5).replace(" ", "").split(","))
        terms.append(StencilTerm(m.group(3), off, sign * coef, int(m.group(4) or 0)))
        pos = m.end()
    if len({len(t.offset) for t in terms}) != 1:
        raise ConfigError("all stencil offsets must have the same dimension")
    return terms


def stencil_weights(terms: Sequence[StencilTerm], d: int):
    """Slots, coefficients and offsets defining w_b(k) = c_b exp(-i k . o_b)."""
    slots = [(0 if t.quadrature == "x" else d) + t.band for t in terms]
    if any(t.band >= d for t in terms):
        raise ConfigError(f"stencil band index exceeds d-1 = {d - 1}")
    return slots, np.array([t.coefficient for t in terms]), np.array([t.offset for t in terms], float)


@dataclass(frozen=True)
class CompositeResult:
    r: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    method: str


def composite_correlator(
    spec: QBHSpec, stencil: str | Sequence[StencilTerm], r_values: Sequence[int],
    quad: QuadratureSettings | None = None, tol: Tolerances = DEFAULT_TOL,
) -> CompositeResult:
    """Symmetrized correlator <A_j A_{j+r}>_sym = 1/2 <{A_j, A_{j+r}}> of A_j = sum_b c_b R^{q_b}_{j + o_b}.

    The stencil is contracted with Gamma(k) before integration, so analytic
    combinations stay finite at exceptional points where individual entries
    diverge.  Separations run along the first lattice axis.
    """
    quad = quad or QuadratureSettings()
    terms = parse_stencil(stencil) if isinstance(stencil, str) else list(stencil)
    if len(terms[0].offset) != spec.D:
        raise ConfigError(f"stencil offsets must have D={spec.D} components")
    slots, coef, offs = stencil_weights(terms, spec.d)
    rs = np.asarray(list(r_values), int)

    def form(G: np.ndarray, ks: np.ndarray) -> np.ndarray:
        W = np.zeros((len(ks), 2 * spec.d), complex)
        ph = np.exp(-1j * ks @ offs.T)  # (M, terms)
        for j, s in enumerate(slots):
            W[:, s] += coef[j] * ph[:, j]
        return np.einsum("mi,mij,mj->m", W.conj(), G, W).real

    mode = quad.mode
    if mode == "auto":
        if spec.D == 1 and spec.d == 1:
            gap = krein_gap(spec, BZGrid.default(1), tol)
            mode = "adaptive" if (not gap.stable or gap.direct < quad.adaptive_below) else "trapezoid"
        else:
            mode = "trapezoid"

    if mode == "adaptive":
        if spec.D != 1 or spec.d != 1:
            raise ConfigError("adaptive Brillouin-zone quadrature is implemented for D = 1, d = 1")
        brk = _breakpoints(spec, tol)
        kp, Np = _poles(spec, brk)
        if len(kp) and np.max(np.abs(form(Np, kp[:, None]))) > _POLE_TOL * spec.scale:
            raise SingularPointError("stencil combination diverges at a gap-closing momentum", kp)

        # F(k) is real and even, so only the cosine transform survives
        def f(k):
            kk = np.array([[k]])
            N, E = _d1_numerator(spec, kk)
            F = form(N, kk)[0]
            F = F / E[0] if E[0] > 0 else 0.0
            return 0.5 * np.cos(k * rs) * F / (2 * np.pi)

        vals, err = quad_vec(f, -np.pi, np.pi, points=brk[1:-1], epsabs=quad.adaptive_epsabs,
                             epsrel=quad.adaptive_epsrel, norm="max", limit=quad.adaptive_limit)
        return CompositeResult(rs, np.asarray(vals), np.full(len(rs), float(err)), "adaptive")

    M = quad.start_points
    rmax = int(np.max(np.abs(rs))) if len(rs) else 0
    while M <= 2 * rmax + 1:
        M *= 2
    cap = int(round(quad.max_points ** (1.0 / spec.D)))
    prev = None
    while True:
        axis = 2 * np.pi * np.arange(M) / M
        ks = np.stack(np.meshgrid(*([axis] * spec.D), indexing="ij"), -1).reshape(-1, spec.D)
        F = form(gamma_k(spec, ks, tol), ks).reshape((M,) * spec.D)
        FT = np.fft.fftn(F) / M**spec.D
        sel = tuple([rs % M] + [np.zeros_like(rs)] * (spec.D - 1))
        cur = 0.5 * FT[sel].real
        if prev is not None and (np.max(np.abs(cur - prev)) < quad.tol or 2 * M > cap):
            break
        if prev is None and 2 * M > cap:
            prev = cur
            break
        prev = cur
        M *= 2
    return CompositeResult(rs, cur, np.abs(cur - prev), "trapezoid")


# --------------------------------------------------------------------------
# correlation lengths


@dataclass(frozen=True)
class CorrelationFit:
    xi: float
    amplitude: float
    fit_window: tuple[int, int]
    residual: float
    n_points: int = 0
    power: float = 0.0


def fit_correlation_length(
    r: np.ndarray, values: np.ndarray, fit_window: tuple[int, int] = (5, 40), floor: float = 1e-13,
    parity: str | None = None, prefactor: str = "none",
) -> CorrelationFit:
    """Least-squares fit of log|value| against r.

    ``prefactor="power"`` adds a -b log r term for Ornstein-Zernike type
    prefactors; ``parity`` restricts the fit to even or odd r.
    """
    r = np.asarray(r, float)
    v = np.abs(np.asarray(values, float))
    m = (r >= fit_window[0]) & (r <= fit_window[1]) & np.isfinite(v) & (v > floor)
    if parity == "even":
        m &= r % 2 == 0
    elif parity == "odd":
        m &= r % 2 == 1
    elif parity is not None:
        raise ConfigError(f"parity must be 'even', 'odd' or None, not {parity!r}")
    if np.count_nonzero(m) < 8:
        raise NumericalFailure(
            f"only {np.count_nonzero(m)} separations above the {floor:g} floor in window {fit_window}; need 8"
        )
    rr, y = r[m], np.log(v[m])
    if prefactor == "none":
        A = np.column_stack([np.ones_like(rr), rr])
    elif prefactor == "power":
        A = np.column_stack([np.ones_like(rr), rr, np.log(rr)])
    else:
        raise ConfigError(f"prefactor must be 'none' or 'power', not {prefactor!r}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    if coef[1] >= 0:
        raise NumericalFailure("correlations do not decay over the fit window")
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    used = (int(rr.min()), int(rr.max()))
    return CorrelationFit(-1.0 / coef[1], float(np.exp(coef[0])), used, res, int(len(rr)),
                          float(-coef[2]) if prefactor == "power" else 0.0)


def correlation_length(
    cm: RealSpaceCM, block: str = "xx", fit_window: tuple[int, int] = (5, 40), floor: float = 1e-13,
    parity: str | None = None, prefactor: str = "none", bands: tuple[int, int] = (0, 0),
) -> CorrelationFit:
    """Correlation length from the decay of one Gamma block along the first axis."""
    r, v = cm.series(block, bands)
    return fit_correlation_length(r, v, fit_window, floor, parity, prefactor)


@dataclass(frozen=True)
class DynamicExponent:
    z: float
    t: np.ndarray
    gaps: np.ndarray
    xis: np.ndarray
    dropped: list = field(default_factory=list)


def dynamic_exponent(
    spec_family: Callable[[float], QBHSpec], t_values: Sequence[float], blocks: Sequence[str] = ("xx", "pp"),
    fit_window: tuple[int, int] = (5, 40), prefactor: str = "power", quad: QuadratureSettings | None = None,
) -> DynamicExponent:
    """z from the slope of log Krein gap against log xi along a path t -> spec.

    xi at each t is the largest fitted length over ``blocks``.  Points where
    the fit fails are dropped and listed in ``dropped``.
    """
    ts, gaps, xis, dropped = [], [], [], []
    quad = quad or QuadratureSettings(mode="trapezoid")
    for t in t_values:
        spec = spec_family(t)
        gap = krein_gap(spec)
        if not gap.stable or gap.direct <= 0:
            dropped.append((t, "not Krein-gapped"))
            continue
        try:
            cm = real_space_cm(spec, fit_window[1], quad)
            xi = max(correlation_length(cm, b, fit_window, prefactor=prefactor).xi for b in blocks)
        except (NumericalFailure, ConfigError) as e:
            dropped.append((t, str(e)))
            continue
        ts.append(t)
        gaps.append(gap.direct)
        xis.append(xi)
    if len(ts) < 2:
        raise NumericalFailure(f"need at least two usable path points, got {len(ts)}; dropped: {dropped}")
    slope = np.polyfit(np.log(xis), np.log(gaps), 1)[0]
    return DynamicExponent(float(-slope), np.array(ts), np.array(gaps), np.array(xis), dropped)


_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos,
}


def path_expression(expr: str) -> Callable[[float], float]:
    """Compile an arithmetic expression in ``t`` (numbers, + - * / **, parentheses)."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as e:
        raise ConfigError(f"bad path expression {expr!r}: {e.msg}") from None

    def ev(node, t):
        if isinstance(node, ast.Expression):
            return ev(node.body, t)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "t":
            return t
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left, t), ev(node.right, t))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand, t))
        raise ConfigError(f"unsupported element in path expression {expr!r}")

    ev(tree, 1.0)
    return lambda t: float(ev(tree, float(t)))


# --------------------------------------------------------------------------
# energy density


def qpv_energy_density(spec: QBHSpec, grid: BZGrid | None = None, tol: Tolerances = DEFAULT_TOL) -> float:
    """Per-site QPV energy (1/V) sum_k 1/2 (sum_n w_n(k) - tr K(k))."""
    grid = grid or BZGrid.default(spec.D)
    ks = grid.points
    bd = band_data(spec, ks, tol)
    bad = np.flatnonzero((bd.codes == 1) | (bd.codes == 3))
    if len(bad):
        j = int(bad[0])
        raise SingularPointError(
            f"dynamically unstable at k={ks[j].tolist()}: QPV energy undefined", ks[j], bd.classification(j).value
        )
    Kk, _ = spec.fourier(ks)
    trK = np.trace(Kk, axis1=1, axis2=2).real
    return float(np.mean(0.5 * (bd.omega.sum(axis=1) - trK)))
