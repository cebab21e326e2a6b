"""Quadratic bosonic Hamiltonians as coupling maps.

A translationally invariant QBH on Z^D with d bosonic modes per site is

    H = sum_{j,r} a_j^dag K_r a_{j+r} + 1/2 [a_j^dag Delta_r a_{j+r}^dag + h.c.]

with K_{-r} = K_r^dag and Delta_{-r} = Delta_r^T.  Only the canonical half of
the offsets (r = 0 and lexicographically positive r) is stored; the other half
is generated on demand so the constraints hold by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError

Offset = tuple[int, ...]

_HERMITICITY_TOL = 1e-14


def is_canonical(r: Offset) -> bool:
    """True for r = 0 or a lexicographically positive offset."""
    for c in r:
        if c != 0:
            return c > 0
    return True


def _neg(r: Offset) -> Offset:
    return tuple(-c for c in r)


def _as_matrix(m, d: int) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.shape != (d, d):
        raise ConfigError(f"coupling matrix has shape {a.shape}, expected {(d, d)}")
    return a


def _close(a: np.ndarray, b: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return bool(np.max(np.abs(a - b)) <= _HERMITICITY_TOL * scale)


@dataclass(frozen=True, eq=False)
class QBHSpec:
    """Immutable translationally invariant QBH.

    ``hopping`` and ``pairing`` hold only canonical offsets.  Use
    :meth:`from_couplings` to build a spec from arbitrary (possibly
    redundant) offset maps; the constructor itself only validates.
    """

    D: int
    d: int
    R: int
    hopping: Mapping[Offset, np.ndarray] = field(default_factory=dict)
    pairing: Mapping[Offset, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.D < 1 or self.d < 1 or self.R < 1:
            raise ConfigError("D, d and R must be positive integers")
        for name, table in (("hopping", self.hopping), ("pairing", self.pairing)):
            for r, m in table.items():
                if len(r) != self.D:
                    raise ConfigError(f"{name} offset {r} does not have D={self.D} components")
                if not is_canonical(r):
                    raise ConfigError(f"{name} offset {r} is not canonical; use from_couplings")
                if max((abs(c) for c in r), default=0) > self.R:
                    raise ConfigError(f"{name} offset {r} exceeds range R={self.R}")
                if m.shape != (self.d, self.d):
                    raise ConfigError(f"{name} matrix at {r} has wrong shape {m.shape}")
        zero = (0,) * self.D
        if zero in self.hopping and not _close(self.hopping[zero], self.hopping[zero].conj().T):
            raise ConfigError("hermiticity: on-site hopping K_0 must be Hermitian")
        if zero in self.pairing and not _close(self.pairing[zero], self.pairing[zero].T):
            raise ConfigError("pairing symmetry: on-site pairing Delta_0 must be symmetric")

    @classmethod
    def from_couplings(
        cls,
        hopping: Mapping[Sequence[int], object],
        pairing: Mapping[Sequence[int], object] | None = None,
        *,
        D: int | None = None,
        d: int | None = None,
        R: int | None = None,
    ) -> "QBHSpec":
        """Build a spec from offset -> matrix maps covering any offsets.

        Entries at ``r`` and ``-r`` may both be given as long as they satisfy
        the Hermiticity (hopping) or transpose (pairing) relation.  Scalars are
        accepted for single-band models.
        """
        pairing = pairing or {}
        items = list(hopping.items()) + list(pairing.items())
        if not items:
            raise ConfigError("at least one coupling is required")
        if D is None:
            D = len(tuple(np.atleast_1d(items[0][0])))
        if d is None:
            d = int(np.atleast_2d(np.asarray(items[0][1])).shape[0])
        maxr = 1
        for r, _ in items:
            r = tuple(int(c) for c in np.atleast_1d(r))
            if r:
                maxr = max(maxr, max(abs(c) for c in r))
        if R is None:
            R = maxr

        def canon(table, conj):
            out: dict[Offset, np.ndarray] = {}
            given: dict[Offset, np.ndarray] = {}
            for r, m in table.items():
                r = tuple(int(c) for c in np.atleast_1d(r))
                if len(r) != D:
                    raise ConfigError(f"offset {r} does not have D={D} components")
                m = _as_matrix(m, d)
                if r in given:
                    raise ConfigError(f"offset {r} given twice")
                given[r] = m
            for r, m in given.items():
                cr, cm = (r, m) if is_canonical(r) else (_neg(r), conj(m))
                if cr in out:
                    if not _close(out[cr], cm):
                        what = "K_-r = K_r^dag" if conj is _dag else "Delta_-r = Delta_r^T"
                        raise ConfigError(f"inconsistent couplings at +/-{cr}: {what} violated")
                    continue
                out[cr] = cm
            return {r: m for r, m in out.items() if np.any(m != 0)}

        return cls(D, d, R, canon(hopping, _dag), canon(pairing, _tr))

    def K(self, r: Sequence[int]) -> np.ndarray:
        """Hopping matrix at any offset."""
        r = tuple(r)
        if is_canonical(r):
            return self.hopping.get(r, np.zeros((self.d, self.d), complex))
        return _dag(self.hopping.get(_neg(r), np.zeros((self.d, self.d), complex)))

    def Delta(self, r: Sequence[int]) -> np.ndarray:
        """Pairing matrix at any offset."""
        r = tuple(r)
        if is_canonical(r):
            return self.pairing.get(r, np.zeros((self.d, self.d), complex))
        return _tr(self.pairing.get(_neg(r), np.zeros((self.d, self.d), complex)))

    def offsets(self) -> list[Offset]:
        """All offsets carrying a nonzero coupling, both half-spaces, sorted."""
        half = set(self.hopping) | set(self.pairing)
        full = half | {_neg(r) for r in half}
        return sorted(full)

    @property
    def number_conserving(self) -> bool:
        return not self.pairing

    def fourier(self, ks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """K(k) and Delta(k) at momenta ``ks`` of shape (M, D).

        Returns arrays of shape (M, d, d).
        """
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        if ks.shape[1] != self.D:
            ks = ks.reshape(-1, self.D)
        # K(0) + sum_r K_r (e^{ikr} - 1) keeps full relative accuracy near k = 0,
        # where gapless models have their zeros
        K0, D0, offs, Ks, Ds = self._fourier_tables
        th = ks @ offs.T
        em1 = -2 * np.sin(0.5 * th) ** 2 + 1j * np.sin(th)
        Kk = K0 + np.einsum("mn,nij->mij", em1, Ks)
        Dk = D0 + np.einsum("mn,nij->mij", em1, Ds)
        return Kk, Dk

    @cached_property
    def _fourier_tables(self):
        offs = self.offsets()
        z = np.zeros((self.d, self.d), complex)
        K0 = sum((self.K(r) for r in offs), z)
        D0 = sum((self.Delta(r) for r in offs), z)
        nz = [r for r in offs if any(r)]
        Ks = np.array([self.K(r) for r in nz], complex).reshape(-1, self.d, self.d)
        Ds = np.array([self.Delta(r) for r in nz], complex).reshape(-1, self.d, self.d)
        return K0, D0, np.array(nz, float).reshape(-1, self.D), Ks, Ds

    @cached_property
    def scale(self) -> float:
        """max_k of the row-sum norm of g(k), sampled on a fine uniform grid."""
        n = 16 * self.R + 1
        axis = 2 * np.pi * (np.arange(n) - n // 2) / n
        ks = np.stack(np.meshgrid(*([axis] * self.D), indexing="ij"), -1).reshape(-1, self.D)
        Kk, Dk = self.fourier(ks)
        Km, Dm = self.fourier(-ks)
        top = np.abs(Kk).sum(-1) + np.abs(Dk).sum(-1)
        bot = np.abs(Dm).sum(-1) + np.abs(Km).sum(-1)
        s = float(max(top.max(), bot.max()))
        return s if s > 0 else 1.0

    def hermiticity_residual(self) -> float:
        """max over offsets of |K_-r - K_r^dag| and |Delta_-r - Delta_r^T|."""
        res = 0.0
        for r in self.offsets():
            res = max(res, float(np.max(np.abs(self.K(_neg(r)) - _dag(self.K(r))))))
            res = max(res, float(np.max(np.abs(self.Delta(_neg(r)) - _tr(self.Delta(r))))))
        return res


def _dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def _tr(m: np.ndarray) -> np.ndarray:
    return m.T.copy()


# --------------------------------------------------------------------------
# quadrature representation


@dataclass(frozen=True, eq=False)
class QuadratureForm:
    """Real quadrature couplings H = 1/2 sum R_j^T H_{j,j+r} R_{j+r} + f.

    Maps hold every offset explicitly (both half-spaces).  ``Hxp[r]`` couples
    x_j to p_{j+r}; the p-x block at offset r is ``Hxp[-r].T``.
    """

    D: int
    d: int
    Hxx: Mapping[Offset, np.ndarray]
    Hpp: Mapping[Offset, np.ndarray]
    Hxp: Mapping[Offset, np.ndarray]
    constant_shift: float = 0.0

    def block(self, name: str, r: Sequence[int]) -> np.ndarray:
        table = {"xx": self.Hxx, "pp": self.Hpp, "xp": self.Hxp}[name]
        return table.get(tuple(r), np.zeros((self.d, self.d)))


def to_quadrature(spec: QBHSpec) -> QuadratureForm:
    """Convert bosonic couplings to quadrature couplings."""
    Hxx, Hpp, Hxp = {}, {}, {}
    for r in spec.offsets() or [(0,) * spec.D]:
        K, Dl = spec.K(r), spec.Delta(r)
        Hxx[r] = (K + Dl).real.copy()
        Hpp[r] = (K - Dl).real.copy()
        Hxp[r] = (Dl - K).imag.copy()
    f = 0.5 * float(np.trace(spec.K((0,) * spec.D)).real)
    return QuadratureForm(spec.D, spec.d, Hxx, Hpp, Hxp, f)


def from_quadrature(q: QuadratureForm, R: int | None = None) -> QBHSpec:
    """Inverse of :func:`to_quadrature`.  The constant shift is not needed."""
    offs = set(q.Hxx) | set(q.Hpp) | set(q.Hxp)
    offs |= {_neg(r) for r in offs}
    zero = np.zeros((q.d, q.d))
    for name, table in (("Hxx", q.Hxx), ("Hpp", q.Hpp)):
        for r in offs:
            a = np.asarray(table.get(r, zero), float)
            b = np.asarray(table.get(_neg(r), zero), float)
            if not np.allclose(a, b.T, rtol=0, atol=1e-14 * max(1.0, np.abs(a).max())):
                raise ConfigError(f"{name} is not symmetric: {name}[-r] != {name}[r]^T at r={r}")
    hop, pair = {}, {}
    for r in offs:
        if not is_canonical(r):
            continue
        xx = np.asarray(q.Hxx.get(r, zero), float)
        pp = np.asarray(q.Hpp.get(r, zero), float)
        xp = np.asarray(q.Hxp.get(r, zero), float)
        xpT = np.asarray(q.Hxp.get(_neg(r), zero), float).T
        hop[r] = 0.5 * (xx + pp) + 0.5j * (xpT - xp)
        pair[r] = 0.5 * (xx - pp) + 0.5j * (xpT + xp)
    return QBHSpec.from_couplings(hop, pair, D=q.D, d=q.d, R=R)


# --------------------------------------------------------------------------
# built-in models


@dataclass(frozen=True)
class HarmonicChain:
    """Phonon chain H = sum_j Omega/2 (x_j^2 + p_j^2) - J x_j x_{j+1}."""

    Omega: float
    J: float

    def __post_init__(self):
        if not (self.Omega >= 2 * self.J >= 0):
            raise ConfigError("HarmonicChain requires Omega >= 2J >= 0")

    @property
    def alpha(self) -> float:
        return 2 * self.J / self.Omega


@dataclass(frozen=True)
class ImagHopChain:
    """Harmonic chain plus an imaginary hopping of strength gamma."""

    Omega: float
    J: float
    gamma: float

    def __post_init__(self):
        if not (self.Omega >= 2 * self.J >= 0):
            raise ConfigError("ImagHopChain requires Omega >= 2J >= 0")

    @property
    def gamma_c(self) -> float:
        """Imaginary-hopping strength where thermodynamic stability is lost.

        tau3 g(k) stays semidefinite while gamma^2 sin^2 k <= Omega (Omega - 2J cos k);
        minimizing the ratio over k gives gamma_c^2 = Omega^2 (1 + sqrt(1 - alpha^2)) / 2.
        """
        a = 2 * self.J / self.Omega
        return self.Omega * math.sqrt(0.5 * (1 + math.sqrt(1 - a * a)))


@dataclass(frozen=True)
class Interpolation:
    """Interpolates between decoupled oscillators (s=0) and a hopping/pairing chain (s=1)."""

    Omega: float
    J: float
    Delta: float
    s: float

    def __post_init__(self):
        if not (0 <= self.s <= 1):
            raise ConfigError("Interpolation requires s in [0, 1]")
        if not self.Omega > 0:
            raise ConfigError("Interpolation requires Omega > 0")

    @property
    def alpha(self) -> float:
        if self.s == 1:
            return math.inf
        return self.s * self.Delta / (self.Omega * (1 - self.s))

    @property
    def s1(self) -> float:
        """Edge of thermodynamic stability."""
        return 1 / (1 + self.J / self.Omega)

    @property
    def s2(self) -> float:
        """Edge of dynamical stability (exceptional point at k = 0, pi)."""
        return 1 / (1 + self.Delta / self.Omega)


@dataclass(frozen=True)
class DoubleChain:
    """Self-dual chain with on-site Omega1 p^2 + Omega2 x^2 and gradient terms K1, K2."""

    Omega1: float
    Omega2: float
    K1: float
    K2: float

    def __post_init__(self):
        if min(self.Omega1, self.Omega2, self.K1, self.K2) < 0:
            raise ConfigError("DoubleChain requires Omega1, Omega2, K1, K2 >= 0")


ModelParams = HarmonicChain | ImagHopChain | Interpolation | DoubleChain

MODELS: dict[str, type] = {
    "harmonic": HarmonicChain,
    "imaghop": ImagHopChain,
    "interpolation": Interpolation,
    "double": DoubleChain,
}


def model_parameters(name: str) -> tuple[str, ...]:
    """Parameter names of a built-in model."""
    try:
        cls = MODELS[name]
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return tuple(cls.__dataclass_fields__)


def make_params(name: str, **values: float) -> ModelParams:
    """Instantiate built-in model parameters by name."""
    names = model_parameters(name)
    unknown = set(values) - set(names)
    if unknown:
        raise ConfigError(f"model {name!r} has no parameter(s) {sorted(unknown)}")
    missing = [n for n in names if n not in values]
    if missing:
        raise ConfigError(f"model {name!r} is missing parameter(s) {missing}")
    return MODELS[name](**{n: float(values[n]) for n in names})


def build_model(params: ModelParams) -> QBHSpec:
    """Coupling maps of a built-in model (D = d = R = 1)."""
    if isinstance(params, ImagHopChain):
        Om, J, g = params.Omega, params.J, params.gamma
        hop = {(0,): Om, (1,): -J / 2 - 0.5j * g}
        pair = {(1,): -J / 2}
    elif isinstance(params, HarmonicChain):
        Om, J = params.Omega, params.J
        hop = {(0,): Om, (1,): -J / 2}
        pair = {(1,): -J / 2}
    elif isinstance(params, Interpolation):
        Om, J, Dl, s = params.Omega, params.J, params.Delta, params.s
        hop = {(0,): Om * (1 - s), (1,): -0.5j * J * s}
        pair = {(1,): 0.5j * Dl * s}
    elif isinstance(params, DoubleChain):
        O1, O2, K1, K2 = params.Omega1, params.Omega2, params.K1, params.K2
        hop = {(0,): O1 + O2 + K1 + K2, (1,): -(K1 + K2) / 2}
        pair = {(0,): O2 - O1 + K2 - K1, (1,): -(K2 - K1) / 2}
    else:
        raise ConfigError(f"not a model parameter set: {params!r}")
    return QBHSpec.from_couplings(hop, pair, D=1, d=1, R=1)


# --------------------------------------------------------------------------
# model files


def spec_to_dict(spec: QBHSpec) -> dict:
    """JSON-compatible document listing the canonical couplings."""

    def records(table):
        return [
            {"offset": list(r), "re": m.real.tolist(), "im": m.imag.tolist()}
            for r, m in sorted(table.items())
        ]

    return {
        "D": spec.D,
        "d": spec.d,
        "R": spec.R,
        "hopping": records(spec.hopping),
        "pairing": records(spec.pairing),
    }


def spec_from_dict(doc: Mapping) -> QBHSpec:
    """Parse a coupling document or a ``{"model": name, "params": {...}}`` reference."""
    if "model" in doc:
        return build_model(make_params(doc["model"], **dict(doc.get("params", {}))))
    try:
        D, d, R = int(doc["D"]), int(doc["d"]), int(doc["R"])
    except KeyError as e:
        raise ConfigError(f"model file lacks field {e.args[0]!r}") from None

    def table(key):
        out = {}
        for rec in doc.get(key, []):
            try:
                re = np.asarray(rec["re"], float)
                im = np.asarray(rec.get("im", np.zeros_like(re)), float)
                out[tuple(int(c) for c in rec["offset"])] = re + 1j * im
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"malformed {key} record {rec!r}: {e}") from None
        return out

    return QBHSpec.from_couplings(table("hopping"), table("pairing"), D=D, d=d, R=R)


def load_model_file(path: str | Path) -> QBHSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read model file {path}: {e}") from None
    return spec_from_dict(doc)


def save_model_file(spec: QBHSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")
