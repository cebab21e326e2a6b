"""Command-line front end.

Every subcommand writes a table (CSV or JSON) to ``--out`` or stdout.  When
``--out`` is given a run manifest is written next to it as
``<out>.manifest.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from importlib import metadata
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .correlations import (
    QuadratureSettings,
    composite_correlator,
    correlation_length,
    dynamic_exponent,
    path_expression,
    qpv_energy_density,
    real_space_cm,
)
from .errors import ConfigError, InstabilityError, KreinError, NumericalFailure
from .gaussian import bisection, entanglement, finite_cm
from .geometry import qmt, qmt_divergence_scan
from .model import (
    MODELS,
    QBHSpec,
    build_model,
    load_model_file,
    make_params,
    model_parameters,
    spec_to_dict,
)
from .oracle import verification_suite
from .spectral import (
    DEFAULT_TOL,
    BZGrid,
    band_data,
    band_rows,
    krein_gap,
    stability_report,
)

THREADS_ENV = "KREINQBH_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_UNSTABLE = 0, 2, 3, 4
PARAM_FLAGS = sorted({p for name in MODELS for p in model_parameters(name)})
SWEEP_QUANTITIES = ("gap", "stable", "thermo", "energy", "ee", "logneg", "xi", "kpr", "z")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# --------------------------------------------------------------------------
# formatting


def fmt(v) -> str:
    """Locale-independent cell text; floats use the shortest round-trip repr."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def render(columns: Sequence[str], rows: Iterable[Sequence], fmt_name: str) -> str:
    rows = list(rows)
    if fmt_name == "json":
        return json.dumps([_json_value(dict(zip(columns, r))) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows([fmt(c) for c in r] for r in rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# configuration


def _threads_default() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    return max(1, n)


def _model_is_file(model: str) -> bool:
    return model not in MODELS and (model.endswith(".json") or Path(model).exists())


def collect_params(args) -> dict[str, float]:
    return {p: getattr(args, p) for p in PARAM_FLAGS if getattr(args, p) is not None}


def model_family(args) -> tuple[Callable[..., QBHSpec], dict[str, float], str]:
    """(parameters -> spec, base parameters, model label) from --model and the flags."""
    overrides = collect_params(args)
    if _model_is_file(args.model):
        doc_path = Path(args.model)
        try:
            doc = json.loads(doc_path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read model file {doc_path}: {e}") from None
        if "model" in doc:
            name = doc["model"]
            base = {**{k: float(v) for k, v in doc.get("params", {}).items()}, **overrides}
            return (lambda **p: build_model(make_params(name, **p))), base, name
        if overrides:
            raise ConfigError("parameter flags apply to built-in models only, not coupling files")
        spec = load_model_file(doc_path)
        return (lambda **p: spec), {}, str(doc_path)
    name = args.model
    model_parameters(name)  # validates the name
    return (lambda **p: build_model(make_params(name, **p))), overrides, name


def load_spec(args) -> tuple[QBHSpec, dict[str, float], str]:
    fam, base, label = model_family(args)
    return fam(**base), base, label


def grid_for(spec: QBHSpec, n: int | None) -> BZGrid:
    if n is None:
        return BZGrid.default(spec.D)
    if n < 3 or n % 2 == 0:
        raise ConfigError("--grid must be an odd integer >= 3")
    return BZGrid.uniform(n, spec.D)


def _float_list(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of integers, got {text!r}") from None


def require_stable(spec: QBHSpec, grid: BZGrid, allow_ep: bool = False) -> None:
    bd = band_data(spec, grid.points)
    bad = bd.codes == 3 if allow_ep else (bd.codes == 1) | (bd.codes == 3)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise InstabilityError(
            f"{bd.classification(j).value} at k={grid.points[j].tolist()}; "
            "this analysis requires a dynamically stable model"
        )


# --------------------------------------------------------------------------
# output


class Output:
    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.extra: dict = {}

    def manifest(self, spec_doc, params, label, rows: int) -> dict:
        opts = {k: v for k, v in vars(self.args).items() if k not in ("func", "argv") and k not in PARAM_FLAGS}
        return _json_value({
            "tool": "kreinqbh",
            "version": tool_version(),
            "command": self.command,
            "argv": self.args.argv,
            "model": label,
            "params": params,
            "couplings": spec_doc,
            "options": opts,
            "tolerances": asdict(DEFAULT_TOL),
            "rows": rows,
            "numpy": np.__version__,
            **self.extra,
        })

    def write(self, columns, rows, spec_doc=None, params=None, label=None) -> None:
        rows = list(rows)
        text = render(columns, rows, self.args.format)
        if self.args.out:
            out = Path(self.args.out)
            out.write_text(text)
            self.write_manifest(self.manifest(spec_doc, params or {}, label, len(rows)))
        else:
            sys.stdout.write(text)

    def write_manifest(self, doc: dict) -> None:
        path = Path(self.args.manifest) if self.args.manifest else Path(str(self.args.out) + ".manifest.json")
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_stability(args) -> int:
    spec, params, label = load_spec(args)
    grid = grid_for(spec, args.grid)
    rep = stability_report(spec, grid)
    d = rep.to_dict()
    sing = ";".join(
        f"{s['classification']}@{','.join(fmt(x) for x in s['k'])}" for s in d["singular_momenta"]
    )
    cols = ["dynamically_stable", "thermo", "krein_gap_direct", "krein_gap_indirect", "gap_argmin_k",
            "singular_momenta"]
    if args.format == "json":
        row = [d[c] for c in cols]
    else:
        row = [d["dynamically_stable"], d["thermo"], d["krein_gap_direct"], d["krein_gap_indirect"],
               ",".join(fmt(x) for x in d["gap_argmin_k"]), sing]
    Output(args, "stability").write(cols, [row], spec_to_dict(spec), params, label)
    return EXIT_OK


def cmd_bands(args) -> int:
    spec, params, label = load_spec(args)
    grid = grid_for(spec, args.grid)
    kcols = ["k"] if spec.D == 1 else [f"k{i + 1}" for i in range(spec.D)]
    cols = kcols + ["band", "re", "im", "signature", "kpr"]
    Output(args, "bands").write(cols, band_rows(spec, grid), spec_to_dict(spec), params, label)
    return EXIT_OK


def cmd_gap(args) -> int:
    spec, params, label = load_spec(args)
    gap = krein_gap(spec, grid_for(spec, args.grid))
    cols = ["direct", "indirect", "argmin_k", "indirect_argmin_k", "stable"]
    row = [gap.direct, gap.indirect, ",".join(fmt(x) for x in np.ravel(gap.argmin_k)),
           ";".join(",".join(fmt(x) for x in np.ravel(k)) for k in (gap.indirect_argmin or ())),
           gap.stable]
    Output(args, "gap").write(cols, [row], spec_to_dict(spec), params, label)
    return EXIT_OK


def _quad(args) -> QuadratureSettings:
    return QuadratureSettings(tol=args.quad_tol, mode=args.quadrature)


def cmd_correlations(args) -> int:
    spec, params, label = load_spec(args)
    if args.rmax < 0:
        raise ConfigError("--rmax must be non-negative")
    require_stable(spec, grid_for(spec, args.grid), allow_ep=True)
    rcols = ["r"] if spec.D == 1 else [f"r{i + 1}" for i in range(spec.D)]
    cols = rcols + ["block", "value", "quad_error"]
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.stencil:
            res = composite_correlator(spec, args.stencil, range(args.rmin, args.rmax + 1), _quad(args))
            for r, v, e in zip(res.r, res.values, res.errors):
                rows.append([int(r)] + [0] * (spec.D - 1) + [args.stencil, v, e])
        else:
            cm = real_space_cm(spec, args.rmax, _quad(args))
            blocks = [b.strip() for b in args.blocks.split(",") if b.strip()]
            bands = [(a, b) for a in range(spec.d) for b in range(spec.d)]
            for r in cm.separations:
                if r[0] < args.rmin:
                    continue
                for name in blocks:
                    for bb in bands:
                        tag = name if spec.d == 1 else f"{name}[{bb[0]},{bb[1]}]"
                        v = cm.correlator(name, r, bb)
                        i, j = {"x": 0, "p": spec.d}[name[0]] + bb[0], {"x": 0, "p": spec.d}[name[1]] + bb[1]
                        err = 0.5 * float(cm.errors[cm._index[r]][i, j])
                        rows.append([*r, tag, v, err])
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    Output(args, "correlations").write(cols, rows, spec_to_dict(spec), params, label)
    return EXIT_OK


def cmd_entanglement(args) -> int:
    spec, params, label = load_spec(args)
    Ns = _int_list(args.N, "--N")
    sizes = _int_list(args.B, "--B") if args.B else None
    rows = []
    for N in Ns:
        cm = finite_cm(spec, N)
        for B in sizes or [len(bisection(N))]:
            if not 0 < B < N:
                raise ConfigError(f"region size {B} must lie strictly between 0 and N={N}")
            res = entanglement(cm, range(B))
            rows.append([N, B, res.entropy, res.log_negativity, cm.purity_residual()])
    cols = ["N", "B", "entropy", "log_negativity", "purity_residual"]
    Output(args, "entanglement").write(cols, rows, spec_to_dict(spec), params, label)
    return EXIT_OK


def _parse_scan(text: str) -> dict[str, np.ndarray]:
    out = {}
    for part in text.split(","):
        try:
            name, rng = part.split("=")
            lo, hi, n = rng.split(":")
            out[name.strip()] = np.linspace(float(lo), float(hi), int(n))
        except ValueError:
            raise ConfigError(f"bad --scan item {part!r}; expected name=from:to:steps") from None
    return out


def cmd_qmt(args) -> int:
    fam, base, label = model_family(args)
    if not base:
        raise ConfigError("qmt needs a parametrized built-in model")
    if args.scan:
        grid = _parse_scan(args.scan)
        names = list(grid)
        pair = tuple(args.pair.split(",")) if args.pair else (names[0], names[-1])
        for n in (*names, *pair):
            if n not in model_parameters(label):
                raise ConfigError(f"model {label!r} has no parameter {n!r}")
        fixed = {k: v for k, v in base.items() if k not in grid}
        rows = qmt_divergence_scan(fam, grid, [args.k], pair, args.h, args.threshold, fixed)
        cols = [*names, "k", "g", "divergent"]
        Output(args, "qmt").write(cols, [[r[c] for c in cols] for r in rows], None, base, label)
        return EXIT_OK
    names = tuple(args.wrt.split(",")) if args.wrt else tuple(base)
    for n in names:
        if n not in base:
            raise ConfigError(f"parameter {n!r} is not set")
    res = qmt(fam, base, [args.k], args.h, names=names)
    rows = [[mu, nu, res.g_LR[i, j], res.chi[i, j].real, res.chi[i, j].imag]
            for i, mu in enumerate(names) for j, nu in enumerate(names)]
    Output(args, "qmt").write(["mu", "nu", "g", "chi_re", "chi_im"], rows,
                              spec_to_dict(fam(**base)), base, label)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verification_suite(N_values=tuple(_int_list(args.N, "--N")))
    rows = [[c.name, c.model, c.N, c.value, c.threshold, "PASS" if c.passed else "FAIL"] for c in checks]
    Output(args, "verify").write(["check", "model", "N", "value", "threshold", "result"], rows)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


# --------------------------------------------------------------------------
# sweeps


def _sweep_axes(args) -> list[tuple[str, np.ndarray]]:
    if args.values is not None:
        if args.param and len(args.param) > 1:
            raise ConfigError("--values applies to single-parameter sweeps")
        name = args.param[0] if args.param else "t"
        vals = np.asarray(_float_list(args.values, "--values"))
        if len(vals) == 0:
            raise ConfigError("--values is empty")
        return [(name, vals)]
    names = args.param or (["t"] if args.path else [])
    if not names:
        raise ConfigError("sweep needs --param (or --path with --from/--to/--steps)")
    if len(names) > 2:
        raise ConfigError("sweep iterates one or two parameters")
    lo, hi, st = args.lo or [], args.hi or [], args.steps or []
    if not (len(lo) == len(hi) == len(st) == len(names)):
        raise ConfigError("each --param needs its own --from, --to and --steps")
    axes = []
    for n, a, b, s in zip(names, lo, hi, st):
        if s < 1:
            raise ConfigError(f"--steps for {n!r} must be at least 1")
        axes.append((n, np.linspace(a, b, s)))
    return axes


def _row_names(q: str) -> list[str]:
    return ["gap_direct", "gap_indirect"] if q == "gap" else [q]


def _sweep_point(make_spec, point: dict, emit: Sequence[str], args) -> list[tuple[str, object, str]]:
    """(quantity, value, status) rows for one sweep point."""
    out = []
    try:
        spec = make_spec(point)
    except KreinError as e:
        return [(n, math.nan, f"error: {e}") for q in emit if q != "z" for n in _row_names(q)]
    grid = grid_for(spec, args.grid)
    cache = {}

    def gap():
        if "gap" not in cache:
            cache["gap"] = krein_gap(spec, grid)
        return cache["gap"]

    def cm():
        if "cm" not in cache:
            cache["cm"] = finite_cm(spec, args.N)
        return cache["cm"]

    def one(q):
        if q == "gap":
            g = gap()
            return [("gap_direct", g.direct), ("gap_indirect", g.indirect)]
        if q == "stable":
            return [("stable", gap().stable)]
        if q == "thermo":
            return [("thermo", stability_report(spec, grid).thermo)]
        if q == "energy":
            return [("energy", qpv_energy_density(spec, grid))]
        if q == "ee":
            return [("ee", entanglement(cm(), bisection(args.N)).entropy)]
        if q == "logneg":
            return [("logneg", entanglement(cm(), bisection(args.N)).log_negativity)]
        if q == "kpr":
            bd = band_data(spec, grid.points)
            return [("kpr", float(np.min(bd.kpr)))]
        if q == "xi":
            w = (args.fit_from, args.fit_to)
            c = real_space_cm(spec, w[1], QuadratureSettings(mode="trapezoid"))
            return [("xi", max(correlation_length(c, b, w, prefactor="power").xi for b in ("xx", "pp")))]
        raise ConfigError(f"unknown quantity {q!r}")

    for q in emit:
        if q == "z":
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                out.extend((name, v, "ok") for name, v in one(q))
        except (NumericalFailure, InstabilityError) as e:
            out.extend((n, math.nan, f"{type(e).__name__}: {e}") for n in _row_names(q))
    return out


def _read_existing(path: Path, pcols: list[str]) -> dict[tuple, list[list[str]]]:
    done: dict[tuple, list[list[str]]] = {}
    with path.open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None:
            return done
        if header[: len(pcols)] != pcols:
            raise ConfigError(f"cannot resume: {path} has columns {header}, expected {pcols} first")
        for row in rd:
            done.setdefault(tuple(row[: len(pcols)]), []).append(row)
    return done


def cmd_sweep(args) -> int:
    emit = [q.strip() for q in args.emit.split(",") if q.strip()]
    for q in emit:
        if q not in SWEEP_QUANTITIES:
            raise ConfigError(f"unknown --emit quantity {q!r}; choose from {list(SWEEP_QUANTITIES)}")
    axes = _sweep_axes(args)
    fam, base, label = model_family(args)
    names = [n for n, _ in axes]
    if args.path:
        exprs = {}
        for item in args.path.split(","):
            try:
                k, v = item.split("=")
            except ValueError:
                raise ConfigError(f"bad --path item {item!r}; expected name=expression") from None
            exprs[k.strip()] = path_expression(v)
        if names != ["t"]:
            raise ConfigError("--path sweeps run over t; do not combine with --param")

        def make_spec(pt):
            return fam(**{**base, **{k: f(pt["t"]) for k, f in exprs.items()}})
    else:
        if "z" in emit:
            raise ConfigError("the dynamic exponent z needs a --path")
        valid = model_parameters(label) if label in MODELS else ()
        for n in names:
            if n not in valid:
                raise ConfigError(f"model {label!r} has no sweepable parameter {n!r}")

        def make_spec(pt):
            return fam(**{**base, **pt})

    if label in MODELS:
        given = set(base) | (set(exprs) if args.path else set(names))
        missing = [n for n in model_parameters(label) if n not in given]
        if missing:
            raise ConfigError(f"model {label!r} is missing parameter(s) {missing}")

    mesh = np.meshgrid(*[v for _, v in axes], indexing="ij")
    points = [dict(zip(names, map(float, vals))) for vals in zip(*(m.ravel() for m in mesh))]
    cols = names + ["quantity", "value", "status"]

    if args.resume and (not args.out or args.format != "csv"):
        raise ConfigError("--resume needs --out with --format csv")
    done: dict[tuple, list[list[str]]] = {}
    if args.resume and Path(args.out).exists():
        done = _read_existing(Path(args.out), names)
    n_emit_rows = sum(len(_row_names(q)) for q in emit if q != "z")

    def key(pt):
        return tuple(fmt(pt[n]) for n in names)

    def is_done(pt):
        return len(done.get(key(pt), [])) >= n_emit_rows

    todo = [pt for pt in points if not is_done(pt)]
    threads = args.threads or _threads_default()
    results: dict[tuple, list] = {}

    sink = None
    if args.out and args.format == "csv":
        sink = Path(args.out).open("w", newline="")
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(cols)
    all_rows: list[list] = []
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            it = iter(pool.map(lambda pt: _sweep_point(make_spec, pt, emit, args), todo))
            for pt in points:
                if is_done(pt):
                    rows = done[key(pt)][:n_emit_rows]
                    all_rows.extend(rows)
                    if sink:
                        w.writerows(rows)
                else:
                    res = next(it)
                    results[key(pt)] = res
                    rows = [[pt[n] for n in names] + [q, v, s] for q, v, s in res]
                    all_rows.extend(rows)
                    if sink:
                        w.writerows([fmt(c) for c in r] for r in rows)
                if sink:
                    sink.flush()
        extra = {}
        if "z" in emit:
            ts = [pt["t"] for pt in points]
            de = dynamic_exponent(lambda t: make_spec({"t": t}), ts,
                                  fit_window=(args.fit_from, args.fit_to))
            zrow = [None, "z", de.z, "ok" if not de.dropped else f"dropped {len(de.dropped)} point(s)"]
            all_rows.append(zrow)
            if sink:
                w.writerow([fmt(c) for c in zrow])
            extra = {"z_points": {"t": de.t, "gap": de.gaps, "xi": de.xis}}
    finally:
        if sink:
            sink.close()

    out = Output(args, "sweep")
    out.extra = {"sweep": {n: v for n, v in axes}, "emit": emit, "resumed_points": len(points) - len(todo), **extra}
    if sink:
        spec_doc = None if args.path or label in MODELS else spec_to_dict(fam(**base))
        out.write_manifest(out.manifest(spec_doc, base, label, len(all_rows)))
    else:
        out.write(cols, all_rows, None, base, label)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help=f"built-in model {sorted(MODELS)} or a JSON model file")
    for p in PARAM_FLAGS:
        common.add_argument(f"--{p}", type=float, default=None, metavar="X")
    common.add_argument("--grid", type=int, default=None, help="odd Brillouin-zone points per axis")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")

    io_only = argparse.ArgumentParser(add_help=False)
    io_only.add_argument("--format", choices=("csv", "json"), default="csv")
    io_only.add_argument("--out", default=None)
    io_only.add_argument("--manifest", default=None)

    ap = argparse.ArgumentParser(prog="kreinqbh", description="Krein stability and QPV correlations of QBHs")
    ap.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability", parents=[common], help="dynamical and thermodynamic stability report")
    p.set_defaults(func=cmd_stability)
    p = sub.add_parser("bands", parents=[common], help="band energies, Krein signatures and KPR")
    p.set_defaults(func=cmd_bands)
    p = sub.add_parser("gap", parents=[common], help="direct and indirect Krein gap")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("correlations", parents=[common], help="real-space QPV correlators")
    p.add_argument("--rmax", type=int, default=20)
    p.add_argument("--rmin", type=int, default=0)
    p.add_argument("--blocks", default="xx,pp,xp")
    p.add_argument("--stencil", default=None, help='composite observable, e.g. "x@0+p@1"')
    p.add_argument("--quadrature", choices=("auto", "trapezoid", "adaptive"), default="auto")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_correlations)

    p = sub.add_parser("entanglement", parents=[common], help="entropy and log negativity on a ring")
    p.add_argument("--N", default="64", help="ring sizes, comma separated")
    p.add_argument("--B", default=None, help="region sizes (default N/2)")
    p.set_defaults(func=cmd_entanglement)

    p = sub.add_parser("qmt", parents=[common], help="quantum metric over model parameters")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--wrt", default=None, help="parameters to differentiate (default all)")
    p.add_argument("--h", type=float, default=1e-5, help="relative finite-difference step")
    p.add_argument("--scan", default=None, help="divergence scan, e.g. Omega1=0.05:1:20,Omega2=0.05:1:20")
    p.add_argument("--pair", default=None, help="component for --scan, e.g. Omega1,Omega2")
    p.add_argument("--threshold", type=float, default=1e6)
    p.set_defaults(func=cmd_qmt)

    p = sub.add_parser("sweep", parents=[common], help="long-format parameter sweep")
    p.add_argument("--param", action="append", help="swept parameter (repeat for a 2-D sweep)")
    p.add_argument("--from", dest="lo", type=float, action="append")
    p.add_argument("--to", dest="hi", type=float, action="append")
    p.add_argument("--steps", type=int, action="append")
    p.add_argument("--values", default=None, help="explicit comma-separated values for one parameter")
    p.add_argument("--path", default=None, help="parameters as expressions in t, e.g. Omega1=t**2,Omega2=t")
    p.add_argument("--emit", default="gap", help=f"comma-separated subset of {','.join(SWEEP_QUANTITIES)}")
    p.add_argument("--N", type=int, default=64, help="ring size for ee/logneg")
    p.add_argument("--fit-from", type=int, default=5)
    p.add_argument("--fit-to", type=int, default=40)
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--resume", action="store_true", help="keep completed points of an existing --out file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[io_only], help="run the finite-ring cross-checks")
    p.add_argument("--all", action="store_true", help="run every check (the default)")
    p.add_argument("--N", default="8,16,64")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = ap.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except InstabilityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except KreinError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
