"""Deterministic parameter sweeps and the dual-path oracle check.

Each sweep is described by an :class:`ExperimentSpec`; :func:`run` evaluates
its grid points (in a process pool when more than one worker is allowed),
gathers them in grid order and returns a :class:`ResultTable`.  The worker
count comes from the ``CVTRANSFER_WORKERS`` environment variable and
defaults to the number of available CPUs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import svg
from .errors import ParameterError, TransferError
from .fock_oracle import gamma_oracle, jc_evolve_trace, tmsv_fock
from .gamma_engine import Cutoffs, build_table, quadrature_coherences, series_families
from .gaussian_core import (
    ResourceParams,
    dissipate,
    make_squeezed_thermal_bs,
    make_tmsv,
    random_resource,
    to_standard_form,
)
from .nongaussian import (
    SubtractionSpec,
    degauss_difference,
    formal_subtract,
    random_max_scan,
    subtracted_tmsv_fock,
    subtraction_cutoffs,
)
from .results import ResultTable
from .transfer import default_tau_grid, negativity, transfer_curve

KINDS = (
    "normalization-scan",
    "transfer",
    "thermal-surface",
    "dissipation-surface",
    "degauss-diff",
    "random-max-scan",
    "oracle-check",
)

WORKERS_ENV = "CVTRANSFER_WORKERS"

#: Default grids, keyed by parameter name.
DEFAULT_GRIDS = {
    "zeta": np.linspace(0.0, 2.0, 80),
    "nbar": np.linspace(0.0, 3.0, 60),
    "gamma_t": np.linspace(0.0, 0.6, 60),
}


def worker_count():
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
        return max(n, 1)
    try:
        return max(len(os.sched_getaffinity(0)), 1)
    except AttributeError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: its kind, parameter grids and numerical settings.

    ``grids`` maps parameter names (``zeta``, ``nbar``, ``gamma_t``) to
    sequences; scalar settings go in ``params`` (``bigN``, ``s``,
    ``transmittivity``, ``count``, ``method``...).  ``cutoffs`` is a
    :class:`Cutoffs` or ``"auto"``.  ``output`` is a path prefix; when set,
    :func:`run` writes ``<output>.csv`` (and ``<output>.svg`` if ``svg``).
    """

    kind: str
    grids: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    cutoffs: object = "auto"
    tau_points: int = 200
    seed: int = 0
    signed: bool = True
    output: str | None = None
    svg: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        grids = {}
        for name, values in self.grids.items():
            arr = np.atleast_1d(np.asarray(values, dtype=float))
            if arr.size == 0 or not np.all(np.isfinite(arr)):
                raise ParameterError(f"grid {name!r} must be nonempty and finite")
            grids[name] = tuple(float(v) for v in arr)
        object.__setattr__(self, "grids", grids)
        if not (self.cutoffs == "auto" or isinstance(self.cutoffs, Cutoffs)):
            raise ParameterError("cutoffs must be a Cutoffs instance or 'auto'")
        if int(self.tau_points) != self.tau_points or self.tau_points < 2:
            raise ParameterError("tau_points must be an integer >= 2")
        if self.output is not None:
            parent = os.path.dirname(os.path.abspath(self.output))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ParameterError(f"output directory {parent!r} is not writable")

    def grid(self, name):
        if name in self.grids:
            return np.asarray(self.grids[name])
        return DEFAULT_GRIDS[name]

    def param(self, name, default=None):
        return self.params.get(name, default)

    def describe(self):
        """JSON-ready description, used for the metadata hash."""
        cut = self.cutoffs if self.cutoffs == "auto" else asdict(self.cutoffs)
        return {
            "kind": self.kind,
            "grids": {k: list(v) for k, v in sorted(self.grids.items())},
            "params": dict(sorted(self.params.items())),
            "cutoffs": cut,
            "tau_points": int(self.tau_points),
            "seed": int(self.seed),
            "signed": bool(self.signed),
        }

    def spec_hash(self):
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# grid-point workers (top level so that they can be pickled)


def _cut_for(spec, sf):
    return Cutoffs.auto(sf) if spec.cutoffs == "auto" else spec.cutoffs


def _table(spec, sf, s=0):
    method = spec.param("method", "series")
    if s:
        cut = subtraction_cutoffs(sf, s) if spec.cutoffs == "auto" else spec.cutoffs.grow(s)
    else:
        cut = _cut_for(spec, sf)
    return build_table(sf, cut, method=method, eps_trunc=spec.param("eps_trunc", 0.01))


def _resource(spec, zeta, nbar=0.0, gamma_t=0.0):
    if nbar:
        cm = make_squeezed_thermal_bs(ResourceParams(s1=zeta, s2=-zeta, transmittivity=0.5, nbar1=nbar, nbar2=nbar))
    else:
        cm = make_tmsv(zeta).covariance()
    if gamma_t:
        cm = dissipate(cm, spec.param("bigN", 0.1), gamma_t)
    return to_standard_form(cm)[0]


def _point_norm(spec, zeta):
    sf = make_tmsv(zeta)
    cut = Cutoffs() if spec.cutoffs == "auto" else spec.cutoffs
    fam = series_families(sf, cut)
    return [[zeta, float(fam["diag"].sum())]]


def _point_transfer(spec, zeta, nbar, gamma_t, taus):
    sf = _resource(spec, zeta, nbar, gamma_t)
    s = int(spec.param("s", 0))
    table = _table(spec, sf, s)
    if s:
        mode = "physical" if spec.param("transmittivity") is not None else "formal"
        sub = SubtractionSpec(s, mode, spec.param("transmittivity", 0.9999))
        table = sub.apply(table)
    return transfer_curve(table, taus, signed=spec.signed).negativity


def _evaluate(args):
    kind, spec, point, taus = args
    try:
        if kind == "normalization-scan":
            return _point_norm(spec, point)
        zeta, nbar, gamma_t = point
        return _point_transfer(spec, zeta, nbar, gamma_t, taus)
    except TransferError as exc:
        raise type(exc)(f"{exc} (at grid point {point})") from exc


def _map(spec, kind, points, taus):
    jobs = [(kind, spec, p, taus) for p in points]
    workers = min(worker_count(), len(jobs))
    results = []
    try:
        if workers <= 1:
            for job in jobs:
                results.append(_evaluate(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for res in pool.map(_evaluate, jobs):
                    results.append(res)
    except TransferError as exc:
        exc.partial = results
        raise
    return results


# ---------------------------------------------------------------------------


def _metadata(spec, extra=None):
    desc = spec.describe()
    meta = {"spec_hash": spec.spec_hash(), "spec": desc, "seed": int(spec.seed), "cutoffs": desc["cutoffs"]}
    if extra:
        meta.update(extra)
    return meta


def _surface(spec, axis, points, taus):
    rows = _map(spec, "curve", points, taus)
    vals = np.asarray([p[{"zeta": 0, "nbar": 1, "gamma_t": 2}[axis]] for p in points])
    return {
        axis: np.repeat(vals, taus.size),
        "tau": np.tile(taus, len(points)),
        "negativity": np.concatenate(rows),
    }


def _write_partial(spec, exc, columns_fn):
    if spec.output is None or not getattr(exc, "partial", None):
        return
    cols = columns_fn(exc.partial)
    table = ResultTable(cols, _metadata(spec, {"partial": True, "error": str(exc)}))
    table.write(spec.output + ".csv")


def run(spec):
    """Evaluate an experiment; writes CSV (and SVG) when ``spec.output`` is set."""
    taus = default_tau_grid(spec.tau_points)
    kind = spec.kind
    figure = None
    if kind == "oracle-check":
        table = oracle_check(spec.param("tolerance", 1e-6), None if spec.cutoffs == "auto" else spec.cutoffs)
    elif kind == "normalization-scan":
        zetas = spec.grid("zeta")
        try:
            rows = _map(spec, kind, list(zetas), taus)
        except TransferError as exc:
            _write_partial(spec, exc, lambda part: {"zeta": [r[0][0] for r in part], "norm": [r[0][1] for r in part]})
            raise
        data = np.array([r[0] for r in rows])
        cut = Cutoffs() if spec.cutoffs == "auto" else spec.cutoffs
        table = ResultTable({"zeta": data[:, 0], "norm": data[:, 1]}, _metadata(spec, {"cutoffs": asdict(cut)}))
        figure = lambda: svg.line_plot(data[:, 0], {"sum of populations": data[:, 1]}, "Normalization", "zeta", "norm")
    elif kind == "transfer":
        zeta = float(spec.grid("zeta")[0]) if "zeta" in spec.grids else 0.86
        nbar = float(spec.grids.get("nbar", (0.0,))[0])
        gamma_t = float(spec.grids.get("gamma_t", (0.0,))[0])
        neg = _map(spec, "curve", [(zeta, nbar, gamma_t)], taus)[0]
        table = ResultTable({"tau": taus, "negativity": neg}, _metadata(spec))
        figure = lambda: svg.line_plot(taus, {f"zeta={zeta:g}": neg}, "Transferred entanglement", "tau", "negativity")
    elif kind in ("thermal-surface", "dissipation-surface"):
        zeta = float(spec.grids.get("zeta", (0.86,))[0])
        axis = "nbar" if kind == "thermal-surface" else "gamma_t"
        values = spec.grid(axis)
        points = [(zeta, v, 0.0) if axis == "nbar" else (zeta, 0.0, v) for v in values]
        try:
            cols = _surface(spec, axis, points, taus)
        except TransferError as exc:
            _write_partial(
                spec,
                exc,
                lambda part: {
                    axis: np.repeat(values[: len(part)], taus.size),
                    "tau": np.tile(taus, len(part)),
                    "negativity": np.concatenate(part),
                },
            )
            raise
        extra = {"zeta": zeta}
        if axis == "gamma_t":
            extra["bigN"] = spec.param("bigN", 0.1)
        table = ResultTable(cols, _metadata(spec, extra))
        figure = lambda: svg.heatmap(taus, values, cols["negativity"].reshape(len(values), taus.size),
                                     kind.replace("-", " "), "tau", axis)
    elif kind == "degauss-diff":
        s = int(spec.param("s", 1))
        zetas = spec.grid("zeta")
        table = degauss_difference(zetas, taus, s=s, signed=spec.signed)
        table.metadata.update(_metadata(spec))
        figure = lambda: svg.heatmap(taus, zetas, table["value"].reshape(zetas.size, taus.size),
                                     f"E_Gauss - E_nonGauss, s={s}", "tau", "zeta")
    elif kind == "random-max-scan":
        svals = spec.param("s_values", list(range(5)))
        table = random_max_scan(spec.seed, int(spec.param("count", 22)), svals, signed=spec.signed)
        table.metadata.update(_metadata(spec))
        m = table["max_negativity"].reshape(-1, len(svals))
        figure = lambda: svg.line_plot(svals, {f"#{i}": row for i, row in enumerate(m)}, "Maximum transfer", "s", "max negativity")
    else:  # pragma: no cover - guarded by ExperimentSpec
        raise ParameterError(kind)
    if spec.output is not None:
        table.write(spec.output + ".csv")
        if spec.svg and figure is not None:
            with open(spec.output + ".svg", "w") as fh:
                fh.write(figure())
    return table


# ---------------------------------------------------------------------------


ORACLE_CHECKS = (
    "tmsv_table_vs_fock",
    "tmsv_curve_vs_fock",
    "subtracted_curve_vs_fock_0.3",
    "subtracted_curve_vs_fock_0.86",
    "series_vs_quadrature_coherences",
)


def oracle_check(tolerance=1e-6, cutoffs=None, tau_points=200, seed=0):
    """Dual-path comparison of the covariance pipeline with the Fock oracle.

    Returns a :class:`ResultTable` with one row per check (columns ``check``,
    ``deviation``, ``tolerance``, ``passed``); names are listed in the
    ``checks`` metadata entry, and any error text under ``diagnostics``.
    """
    cut = cutoffs or Cutoffs()
    taus = default_tau_grid(tau_points)
    deviations, notes = [], {}

    def guarded(name, fn):
        try:
            deviations.append(float(fn()))
        except TransferError as exc:
            deviations.append(math.inf)
            notes[name] = f"{type(exc).__name__}: {exc}"

    zeta = 0.86
    fock = tmsv_fock(zeta)

    def table_vs_fock():
        fam = series_families(make_tmsv(zeta), cut)
        ref = gamma_oracle(fock)
        n, m = min(cut.n_c + 1, fock.truncation), min(cut.m_c + 1, fock.truncation)
        return max(float(np.abs(fam[k][:n, :m] - ref[k][:n, :m]).max()) for k in fam)

    def curve(table, state):
        ours = transfer_curve(table, taus).negativity
        ref = np.array([negativity(jc_evolve_trace(state, t)) for t in taus])
        return np.abs(ours - ref).max()

    def tmsv_curve():
        table = build_table(make_tmsv(zeta), cut, method="series", eps_trunc=math.inf)
        if table.deficit > tolerance:
            notes[ORACLE_CHECKS[1]] = f"truncation: populations sum to {table.normalization:.9f}; raise the cutoffs"
        return curve(table, fock)

    def subtracted(z):
        def fn():
            src = build_table(make_tmsv(z), cut.grow(1), method="series", eps_trunc=math.inf)
            return curve(formal_subtract(src, 1), subtracted_tmsv_fock(z, 1))

        return fn

    def coherences():
        sf = to_standard_form(random_resource(seed))[0]
        small = Cutoffs(4, 4, max(cut.k_c, Cutoffs.auto(sf).k_c))
        fam = series_families(sf, small)
        gg, ge = quadrature_coherences(sf, small, tol=tolerance)
        return max(np.abs(fam["ggee"] - gg).max(), np.abs(fam["geeg"] - ge).max())

    guarded(ORACLE_CHECKS[0], table_vs_fock)
    guarded(ORACLE_CHECKS[1], tmsv_curve)
    guarded(ORACLE_CHECKS[2], subtracted(0.3))
    guarded(ORACLE_CHECKS[3], subtracted(0.86))
    guarded(ORACLE_CHECKS[4], coherences)
    dev = np.array(deviations)
    passed = dev <= tolerance
    meta = {
        "kind": "oracle-check",
        "checks": list(ORACLE_CHECKS),
        "cutoffs": asdict(cut),
        "tolerance": tolerance,
        "seed": seed,
        "diagnostics": notes,
        "passed": bool(passed.all()),
    }
    return ResultTable(
        {"check": np.arange(len(ORACLE_CHECKS)), "deviation": dev, "tolerance": np.full(dev.size, tolerance),
         "passed": passed.astype(float)},
        meta,
    )


def report_text(table):
    """Human-readable lines for an oracle-check table."""
    names = table.metadata.get("checks", [])
    lines = []
    for i, dev, tol, ok in zip(table["check"], table["deviation"], table["tolerance"], table["passed"]):
        name = names[int(i)] if int(i) < len(names) else str(int(i))
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: worst deviation {dev:.3e} (tolerance {tol:.1e})")
    for name, msg in table.metadata.get("diagnostics", {}).items():
        lines.append(f"  {name}: {msg}")
    return lines

