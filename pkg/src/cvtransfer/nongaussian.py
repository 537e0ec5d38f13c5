"""Photon-subtracted resources and their comparison with Gaussian ones."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .errors import CutoffError, DomainError, ParameterError
from .fock_oracle import FockTwoModeState, photon_subtract_fock, second_moments
from .gamma_engine import Cutoffs, GammaTable, build_table
from .gaussian_core import make_tmsv, random_resource, to_standard_form, von_neumann_entropy
from .results import ResultTable
from .transfer import default_tau_grid, transfer_curve

MODES = ("formal", "physical")


@dataclass(frozen=True)
class SubtractionSpec:
    """How many photons to remove from each mode, and by which model."""

    s: int = 1
    mode: str = "formal"
    transmittivity: float = 0.9999

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 0:
            raise ParameterError(f"s must be a non-negative integer, got {self.s!r}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "physical" and not 0.0 < self.transmittivity < 1.0:
            raise ParameterError("physical subtraction needs 0 < transmittivity < 1")

    def apply(self, table):
        if self.mode == "formal":
            return formal_subtract(table, self.s)
        return physical_subtract(table, self.transmittivity, self.s)


def _log_fall(n, s):
    """log((n+s)!/n!) elementwise."""
    n = np.asarray(n, dtype=float)
    return gammaln(n + s + 1) - gammaln(n + 1)


def _target_cutoffs(table, s, target):
    if target is None:
        if min(table.cutoffs.n_c, table.cutoffs.m_c) < s:
            raise CutoffError(f"source cutoffs ({table.cutoffs.n_c}, {table.cutoffs.m_c}) cannot cover a shift by {s}")
        target = Cutoffs(table.cutoffs.n_c - s, table.cutoffs.m_c - s, table.cutoffs.k_c)
    if target.n_c < 0 or target.m_c < 0 or table.cutoffs.n_c < target.n_c + s or table.cutoffs.m_c < target.m_c + s:
        raise CutoffError(
            f"source cutoffs ({table.cutoffs.n_c}, {table.cutoffs.m_c}) cannot cover a shift by {s} "
            f"to ({target.n_c}, {target.m_c})"
        )
    return target


def _normalized(table, cut, fams, method):
    norm = float(fams["diag"].sum())
    if not norm > 0.0:
        raise DomainError("subtraction leaves a zero state (no photons to remove)")
    return GammaTable(None, cut, method=method, **{k: v / norm for k, v in fams.items()})


def formal_subtract(table, s, target=None):
    """Remove ``s`` photons from each mode by the index-shift map.

    ``gamma^{pq}_{nm} -> sqrt((n+s)!(m+s)!(p+s)!(q+s)!/(n!m!p!q!)) gamma^{p+s,q+s}_{n+s,m+s}``,
    followed by renormalization of the diagonal.  The result has cutoffs
    ``target`` (default: the source cutoffs minus ``s``); a source too small
    for the shift raises :class:`CutoffError`.
    """
    if int(s) != s or s < 0:
        raise ParameterError("s must be a non-negative integer")
    s = int(s)
    if s == 0 and target is None:
        return table
    cut = _target_cutoffs(table, s, target)
    n = np.arange(cut.n_c + 2)
    m = np.arange(cut.m_c + 2)
    ln = _log_fall(n, s)
    lm = _log_fall(m, s)
    sn, sm = slice(s, s + cut.n_c + 1), slice(s, s + cut.m_c + 1)
    a, b = ln[:-1], lm[:-1]  # weights at n, m
    a1, b1 = ln[1:], lm[1:]  # weights at n+1, m+1

    def w(x, y):
        return np.exp(x[:, None] + y[None, :])

    fams = {
        "diag": w(a, b) * table.diag[sn, sm],
        "ge": w(a, b1) * table.ge[sn, sm],
        "eg": w(a1, b) * table.eg[sn, sm],
        "ggee": w(0.5 * (a + a1), 0.5 * (b + b1)) * table.ggee[sn, sm],
        "geeg": w(0.5 * (a + a1), 0.5 * (b1 + b)) * table.geeg[sn, sm],
    }
    return _normalized(table, cut, fams, table.method)


def _physical_once(table, T):
    cut = _target_cutoffs(table, 1, None)
    n = np.arange(cut.n_c + 2, dtype=float)
    m = np.arange(cut.m_c + 2, dtype=float)
    # each index i contributes sqrt(T^i (i+1)) to the weight
    ln = 0.5 * (n * math.log(T) + np.log(n + 1))
    lm = 0.5 * (m * math.log(T) + np.log(m + 1))
    a, b, a1, b1 = ln[:-1], lm[:-1], ln[1:], lm[1:]

    def w(x, y):
        return np.exp(x[:, None] + y[None, :])

    sn, sm = slice(1, cut.n_c + 2), slice(1, cut.m_c + 2)
    fams = {
        "diag": w(2 * a, 2 * b) * table.diag[sn, sm],
        "ge": w(2 * a, 2 * b1) * table.ge[sn, sm],
        "eg": w(2 * a1, 2 * b) * table.eg[sn, sm],
        "ggee": w(a + a1, b + b1) * table.ggee[sn, sm],
        "geeg": w(a + a1, b1 + b) * table.geeg[sn, sm],
    }
    return _normalized(table, cut, fams, table.method)


def physical_subtract(table, T, s=1):
    """Photon subtraction by a beam splitter of transmittivity ``T`` and a detector click.

    One stage maps ``gamma^{pq}_{nm}`` to a multiple of
    ``T^{(n+m+p+q)/2} sqrt((n+1)(m+1)(p+1)(q+1)) gamma^{p+1,q+1}_{n+1,m+1}``;
    the result is normalized by its computed trace.  ``s > 1`` cascades
    ``s`` stages.
    """
    if not 0.0 < T < 1.0:
        raise ParameterError("transmittivity must lie strictly between 0 and 1")
    if int(s) != s or s < 0:
        raise ParameterError("s must be a non-negative integer")
    out = table
    for _ in range(int(s)):
        out = _physical_once(out, T)
    return out


def subtraction_cutoffs(sf, s, tol=1e-10):
    """Source cutoffs for a resource that will lose ``s`` photons per mode.

    The Fock range is chosen for populations weighted by ``((n+s)!/n!)^2``,
    the worst case reached when both modes are perfectly correlated, and
    then widened by ``s`` to make room for the shift.
    """
    return Cutoffs.auto(sf, tol=tol, extra=s, weight_power=2 * s)


def subtracted_tmsv_table(zeta, s, method="series", tol=1e-10):
    """Table of the ``s``-photon-subtracted squeezed vacuum via the covariance pipeline."""
    sf = make_tmsv(zeta)
    src = build_table(sf, subtraction_cutoffs(sf, s, tol), method=method)
    return formal_subtract(src, s)


def _subtracted_truncation(zeta, s, tail=1e-15):
    # The tail is measured on the amplitudes rather than the probabilities,
    # because Schmidt-coefficient sums (log-negativity) converge more slowly.
    t = math.tanh(abs(zeta))
    if t == 0.0:
        return s + 2
    n = np.arange(200000)
    logp = (gammaln(n + s + 1) - gammaln(n + 1)) + n * math.log(t)
    p = np.exp(logp - logp.max())
    cum = np.cumsum(p[::-1])[::-1] / p.sum()
    return int(np.nonzero(cum < tail)[0][0]) + s + 2


def subtracted_tmsv_fock(zeta, s, N_F=None):
    """Fock-space ``s``-photon-subtracted squeezed vacuum (oracle path)."""
    N = _subtracted_truncation(zeta, s) if N_F is None else int(N_F)
    # the subtraction itself is what may be truncated; skip the plain tail check
    t = math.tanh(abs(zeta))
    n = np.arange(N + 1)
    with np.errstate(divide="ignore"):
        logc = np.where(n == 0, 0.0, n * math.log(t) if t > 0 else -np.inf)
    c = np.exp(logc - logc.max())
    return photon_subtract_fock(FockTwoModeState(amplitudes=np.diag(c)), s)


def gaussian_equivalent_cm(zeta, s, N_F=None):
    """Standard form sharing the second moments of the ``s``-photon-subtracted squeezed vacuum."""
    if int(s) != s or s < 0:
        raise ParameterError("s must be a non-negative integer")
    if s == 0:
        return make_tmsv(zeta)
    if zeta == 0:
        raise DomainError("no photons to subtract from the vacuum")
    state = subtracted_tmsv_fock(zeta, int(s), N_F)
    cm = second_moments(state)
    sf, _ = to_standard_form(cm)
    return sf


def non_gaussianity(zeta, s, N_F=None):
    """Von Neumann entropy (nats) of the Gaussian-equivalent state."""
    return von_neumann_entropy(gaussian_equivalent_cm(zeta, s, N_F).matrix())


def max_transfer(table, tau_window=(0.0, 2.0 * math.pi), resolution=400, signed=True):
    """Largest negativity over ``tau_window``.

    A uniform grid of ``resolution`` points locates the best cell, then a
    golden-section search refines inside the neighbouring cells.
    """
    lo, hi = map(float, tau_window)
    if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo < hi):
        raise ParameterError(f"invalid tau window {tau_window!r}")
    if resolution < 3:
        raise ParameterError("resolution must be at least 3")
    grid = np.linspace(lo, hi, int(resolution))
    neg = transfer_curve(table, grid, signed=signed).negativity
    i = int(np.argmax(neg))
    best = float(neg[i])
    if best == 0.0:
        return 0.0

    def f(t):
        t = min(max(t, lo), hi)
        return -float(transfer_curve(table, [t], signed=signed).negativity[0])

    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if 0 < i < grid.size - 1:
        t_opt = optimize.golden(f, brack=(a, grid[i], b), tol=1e-10)
    else:
        t_opt = optimize.minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-10}).x
    return max(best, -f(t_opt))


def _curves_for_zeta(zeta, s, taus, signed, tol):
    sf = make_tmsv(zeta)
    if sf.m_plus == 0.0:
        # nothing can be subtracted from the vacuum; both resources transfer nothing
        zero = np.zeros_like(taus)
        return zero, zero
    src = build_table(sf, subtraction_cutoffs(sf, s, tol), method="series")
    gauss = transfer_curve(src, taus, signed=signed).negativity
    nong = transfer_curve(formal_subtract(src, s), taus, signed=signed).negativity
    return gauss, nong


def degauss_difference(zeta_grid, tau_grid=None, s=1, signed=True, tol=1e-10):
    """Long-format table of ``E_Gauss - E_nonGauss`` over a (zeta, tau) grid.

    Columns ``zeta, tau, value``; the two curves for each zeta are also kept
    as ``gauss`` and ``nongauss``.  At ``zeta = 0`` both resources are the
    vacuum and the difference is zero.
    """
    taus = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    zetas = np.asarray(zeta_grid, dtype=float)
    if zetas.size == 0 or taus.size == 0:
        raise ParameterError("grids must be nonempty")
    cols = {"zeta": [], "tau": [], "value": [], "gauss": [], "nongauss": []}
    for z in zetas:
        g, ng = _curves_for_zeta(float(z), s, taus, signed, tol)
        cols["zeta"].append(np.full(taus.size, z))
        cols["tau"].append(taus)
        cols["value"].append(g - ng)
        cols["gauss"].append(g)
        cols["nongauss"].append(ng)
    data = {k: np.concatenate(v) for k, v in cols.items()}
    return ResultTable(data, {"kind": "degauss-diff", "s": int(s), "signed": bool(signed), "tol": tol})


def random_max_scan(seed=0, count=22, s_values=range(5), resolution=400, signed=True, tol=1e-10):
    """Maximum transferred negativity for random resources after ``s`` subtractions.

    Columns ``resource, s, max_negativity``.
    """
    rng = np.random.default_rng(seed)
    cols = {"resource": [], "s": [], "max_negativity": []}
    s_values = list(s_values)
    for idx in range(count):
        sf, _ = to_standard_form(random_resource(rng))
        smax = max(s_values)
        src = build_table(sf, subtraction_cutoffs(sf, smax, tol), method="series")
        for s in s_values:
            tab = formal_subtract(src, s) if s else src
            cols["resource"].append(idx)
            cols["s"].append(s)
            cols["max_negativity"].append(max_transfer(tab, resolution=resolution, signed=signed))
    return ResultTable(cols, {"kind": "random-max-scan", "seed": seed, "count": count})
