"""Fock-basis coefficients of a two-mode resource from its covariance matrix.

A state in standard form is written as ``rho = sum gamma^{pq}_{nm} |n,m><p,q|``.
Only five families of coefficients enter the two-qubit state produced by
the transfer protocol:

``diag``  ``gamma^{nm}_{nm}``
``ge``    ``gamma^{n,m+1}_{n,m+1}``
``eg``    ``gamma^{n+1,m}_{n+1,m}``
``ggee``  ``gamma^{n+1,m+1}_{nm}``
``geeg``  ``gamma^{n+1,m}_{n,m+1}``

Two independent routes are provided.  The *series* route sums a convergent
series in ``k`` whose terms factor into one terminating hypergeometric
polynomial per mode.  The *quadrature* route integrates the characteristic
function against displacement matrix elements on a polar grid.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CutoffError, NumericError, ParameterError, TruncationWarning
from .gaussian_core import StandardForm
from .special import gauss_legendre, laguerre_table, meixner_table, pochhammer_ratio_coeffs

FAMILIES = ("diag", "ge", "eg", "ggee", "geeg")

#: Largest series cutoff that :meth:`Cutoffs.auto` will propose.
MAX_SERIES_CUTOFF = 200_000


@dataclass(frozen=True)
class Cutoffs:
    """Fock cutoffs ``n_c``, ``m_c`` (inclusive) and series cutoff ``k_c`` (inclusive)."""

    n_c: int = 25
    m_c: int = 25
    k_c: int = 100

    def __post_init__(self):
        for name in ("n_c", "m_c", "k_c"):
            val = getattr(self, name)
            if int(val) != val or val < 0:
                raise ParameterError(f"{name} must be a non-negative integer, got {val!r}")
            object.__setattr__(self, name, int(val))

    def grow(self, s):
        """Cutoffs enlarged by ``s`` in both Fock directions."""
        return Cutoffs(self.n_c + s, self.m_c + s, self.k_c)

    @classmethod
    def auto(cls, sf, tol=1e-10, extra=0, weight_power=0):
        """Cutoffs sized so that the neglected probability is below ``tol``.

        Each reduced state of a standard-form resource is thermal with ratio
        ``x_j = (n_j - 1)/(n_j + 1)``; the Fock cutoff is placed where the
        marginal tail, optionally weighted by ``(n+weight_power)!/n!`` as
        happens after photon subtraction, drops below ``tol``.  ``extra``
        is added afterwards (room for index shifts).  The series cutoff is
        then chosen from the geometric ratio of the k-series and confirmed
        by an explicit tail check.
        """
        sf = _check_sf(sf)
        n_c = _marginal_cutoff(sf.n1, tol, weight_power) + extra
        m_c = _marginal_cutoff(sf.n2, tol, weight_power) + extra
        rho = series_ratio(sf)
        if rho == 0.0:
            return cls(n_c, m_c, 0)
        k_c = int(math.ceil((5 * max(n_c, m_c) + 80) / -math.log(rho)))
        while True:
            tail = _series_tail(sf, n_c, m_c, k_c)
            if tail < tol:
                return cls(n_c, m_c, k_c)
            if k_c > MAX_SERIES_CUTOFF:
                raise CutoffError(f"series cutoff above {MAX_SERIES_CUTOFF} still leaves tail {tail:.3g}", achieved=tail)
            k_c = int(1.25 * k_c) + 1


def _check_sf(sf):
    if not isinstance(sf, StandardForm):
        raise ParameterError(f"expected a StandardForm, got {type(sf).__name__}")
    return sf


def _marginal_cutoff(n, tol, weight_power):
    x = (n - 1.0) / (n + 1.0)
    if x <= 0.0:
        return 0
    # tail of sum_n (n+s)!/n! x^n, normalized, evaluated in the log domain
    span = int(60 + 5 * (weight_power + 1) * math.log(1.0 / tol) / -math.log(x))
    k = np.arange(span)
    logt = gammaln(k + weight_power + 1) - gammaln(k + 1) + k * math.log(x)
    t = np.exp(logt - logt.max())
    tail = np.cumsum(t[::-1])[::-1] / t.sum()
    idx = np.nonzero(tail < tol)[0]
    if idx.size == 0:
        raise CutoffError("marginal cutoff search range exhausted")
    return int(max(idx[0] - 1, 0))


def series_ratio(sf):
    """Geometric ratio ``m_plus^2 / ((n1+1)(n2+1))`` of the k-series (< 1 for bona fide input)."""
    return sf.m_plus ** 2 / ((sf.n1 + 1.0) * (sf.n2 + 1.0))


# ---------------------------------------------------------------------------
# angular coefficients


def coeff_G(k, m_plus, m_minus):
    """Angular coefficient ``G_k`` in division-free form.

    ``G_k = (2k-1)!! / ((2k)! (2k)!!) * sum_j (1/2)_j (-k)_j / (j!)^2
    (m_-^2 - m_+^2)^j m_-^{2(k-j)}``, regular at ``m_minus = 0``.
    """
    if k < 0 or int(k) != k:
        raise ParameterError("k must be a non-negative integer")
    k = int(k)
    logc, sign = pochhammer_ratio_coeffs(k, 0.5)
    d = m_minus * m_minus - m_plus * m_plus
    j = np.arange(k + 1)
    powers = np.where(j == 0, 1.0, d) ** j * np.where(k - j == 0, 1.0, m_minus * m_minus) ** (k - j)
    poly = float(np.sum(sign * np.exp(logc) * powers))
    # (2k-1)!! / ((2k)! (2k)!!) = 1 / (4^k (k!)^2)
    return poly * math.exp(-k * math.log(4.0) - 2.0 * gammaln(k + 1))


def _legendre_weights(u, v, kmax):
    """``R_k = sum_i C(k,i)^2 u^i v^(k-i) / (sqrt(u)+sqrt(v))^(2k)`` for k = 0..kmax.

    Three-term recurrence of the Legendre polynomials, rescaled so the
    values stay of order one.
    """
    s2 = (math.sqrt(u) + math.sqrt(v)) ** 2
    out = np.empty(kmax + 1)
    out[0] = 1.0
    if kmax == 0:
        return out
    a = (u + v) / s2
    b = ((v - u) / s2) ** 2
    out[1] = a
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1) * a * out[k] - k * b * out[k - 1]) / (k + 1)
    return out


def _jacobi_weights(u, v, kmax):
    """``T_k = sum_i C(k,i) C(k+1,i) u^i v^(k-i) / (sqrt(u)+sqrt(v))^(2k)`` for k = 0..kmax.

    Three-term recurrence of the Jacobi polynomials with parameters (0, 1).
    """
    s2 = (math.sqrt(u) + math.sqrt(v)) ** 2
    out = np.empty(kmax + 1)
    out[0] = 1.0
    if kmax == 0:
        return out
    p = (v + u) / s2
    m = (v - u) / s2
    out[1] = (v + 2 * u) / s2
    for n in range(1, kmax):
        out[n + 1] = (
            ((2 * n + 3) * (2 * n + 1) * p - m) * out[n] - n * (2 * n + 3) * m * m * out[n - 1]
        ) / ((n + 2) * (2 * n + 1))
    return out


def _log_series_weights(sf, kmax):
    """Log of the k-weights of the population and the two coherence series.

    Returns ``(lw_pop, lw_ggee, lw_geeg)``; zero weights appear as ``-inf``.
    """
    q = 1.0 / ((sf.n1 + 1.0) * (sf.n2 + 1.0))
    alpha = 0.5 * (sf.m_plus + sf.m_minus)
    beta = 0.5 * (sf.m_plus - sf.m_minus)
    k = np.arange(kmax + 1, dtype=float)
    ninf = np.full(kmax + 1, -np.inf)
    rho = sf.m_plus ** 2 * q
    if 0.25 * rho == 0.0:
        # uncorrelated (or correlations below the double range): only k = 0 survives
        lw_pop = ninf.copy()
        lw_pop[0] = math.log(4.0 * q)
        return lw_pop, ninf, ninf.copy()
    geo = k * math.log(rho)
    u, v = alpha * alpha, beta * beta
    with np.errstate(divide="ignore"):
        lw_pop = math.log(4.0 * q) + geo + np.log(_legendre_weights(u, v, kmax))
        base = math.log(8.0 * q * q) + np.log(k + 1.0) + geo
        lw_ggee = base + (math.log(beta) if beta > 0 else -np.inf) + np.log(_jacobi_weights(u, v, kmax))
        lw_geeg = base + (math.log(alpha) if alpha > 0 else -np.inf) + np.log(_jacobi_weights(v, u, kmax))
    return lw_pop, lw_ggee, lw_geeg


def _z(n):
    return 2.0 / (n + 1.0)


def _mode_tables(sf, nmax, mmax, kmax, b, lw):
    """Scaled Meixner tables of both modes; the second is reused for symmetric resources."""
    f1 = meixner_table(max(nmax, mmax) if sf.n1 == sf.n2 else nmax, kmax, _z(sf.n1), b=b, log_scale=0.5 * lw)
    if sf.n1 == sf.n2:
        return f1[: nmax + 1], f1[: mmax + 1]
    return f1, meixner_table(mmax, kmax, _z(sf.n2), b=b, log_scale=0.5 * lw)


def _series_tail(sf, n_c, m_c, k_c):
    """Bound on any table entry carried by the last quarter of the k-series.

    Cauchy-Schwarz over k on the weighted tables; no matrix product needed.
    """
    k0 = (3 * k_c) // 4
    worst = 0.0
    for b, lw in zip((1, 2, 2), _log_series_weights(sf, k_c)):
        lw = lw.copy()
        lw[:k0] = -np.inf
        f1, f2 = _mode_tables(sf, n_c + 1, m_c + 1, k_c, b, lw)
        norm1 = np.sqrt(np.einsum("nk,nk->n", f1, f1)).max()
        norm2 = np.sqrt(np.einsum("nk,nk->n", f2, f2)).max()
        worst = max(worst, float(norm1 * norm2) * (n_c + 2))
    return worst


def _weighted_product(f1, f2, rel):
    """``f1 diag(exp(rel)) f2^T``, skipping columns with zero weight."""
    keep = np.isfinite(rel)
    if not keep.any():
        return np.zeros((f1.shape[0], f2.shape[0]))
    return (f1[:, keep] * np.exp(rel[keep])) @ f2[:, keep].T


@functools.lru_cache(maxsize=64)
def _series_families_cached(key, n_c, m_c, k_c):
    sf = StandardForm(*key)
    lw_pop, lw_gg, lw_ge = _log_series_weights(sf, k_c)
    f1, f2 = _mode_tables(sf, n_c + 1, m_c + 1, k_c, 1, lw_pop)
    pop = f1 @ f2.T
    top = np.maximum(lw_gg, lw_ge)
    finite = np.isfinite(top)
    scale = np.where(finite, top, -np.inf)
    g1, g2 = _mode_tables(sf, n_c, m_c, k_c, 2, scale)
    with np.errstate(invalid="ignore"):
        rel_gg = np.where(finite, lw_gg - top, -np.inf)
        rel_ge = np.where(finite, lw_ge - top, -np.inf)
    roots = np.outer(np.sqrt(np.arange(1, n_c + 2.0)), np.sqrt(np.arange(1, m_c + 2.0)))
    out = {
        "diag": pop[: n_c + 1, : m_c + 1],
        "ge": pop[: n_c + 1, 1 : m_c + 2],
        "eg": pop[1 : n_c + 2, : m_c + 1],
        "ggee": _weighted_product(g1, g2, rel_gg) * roots,
        "geeg": _weighted_product(g1, g2, rel_ge) * roots,
    }
    for arr in out.values():
        arr.setflags(write=False)
    return out


def series_families(sf, cut):
    """All five coefficient families from the k-series, as read-only arrays."""
    sf = _check_sf(sf)
    return _series_families_cached(sf.key(), cut.n_c, cut.m_c, cut.k_c)


def _check_index(n, m, cut):
    if n < 0 or m < 0:
        raise ParameterError("Fock indices must be non-negative")
    if n > cut.n_c or m > cut.m_c:
        raise ParameterError(f"index ({n}, {m}) exceeds cutoffs ({cut.n_c}, {cut.m_c})")


def gamma_diag(n, m, sf, cut=None):
    """Population ``gamma^{nm}_{nm}`` from the k-truncated series."""
    cut = cut or Cutoffs()
    _check_index(n, m, cut)
    return float(series_families(sf, cut)["diag"][n, m])


def gamma_ge(n, m, sf, cut=None):
    """Population ``gamma^{n,m+1}_{n,m+1}`` from the k-truncated series."""
    cut = cut or Cutoffs()
    _check_index(n, m, cut)
    return float(series_families(sf, cut)["ge"][n, m])


def gamma_eg(n, m, sf, cut=None):
    """Population ``gamma^{n+1,m}_{n+1,m}`` from the k-truncated series."""
    cut = cut or Cutoffs()
    _check_index(n, m, cut)
    return float(series_families(sf, cut)["eg"][n, m])


def gamma_ggee(n, m, sf, cut=None, method="quadrature", tol=1e-8):
    """Coherence ``gamma^{n+1,m+1}_{nm}``.

    ``method="quadrature"`` integrates the characteristic function directly;
    ``method="series"`` uses the k-series (validated against quadrature in
    the test suite).
    """
    cut = cut or Cutoffs()
    _check_index(n, m, cut)
    if method == "series":
        return float(series_families(sf, cut)["ggee"][n, m])
    if method == "quadrature":
        return gamma_quadrature(n, m, n + 1, m + 1, sf, tol=tol)
    raise ParameterError(f"unknown method {method!r}")


def gamma_geeg(n, m, sf, cut=None, method="quadrature", tol=1e-8):
    """Coherence ``gamma^{n+1,m}_{n,m+1}``; see :func:`gamma_ggee` for ``method``."""
    cut = cut or Cutoffs()
    _check_index(n, m, cut)
    if method == "series":
        return float(series_families(sf, cut)["geeg"][n, m])
    if method == "quadrature":
        return gamma_quadrature(n, m + 1, n + 1, m, sf, tol=tol)
    raise ParameterError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# quadrature route


def f_np(n, p, xi):
    """Displacement matrix element ``<n| D(xi) |p>``.

    ``sqrt(p!/n!) (-xi)^(n-p) exp(-|xi|^2/2) L_p^(n-p)(|xi|^2)`` for ``n >= p``
    and ``sqrt(n!/p!) conj(xi)^(p-n) exp(-|xi|^2/2) L_n^(p-n)(|xi|^2)`` otherwise.
    """
    if n < 0 or p < 0:
        raise ParameterError("Fock indices must be non-negative")
    xi = np.asarray(xi, dtype=complex)
    r = np.abs(xi)
    radial = _radial(n, p, r)
    phase = np.exp(1j * (n - p) * np.angle(xi))
    out = radial * phase
    return out if out.ndim else complex(out)


def _radial(n, p, r):
    """Radial factor ``R_np(r)`` with ``f_np(r e^{i phi}) = R_np(r) e^{i(n-p) phi}``."""
    d = n - p
    lo = min(n, p)
    lag = laguerre_table(lo, abs(d), np.asarray(r, dtype=float) ** 2)[lo]
    lognorm = 0.5 * (gammaln(lo + 1) - gammaln(lo + abs(d) + 1))
    base = -r if d > 0 else r
    return math.exp(lognorm) * base ** abs(d) * lag


def _radial_rows(rows, shift, r):
    """Stack of ``R_{a, a+shift}(r)`` for each a in ``rows``."""
    return np.array([_radial(a, a + shift, r) for a in rows])


def _rmax(nmax):
    return 2.0 * math.sqrt(nmax + 2.0) + 9.0


class _PolarGrid:
    """Angular harmonics of the characteristic function on a polar grid.

    For radial nodes ``r_i`` and ``s_j`` the matrix ``H_d[i, j]`` holds the
    integral over both angles of ``chi(r_i e^{i phi}, s_j e^{i theta})
    e^{i(d1 phi + d2 theta)}``, evaluated by the periodic trapezoid rule.
    The Gaussian envelope is folded into the exponent so nothing overflows.
    """

    def __init__(self, sf, nmax, n_ang, n_rad, harmonics):
        self.r, self.w = gauss_legendre(n_rad, 0.0, _rmax(nmax))
        ang = 2.0 * math.pi * np.arange(n_ang) / n_ang
        phi, theta = np.meshgrid(ang, ang, indexing="ij")
        g = -(sf.m_minus * np.cos(phi) * np.cos(theta) + sf.m_plus * np.sin(phi) * np.sin(theta))
        harmonics = list(harmonics)
        scale = (2.0 * math.pi / n_ang) ** 2
        # cos and sin parts of every harmonic side by side, so one real
        # matrix product per radial node projects all of them
        waves = np.stack([np.exp(1j * (d[0] * phi + d[1] * theta)).ravel() * scale for d in harmonics], axis=1)
        basis = np.concatenate([waves.real, waves.imag], axis=1)
        g = g.ravel()
        acc = np.empty((n_rad, n_rad, basis.shape[1]))
        for i, ri in enumerate(self.r):
            expo = np.outer(ri * self.r, g) - 0.5 * (sf.n1 * ri * ri + sf.n2 * self.r[:, None] ** 2)
            acc[i] = np.exp(expo) @ basis
        nh = len(harmonics)
        self.h = {d: acc[:, :, j] + 1j * acc[:, :, nh + j] for j, d in enumerate(harmonics)}

    def integrate(self, d, rad1, rad2):
        """``(1/pi^2) sum_ij w_i r_i rad1[:, i] H_d[i, j] w_j r_j rad2[:, j]``."""
        wr = self.w * self.r
        return (rad1 * wr) @ self.h[d] @ (rad2 * wr).T / math.pi ** 2


def _refined(n_ang, n_rad):
    return n_ang + n_ang // 2, n_rad + n_rad // 2


def _quad_single(n, m, p, q, sf, n_ang, n_rad):
    d = (n - p, m - q)
    grid = _PolarGrid(sf, max(n, m, p, q), n_ang, n_rad, [d])
    rad1 = _radial(n, p, grid.r)[None]
    rad2 = _radial(m, q, grid.r)[None]
    return complex(grid.integrate(d, rad1, rad2)[0, 0])


def gamma_quadrature(n, m, p, q, sf, tol=1e-8, n_ang=64, n_rad=80):
    """``gamma^{pq}_{nm}`` by direct quadrature of the phase-space integral.

    The angular double integral uses the periodic trapezoid rule, the radial
    one Gauss-Legendre nodes on ``[0, r_max]``.  The value is recomputed on a
    grid 1.5 times finer in each direction; a disagreement above ``tol`` or
    an imaginary part above ``tol`` raises :class:`NumericError`.
    """
    sf = _check_sf(sf)
    if min(n, m, p, q) < 0:
        raise ParameterError("Fock indices must be non-negative")
    coarse = _quad_single(n, m, p, q, sf, n_ang, n_rad)
    fine = _quad_single(n, m, p, q, sf, *_refined(n_ang, n_rad))
    diff = abs(fine - coarse)
    if diff >= tol:
        raise NumericError(f"quadrature not converged: node refinement changed the value by {diff:.3g}", achieved=diff)
    if abs(fine.imag) >= tol:
        raise NumericError(f"quadrature has imaginary part {fine.imag:.3g}", achieved=abs(fine.imag))
    return float(fine.real)


_HARMONICS = {"pop": (0, 0), "ggee": (-1, -1), "geeg": (-1, 1)}


def _quad_families_once(sf, cut, n_ang, n_rad, parts):
    nmax = max(cut.n_c, cut.m_c) + 1
    grid = _PolarGrid(sf, nmax, n_ang, n_rad, [_HARMONICS[p] for p in parts])
    r = grid.r
    out = {}
    if "pop" in parts:
        d1 = _radial_rows(range(cut.n_c + 2), 0, r)  # R_{n, n}
        d2 = _radial_rows(range(cut.m_c + 2), 0, r)
        pop = grid.integrate((0, 0), d1, d2)
        out["diag"] = pop[: cut.n_c + 1, : cut.m_c + 1]
        out["ge"] = pop[: cut.n_c + 1, 1:]
        out["eg"] = pop[1:, : cut.m_c + 1]
    up1 = _radial_rows(range(cut.n_c + 1), 1, r)  # R_{n, n+1}
    if "ggee" in parts:
        up2 = _radial_rows(range(cut.m_c + 1), 1, r)  # R_{m, m+1}
        out["ggee"] = grid.integrate((-1, -1), up1, up2)
    if "geeg" in parts:
        down2 = _radial_rows(range(1, cut.m_c + 2), -1, r)  # R_{m+1, m}
        out["geeg"] = grid.integrate((-1, 1), up1, down2)
    return out


def quadrature_families(sf, cut, tol=1e-8, n_ang=64, n_rad=80, parts=("pop", "ggee", "geeg")):
    """Coefficient tables computed by quadrature instead of the k-series.

    ``parts`` selects the populations (``"pop"``: diag, ge and eg) and/or the
    coherence families.  Each table is computed on two grids, the second 1.5
    times finer; a change above ``tol`` or an imaginary part above ``tol``
    raises :class:`NumericError`.
    """
    sf = _check_sf(sf)
    unknown = set(parts) - set(_HARMONICS)
    if unknown:
        raise ParameterError(f"unknown parts {sorted(unknown)}")
    c1 = _quad_families_once(sf, cut, n_ang, n_rad, parts)
    c2 = _quad_families_once(sf, cut, *_refined(n_ang, n_rad), parts)
    out = {}
    for name, fine in c2.items():
        diff = float(np.abs(fine - c1[name]).max())
        if diff >= tol:
            raise NumericError(f"quadrature not converged: node refinement changed a {name} entry by {diff:.3g}", achieved=diff)
        imag = float(np.abs(fine.imag).max())
        if imag >= tol:
            raise NumericError(f"quadrature {name} table has imaginary part {imag:.3g}", achieved=imag)
        out[name] = np.ascontiguousarray(fine.real)
    return out


def _shift_rows(count, shift, r):
    """Rows ``R_{a, a+shift}(r)`` for a = 0..count-1 (zero where a + shift < 0)."""
    return np.array([_radial(a, a + shift, r) if a + shift >= 0 else np.zeros_like(r) for a in range(count)])


def gamma_quadrature_tables(sf, shifts, n_c, m_c, tol=1e-8, n_ang=64, n_rad=80):
    """Tables ``T[n, m] = gamma^{n+dp, m+dq}_{n m}`` for each ``(dp, dq)`` in ``shifts``, by quadrature.

    All requested shifts share one polar grid.  Entries whose upper index
    would be negative are zero.  Convergence and realness are checked as
    in :func:`gamma_quadrature`.  Returns a dict keyed by ``(dp, dq)``.
    """
    sf = _check_sf(sf)
    shifts = [tuple(int(x) for x in sh) for sh in shifts]
    nmax = max(max(n_c + max(dp, 0), m_c + max(dq, 0)) for dp, dq in shifts)
    runs = []
    for na, nr in ((n_ang, n_rad), _refined(n_ang, n_rad)):
        grid = _PolarGrid(sf, nmax, na, nr, sorted({(-dp, -dq) for dp, dq in shifts}))
        runs.append(
            {
                (dp, dq): grid.integrate((-dp, -dq), _shift_rows(n_c + 1, dp, grid.r), _shift_rows(m_c + 1, dq, grid.r))
                for dp, dq in shifts
            }
        )
    out = {}
    for key, fine in runs[1].items():
        diff = float(np.abs(fine - runs[0][key]).max())
        if diff >= tol:
            raise NumericError(f"quadrature not converged: node refinement changed an entry by {diff:.3g}", achieved=diff)
        imag = float(np.abs(fine.imag).max())
        if imag >= tol:
            raise NumericError(f"quadrature table has imaginary part {imag:.3g}", achieved=imag)
        out[key] = np.ascontiguousarray(fine.real)
    return out


def gamma_quadrature_table(sf, dp, dq, n_c, m_c, tol=1e-8, n_ang=64, n_rad=80):
    """Single-shift version of :func:`gamma_quadrature_tables`."""
    return gamma_quadrature_tables(sf, [(dp, dq)], n_c, m_c, tol, n_ang, n_rad)[(dp, dq)]


def quadrature_coherences(sf, cut, tol=1e-8, n_ang=64, n_rad=80):
    """``ggee`` and ``geeg`` tables by quadrature (see :func:`quadrature_families`)."""
    fam = quadrature_families(sf, cut, tol, n_ang, n_rad, parts=("ggee", "geeg"))
    return fam["ggee"], fam["geeg"]


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True, eq=False)
class GammaTable:
    """Immutable table of the five coefficient families, each of shape ``(n_c+1, m_c+1)``."""

    sf: StandardForm | None
    cutoffs: Cutoffs
    diag: np.ndarray
    ge: np.ndarray
    eg: np.ndarray
    ggee: np.ndarray
    geeg: np.ndarray
    method: str = "series"

    def __post_init__(self):
        shape = (self.cutoffs.n_c + 1, self.cutoffs.m_c + 1)
        for fam in FAMILIES:
            arr = np.array(getattr(self, fam), dtype=float)
            if arr.shape != shape:
                raise ParameterError(f"family {fam} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, fam, arr)

    @property
    def normalization(self):
        """Achieved ``sum diag`` over the truncated index range."""
        return float(self.diag.sum())

    @property
    def deficit(self):
        return 1.0 - self.normalization

    def family(self, name):
        if name not in FAMILIES:
            raise ParameterError(f"unknown family {name!r}")
        return getattr(self, name)

    def replace(self, cutoffs=None, method=None, **families):
        """Copy with some families (and possibly the cutoffs) swapped out."""
        unknown = set(families) - set(FAMILIES)
        if unknown:
            raise ParameterError(f"unknown families {sorted(unknown)}")
        data = {f: getattr(self, f) for f in FAMILIES}
        data.update(families)
        return GammaTable(self.sf, cutoffs or self.cutoffs, method=method or self.method, **data)

    def to_csv(self):
        """CSV text with columns ``family,n,m,value`` preceded by ``#`` metadata lines."""
        buf = io.StringIO()
        meta = {"cutoffs": [self.cutoffs.n_c, self.cutoffs.m_c, self.cutoffs.k_c], "method": self.method}
        if self.sf is not None:
            meta["sf"] = self.sf.to_dict()
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["family", "n", "m", "value"])
        for fam in FAMILIES:
            arr = getattr(self, fam)
            for (n, m), val in np.ndenumerate(arr):
                writer.writerow([fam, n, m, repr(float(val))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ParameterError("table CSV lacks its metadata line")
        meta = json.loads(lines[0][2:])
        cut = Cutoffs(*meta["cutoffs"])
        sf = StandardForm(**meta["sf"]) if "sf" in meta else None
        data = {f: np.zeros((cut.n_c + 1, cut.m_c + 1)) for f in FAMILIES}
        for row in csv.DictReader(lines[1:]):
            data[row["family"]][int(row["n"]), int(row["m"])] = float(row["value"])
        return cls(sf, cut, method=meta.get("method", "series"), **data)


def cache_key(sf, cut, method):
    payload = json.dumps({"sf": sf.to_dict(), "cut": [cut.n_c, cut.m_c, cut.k_c], "method": method}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


@functools.lru_cache(maxsize=128)
def _build_cached(key, cut, method, tol):
    sf = StandardForm(*key)
    fam = dict(series_families(sf, cut))
    if method == "quadrature":
        fam["ggee"], fam["geeg"] = quadrature_coherences(sf, cut, tol=tol)
    return GammaTable(sf, cut, method=method, **fam)


def build_table(sf, cut=None, method="quadrature", eps_trunc=0.01, tol=1e-8, cache_dir=None):
    """Fill all five coefficient families up to the cutoffs.

    Parameters
    ----------
    sf : StandardForm
        Resource in standard form.
    cut : Cutoffs or "auto", optional
        Defaults to ``Cutoffs()``; ``"auto"`` sizes them with :meth:`Cutoffs.auto`.
    method : {"quadrature", "series"}
        How the two coherence families are computed.  Populations always come
        from the k-series.
    eps_trunc : float
        A :class:`TruncationWarning` is issued if ``|1 - sum diag| > eps_trunc``.
    tol : float
        Quadrature tolerance.
    cache_dir : path, optional
        Directory for a CSV cache keyed by a hash of ``(sf, cut, method)``.
    """
    sf = _check_sf(sf)
    if not sf.is_bona_fide():
        raise ParameterError("standard form is not bona fide")
    if cut is None:
        cut = Cutoffs()
    elif cut == "auto":
        cut = Cutoffs.auto(sf)
    if method not in ("quadrature", "series"):
        raise ParameterError(f"unknown method {method!r}")
    path = None
    if cache_dir is not None:
        path = os.path.join(cache_dir, f"gamma-{cache_key(sf, cut, method)}.csv")
        if os.path.exists(path):
            with open(path) as fh:
                table = GammaTable.from_csv(fh.read())
            _warn_truncation(table, eps_trunc)
            return table
    table = _build_cached(sf.key(), cut, method, tol)
    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(table.to_csv())
    _warn_truncation(table, eps_trunc)
    return table


def _warn_truncation(table, eps_trunc):
    deficit = table.deficit
    if abs(deficit) > eps_trunc:
        warnings.warn(
            TruncationWarning(
                f"diagonal sums to {table.normalization:.6f}; raise the Fock cutoffs", deficit=deficit
            ),
            stacklevel=3,
        )
