"""Brute-force Fock-space reference path.

Everything here is built from ladder-operator matrices in a truncated
number basis: explicit states, the exact Jaynes-Cummings propagator
(matrix exponential of the interaction Hamiltonian), partial traces and
moments.  No series or quadrature code is shared with :mod:`gamma_engine`,
so agreement between the two is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import CutoffError, DomainError, ParameterError
from .gaussian_core import CovarianceMatrix
from .transfer import QubitXState

#: Largest relative probability allowed beyond the truncation.
TAIL_TOL = 1e-12

#: Largest relative Schmidt amplitude allowed beyond the default truncation.
AMPLITUDE_TAIL = 1e-15


def default_truncation(zeta):
    """Fock truncation used by default for a squeezing ``zeta``.

    Chosen so that the discarded Schmidt amplitudes ``tanh(zeta)^n`` are
    below :data:`AMPLITUDE_TAIL` relative to the first one; quantities that
    sum amplitudes rather than probabilities (the log-negativity) then
    converge as well.  Never below 60.
    """
    t = math.tanh(abs(zeta))
    if t == 0.0:
        return 60
    return max(60, int(math.ceil(math.log(AMPLITUDE_TAIL) / math.log(t))) + 5)


@dataclass(frozen=True, eq=False)
class FockTwoModeState:
    """Truncated two-mode state, either pure or mixed.

    Exactly one of ``amplitudes`` (shape ``(N+1, N+1)``, entry ``[n, m]`` the
    amplitude of ``|n, m>``) and ``density`` (shape ``(N+1,)*4``, entry
    ``[n, m, p, q] = <n, m| rho |p, q>``) is set.
    """

    amplitudes: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.amplitudes is None) == (self.density is None):
            raise ParameterError("give exactly one of amplitudes or density")
        if self.amplitudes is not None:
            a = np.array(self.amplitudes, dtype=complex)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ParameterError("amplitudes must be a square matrix")
            norm = np.linalg.norm(a)
            if norm == 0:
                raise DomainError("zero state")
            a = a / norm
            a.setflags(write=False)
            object.__setattr__(self, "amplitudes", a)
        else:
            r = np.array(self.density, dtype=complex)
            if r.ndim != 4 or len(set(r.shape)) != 1:
                raise ParameterError("density must have shape (N+1,)*4")
            d = r.shape[0]
            mat = r.reshape(d * d, d * d)
            if np.abs(mat - mat.conj().T).max() > 1e-10:
                raise ParameterError("density is not Hermitian")
            tr = np.trace(mat).real
            if tr <= 0:
                raise DomainError("density has non-positive trace")
            r = r / tr
            r.setflags(write=False)
            object.__setattr__(self, "density", r)

    @property
    def truncation(self):
        """Largest photon number kept in each mode."""
        arr = self.amplitudes if self.amplitudes is not None else self.density
        return arr.shape[0] - 1

    @property
    def is_pure(self):
        return self.amplitudes is not None

    def density_matrix(self):
        """Density as a ``(N+1)^2 x (N+1)^2`` matrix in the ``|n, m>`` basis."""
        if self.is_pure:
            v = self.amplitudes.ravel()
            return np.outer(v, v.conj())
        d = self.truncation + 1
        return self.density.reshape(d * d, d * d)

    def populations(self):
        """``P[n, m] = <n, m| rho |n, m>``."""
        if self.is_pure:
            return np.abs(self.amplitudes) ** 2
        d = self.truncation + 1
        return np.real(np.einsum("nmnm->nm", self.density.reshape(d, d, d, d)))

    def edge_mass(self):
        """Probability on the outermost kept photon number of either mode."""
        p = self.populations()
        return float(p[-1, :].sum() + p[:, -1].sum() - p[-1, -1])


def tmsv_fock(zeta, N_F=None):
    """Two-mode squeezed vacuum ``sech(z) sum tanh(z)^n |n, n>``, renormalized after truncation."""
    N = default_truncation(zeta) if N_F is None else int(N_F)
    t = math.tanh(abs(zeta))
    if t > 0 and 2 * (N + 1) * math.log(t) > math.log(TAIL_TOL):
        raise CutoffError(f"truncation {N} leaves tail {t ** (2 * (N + 1)):.3g} for zeta={zeta}")
    n = np.arange(N + 1)
    with np.errstate(divide="ignore"):
        c = np.where(n == 0, 1.0, t ** n) / math.cosh(zeta)
    return FockTwoModeState(amplitudes=np.diag(c))


def thermal_weights(nbar, n):
    """Thermal occupation probability ``nbar^n / (nbar + 1)^(n+1)``."""
    if nbar < 0:
        raise ParameterError("mean occupation must be non-negative")
    n = np.asarray(n)
    if nbar == 0:
        out = np.where(n == 0, 1.0, 0.0)
    else:
        out = np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))
    return float(out) if out.ndim == 0 else out


def thermal_product_fock(nbar1, nbar2, N_F):
    """Product of two thermal states as a diagonal density."""
    d = N_F + 1
    p = np.outer(thermal_weights(nbar1, np.arange(d)), thermal_weights(nbar2, np.arange(d)))
    rho = np.zeros((d, d, d, d))
    idx = np.arange(d)
    rho[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = p
    return FockTwoModeState(density=rho)


def photon_subtract_fock(state, s):
    """Apply ``a^s`` to each mode of a pure state and renormalize."""
    if s < 0 or int(s) != s:
        raise ParameterError("s must be a non-negative integer")
    if not state.is_pure:
        raise ParameterError("photon_subtract_fock needs a pure state")
    s = int(s)
    if s == 0:
        return state
    a = state.amplitudes
    N = state.truncation
    if s > N:
        raise CutoffError("subtraction exceeds the truncation")
    n = np.arange(N + 1 - s)
    w = np.exp(0.5 * (gammaln(n + s + 1) - gammaln(n + 1)))
    out = a[s:, s:] * np.outer(w, w)
    if np.linalg.norm(out) == 0:
        raise DomainError("subtraction annihilates the state")
    return FockTwoModeState(amplitudes=out)


def annihilation(N):
    """Truncated annihilation operator on photon numbers ``0..N``."""
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), 1)


def jc_propagator(N, tau):
    """Exact propagator ``exp(-i tau (a sigma+ + a^dag sigma-))`` on qubit x mode.

    The qubit index comes first with ``g = 0``, ``e = 1``.
    """
    a = annihilation(N)
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])  # |e><g|
    h = np.kron(sp, a) + np.kron(sp.T, a.T)
    return expm(-1j * tau * h)


def jc_evolve_trace(state, tau, tol=1e-12):
    """Evolve ``|gg> x state`` with the bilocal propagator and trace out both modes.

    Raises :class:`ConsistencyError` if the qubit state is not X-shaped.
    """
    N = state.truncation
    d = N + 1
    u = jc_propagator(N, tau).reshape(2, d, 2, d)[:, :, 0, :]  # [x, k, n] from |g, n>
    if state.is_pure:
        psi = np.einsum("xkn,nm,ylm->xykl", u, state.amplitudes, u, optimize=True)
        rho = np.einsum("xykl,zwkl->xyzw", psi, psi.conj(), optimize=True).reshape(4, 4)
    else:
        r = state.density
        half = np.einsum("xkn,ylm,nmpq->xyklpq", u, u, r, optimize=True)
        rho = np.einsum("xyklpq,zkp,wlq->xyzw", half, u.conj(), u.conj(), optimize=True).reshape(4, 4)
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-10:
        raise CutoffError(f"evolved trace {trace!r} differs from one", achieved=abs(trace - 1.0))
    return QubitXState.from_matrix(rho, tol=tol)


def gamma_oracle(state):
    """The five coefficient families read directly off a Fock state.

    Keys as in :data:`cvtransfer.gamma_engine.FAMILIES`; each array has
    shape ``(N, N)`` so that all shifted indices stay inside the truncation.
    """
    d = state.truncation + 1
    if state.is_pure:
        a = state.amplitudes

        def el(n, m, p, q):
            return a[n, m] * np.conj(a[p, q])
    else:
        r = state.density

        def el(n, m, p, q):
            return r[n, m, p, q]

    idx = np.arange(d - 1)
    n, m = np.meshgrid(idx, idx, indexing="ij")
    fam = {
        "diag": el(n, m, n, m),
        "ge": el(n, m + 1, n, m + 1),
        "eg": el(n + 1, m, n + 1, m),
        "ggee": el(n, m, n + 1, m + 1),
        "geeg": el(n, m + 1, n + 1, m),
    }
    return {k: np.real_if_close(v, tol=1e6).real.copy() for k, v in fam.items()}


def cv_log_negativity(state):
    """Base-2 logarithmic negativity of the two-mode state.

    Pure states use the Schmidt coefficients; mixed states use the trace
    norm of the partial transpose (practical only for small truncations).
    """
    if state.is_pure:
        sv = np.linalg.svd(state.amplitudes, compute_uv=False)
        return float(2.0 * math.log2(sv.sum()))
    d = state.truncation + 1
    pt = state.density.transpose(0, 3, 2, 1).reshape(d * d, d * d)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(math.log2(np.abs(ev).sum()))


def second_moments(state, tail_tol=1e-10):
    """Covariance matrix ``<{Q_i, Q_j}>/2`` with ``Q = (x1, y1, x2, y2)``.

    First moments are assumed to vanish.  The state is embedded into a
    basis one photon larger so that the quadratic moments are exact for the
    truncated state; probability above ``tail_tol`` on the outermost kept
    photon number raises :class:`CutoffError`.
    """
    edge = state.edge_mass()
    if edge > tail_tol:
        raise CutoffError(f"probability {edge:.3g} at the truncation edge", achieved=edge)
    N = state.truncation + 1
    d = N + 1
    a = annihilation(N)
    ops = [a + a.T, 1j * (a.T - a)]
    if state.is_pure:
        amp = np.zeros((d, d), dtype=complex)
        amp[:-1, :-1] = state.amplitudes
        # quadratures of mode 1 act on the row index, those of mode 2 on the column index
        vecs = [o @ amp for o in ops] + [amp @ o.T for o in ops]
        v = np.array([[np.vdot(vi, vj).real for vj in vecs] for vi in vecs])
    else:
        rho = np.zeros((d, d, d, d), dtype=complex)
        rho[:-1, :-1, :-1, :-1] = state.density
        r1 = np.einsum("nmpm->np", rho)  # reduced state of mode 1
        r2 = np.einsum("nmnq->mq", rho)  # reduced state of mode 2
        v = np.zeros((4, 4))
        for i, oi in enumerate(ops):
            for j, oj in enumerate(ops):
                v[i, j] = 0.5 * np.trace(r1 @ (oi @ oj + oj @ oi)).real
                v[2 + i, 2 + j] = 0.5 * np.trace(r2 @ (oi @ oj + oj @ oi)).real
                cross = np.einsum("nmpq,pn,qm->", rho, oi, oj).real
                v[i, 2 + j] = v[2 + j, i] = cross
    return CovarianceMatrix(0.5 * (v + v.T), check=False)
