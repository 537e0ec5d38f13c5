"""Two-qubit X-states produced by bilocal Jaynes-Cummings coupling, and their negativity.

Both qubits start in the ground state and couple with the same strength to
their own field mode.  Basis order is ``(gg, ge, eg, ee)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParameterError, TruncationError

DEFAULT_TAU_POINTS = 200


def default_tau_grid(points=DEFAULT_TAU_POINTS):
    """Uniform grid on ``[0, 2 pi]`` including both ends."""
    return np.linspace(0.0, 2.0 * math.pi, points)


@dataclass(frozen=True)
class QubitXState:
    """X-shaped two-qubit density matrix.

    ``A, B, C, E`` are the populations of ``gg, ge, eg, ee``; ``G`` is the
    ``gg-ee`` coherence and ``D`` the ``ge-eg`` coherence (both real).
    """

    A: float
    B: float
    C: float
    E: float
    G: float = 0.0
    D: float = 0.0
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        for name in ("A", "B", "C", "E", "G", "D"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ParameterError(f"{name} is not finite")
            object.__setattr__(self, name, val)
        tol = self.tol
        if tol is None:
            return
        trace = self.A + self.B + self.C + self.E
        if abs(trace - 1.0) > tol:
            raise ParameterError(f"trace is {trace!r}, not one")
        if min(self.A, self.B, self.C, self.E) < -tol:
            raise ParameterError("negative population")
        if abs(self.G) > math.sqrt(max(self.A * self.E, 0.0)) + tol:
            raise ParameterError("|G| exceeds sqrt(A E): not a positive matrix")
        if abs(self.D) > math.sqrt(max(self.B * self.C, 0.0)) + tol:
            raise ParameterError("|D| exceeds sqrt(B C): not a positive matrix")

    def matrix(self):
        """The 4x4 density matrix."""
        m = np.diag([self.A, self.B, self.C, self.E])
        m[0, 3] = m[3, 0] = self.G
        m[1, 2] = m[2, 1] = self.D
        return m

    @classmethod
    def from_matrix(cls, rho, tol=1e-12):
        """Read an X-state off a 4x4 matrix; off-X entries above ``tol`` raise :class:`ConsistencyError`."""
        rho = np.asarray(rho)
        if rho.shape != (4, 4):
            raise ParameterError("expected a 4x4 matrix")
        mask = np.ones((4, 4), dtype=bool)
        for i, j in ((0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)):
            mask[i, j] = False
        residue = float(np.abs(rho[mask]).max())
        imag = max(abs(rho[0, 3].imag), abs(rho[1, 2].imag))
        if residue > tol or imag > tol:
            raise ConsistencyError(f"not an X-state: off-pattern residue {max(residue, imag):.3g}")
        r = rho.real
        return cls(r[0, 0], r[1, 1], r[2, 2], r[3, 3], r[0, 3], r[1, 2])


@dataclass(frozen=True)
class TransferCurve:
    """Negativity of the qubit pair along a grid of dimensionless times ``tau``."""

    tau_grid: np.ndarray
    negativity: np.ndarray
    states: tuple | None = None

    def __post_init__(self):
        tau = np.array(self.tau_grid, dtype=float)
        neg = np.array(self.negativity, dtype=float)
        if tau.shape != neg.shape:
            raise ParameterError("tau grid and negativity lengths differ")
        tau.setflags(write=False)
        neg.setflags(write=False)
        object.__setattr__(self, "tau_grid", tau)
        object.__setattr__(self, "negativity", neg)

    @property
    def max(self):
        return float(self.negativity.max()) if self.negativity.size else 0.0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "negativity"])
        for t, n in zip(self.tau_grid, self.negativity):
            w.writerow([repr(float(t)), repr(float(n))])
        return buf.getvalue()


def jc_amplitudes(n, tau, signed=True):
    """Amplitudes ``(C_n, S_n)`` of ``|g,n> -> C_n |g,n> - i S_n |e,n-1>``.

    ``C_n = cos(tau sqrt(n))``.  ``S_n = sin(tau sqrt(n))`` when ``signed``;
    otherwise the non-negative ``sqrt(1 - C_n^2)``.  Broadcasts over arrays.
    """
    n = np.asarray(n)
    if np.any(n < 0):
        raise ParameterError("photon number must be non-negative")
    arg = np.asarray(tau, dtype=float) * np.sqrt(n)
    c = np.cos(arg)
    s = np.sin(arg) if signed else np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    if c.ndim == 0:
        return float(c), float(s)
    return c, s


def _assemble_arrays(table, taus, signed=True):
    """Populations and coherences for each tau, as arrays of shape ``(len(taus),)``."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    n = np.arange(table.cutoffs.n_c + 1)
    m = np.arange(table.cutoffs.m_c + 1)
    c1, _ = jc_amplitudes(n[None, :], taus[:, None], signed)
    _, s1 = jc_amplitudes(n[None, :] + 1, taus[:, None], signed)
    c2, _ = jc_amplitudes(m[None, :], taus[:, None], signed)
    _, s2 = jc_amplitudes(m[None, :] + 1, taus[:, None], signed)

    def contract(left, fam, right):
        return np.einsum("tn,nm,tm->t", left, fam, right)

    a = contract(c1 * c1, table.diag, c2 * c2)
    b = contract(c1 * c1, table.ge, s2 * s2)
    c = contract(s1 * s1, table.eg, c2 * c2)
    g = -contract(c1 * s1, table.ggee, c2 * s2)
    d = contract(c1 * s1, table.geeg, c2 * s2)
    e = 1.0 - a - b - c
    return a, b, c, e, g, d


def _positivity_violation(a, b, c, e, g, d):
    return np.maximum.reduce(
        [
            -np.minimum.reduce([a, b, c, e]),
            np.abs(g) - np.sqrt(np.clip(a * e, 0.0, None)),
            np.abs(d) - np.sqrt(np.clip(b * c, 0.0, None)),
        ]
    )


def assemble_many(table, taus, signed=True, tol=1e-6):
    """List of :class:`QubitXState` for each tau (vectorized :func:`assemble_state`)."""
    arrs = _assemble_arrays(table, taus, signed)
    bad = _positivity_violation(*arrs)
    worst = float(bad.max()) if bad.size else 0.0
    if worst > tol:
        raise TruncationError(
            f"assembled qubit state violates positivity by {worst:.3g}; raise the cutoffs", achieved=worst
        )
    return [QubitXState(*vals, tol=None) for vals in zip(*(x.tolist() for x in arrs))]


def assemble_state(table, tau, signed=True, tol=1e-6):
    """Two-qubit state after interaction time ``tau`` with the resource ``table``."""
    return assemble_many(table, [tau], signed, tol)[0]


def pt_eigenvalues(rho):
    """The four partial-transpose eigenvalues of an X-state, closed form."""
    s1 = math.sqrt((rho.A - rho.E) ** 2 / 4 + rho.D ** 2)
    s2 = math.sqrt((rho.B - rho.C) ** 2 / 4 + rho.G ** 2)
    h1 = (rho.A + rho.E) / 2
    h2 = (rho.B + rho.C) / 2
    return (h1 - s1, h1 + s1, h2 - s2, h2 + s2)


def partial_transpose(m):
    """Partial transpose of a 4x4 two-qubit matrix on the second qubit."""
    t = np.asarray(m).reshape(2, 2, 2, 2)
    return t.transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(rho, check=False):
    """Twice the modulus of the negative partial-transpose eigenvalue.

    With ``check=True`` the closed form is compared against a full
    eigensolve of the partially transposed matrix.
    """
    lam = min(pt_eigenvalues(rho))
    value = 2.0 * max(0.0, -lam)
    if check:
        full = np.linalg.eigvalsh(partial_transpose(rho.matrix()))
        ref = 2.0 * max(0.0, -float(full.min()))
        if abs(ref - value) > 1e-10:
            raise ConsistencyError(f"closed-form negativity {value} differs from eigensolve {ref}")
    return value


def _negativity_arrays(a, b, c, e, g, d):
    lam1 = (a + e) / 2 - np.sqrt((a - e) ** 2 / 4 + d * d)
    lam2 = (b + c) / 2 - np.sqrt((b - c) ** 2 / 4 + g * g)
    # adding 0.0 turns a signed zero into +0.0
    return 2.0 * np.maximum(0.0, -np.minimum(lam1, lam2)) + 0.0


def transfer_curve(table, tau_grid=None, signed=True, keep_states=False, tol=1e-6):
    """Negativity transferred to the qubits along ``tau_grid`` (default: 200 points on [0, 2 pi])."""
    taus = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if not np.all(np.isfinite(taus)) or np.any(taus < 0):
        raise ParameterError("tau grid must be finite and non-negative")
    arrs = _assemble_arrays(table, taus, signed)
    bad = _positivity_violation(*arrs)
    worst = float(bad.max()) if bad.size else 0.0
    if worst > tol:
        raise TruncationError(
            f"assembled qubit state violates positivity by {worst:.3g}; raise the cutoffs", achieved=worst
        )
    neg = _negativity_arrays(*arrs)
    states = None
    if keep_states:
        states = tuple(QubitXState(*vals, tol=None) for vals in zip(*(x.tolist() for x in arrs)))
    return TransferCurve(taus, neg, states)
