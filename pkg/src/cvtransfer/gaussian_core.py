"""Two-mode Gaussian resources at the covariance-matrix level.

Convention: quadratures ``x = a + a^dag`` and ``y = i(a^dag - a)``, ordered
``(x1, y1, x2, y2)``, so the vacuum has covariance matrix equal to the
identity.  First moments are taken to be zero everywhere.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, ParameterError, SamplingError

#: Tolerance on symplectic eigenvalues for the bona fide test.
BONA_FIDE_TOL = 1e-8

OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA = np.kron(np.eye(2), OMEGA2)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def symplectic_eigenvalues(v):
    """Symplectic eigenvalues of a 4x4 covariance matrix, ascending.

    These are the moduli of the eigenvalue pairs of ``i Omega v``.
    """
    v = v.v if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)
    if v.shape != (4, 4):
        raise ParameterError(f"expected a 4x4 matrix, got shape {v.shape}")
    if not np.allclose(v, v.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(v).max())):
        raise ParameterError("covariance matrix is not symmetric")
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ v)))
    # eigenvalues come in +/- pairs
    return float(ev[0]), float(ev[2])


def _bona_fide(v, tol):
    # an indefinite matrix can still have symplectic eigenvalues above one,
    # so positivity is checked first
    if np.linalg.eigvalsh(v).min() <= 0.0:
        return False
    return symplectic_eigenvalues(v)[0] >= 1.0 - tol


@dataclass(frozen=True)
class CovarianceMatrix:
    """4x4 real symmetric covariance matrix of a two-mode state.

    Construction symmetrizes the input (it must already be symmetric to
    round-off) and, unless ``check=False``, rejects non-physical matrices.
    """

    v: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.shape != (4, 4):
            raise ParameterError(f"expected a 4x4 matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("covariance matrix has non-finite entries")
        scale = max(1.0, float(np.abs(v).max()))
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-10 * scale):
            raise ParameterError("covariance matrix is not symmetric")
        object.__setattr__(self, "v", _readonly(0.5 * (v + v.T)))
        if self.check and not self.is_bona_fide():
            raise DomainError(
                f"not a bona fide covariance matrix (symplectic eigenvalues {self.symplectic_eigenvalues()})"
            )

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash(self.v.tobytes())

    @property
    def A(self):
        return self.v[:2, :2]

    @property
    def B(self):
        return self.v[2:, 2:]

    @property
    def C(self):
        return self.v[:2, 2:]

    def symplectic_eigenvalues(self):
        return symplectic_eigenvalues(self.v)

    def is_bona_fide(self, tol=BONA_FIDE_TOL):
        return _bona_fide(self.v, tol)

    def to_json(self):
        return json.dumps({"v": self.v.tolist()})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        return cls(np.array(data["v"], dtype=float))


@dataclass(frozen=True)
class StandardForm:
    """Standard-form parameters ``(n1, n2, m_plus, m_minus)``.

    The matrix is ``[[n1 I, diag(m+, m-)], [diag(m+, m-), n2 I]]`` with
    ``n_j >= 1`` and ``m_plus >= |m_minus|``.
    """

    n1: float
    n2: float
    m_plus: float
    m_minus: float

    def __post_init__(self):
        for name in ("n1", "n2", "m_plus", "m_minus"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        tol = 1e-12 * max(1.0, abs(self.m_plus))
        if self.n1 < 1.0 - 1e-12 or self.n2 < 1.0 - 1e-12:
            raise DomainError(f"local parameters must be >= 1, got n1={self.n1}, n2={self.n2}")
        if self.m_plus < abs(self.m_minus) - tol:
            raise DomainError(f"need m_plus >= |m_minus|, got {self.m_plus}, {self.m_minus}")

    def matrix(self):
        n1, n2, mp, mm = self.n1, self.n2, self.m_plus, self.m_minus
        return np.array(
            [
                [n1, 0.0, mp, 0.0],
                [0.0, n1, 0.0, mm],
                [mp, 0.0, n2, 0.0],
                [0.0, mm, 0.0, n2],
            ]
        )

    def covariance(self, check=True):
        return CovarianceMatrix(self.matrix(), check=check)

    def swap(self):
        """Exchange the roles of the two modes."""
        return StandardForm(self.n2, self.n1, self.m_plus, self.m_minus)

    def is_bona_fide(self, tol=BONA_FIDE_TOL):
        return _bona_fide(self.matrix(), tol)

    def key(self):
        """Tuple of the exact float parameters, usable as a cache key."""
        return (self.n1, self.n2, self.m_plus, self.m_minus)

    def to_dict(self):
        return {"n1": self.n1, "n2": self.n2, "m_plus": self.m_plus, "m_minus": self.m_minus}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        return cls(data["n1"], data["n2"], data["m_plus"], data["m_minus"])


@dataclass(frozen=True)
class SymplecticOp:
    """A real 4x4 matrix ``s`` with ``s Omega s^T = Omega``."""

    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        if s.shape != (4, 4):
            raise ParameterError(f"expected a 4x4 matrix, got shape {s.shape}")
        err = np.abs(s @ OMEGA @ s.T - OMEGA).max()
        if err > 1e-10 * max(1.0, np.abs(s).max() ** 2):
            raise ParameterError(f"matrix is not symplectic (deviation {err:.3g})")
        object.__setattr__(self, "s", _readonly(s))

    @classmethod
    def local(cls, s1, s2):
        """Direct sum of two single-mode 2x2 symplectic matrices."""
        out = np.zeros((4, 4))
        out[:2, :2] = s1
        out[2:, 2:] = s2
        return cls(out)

    def act(self, v):
        """Congruence ``s v s^T`` on a covariance matrix."""
        vv = v.v if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)
        return CovarianceMatrix(self.s @ vv @ self.s.T, check=False)


@dataclass(frozen=True)
class ResourceParams:
    """Parameters of a squeezed thermal pair mixed on a beam splitter."""

    s1: float = 0.0
    s2: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    transmittivity: float = 0.5
    nbar1: float = 0.0
    nbar2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.transmittivity <= 1.0:
            raise ParameterError(f"transmittivity must lie in [0, 1], got {self.transmittivity}")
        if self.nbar1 < 0 or self.nbar2 < 0:
            raise ParameterError("mean thermal occupations must be non-negative")


def make_tmsv(zeta):
    """Standard form of the two-mode squeezed vacuum with squeezing ``zeta``."""
    zeta = float(zeta)
    if not math.isfinite(zeta):
        raise ParameterError("zeta must be finite")
    ch = math.cosh(2 * zeta)
    sh = math.sinh(2 * abs(zeta))
    return StandardForm(ch, ch, sh, -sh)


def rotation(phi):
    # cos(phi) I + i sin(phi) sigma_y, written as a real matrix
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def beam_splitter(transmittivity):
    t = math.sqrt(transmittivity)
    r = math.sqrt(1.0 - transmittivity)
    eye = np.eye(2)
    return np.block([[t * eye, -r * eye], [r * eye, t * eye]])


def make_squeezed_thermal_bs(p):
    """Covariance matrix of two squeezed, rotated thermal modes mixed on a beam splitter.

    ``V = B^T (R1+R2)^T (S1+S2)^T V_th (S1+S2) (R1+R2) B`` with
    ``V_th = (2 nbar1 + 1) I + (2 nbar2 + 1) I``.
    """
    if not isinstance(p, ResourceParams):
        raise ParameterError("expected ResourceParams")
    vth = np.diag([2 * p.nbar1 + 1, 2 * p.nbar1 + 1, 2 * p.nbar2 + 1, 2 * p.nbar2 + 1])
    sq = np.diag([math.exp(-p.s1), math.exp(p.s1), math.exp(-p.s2), math.exp(p.s2)])
    rot = np.zeros((4, 4))
    rot[:2, :2] = rotation(p.phi1)
    rot[2:, 2:] = rotation(p.phi2)
    bs = beam_splitter(p.transmittivity)
    m = sq @ rot @ bs
    return CovarianceMatrix(m.T @ vth @ m)


def _local_reduction(v, n1, n2, m_plus, m_minus):
    """Local symplectic matrices taking ``v`` to its standard form."""

    def normalize_block(block, n):
        w, u = np.linalg.eigh(block)
        inv_sqrt = u @ np.diag(w ** -0.5) @ u.T
        return math.sqrt(n) * inv_sqrt

    s1 = normalize_block(v[:2, :2], n1)
    s2 = normalize_block(v[2:, 2:], n2)
    c = s1 @ v[:2, 2:] @ s2.T
    u, _, wt = np.linalg.svd(c)
    w = wt.T
    if np.linalg.det(u) < 0:
        u[:, 1] *= -1
    if np.linalg.det(w) < 0:
        w[:, 1] *= -1
    # u^T c w is now diagonal with a possibly negative second entry
    d = u.T @ c @ w
    if d[0, 0] < 0:
        # rotate mode 2 by pi: flips both diagonal entries
        w = -w
        d = -d
    if abs(d[0, 0]) < abs(d[1, 1]):
        # swap x <-> y in both modes with a quarter-turn rotation
        q = np.array([[0.0, 1.0], [-1.0, 0.0]])
        u = u @ q.T
        w = w @ q.T
        d = u.T @ c @ w
        if d[0, 0] < 0:
            w = -w
    return u.T @ s1, w.T @ s2


def to_standard_form(v):
    """Reduce a covariance matrix to standard form.

    Returns ``(StandardForm, SymplecticOp)``; the operator is a direct sum of
    single-mode symplectic maps with ``op.s @ v @ op.s.T`` equal to the
    standard-form matrix.  The parameters come from the local invariants
    ``det A``, ``det B``, ``det C`` and ``det V``.
    """
    cm = v if isinstance(v, CovarianceMatrix) else CovarianceMatrix(v)
    if not cm.is_bona_fide():
        raise DomainError("to_standard_form needs a bona fide covariance matrix")
    vv = cm.v
    n1 = math.sqrt(np.linalg.det(vv[:2, :2]))
    n2 = math.sqrt(np.linalg.det(vv[2:, 2:]))
    det_c = float(np.linalg.det(vv[:2, 2:]))
    det_v = float(np.linalg.det(vv))
    nn = n1 * n2
    total = (nn * nn + det_c * det_c - det_v) / nn  # m+^2 + m-^2
    disc = total * total - 4.0 * det_c * det_c
    scale = max(1.0, total * total)
    if disc < -1e-9 * scale:
        raise NumericError(f"standard form: negative discriminant {disc:.3g}", achieved=abs(disc))
    root = math.sqrt(max(disc, 0.0))
    mp2 = 0.5 * (total + root)
    mm2 = max(0.5 * (total - root), 0.0)
    m_plus = math.sqrt(max(mp2, 0.0))
    m_minus = math.copysign(math.sqrt(mm2), det_c) if det_c != 0.0 else 0.0
    s1, s2 = _local_reduction(vv, n1, n2, m_plus, m_minus)
    # The quadratic loses digits to cancellation when det V is small next to
    # (n1 n2)^2; the singular values of the normalized correlation block are
    # the same invariants without that cancellation.
    sv = np.linalg.svd((s1 @ vv[:2, 2:] @ s2.T), compute_uv=False)
    m_plus = float(sv[0])
    m_minus = math.copysign(float(sv[1]), det_c) if det_c != 0.0 else 0.0
    sf = StandardForm(n1, n2, m_plus, m_minus)
    op = SymplecticOp.local(s1, s2)
    return sf, op


def _as_standard_form(sf):
    if isinstance(sf, StandardForm):
        return sf
    return to_standard_form(sf)[0]


def nu_minus(sf, tol=1e-12):
    """Smallest symplectic eigenvalue of the partially transposed state."""
    if isinstance(sf, (CovarianceMatrix, np.ndarray)):
        vv = sf.v if isinstance(sf, CovarianceMatrix) else np.asarray(sf, dtype=float)
        delta = np.linalg.det(vv[:2, :2]) + np.linalg.det(vv[2:, 2:]) - 2 * np.linalg.det(vv[:2, 2:])
        det_v = np.linalg.det(vv)
    else:
        n1, n2, mp, mm = sf.n1, sf.n2, sf.m_plus, sf.m_minus
        delta = n1 * n1 + n2 * n2 - 2 * mp * mm
        det_v = (n1 * n2 - mp * mp) * (n1 * n2 - mm * mm)
    inner = delta * delta - 4 * det_v
    scale = max(1.0, delta * delta)
    if inner < -tol * scale:
        raise NumericError("nu_minus: negative inner radicand", achieved=-inner)
    outer = delta - math.sqrt(max(inner, 0.0))
    if outer < -tol * max(1.0, abs(delta)):
        raise NumericError("nu_minus: negative outer radicand", achieved=-outer)
    return math.sqrt(max(outer, 0.0) / 2.0)


def is_entangled(sf, tol=1e-9):
    """True iff ``nu_minus < 1 - tol`` (the boundary counts as separable)."""
    return nu_minus(sf) < 1.0 - tol


def dissipate(v0, bigN, gamma_t):
    """Thermal-loss evolution ``V(t) = (2N+1)(1 - e^{-Gt}) I + V(0) e^{-Gt}``."""
    if bigN < 0:
        raise ParameterError(f"bath occupation must be non-negative, got {bigN}")
    if gamma_t < 0:
        raise ParameterError(f"dissipation time must be non-negative, got {gamma_t}")
    vv = v0.v if isinstance(v0, CovarianceMatrix) else (
        v0.matrix() if isinstance(v0, StandardForm) else np.asarray(v0, dtype=float))
    decay = math.exp(-gamma_t)
    return CovarianceMatrix((2 * bigN + 1) * (1.0 - decay) * np.eye(4) + vv * decay)


def dissipation_threshold(zeta, bigN):
    """Closed-form dissipation time beyond which the squeezed pair is reported separable.

    Evaluates ``log sqrt((4N(N+1) + sinh 2z - cosh 2z + 1) / (4N^2 + 4N))``.
    For ``bigN == 0`` the expression diverges; ``inf`` is returned with a warning.
    See :func:`separability_time` for the crossing implied by :func:`dissipate`.
    """
    if bigN < 0:
        raise ParameterError("bath occupation must be non-negative")
    if bigN == 0:
        warnings.warn("pure loss: threshold is infinite", RuntimeWarning, stacklevel=2)
        return math.inf
    num = 4 * bigN * (bigN + 1) + math.sinh(2 * zeta) - math.cosh(2 * zeta) + 1
    den = 4 * bigN * bigN + 4 * bigN
    return math.log(math.sqrt(num / den))


def separability_time(zeta, bigN):
    """Dissipation time at which ``nu_minus`` of a dissipated squeezed vacuum reaches one.

    Solves ``(2N+1)(1 - e) + e^{-2 zeta} e = 1`` for ``e = exp(-Gt)``.
    """
    if bigN < 0:
        raise ParameterError("bath occupation must be non-negative")
    if bigN == 0:
        return math.inf
    return math.log((2 * bigN + 1 - math.exp(-2 * abs(zeta))) / (2 * bigN))


def thermal_threshold(zeta):
    """Mean thermal occupation at which the squeezed thermal pair stops being entangled."""
    return (math.exp(2 * zeta) - 1.0) / 2.0


def _entropy_term(nu):
    if nu <= 1.0:
        return 0.0
    a, b = (nu + 1) / 2, (nu - 1) / 2
    return a * math.log(a) - b * math.log(b)


def von_neumann_entropy(v, tol=BONA_FIDE_TOL):
    """Von Neumann entropy in nats, from the symplectic eigenvalues."""
    if isinstance(v, StandardForm):
        v = v.matrix()
    nus = symplectic_eigenvalues(v)
    if nus[0] < 1.0 - tol:
        raise DomainError(f"symplectic eigenvalue {nus[0]} below one")
    return sum(_entropy_term(nu) for nu in nus)


#: Default sampling ranges for :func:`random_resource`.
DEFAULT_RANGES = {
    "s": (-1.2, 1.2),
    "phi": (0.0, 2 * math.pi),
    "transmittivity": (0.25, 0.75),
    "nbar": (0.0, 0.5),
}


def random_resource_params(rng, ranges=None):
    """One uniform draw of :class:`ResourceParams` from ``ranges``."""
    r = dict(DEFAULT_RANGES)
    if ranges:
        r.update(ranges)
    for key, (lo, hi) in r.items():
        if hi < lo:
            raise ParameterError(f"empty range for {key}: {lo} > {hi}")
    return ResourceParams(
        s1=rng.uniform(*r["s"]),
        s2=rng.uniform(*r["s"]),
        phi1=rng.uniform(*r["phi"]),
        phi2=rng.uniform(*r["phi"]),
        transmittivity=rng.uniform(*r["transmittivity"]),
        nbar1=rng.uniform(*r["nbar"]),
        nbar2=rng.uniform(*r["nbar"]),
    )


def random_resource(seed, ranges=None, max_tries=1000, return_params=False):
    """Seeded random entangled resource built by :func:`make_squeezed_thermal_bs`.

    Draws are repeated until the state is entangled.  ``seed`` may be an int or
    a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        p = random_resource_params(rng, ranges)
        v = make_squeezed_thermal_bs(p)
        if is_entangled(to_standard_form(v)[0]):
            return (v, p) if return_params else v
    raise SamplingError(f"{max_tries} consecutive separable draws")
