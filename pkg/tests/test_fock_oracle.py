import math

import numpy as np
import pytest

from cvtransfer.errors import ConsistencyError, CutoffError, DomainError, ParameterError
from cvtransfer.fock_oracle import (
    FockTwoModeState,
    annihilation,
    cv_log_negativity,
    gamma_oracle,
    jc_evolve_trace,
    jc_propagator,
    photon_subtract_fock,
    second_moments,
    thermal_product_fock,
    thermal_weights,
    tmsv_fock,
)
from cvtransfer.gamma_engine import Cutoffs, series_families
from cvtransfer.gaussian_core import make_tmsv
from cvtransfer.nongaussian import subtracted_tmsv_fock
from cvtransfer.transfer import negativity


def test_tmsv_fock():
    vac = tmsv_fock(0.0, 10)
    assert vac.amplitudes[0, 0] == 1.0 and np.abs(vac.amplitudes).sum() == 1.0
    st = tmsv_fock(0.86, 60)
    assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0, abs=1e-12)
    p = st.populations()
    for n in range(5):
        assert p[n, n] == pytest.approx(math.tanh(0.86) ** (2 * n) / math.cosh(0.86) ** 2, abs=1e-12)
    with pytest.raises(CutoffError):
        tmsv_fock(1.5, 20)


def test_populations_agree_with_series():
    st = tmsv_fock(0.86)
    fam = series_families(make_tmsv(0.86), Cutoffs(20, 20, 400))
    np.testing.assert_allclose(st.populations()[:21, :21], fam["diag"], atol=1e-8)


def test_thermal_weights():
    assert thermal_weights(0.0, 0) == 1.0 and thermal_weights(0.0, 3) == 0.0
    assert thermal_weights(1.0, np.arange(81)).sum() == pytest.approx(1.0, abs=1e-10)
    assert thermal_weights(0.5, 1) == pytest.approx(0.5 / 2.25)
    with pytest.raises(ParameterError):
        thermal_weights(-1.0, 0)


def test_photon_subtraction():
    z = 0.6
    st = tmsv_fock(z)
    assert photon_subtract_fock(st, 0) is st
    sub = photon_subtract_fock(st, 1)
    t = math.tanh(z)
    amp = np.diag(sub.amplitudes)
    ref = np.array([(n + 1) * t ** (n + 1) for n in range(amp.size)])
    np.testing.assert_allclose(amp, ref / np.linalg.norm(ref), atol=1e-14)
    assert np.linalg.norm(sub.amplitudes) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        photon_subtract_fock(tmsv_fock(0.0, 5), 1)


def test_state_validation():
    with pytest.raises(ParameterError):
        FockTwoModeState()
    with pytest.raises(ParameterError):
        FockTwoModeState(density=np.ones((2, 2, 2, 3)))


def test_propagator_unitary_and_structure():
    u = jc_propagator(6, 1.3)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(14), atol=1e-12)
    # |g, n> -> cos(tau sqrt n)|g, n> - i sin(tau sqrt n)|e, n-1>
    col = u[:, 3]  # |g, 3>
    assert col[3] == pytest.approx(math.cos(1.3 * math.sqrt(3)))
    assert col[7 + 2] == pytest.approx(-1j * math.sin(1.3 * math.sqrt(3)))


def test_evolve_trivial_cases():
    st = tmsv_fock(0.86)
    rho = jc_evolve_trace(st, 0.0)
    assert (rho.A, rho.B, rho.C, rho.E) == pytest.approx((1, 0, 0, 0), abs=1e-14)
    vac = jc_evolve_trace(tmsv_fock(0.0, 5), 2.2)
    assert vac.A == pytest.approx(1.0, abs=1e-14)


def test_evolve_mixed_equals_pure():
    st = tmsv_fock(0.5, 20)
    a = st.amplitudes
    mixed = FockTwoModeState(density=np.einsum("nm,pq->nmpq", a, a.conj()))
    for tau in (0.4, 1.9):
        x, y = jc_evolve_trace(st, tau), jc_evolve_trace(mixed, tau)
        assert (x.A, x.B, x.C, x.E, x.G, x.D) == pytest.approx((y.A, y.B, y.C, y.E, y.G, y.D), abs=1e-12)


def test_evolve_non_x_state_raises():
    amp = np.zeros((4, 4))
    amp[0, 0] = amp[1, 0] = 1.0  # coherent superposition across photon-number parity
    with pytest.raises(ConsistencyError):
        jc_evolve_trace(FockTwoModeState(amplitudes=amp), 1.0)


def test_gamma_oracle_shapes_and_values():
    st = tmsv_fock(0.4, 30)
    g = gamma_oracle(st)
    assert set(g) == {"diag", "ge", "eg", "ggee", "geeg"}
    assert g["diag"].shape == (30, 30)
    t, c2 = math.tanh(0.4), 1 / math.cosh(0.4) ** 2
    assert g["ggee"][2, 2] == pytest.approx(c2 * t ** 5)


def test_log_negativity():
    assert cv_log_negativity(tmsv_fock(0.0, 5)) == 0.0
    z = 0.86
    t, s = math.tanh(z), 1 / math.cosh(z)
    closed = 2 * math.log2(sum(s * t ** n for n in range(400)))
    assert cv_log_negativity(tmsv_fock(z, 60)) == pytest.approx(closed, abs=1e-8)
    assert cv_log_negativity(tmsv_fock(z, 120)) == pytest.approx(closed, abs=1e-8)
    # log-negativity of the squeezed vacuum is 2 zeta / ln 2
    assert closed == pytest.approx(2 * z / math.log(2), abs=1e-10)
    assert cv_log_negativity(subtracted_tmsv_fock(z, 1)) > closed


def test_log_negativity_mixed_path():
    st = tmsv_fock(0.3, 14)
    a = st.amplitudes
    mixed = FockTwoModeState(density=np.einsum("nm,pq->nmpq", a, a.conj()))
    assert cv_log_negativity(mixed) == pytest.approx(cv_log_negativity(st), abs=1e-10)


def test_second_moments():
    np.testing.assert_allclose(second_moments(tmsv_fock(0.0, 4)).v, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(second_moments(tmsv_fock(0.86)).v, make_tmsv(0.86).matrix(), atol=1e-8)
    th = thermal_product_fock(1.0, 1.0, 60)
    v = second_moments(th, tail_tol=1e-9).v
    np.testing.assert_allclose(v, 3 * np.eye(4), atol=1e-8)


def test_second_moments_tail_check():
    with pytest.raises(CutoffError):
        second_moments(FockTwoModeState(amplitudes=np.ones((3, 3))))


def test_second_moments_pure_and_mixed_agree():
    st = subtracted_tmsv_fock(0.4, 1, N_F=14)
    a = st.amplitudes
    mixed = FockTwoModeState(density=np.einsum("nm,pq->nmpq", a, a.conj()))
    np.testing.assert_allclose(second_moments(st, 1e-6).v, second_moments(mixed, 1e-6).v, atol=1e-12)


@pytest.mark.parametrize("zeta", [0.3, 0.86])
def test_truncation_doubling_stability(zeta):
    tol = 1e-9
    base = tmsv_fock(zeta)
    N = base.truncation
    big = tmsv_fock(zeta, 2 * N)
    assert cv_log_negativity(big) == pytest.approx(cv_log_negativity(base), abs=10 * tol)
    np.testing.assert_allclose(second_moments(big).v, second_moments(base).v, atol=10 * tol)
    for tau in (0.8, 3.3):
        assert negativity(jc_evolve_trace(big, tau)) == pytest.approx(negativity(jc_evolve_trace(base, tau)), abs=10 * tol)
    sub = subtracted_tmsv_fock(zeta, 1)
    sub2 = subtracted_tmsv_fock(zeta, 1, N_F=2 * sub.truncation)
    assert cv_log_negativity(sub2) == pytest.approx(cv_log_negativity(sub), abs=10 * tol)
    ga, gb = gamma_oracle(base), gamma_oracle(big)
    for k in ga:
        np.testing.assert_allclose(gb[k][:N, :N], ga[k], atol=10 * tol)


def test_annihilation():
    a = annihilation(3)
    np.testing.assert_allclose(a.T @ a, np.diag([0, 1, 2, 3]))
