import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtransfer.errors import ConsistencyError, ParameterError, TruncationError
from cvtransfer.fock_oracle import jc_evolve_trace, tmsv_fock
from cvtransfer.gamma_engine import Cutoffs, build_table
from cvtransfer.gaussian_core import StandardForm, make_tmsv
from cvtransfer.nongaussian import formal_subtract
from cvtransfer.transfer import (
    QubitXState,
    TransferCurve,
    assemble_state,
    default_tau_grid,
    jc_amplitudes,
    negativity,
    partial_transpose,
    pt_eigenvalues,
    transfer_curve,
)


@pytest.fixture(scope="module")
def tmsv_table():
    sf = make_tmsv(0.86)
    return build_table(sf, Cutoffs.auto(sf), method="series")


def random_xstate(rng):
    pops = rng.dirichlet(np.ones(4))
    a, b, c, e = pops
    g = rng.uniform(-1, 1) * math.sqrt(a * e)
    d = rng.uniform(-1, 1) * math.sqrt(b * c)
    return QubitXState(a, b, c, e, g, d)


def test_jc_amplitudes():
    assert jc_amplitudes(0, 1.7) == (1.0, 0.0)
    c, s = jc_amplitudes(1, math.pi / 2)
    assert c == pytest.approx(0.0, abs=1e-15) and s == pytest.approx(1.0)
    c, s = jc_amplitudes(4, math.pi)
    assert c == pytest.approx(1.0) and s == pytest.approx(0.0, abs=1e-15)
    c, s = jc_amplitudes(2, 3.0, signed=False)
    assert s >= 0 and s == pytest.approx(abs(math.sin(3.0 * math.sqrt(2))))
    with pytest.raises(ParameterError):
        jc_amplitudes(-1, 0.3)


def test_xstate_validation():
    with pytest.raises(ParameterError):
        QubitXState(0.5, 0.2, 0.2, 0.2)
    with pytest.raises(ParameterError):
        QubitXState(0.25, 0.25, 0.25, 0.25, G=0.5)
    with pytest.raises(ConsistencyError):
        QubitXState.from_matrix(np.full((4, 4), 0.25))
    rho = QubitXState(0.4, 0.1, 0.1, 0.4, 0.3, 0.05)
    assert QubitXState.from_matrix(rho.matrix()) == rho


def test_negativity_examples():
    assert negativity(QubitXState(0.5, 0, 0, 0.5, 0.5, 0)) == pytest.approx(1.0)
    assert negativity(QubitXState(1, 0, 0, 0)) == 0.0
    assert negativity(QubitXState(0.4, 0.1, 0.1, 0.4, 0.3, 0.0)) == pytest.approx(0.4)


def test_pt_closed_form_vs_eigensolve_1000():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        rho = random_xstate(rng)
        m = rho.matrix()
        assert np.trace(m) == pytest.approx(1.0, abs=1e-12)
        ref = np.sort(np.linalg.eigvalsh(partial_transpose(m)))
        np.testing.assert_allclose(np.sort(pt_eigenvalues(rho)), ref, atol=1e-10)
        assert negativity(rho, check=True) == pytest.approx(2 * max(0.0, -ref[0]), abs=1e-10)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_negativity_range_and_ppt(seed):
    rho = random_xstate(np.random.default_rng(seed))
    n = negativity(rho)
    assert 0.0 <= n <= 1.0
    if abs(rho.G) <= math.sqrt(rho.B * rho.C) and abs(rho.D) <= math.sqrt(rho.A * rho.E):
        assert n == pytest.approx(0.0, abs=1e-15)


def test_assemble_at_zero_time(tmsv_table):
    s = assemble_state(tmsv_table, 0.0)
    assert (s.A, s.B, s.C, s.G, s.D) == pytest.approx((1, 0, 0, 0, 0), abs=1e-9)
    assert s.E == pytest.approx(0.0, abs=1e-9)


def test_vacuum_transfers_nothing():
    t = build_table(make_tmsv(0.0), method="series")
    for tau in (0.3, 2.0, 5.5):
        s = assemble_state(t, tau)
        assert s.A == 1.0 and s.E == 0.0
    assert np.all(transfer_curve(t).negativity == 0.0)


def test_assemble_matches_fock_oracle(tmsv_table):
    state = tmsv_fock(0.86)
    for tau in np.linspace(0.0, 2 * math.pi, 9):
        ours = assemble_state(tmsv_table, tau)
        ref = jc_evolve_trace(state, tau)
        for k in "ABCEGD":
            assert getattr(ours, k) == pytest.approx(getattr(ref, k), abs=1e-6)


def test_complement_consistency(tmsv_table):
    t = tmsv_table
    for tau in (0.7, 2.9):
        s = assemble_state(t, tau)
        n = np.arange(t.cutoffs.n_c + 1)
        m = np.arange(t.cutoffs.m_c + 1)
        _, s1 = jc_amplitudes(n + 1, tau)
        _, s2 = jc_amplitudes(m + 1, tau)
        pop = t.diag  # gamma^{n+1,m+1}_{n+1,m+1} = diag shifted by one in both indices
        direct = np.einsum("n,nm,m->", s1[:-1] ** 2, pop[1:, 1:], s2[:-1] ** 2)
        assert s.E == pytest.approx(direct, abs=abs(t.deficit) + 1e-9)


def test_transfer_curve_thermalized_above_threshold():
    k = 1 + 2 * 2.5
    base = make_tmsv(0.86)
    sf = StandardForm(k * base.n1, k * base.n2, k * base.m_plus, k * base.m_minus)
    curve = transfer_curve(build_table(sf, Cutoffs.auto(sf), method="series"))
    assert curve.negativity.max() < 1e-6


def test_no_periodicity(tmsv_table):
    taus = np.linspace(0.5, 3.0, 20)
    a = transfer_curve(tmsv_table, taus).negativity
    b = transfer_curve(tmsv_table, taus + 2 * math.pi).negativity
    assert np.abs(a - b).max() > 1e-3


def test_transfer_curve_object(tmsv_table):
    curve = transfer_curve(tmsv_table, keep_states=True)
    assert len(curve.tau_grid) == 200 and curve.tau_grid[-1] == pytest.approx(2 * math.pi)
    assert np.all((curve.negativity >= 0) & (curve.negativity <= 1))
    assert len(curve.states) == 200
    assert curve.to_csv().splitlines()[0] == "tau,negativity"
    with pytest.raises(ParameterError):
        TransferCurve([0.0, 1.0], [0.0])
    with pytest.raises(ParameterError):
        transfer_curve(tmsv_table, [-1.0])


def test_truncated_table_raises():
    src = build_table(make_tmsv(0.86), Cutoffs(4, 4, 100), method="series", eps_trunc=math.inf)
    with pytest.raises(TruncationError) as info:
        transfer_curve(formal_subtract(src, 1), default_tau_grid(50))
    assert info.value.achieved > 1e-6
