"""Acceptance suite: one test per numbered criterion.

Every test records a PASS/FAIL line with the measured numbers (shown in the
terminal summary and with ``-s``) and then asserts.  Thresholds are fixed
here and are not relaxed when a quantity misses them; the reason for each
known miss is documented in the decisions ledger.

Run on its own with ``pytest tests/test_acceptance.py -v`` (a few minutes
on one core, dominated by criterion 8).
"""

import math
import time

import numpy as np
import pytest

from cvtransfer import experiments as ex
from cvtransfer.fock_oracle import (
    cv_log_negativity,
    jc_evolve_trace,
    second_moments,
    tmsv_fock,
)
from cvtransfer.gamma_engine import (
    Cutoffs,
    build_table,
    gamma_quadrature_tables,
    series_families,
)
from cvtransfer.gaussian_core import (
    SymplecticOp,
    dissipate,
    dissipation_threshold,
    make_tmsv,
    nu_minus,
    random_resource,
    rotation,
    thermal_threshold,
    to_standard_form,
)
from cvtransfer.nongaussian import (
    degauss_difference,
    formal_subtract,
    max_transfer,
    physical_subtract,
    random_max_scan,
    subtracted_tmsv_fock,
    subtraction_cutoffs,
)
from cvtransfer.transfer import (
    QubitXState,
    default_tau_grid,
    partial_transpose,
    pt_eigenvalues,
    transfer_curve,
)

pytestmark = pytest.mark.acceptance

ZETA = 0.86
BIG_N = 0.1


@pytest.fixture(autouse=True)
def _serial(monkeypatch):
    monkeypatch.setenv(ex.WORKERS_ENV, "1")


# ---------------------------------------------------------------------------


def test_criterion_01_normalization_window(record_criterion):
    cut = Cutoffs(25, 25, 100)
    start = time.perf_counter()
    grid = np.round(np.arange(0.0, 1.5 + 1e-9, 0.05), 10)
    norms = np.array([series_families(make_tmsv(z), cut)["diag"].sum() for z in grid])
    at_two = float(series_families(make_tmsv(2.0), cut)["diag"].sum())
    elapsed = time.perf_counter() - start
    worst = int(np.argmin(norms))
    ok = norms.min() >= 0.99 and at_two <= 0.95 and elapsed < 30.0
    record_criterion(
        1, ok,
        f"min sum {norms[worst]:.6f} at zeta={grid[worst]:.2f} (>= 0.99); "
        f"sum at zeta=2: {at_two:.4f} (<= 0.95); {elapsed:.1f} s (< 30 s)",
    )
    assert ok


def test_criterion_02_vacuum_population_anchor(record_criterion):
    errs = {}
    for z in (0.2, 0.86, 1.2):
        fam = series_families(make_tmsv(z), Cutoffs(25, 25, 100))
        errs[z] = abs(fam["diag"][0, 0] - 1.0 / math.cosh(z) ** 2)
    worst = max(errs.values())
    ok = worst <= 1e-10
    record_criterion(2, ok, "|gamma00 - sech^2| = " + ", ".join(f"{e:.1e} (zeta={z})" for z, e in errs.items()))
    assert ok


def test_criterion_03_threshold_anchors(record_criterion):
    nu = nu_minus(make_tmsv(ZETA))
    nu_err = abs(nu - math.exp(-2 * ZETA))
    nbar_star = thermal_threshold(ZETA)
    gt_star = dissipation_threshold(ZETA, BIG_N)
    sf_star, _ = to_standard_form(dissipate(make_tmsv(ZETA).covariance(), BIG_N, gt_star))
    nu_star = nu_minus(sf_star)
    parts = {
        "nu_minus": nu_err <= 1e-12,
        "thermal": abs(nbar_star - 2.292) <= 1e-3,
        "dissipation": abs(gt_star - 0.52) <= 5e-3,
        "crossing": abs(nu_star - 1.0) <= 1e-6,
    }
    ok = all(parts.values())
    record_criterion(
        3, ok,
        f"|nu- - e^-1.72| = {nu_err:.1e} [{'ok' if parts['nu_minus'] else 'miss'}]; "
        f"thermal threshold {nbar_star:.5f} [{'ok' if parts['thermal'] else 'miss'}]; "
        f"dissipation threshold {gt_star:.6f} vs 0.52 +- 0.005 [{'ok' if parts['dissipation'] else 'miss'}]; "
        f"nu- at that time {nu_star:.6f} vs 1 [{'ok' if parts['crossing'] else 'miss'}]",
    )
    assert ok


def test_criterion_04_oracle_equivalence(record_criterion):
    start = time.perf_counter()
    table = ex.oracle_check(tolerance=1e-6)
    elapsed = time.perf_counter() - start
    names = table.metadata["checks"]
    devs = {names[int(i)]: float(d) for i, d in zip(table["check"], table["deviation"])}
    curves = {k: v for k, v in devs.items() if "curve" in k}
    ok = all(v <= 1e-6 for v in curves.values()) and elapsed < 120.0
    record_criterion(
        4, ok,
        "sup-norm " + ", ".join(f"{k} {v:.1e}" for k, v in curves.items()) + f"; {elapsed:.1f} s (< 120 s)",
    )
    assert ok


def test_criterion_05_thermal_surface(record_criterion):
    table = ex.run(ex.ExperimentSpec("thermal-surface", grids={"zeta": [ZETA]}))
    nbars, _, grid = table.pivot("nbar", "tau", "negativity")
    peaks = grid.max(axis=1)
    rises = np.diff(peaks)
    monotone = bool(np.all(rises <= 1e-9))
    beyond = grid[nbars >= 2.35]
    vanishes = bool(beyond.size and beyond.max() < 1e-3)
    ok = monotone and vanishes
    record_criterion(
        5, ok,
        f"max over tau nonincreasing in nbar on {nbars.size} points (largest rise {rises.max():.1e}); "
        f"largest value for nbar >= 2.35: {beyond.max():.1e} (< 1e-3)",
    )
    assert ok


def test_criterion_06_dissipation_surface(record_criterion):
    gts = np.round(np.arange(0.55, 0.6 + 1e-9, 0.01), 10)
    sfs = [to_standard_form(dissipate(make_tmsv(ZETA).covariance(), BIG_N, g))[0] for g in gts]
    peaks = np.array([max_transfer(build_table(sf, Cutoffs.auto(sf), method="series")) for sf in sfs])
    ok = bool(peaks.max() < 1e-3)
    record_criterion(
        6, ok,
        "max over tau of negativity: " + ", ".join(f"{p:.3f} (Gt={g:.2f})" for g, p in zip(gts[:3], peaks[:3]))
        + f", ... {peaks[-1]:.3f} (Gt=0.60); needs < 1e-3",
    )
    assert ok


@pytest.fixture(scope="module")
def ordering_scan():
    rows = []
    for z in np.round(np.arange(0.1, 2.0 + 1e-9, 0.1), 10):
        sf = make_tmsv(z)
        src = build_table(sf, subtraction_cutoffs(sf, 1), method="series")
        g = max_transfer(src)
        ng = max_transfer(formal_subtract(src, 1))
        ln0 = cv_log_negativity(tmsv_fock(z))
        ln1 = cv_log_negativity(subtracted_tmsv_fock(z, 1))
        rows.append((z, g, ng, ln0, ln1))
    return rows


def test_criterion_07_degauss_ordering(record_criterion, ordering_scan):
    exceed = [(z, ng - g) for z, g, ng, _, _ in ordering_scan if ng > g + 1e-6]
    not_reversed = [z for z, _, _, ln0, ln1 in ordering_scan if not ln1 > ln0]
    ok = not exceed and not not_reversed
    detail = (
        f"s=1 exceeds the Gaussian maximum at {len(exceed)}/{len(ordering_scan)} zeta values"
        + (f" (largest excess {max(e for _, e in exceed):.3f} at zeta={max(exceed, key=lambda r: r[1])[0]:.1f})"
           if exceed else "")
        + f"; log-negativity reversal holds at {len(ordering_scan) - len(not_reversed)}/{len(ordering_scan)}"
    )
    record_criterion(7, ok, detail)
    assert ok


def test_criterion_08_difference_morphology(record_criterion):
    zetas = ex.DEFAULT_GRIDS["zeta"]
    taus = default_tau_grid()
    report, ok = [], True
    for s, limit in ((1, 0.5), (7, 0.3)):
        table = degauss_difference(zetas, taus, s=s)
        bad = table["value"] < -1e-6
        frac_ok = 1.0 - bad.mean()
        zmax = float(table["zeta"][bad].max()) if bad.any() else float("nan")
        cond = zmax < limit if bad.any() else True
        if s == 1:
            cond = cond and frac_ok >= 0.90
        ok = ok and cond
        report.append(
            f"s={s}: {100 * frac_ok:.1f}% of cells with difference >= -1e-6, "
            f"violations reach zeta={zmax:.3f} (limit {limit})"
        )
    record_criterion(8, ok, "; ".join(report))
    assert ok


def test_criterion_09_random_monotonicity(record_criterion):
    table = random_max_scan(seed=0, count=22)
    m = table["max_negativity"].reshape(22, 5)
    steps = np.diff(m, axis=1)
    bad = np.argwhere(steps > 1e-9)
    frac = 1.0 - len(bad) / steps.size
    ok = frac >= 0.95
    detail = f"{100 * frac:.1f}% of {steps.size} consecutive pairs nonincreasing"
    if len(bad):
        detail += "; exceptions: " + ", ".join(
            f"resource {r} s={s}->{s + 1}: {m[r, s]:.6g} -> {m[r, s + 1]:.6g}" for r, s in bad
        )
    record_criterion(9, ok, detail)
    assert ok


def test_criterion_10_physical_vs_formal(record_criterion):
    sf = make_tmsv(ZETA)
    src = build_table(sf, subtraction_cutoffs(sf, 1), method="series")
    formal = formal_subtract(src, 1)
    taus = default_tau_grid()
    ref = transfer_curve(formal, taus).negativity
    sup = float(np.abs(transfer_curve(physical_subtract(src, 0.9999, 1), taus).negativity - ref).max())
    gaps = []
    for e in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        phys = physical_subtract(src, 1.0 - e, 1)
        gaps.append(max(float(np.abs(getattr(phys, f) - getattr(formal, f)).max())
                        for f in ("diag", "ge", "eg", "ggee", "geeg")))
    converging = all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-5
    ok = sup <= 1e-3 and converging
    record_criterion(
        10, ok,
        f"sup-norm at T=0.9999: {sup:.1e} (<= 1e-3); largest entry gap for 1-T = 1e-2..1e-7: "
        + ", ".join(f"{g:.1e}" for g in gaps),
    )
    assert ok


def test_criterion_11_selection_rules(record_criterion):
    odd = [(0, 1), (1, 0), (0, -1), (-1, 0), (1, 2), (2, 1), (1, -2), (-2, 1), (2, -1), (-1, 2), (3, 0), (0, 3)]
    worst, even_20 = 0.0, 0.0
    for seed in range(5):
        sf, _ = to_standard_form(random_resource(seed))
        tabs = gamma_quadrature_tables(sf, odd + [(2, 0)], 3, 3)
        worst = max(worst, max(float(np.abs(tabs[k]).max()) for k in odd))
        even_20 = max(even_20, float(np.abs(tabs[(2, 0)]).max()))
    ok = worst < 1e-10
    record_criterion(
        11, ok,
        f"largest |gamma| over {len(odd)} odd-parity shifts, n,m <= 3, 5 resources: {worst:.1e} (< 1e-10); "
        f"for reference the even shift (2,0) reaches {even_20:.3f}",
    )
    assert ok


def _random_local_symplectic(rng):
    def single():
        r = rng.uniform(-1.0, 1.0)
        return rotation(rng.uniform(0, 2 * math.pi)) @ np.diag([math.exp(r), math.exp(-r)]) @ rotation(
            rng.uniform(0, 2 * math.pi))
    return SymplecticOp.local(single(), single())


def test_criterion_12_property_suites(record_criterion):
    rng = np.random.default_rng(12)
    results = {}

    dev = 0.0
    for seed in range(50):
        v = random_resource(seed)
        moved = _random_local_symplectic(rng).act(v)
        dev = max(dev, abs(nu_minus(moved) - nu_minus(v)))
    results["symplectic invariance"] = (dev, 1e-9)

    dev = 0.0
    for seed in range(50):
        v = random_resource(seed)
        t1, t2, bath = rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 1)
        two = dissipate(dissipate(v, bath, t1), bath, t2).v
        dev = max(dev, float(np.abs(two - dissipate(v, bath, t1 + t2).v).max()))
    results["dissipation semigroup"] = (dev, 1e-12)

    dev = 0.0
    for _ in range(1000):
        p = rng.dirichlet(np.ones(4))
        rho = QubitXState(*p, G=rng.uniform(-1, 1) * math.sqrt(p[0] * p[3]),
                          D=rng.uniform(-1, 1) * math.sqrt(p[1] * p[2]))
        ev = np.linalg.eigvalsh(partial_transpose(rho.matrix()))
        dev = max(dev, float(np.abs(np.sort(pt_eigenvalues(rho)) - ev).max()))
    results["X-state partial transpose"] = (dev, 1e-12)

    dev = 0.0
    for seed in range(5):
        sf, _ = to_standard_form(random_resource(seed))
        t = build_table(sf, Cutoffs.auto(sf), method="series")
        d = t.diag
        dev = max(dev, float(-d.min()),
                  float((t.ggee[:-1, :-1] ** 2 - d[:-1, :-1] * d[1:, 1:]).max()),
                  float((t.geeg ** 2 - t.ge * t.eg).max()))
    results["table positivity and Cauchy-Schwarz"] = (max(dev, 0.0), 1e-12)

    dev = 0.0
    for z in (0.3, ZETA):
        small = tmsv_fock(z)
        big = tmsv_fock(z, 2 * small.truncation)
        dev = max(dev, abs(cv_log_negativity(small) - cv_log_negativity(big)))
        dev = max(dev, float(np.abs(second_moments(small).v - second_moments(big).v).max()))
        for tau in (0.7, 2.1, 4.4):
            r1, r2 = jc_evolve_trace(small, tau), jc_evolve_trace(big, tau)
            dev = max(dev, max(abs(getattr(r1, f) - getattr(r2, f)) for f in "ABCEGD"))
        s_small = subtracted_tmsv_fock(z, 1)
        s_big = subtracted_tmsv_fock(z, 1, 2 * s_small.truncation)
        dev = max(dev, abs(cv_log_negativity(s_small) - cv_log_negativity(s_big)))
    results["truncation doubling of oracle values"] = (dev, 1e-10)

    ok = all(v <= tol for v, tol in results.values())
    record_criterion(12, ok, "; ".join(f"{k} {v:.1e} (<= {tol:.0e})" for k, (v, tol) in results.items()))
    assert ok
