"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import itertools
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from sgmagnetic.decimation import (
    DecimationRecord,
    decimation_multiset,
    five_series_chain_basis,
    gauge_transport,
    predicted_fixed_count,
)
from sgmagnetic.forms import (
    BETA_PERIOD,
    SQRT30,
    FieldSpec,
    VertexFunction,
    derivative,
    flux,
    graph_laplacian_matrix,
    h_norm,
    hodge_dimensions,
    random_form,
    refine,
    trace,
)
from sgmagnetic.ladder import crosscheck_neumann
from sgmagnetic.magnetic import (
    beta_sweep,
    counting_function,
    eigenvalues,
    magnetic_matrix,
    magnetic_residual,
    matrix_from_form,
    multiset_contains,
    split_fixed_moving,
    weyl_bounds,
)
from sgmagnetic.topology import gasket, holes


@pytest.fixture
def report(capsys):
    """Print one line per criterion, visible under plain ``pytest -v``."""

    def emit(n, ok, detail, seconds):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({seconds:.1f}s)")

    return emit


@lru_cache(maxsize=None)
def sweep(m, steps, boundary="dirichlet"):
    return beta_sweep(m, "", np.linspace(0, 2, steps), boundary)


def count_gap(a, b, lo, hi):
    """sup over x in [lo, hi] of |#{a <= x} - #{b <= x}|; both counts are step functions."""
    pts = np.unique(np.concatenate([a, b, [lo, hi]]))
    pts = pts[(pts >= lo) & (pts <= hi)]
    xs = np.concatenate([pts, (pts[1:] + pts[:-1]) / 2])
    return max(abs(counting_function(a, x) - counting_function(b, x)) for x in xs)


def test_criterion_1_level1_closed_form(report):
    t = time.perf_counter()
    worst = 0.0
    for beta in np.linspace(0, 2, 50):
        got = eigenvalues(magnetic_matrix(1, FieldSpec.single("", beta)))
        want = np.sort([4 - 2 * math.cos(2 * math.pi * k / 3 + 2 * beta / SQRT30) for k in range(3)])
        worst = max(worst, float(np.max(np.abs(got - want))))
    dt = time.perf_counter() - t
    ok = worst <= 1e-10 and dt < 1
    report(1, ok, f"level-1 closed form over 50 betas, max error {worst:.1e}", dt)
    assert worst <= 1e-10
    assert dt < 1


def test_criterion_2_gauge_invariance(report):
    t = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for m in range(2, 6):
        lap = np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
        for _ in range(20):
            A = VertexFunction(m, rng.uniform(-10, 10, gasket(m).n_vertices))
            worst = max(worst, float(np.max(np.abs(eigenvalues(matrix_from_form(derivative(A))) - lap))))
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and dt < 60
    report(2, ok, f"spec(M^dA) = spec(Delta) for 20 potentials at m=2..5, max error {worst:.1e}", dt)
    assert worst <= 1e-9
    assert dt < 60


def test_criterion_3_flux_periodicity(report):
    t = time.perf_counter()
    betas = np.linspace(0, 2, 10)
    a = beta_sweep(4, "", betas)
    b = beta_sweep(4, "", betas + BETA_PERIOD)
    worst = max(float(np.max(np.abs(r.raw - s.raw))) for r, s in zip(a.rows, b.rows))
    dt = time.perf_counter() - t
    ok = worst <= 1e-8 and dt < 60
    report(3, ok, f"level 4, beta vs beta + {BETA_PERIOD:.6f} at 10 betas, max shift {worst:.1e}", dt)
    assert worst <= 1e-8
    assert dt < 60


def test_criterion_4_decimation_oracle(report):
    t = time.perf_counter()
    worst, counts_ok = 0.0, True
    for m in (2, 3, 4):
        dense = np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
        dec = decimation_multiset(m)
        counts_ok &= len(dense) == len(dec) == (3 ** (m + 1) - 3) // 2
        worst = max(worst, float(np.max(np.abs(dense - dec))))
        # multiplicities: the same cluster sizes on both sides
        _, nd = np.unique(np.round(dense, 8), return_counts=True)
        _, nc = np.unique(np.round(dec, 8), return_counts=True)
        counts_ok &= np.array_equal(nd, nc)
    dt = time.perf_counter() - t
    ok = counts_ok and worst <= 1e-9 and dt < 120
    report(4, ok, f"decimation multiset = dense spectrum for m=2,3,4, max error {worst:.1e}", dt)
    assert counts_ok
    assert worst <= 1e-9
    assert dt < 120


def test_criterion_5_fixed_eigenvalues(report):
    t = time.perf_counter()
    m = 4
    table = beta_sweep(m, "", np.linspace(0, 2, 21))
    fixed, _ = split_fixed_moving([r.renormalized for r in table.rows], 1e-6)
    lap = 1.5 * 5 ** m * np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
    subset = multiset_contains(lap, fixed, 1e-6)
    predicted = predicted_fixed_count(m, FieldSpec.single("", 1.0))
    # every 5-series chain function born at m0 = 2..4, carried to level 4 and gauge transported
    spec = FieldSpec.single("", 1.3)
    M = magnetic_matrix(m, spec)
    worst, n = 0.0, 0
    for m0 in (2, 3, 4):
        for w in map("".join, itertools.product("-+", repeat=m - m0)):
            try:
                rec = DecimationRecord(m0, 5, w)
            except ValueError:
                continue
            for _, _, f in five_series_chain_basis(m0, rec):
                g = gauge_transport(f, spec)
                worst = max(worst, magnetic_residual(M, g, rec.value_at(m)))
                n += 1
    dt = time.perf_counter() - t
    ok = subset and len(fixed) == predicted and worst <= 1e-9 and dt < 300
    report(
        5, ok,
        f"level 4 central hole: {len(fixed)} fixed (predicted {predicted}), subset of Delta_4: {subset}, "
        f"{n} transported 5-series functions, max residual {worst:.1e}",
        dt,
    )
    assert subset
    assert len(fixed) == predicted
    assert worst <= 1e-9
    assert dt < 300


def test_criterion_6_weyl(report):
    t = time.perf_counter()
    lam = sweep(6, 21).rows[0].renormalized
    lo, hi = lam[0], 0.1 * lam[-1]
    c1, c2 = weyl_bounds(lam, lo, hi)
    ratio = c2 / c1
    bounded = True
    fractions = []
    for m in (3, 4, 5, 6):
        sp = [r.renormalized for r in sweep(m, 21).rows]
        _, moving = split_fixed_moving(sp, 1e-6)
        lo_m, hi_m = sp[0][0], 0.1 * sp[0][-1]
        gap = max(count_gap(s, sp[0], lo_m, hi_m) for s in sp)
        if m == 6:
            bounded = gap <= len(moving)
            gap6, moving6 = gap, len(moving)
        else:
            fractions.append(gap / len(sp[0]))
    decreasing = all(a > b for a, b in zip(fractions, fractions[1:]))
    dt = time.perf_counter() - t
    ok = c1 > 0 and ratio < 3 and bounded and decreasing and dt < 600
    report(
        6, ok,
        f"level 6 Weyl ratio in [{c1:.5f}, {c2:.5f}], c2/c1 = {ratio:.4f} (need < 3); "
        f"count gap {gap6} <= {moving6} moving: {bounded}; gap/total over m=3,4,5 "
        f"{', '.join(f'{x:.4f}' for x in fractions)} decreasing: {decreasing}",
        dt,
    )
    assert c1 > 0
    assert ratio < 3
    assert bounded
    assert decreasing
    assert dt < 600


def test_criterion_7_sweep_structure(report):
    t = time.perf_counter()
    cutoff = 160.0
    per_level = {}
    continuous = True
    for m in (4, 5, 6):
        table = sweep(m, 81)
        rows = table.rows
        sp = [r.renormalized[r.renormalized <= cutoff] for r in rows]
        full = [r.renormalized for r in rows]
        fixed, moving = split_fixed_moving(full, 1e-6)
        per_level[m] = (fixed[fixed <= cutoff], moving[moving <= cutoff], fixed)
        # each eigenvalue moves by at most ||M(beta') - M(beta)||, itself at most the max row sum
        prev = magnetic_matrix(m, FieldSpec.single("", rows[0].beta)).matrix
        for r, s in zip(rows, rows[1:]):
            cur = magnetic_matrix(m, FieldSpec.single("", s.beta)).matrix
            bound = 1.5 * 5 ** m * (float(np.abs(cur - prev).sum(axis=1).max()) + 1e-12)
            continuous &= float(np.max(np.abs(s.renormalized - r.renormalized))) <= bound
            prev = cur
        continuous &= all(len(x) > 0 for x in sp)
    horizontal = all(len(per_level[m][0]) > 0 for m in (4, 5, 6))
    branches = all(len(per_level[m][1]) > 0 for m in (4, 5, 6))
    refines = True
    for m in (4, 5):
        nxt = per_level[m + 1][0]
        for v in per_level[m][0]:
            refines &= len(nxt) > 0 and float(np.min(np.abs(nxt - v)) / v) <= 1e-3
    dt = time.perf_counter() - t
    ok = horizontal and branches and continuous and refines and dt < 4 * 3600
    lows = ", ".join(f"m={m}: {per_level[m][2][0]:.2f}" for m in (4, 5, 6))
    drift = ", ".join(f"{abs(per_level[m + 1][2][0] / per_level[m][2][0] - 1):.1e}" for m in (4, 5))
    report(
        7, ok,
        f"cutoff 160: fixed below cutoff {[len(per_level[m][0]) for m in (4, 5, 6)]}, "
        f"moving below cutoff {[len(per_level[m][1]) for m in (4, 5, 6)]}, continuous {continuous}, "
        f"refinement {refines}; lowest fixed values {lows} (relative drift {drift})",
        dt,
    )
    assert horizontal
    assert branches
    assert continuous
    assert refines
    assert dt < 4 * 3600


def test_criterion_8_ladder(report):
    t = time.perf_counter()
    rep = crosscheck_neumann(6, np.linspace(0, 2, 11), cutoff=1500.0, tol=5e-2)
    cosine_ok = all(r.matched for b in rep.spectra for r in rep.cosine_rows(b)) and rep.max_cosine_error <= 5e-2
    ident = rep.sigma_identified()
    spread = {v: (max(g) - min(g)) / v for v, g in ident.items()}
    sigma_ok = len(ident) > 0 and all(s <= 1e-6 for s in spread.values())
    dt = time.perf_counter() - t
    ok = cosine_ok and sigma_ok and dt < 1800
    worst = max(spread, key=spread.get) if spread else None
    report(
        8, ok,
        f"level 6 Neumann, scale {rep.scale:.4f}: cosine branches max rel error {rep.max_cosine_error:.1e}; "
        f"{len(ident)} Sigma' values matched at every beta, "
        f"{sum(s <= 1e-6 for s in spread.values())} beta-independent within 1e-6"
        + (f", worst {worst:.2f} varies by {spread[worst]:.1e} relative" if worst else ""),
        dt,
    )
    assert cosine_ok
    assert sigma_ok
    assert dt < 1800


def test_criterion_9_trace_refine(report):
    t = time.perf_counter()
    rng = np.random.default_rng(9)
    inv = contraction = pyth = fl = 0.0
    dims_ok = True
    for m in range(0, 6):
        a = random_form(m, rng)
        inv = max(inv, float(np.max(np.abs(trace(refine(a)).values - a.values))))
        if m >= 1:
            c = random_form(m, rng)
            tc = trace(c)
            contraction = max(contraction, h_norm(tc) - h_norm(c))
            rest = c - refine(tc)
            pyth = max(pyth, abs(h_norm(c) ** 2 - h_norm(tc) ** 2 - h_norm(rest) ** 2) / h_norm(c) ** 2)
            r = refine(a)
            fl = max(fl, max(abs(flux(r, h) - flux(a, h)) for h in holes(m)))
            dims_ok &= hodge_dimensions(m)[2] == (3 ** m - 1) // 2
    dt = time.perf_counter() - t
    ok = inv <= 1e-12 and contraction <= 1e-10 and pyth <= 1e-10 and fl <= 1e-10 and dims_ok and dt < 60
    report(
        9, ok,
        f"trace∘refine {inv:.1e}, contraction excess {max(contraction, 0):.1e}, Pythagoras {pyth:.1e}, "
        f"flux drift {fl:.1e}, Hodge dims m<=5 {dims_ok}",
        dt,
    )
    assert inv <= 1e-12
    assert contraction <= 1e-10
    assert pyth <= 1e-10
    assert fl <= 1e-10
    assert dims_ok
    assert dt < 60
