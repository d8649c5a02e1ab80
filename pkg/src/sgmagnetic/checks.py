"""Self-contained invariant suites behind the ``check`` command."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .decimation import decimation_multiset
from .forms import (
    BETA_PERIOD,
    VertexFunction,
    b_form,
    derivative,
    flux,
    graph_laplacian_matrix,
    h_norm,
    hodge_dimensions,
    random_form,
    refine,
    trace,
)
from .ladder import crosscheck_neumann
from .magnetic import beta_sweep, eigenvalues, matrix_from_form


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name:<22} {self.detail} ({self.seconds:.2f}s)"


@dataclass
class CheckReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def format(self) -> str:
        lines = [r.line() for r in self.results]
        n = sum(r.passed for r in self.results)
        lines.append(f"{n}/{len(self.results)} suites passed")
        return "\n".join(lines)


def suite_h_norm(level, b_factory=b_form):
    errs = []
    for w in ("", "0", "12"):
        b = b_factory(w)
        want = (5 / 3) ** (len(w) / 2)
        errs.append(abs(h_norm(b) - want))
        errs.append(abs(h_norm(refine(b)) - want))
    worst = max(errs)
    return worst <= 1e-12, f"max |‖b_w‖ - (5/3)^(|w|/2)| = {worst:.2e}"


def suite_trace_refine(level, b_factory=b_form):
    rng = np.random.default_rng(0)
    worst = pyth = 0.0
    for m in range(1, level + 1):
        a = random_form(m, rng)
        worst = max(worst, float(np.max(np.abs(trace(refine(a)).values - a.values))))
        c = random_form(m + 1, rng)
        t = trace(c)
        rest = c - refine(t)
        pyth = max(pyth, abs(h_norm(c) ** 2 - h_norm(t) ** 2 - h_norm(rest) ** 2))
    dims_ok = all(hodge_dimensions(m)[2] == (3 ** m - 1) // 2 for m in range(1, min(level, 4) + 1))
    ok = worst <= 1e-12 and pyth <= 1e-10 and dims_ok
    return ok, f"trace∘refine {worst:.1e}, Pythagoras {pyth:.1e}, Hodge dims {'ok' if dims_ok else 'wrong'}"


def suite_flux(level, b_factory=b_form):
    b = b_factory("")
    f0 = flux(b, "")
    drift = 0.0
    for _ in range(level - 1):
        b = refine(b)
        drift = max(drift, abs(flux(b, "") - f0))
    return drift <= 1e-12, f"central flux {f0:.12f}, drift under refine {drift:.1e}"


def suite_gauge(level, b_factory=b_form):
    rng = np.random.default_rng(1)
    worst = 0.0
    for m in range(2, level + 1):
        lap = np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
        for _ in range(3):
            A = VertexFunction(m, rng.uniform(-np.pi, np.pi, size=len(lap) + 3))
            ev = eigenvalues(matrix_from_form(derivative(A)))
            worst = max(worst, float(np.max(np.abs(ev - lap))))
    return worst <= 1e-9, f"max |spec(M^dA) - spec(Δ)| = {worst:.1e}"


def suite_periodicity(level, b_factory=b_form):
    betas = [0.3, 1.1, 1.9]
    a = beta_sweep(level, "", betas)
    b = beta_sweep(level, "", [x + BETA_PERIOD for x in betas])
    worst = max(float(np.max(np.abs(r.raw - s.raw))) for r, s in zip(a.rows, b.rows))
    return worst <= 1e-8, f"max shift by one period {worst:.1e}"


def suite_decimation(level, b_factory=b_form):
    worst = 0.0
    ok = True
    for m in range(1, level + 1):
        graph = np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
        dec = decimation_multiset(m)
        if len(dec) != len(graph) or len(dec) != (3 ** (m + 1) - 3) // 2:
            ok = False
            continue
        worst = max(worst, float(np.max(np.abs(dec - graph))))
    return ok and worst <= 1e-9, f"max |decimated - graph| = {worst:.1e}"


def suite_ladder(level, b_factory=b_form):
    m = max(level, 4)
    rep = crosscheck_neumann(m, np.linspace(0, 2, 5), cutoff=60.0, tol=5e-2)
    worst = rep.max_cosine_error
    return worst <= 5e-2, f"level {m}, fitted scale {rep.scale:.4f}, worst cosine rel error {worst:.1e}"


SUITES = (
    ("h_norm", suite_h_norm),
    ("trace_refine", suite_trace_refine),
    ("flux_invariance", suite_flux),
    ("gauge_invariance", suite_gauge),
    ("flux_periodicity", suite_periodicity),
    ("decimation", suite_decimation),
    ("ladder_crosscheck", suite_ladder),
)


def run_checks(level=3, b_factory=b_form, only=None) -> CheckReport:
    report = CheckReport()
    for name, suite in SUITES:
        if only and name not in only:
            continue
        t = time.perf_counter()
        try:
            ok, detail = suite(level, b_factory)
        except Exception as exc:  # a crashing suite is a failing suite
            ok, detail = False, f"error: {exc}"
        report.results.append(SuiteResult(name, bool(ok), detail, time.perf_counter() - t))
    return report
