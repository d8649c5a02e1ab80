"""Closed-form Neumann spectrum of the central-hole magnetic operator and its graph cross-check.

The limit spectrum is

    { R(2 - 2 cos(2 k pi / 3 - 2 beta / sqrt 30)) : k = 0, 1, 2 }  union  Sigma',
    Sigma' = 5 (union_m 5**m R{3, 5}),   Sigma = Sigma' union 5 R{2},

in the normalization of R.  Graph eigenvalues use (3/2) 5**m lambda_m, so the
cross-check fits one scalar between the two at beta = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decimation import R_function
from .forms import SQRT30
from .magnetic import beta_sweep

COSINE_LABELS = ("0", "1", "2")
SIGMA_LABEL = "sigma"


class LadderError(ValueError):
    pass


@dataclass(frozen=True)
class SigmaSet:
    variant: str  # "sigma" or "sigma_prime"
    cutoff: float
    values: tuple

    def __len__(self):
        return len(self.values)

    def __contains__(self, x):
        return any(abs(v - x) <= 1e-12 * max(1.0, abs(x)) for v in self.values)


def _dilations(base, cutoff, scale):
    out = []
    v = 5.0 * base
    while scale * v <= cutoff:
        out.append(scale * v)
        v *= 5.0
    return out


def sigma_sets(cutoff, scale=1.0) -> tuple[SigmaSet, SigmaSet]:
    """(Sigma, Sigma') truncated at cutoff, each value multiplied by ``scale``."""
    if not cutoff > 0:
        raise LadderError("cutoff must be positive")
    prime = sorted(_dilations(R_function(3), cutoff, scale) + _dilations(R_function(5), cutoff, scale))
    full = list(prime)
    v2 = scale * 5.0 * R_function(2)
    if v2 <= cutoff:
        full.append(v2)
    return SigmaSet("sigma", cutoff, tuple(sorted(full))), SigmaSet("sigma_prime", cutoff, tuple(prime))


def cosine_values(beta, scale=1.0) -> list[float]:
    """scale * R(2 - 2 cos(2 k pi / 3 - 2 beta / sqrt 30)) for k = 0, 1, 2."""
    out = []
    for k in range(3):
        t = 2.0 - 2.0 * math.cos(2 * k * math.pi / 3 - 2 * beta / SQRT30)
        out.append(scale * R_function(max(t, 0.0)))
    return out


def neumann_formula_terms(beta, cutoff, scale=1.0) -> list[tuple[str, float]]:
    """(label, value) pairs below cutoff, ascending; labels are k or 'sigma'."""
    terms = [(lab, v) for lab, v in zip(COSINE_LABELS, cosine_values(beta, scale)) if v <= cutoff]
    terms += [(SIGMA_LABEL, v) for v in sigma_sets(cutoff, scale)[1].values]
    return sorted(terms, key=lambda t: t[1])


def neumann_spectrum_formula(beta, cutoff, scale=1.0) -> list[float]:
    return [v for _, v in neumann_formula_terms(beta, cutoff, scale)]


def rel_error(formula, graph) -> float:
    """|graph - formula| / max(|formula|, 1): relative above 1, absolute below."""
    return abs(graph - formula) / max(abs(formula), 1.0)


@dataclass(frozen=True)
class CrosscheckRow:
    beta: float
    label: str
    formula: float
    graph: float  # nan when unmatched
    rel_error: float

    @property
    def matched(self) -> bool:
        return not math.isnan(self.graph)


@dataclass
class NeumannReport:
    level: int
    scale: float
    tol: float
    rows: list = field(default_factory=list)
    unmatched_graph: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)

    def betas(self):
        return sorted({r.beta for r in self.rows} | set(self.spectra))

    def at(self, beta):
        return [r for r in self.rows if r.beta == beta]

    def cosine_rows(self, beta):
        return [r for r in self.at(beta) if r.label != SIGMA_LABEL]

    def sigma_identified(self) -> dict:
        """Sigma' values matched at every beta, mapped to their graph matches in beta order."""
        by_value = {}
        for r in self.rows:
            if r.label == SIGMA_LABEL:
                by_value.setdefault(round(r.formula, 9), []).append(r)
        out = {}
        for v, rows in by_value.items():
            if len(rows) == len(self.spectra) and all(r.matched for r in rows):
                out[v] = [r.graph for r in sorted(rows, key=lambda r: r.beta)]
        return out

    @property
    def max_cosine_error(self) -> float:
        errs = [r.rel_error for r in self.rows if r.label != SIGMA_LABEL]
        return max(errs) if errs else 0.0


def _greedy_match(terms, graph, tol):
    """Nearest unused graph value for each formula value, ascending order."""
    free = list(graph)
    rows = []
    for label, v in terms:
        if free:
            i = int(np.argmin(np.abs(np.array(free) - v)))
            g = free[i]
            err = rel_error(v, g)
        else:
            err = math.inf
        if err <= tol:
            free.pop(i)
            rows.append((label, v, g, err))
        else:
            rows.append((label, v, math.nan, math.nan))
    return rows, free


def fit_scale(graph_at_zero) -> float:
    """Least-squares scalar taking {0, R(3), R(3)} onto the three lowest graph values."""
    g = np.sort(np.asarray(graph_at_zero))[:3]
    if len(g) < 3:
        raise LadderError("need three graph eigenvalues to fit the scale")
    return float((g[1] + g[2]) / (2.0 * R_function(3)))


def crosscheck_neumann(m, betas, cutoff, tol=5e-2, scale=None, jobs=1) -> NeumannReport:
    """Match renormalized Neumann eigenvalues of M_m^{beta b} below cutoff to the formula."""
    if m < 2:
        raise LadderError("crosscheck needs m >= 2")
    betas = [float(b) for b in betas]
    table = beta_sweep(m, "", betas, boundary="neumann", jobs=jobs)
    if scale is None:
        zero = next((r for r in table.rows if r.beta == 0.0), None)
        ren = zero.renormalized if zero else beta_sweep(m, "", [0.0], boundary="neumann").rows[0].renormalized
        scale = fit_scale(ren)
    report = NeumannReport(m, scale, tol)
    for row in table.rows:
        graph = row.renormalized[row.renormalized <= cutoff * (1 + tol)]
        report.spectra[row.beta] = row.renormalized[row.renormalized <= cutoff]
        matched, free = _greedy_match(neumann_formula_terms(row.beta, cutoff, scale), graph, tol)
        for label, v, g, err in matched:
            report.rows.append(CrosscheckRow(row.beta, label, v, g, err))
        report.unmatched_graph[row.beta] = [x for x in free if x <= cutoff]
    return report
