"""Sparse signal recovery.

Hard thresholding with ideal and universal thresholds, the two-step graphlet
screening procedure (a chi-square screen over connected subgraphs followed by
a penalized exhaustive clean over retained components), univariate screening
as the marginal baseline, and Hamming-distance evaluation.
"""

from __future__ import annotations

import csv
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DegeneracyError, DomainError
from .graph import DependencyGraph, connected_components, enum_connected_subgraphs
from .models import PrecisionModel, RegressionInstance, regression_from_y
from .numerics import GRAM_RCOND

DEFAULT_SCREEN_Q = 0.9
CLEAN_COMPONENT_CAP = 15


@dataclass
class SelectionResult:
    beta_hat: np.ndarray
    method: str
    tuning: dict = field(default_factory=dict)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_hat)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "beta_hat"])
            for i, v in enumerate(self.beta_hat):
                writer.writerow([i, format(float(v), ".17g")])


@dataclass
class HammingReport:
    counts: np.ndarray
    mean: float
    se: float

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "hamming"])
            for k, c in enumerate(self.counts):
                writer.writerow([k, int(c)])


def hamming_report(counts) -> HammingReport:
    counts = np.asarray(counts, dtype=float)
    mean = float(np.mean(counts))
    se = float(np.std(counts, ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else 0.0
    return HammingReport(counts=counts, mean=mean, se=se)


# ---------------------------------------------------------------------------
# thresholding
# ---------------------------------------------------------------------------

def hard_threshold(y: np.ndarray, t: float) -> SelectionResult:
    """Keep-or-kill: beta_hat_i = Y_i when |Y_i| >= t, else 0."""
    if t <= 0:
        raise DomainError("threshold must be positive")
    y = np.asarray(y, dtype=float)
    beta = np.where(np.abs(y) >= t, y, 0.0)
    return SelectionResult(beta_hat=beta, method="HT", tuning={"t": float(t)})


def universal_threshold(p) -> float:
    """sqrt(2 log p), the parameter-free threshold."""
    return math.sqrt(2.0 * math.log(p))


def ideal_q(vartheta: float, r: float) -> float:
    """Exponent of the risk-optimal threshold sqrt(2 q log p).

    (vartheta + r)^2 / (4 r) when the signal is strong enough to beat the
    sparsity (r > vartheta), else vartheta; the branches agree at r = vartheta.
    """
    if not 0.0 < vartheta < 1.0:
        raise DomainError("vartheta must lie in (0, 1)")
    if r <= 0.0:
        raise DomainError("r must be positive")
    if r > vartheta:
        return (vartheta + r) ** 2 / (4.0 * r)
    return vartheta


def ideal_threshold(p, vartheta: float, r: float) -> float:
    return math.sqrt(2.0 * ideal_q(vartheta, r) * math.log(p))


def hamming(beta_hat: np.ndarray, beta: np.ndarray) -> int:
    """Number of coordinates where sgn(beta_hat) != sgn(beta), sgn in {-1,0,1}."""
    a = np.asarray(beta_hat)
    b = np.asarray(beta)
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(np.sign(a) != np.sign(b)))


# ---------------------------------------------------------------------------
# graphlet screening
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GsTuning:
    """Screen/clean tuning: subgraph size cap m0, screen constant q,
    clean penalty level u, and clean magnitude floor v."""

    m0: int
    q: float
    u: float
    v: float

    def __post_init__(self):
        if self.m0 < 1:
            raise DomainError("m0 must be >= 1")
        if self.q <= 0 or self.u <= 0 or self.v <= 0:
            raise DomainError("q, u, v must all be positive")


def default_gs_tuning(p, vartheta: float, r: float, m0: int = 1,
                      q: float = DEFAULT_SCREEN_Q) -> GsTuning:
    """u = sqrt(2 vartheta log p), v = sqrt(2 r log p), q a small constant."""
    return GsTuning(m0=m0, q=q,
                    u=math.sqrt(2.0 * vartheta * math.log(p)),
                    v=math.sqrt(2.0 * r * math.log(p)))


def _response_vector(instance: RegressionInstance, project: str) -> np.ndarray:
    # "response" projects the regression response W (correlations X'W);
    # "raw" projects the original observation Y, whose correlations X'Y
    # equal W itself when X is the symmetric square root.
    if project == "response":
        return instance.xtw
    if project == "raw":
        if instance.w is None:
            raise DomainError("raw projection needs the response stored on the instance")
        return np.asarray(instance.w)
    raise DomainError(f"unknown projection mode {project!r}")


def gs_screen(instance: RegressionInstance, graph: DependencyGraph,
              tuning: GsTuning, project: str = "response") -> np.ndarray:
    """Screen step: sweep connected subgraphs in size-then-lex order.

    A subgraph joins the retained set when its projection energy gain over
    the already-retained part reaches 2 q log p. Degenerate projections are
    skipped with a warning.
    """
    p = instance.p
    if graph.num_nodes != p:
        raise DomainError("graph size must match instance dimension")
    bvec = _response_vector(instance, project)
    subsets = enum_connected_subgraphs(graph, tuning.m0)
    gate = 2.0 * tuning.q * math.log(p)
    retained: set[int] = set()
    for sub in subsets:
        try:
            t1 = instance.quadform(sub, bvec)
            inter = [j for j in sub if j in retained]
            t2 = instance.quadform(inter, bvec) if inter else 0.0
        except DegeneracyError as exc:
            warnings.warn(f"screen skipped degenerate subgraph {sub}: {exc}")
            continue
        if t1 - t2 >= gate:
            retained.update(sub)
    return np.array(sorted(retained), dtype=int)


def _clean_component(instance: RegressionInstance, comp, tuning: GsTuning,
                     bvec: np.ndarray):
    """Exhaustive penalized least squares over one retained component.

    Every support subset is solved, entries inside (0, v) are clipped up to
    the floor v, and the exact objective
    ||P(W - X beta)||^2 + u^2 ||beta||_0 picks the winner.
    """
    comp = list(comp)
    base = instance.quadform(comp, bvec)
    g_full = instance.gram_sub(comp)
    b_full = bvec[np.asarray(comp, dtype=int)]
    best_obj = base  # empty support
    best = {}
    u2 = tuning.u ** 2
    m = len(comp)
    for size in range(1, m + 1):
        for pos in itertools.combinations(range(m), size):
            pos = list(pos)
            g = g_full[np.ix_(pos, pos)]
            b = b_full[pos]
            try:
                if size == 1:
                    if g[0, 0] <= GRAM_RCOND:
                        raise DegeneracyError("degenerate column", index_set=pos)
                    coef = np.array([b[0] / g[0, 0]])
                else:
                    w = np.linalg.eigvalsh(g)
                    if w[0] <= GRAM_RCOND * max(w[-1], 1.0):
                        raise DegeneracyError("degenerate support", index_set=pos)
                    coef = np.linalg.solve(g, b)
            except DegeneracyError:
                continue
            small = (coef != 0.0) & (np.abs(coef) < tuning.v)
            coef = np.where(small, np.sign(coef) * tuning.v, coef)
            nnz = int(np.count_nonzero(coef))
            resid = base - 2.0 * coef @ b + coef @ g @ coef
            obj = resid + u2 * nnz
            if obj < best_obj - 1e-12:
                best_obj = obj
                best = {comp[i]: coef[k] for k, i in enumerate(pos)}
    return best


def gs_clean(instance: RegressionInstance, graph: DependencyGraph, retained,
             tuning: GsTuning, component_cap: int = CLEAN_COMPONENT_CAP,
             project: str = "response") -> SelectionResult:
    """Clean step: solve each retained component exactly; zeros elsewhere."""
    bvec = _response_vector(instance, project)
    beta = np.zeros(instance.p)
    for comp in connected_components(graph, restrict_to=retained):
        if len(comp) > component_cap:
            raise CapacityError(
                f"retained component {comp[:4]}... has size {len(comp)} "
                f"above cap {component_cap}"
            )
        for j, v in _clean_component(instance, comp, tuning, bvec).items():
            beta[j] = v
    return SelectionResult(beta_hat=beta, method="GS",
                           tuning={"m0": tuning.m0, "q": tuning.q,
                                   "u": tuning.u, "v": tuning.v})


def gs_estimate(y: np.ndarray, omega: PrecisionModel, vartheta: float, r: float,
                m0: int = 1, q: float = DEFAULT_SCREEN_Q,
                component_cap: int = CLEAN_COMPONENT_CAP,
                project: str = "response") -> SelectionResult:
    """Full screen + clean pipeline with the standard exponent-based tuning."""
    instance = regression_from_y(y, omega)
    g = omega.graph()
    tuning = default_gs_tuning(omega.p, vartheta, r, m0=m0, q=q)
    retained = gs_screen(instance, g, tuning, project=project)
    return gs_clean(instance, g, retained, tuning, component_cap=component_cap,
                    project=project)


def univariate_screen(instance: RegressionInstance, t: float) -> SelectionResult:
    """Marginal screening: keep (x_j, W) wherever |(x_j, W)| >= t.

    The correlation vector X'W equals the innovated transform of the
    original observation, so this is entrywise thresholding of Omega Y.
    """
    if t < 0:
        raise DomainError("threshold must be non-negative")
    b = np.asarray(instance.xtw, dtype=float)
    beta = np.where(np.abs(b) >= t, b, 0.0)
    return SelectionResult(beta_hat=beta, method="US", tuning={"t": float(t)})
