"""Stylized applications of the detection and screening machinery.

Bandwidth estimation for banded covariance matrices (an HC scan across
off-diagonals of the sample covariance, with a Bonferroni-corrected
simulated threshold) and graph-guided feature ranking with ROC evaluation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .detect import CriticalValueTable, hc_plus_statistic
from .errors import DegeneracyError, DomainError
from .graph import enum_connected_subgraphs, graph_from_matrix
from .models import RegressionInstance
from .numerics import GRAM_RCOND, chisq_sf, normal_sf

RANKING_DEFAULT_M0 = 2
HCPLUS_ALPHA0 = 0.5


# ---------------------------------------------------------------------------
# covariance bandwidth estimation
# ---------------------------------------------------------------------------

def offdiagonal_vectors(s: np.ndarray, k: int) -> np.ndarray:
    """The k-th upper off-diagonal of a square matrix, length p - k."""
    s = np.asarray(s)
    p = s.shape[0]
    if s.shape != (p, p):
        raise DomainError("matrix must be square")
    if not 1 <= k <= p - 1:
        raise DomainError(f"k must lie in [1, p-1], got {k}")
    return np.diagonal(s, offset=k).copy()


def sample_cov_offdiagonals(samples: np.ndarray, max_k: int):
    """Off-diagonals 1..max_k of S_n = (1/n) X'X without forming S_n.

    Returns a list of length max_k; entry k-1 holds the (p-k)-vector of
    S_n(i, i+k).
    """
    x = np.asarray(samples, dtype=float)
    n, p = x.shape
    if not 1 <= max_k <= p - 1:
        raise DomainError(f"max_k must lie in [1, p-1], got {max_k}")
    out = []
    for k in range(1, max_k + 1):
        out.append(np.einsum("ij,ij->j", x[:, : p - k], x[:, k:]) / n)
    return out


def sample_cov_diagonal(samples: np.ndarray) -> np.ndarray:
    """Diagonal of S_n = (1/n) X'X."""
    x = np.asarray(samples, dtype=float)
    return np.einsum("ij,ij->j", x, x) / x.shape[0]


@dataclass(frozen=True)
class BandwidthEstimate:
    b_hat: int
    scores: np.ndarray
    threshold: float
    alpha: float
    b0: int


def estimate_bandwidth(samples: np.ndarray, b0: int, alpha: float,
                       null_table: CriticalValueTable,
                       alpha0: float = HCPLUS_ALPHA0, side: str = "upper",
                       studentize: bool = True) -> BandwidthEstimate:
    """HC bandwidth estimate from n rows of p-dimensional data.

    For each off-diagonal k = 1..b0 the entries of sqrt(n) * S_n^(k) get
    normal P-values and an HC+ score; the estimate is the largest k whose
    score clears the simulated threshold at level alpha / b0 (Bonferroni
    over the b0 scans), or 0 when none does.

    By default each entry is studentized by the sample variances (the raw
    product statistic at moderate n has fatter-than-normal tails, which
    inflates every scan's HC score and ruins the uniform calibration of the
    threshold) and P-values are upper-tail, matching searched-for couplings
    that are positive point masses. side="two" and studentize=False recover
    the plain readings.
    """
    x = np.asarray(samples, dtype=float)
    n, p = x.shape
    if n < 2:
        raise DomainError("need at least two sample rows")
    if b0 < 1:
        raise DomainError("b0 must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if side not in ("upper", "two"):
        raise DomainError(f"unknown side {side!r}")
    if null_table.variant != "hcplus":
        raise DomainError("bandwidth estimation needs an 'hcplus' null table")
    threshold = null_table.value(alpha / b0)
    scores = np.empty(b0)
    sqrt_n = math.sqrt(n)
    diag = sample_cov_diagonal(x) if studentize else None
    for k, xi in enumerate(sample_cov_offdiagonals(x, b0), start=1):
        z = sqrt_n * xi
        if studentize:
            z = z / np.sqrt(diag[: p - k] * diag[k:])
        pv = normal_sf(z) if side == "upper" else 2.0 * normal_sf(np.abs(z))
        scores[k - 1] = hc_plus_statistic(pv, alpha0=alpha0).statistic
    qualifying = np.flatnonzero(scores >= threshold)
    b_hat = int(qualifying[-1]) + 1 if qualifying.size else 0
    return BandwidthEstimate(b_hat=b_hat, scores=scores, threshold=threshold,
                             alpha=alpha, b0=b0)


# ---------------------------------------------------------------------------
# feature ranking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankingResult:
    """Per-feature significance scores; lower means more significant."""

    scores: np.ndarray
    method: str


def rank_features_us(instance: RegressionInstance) -> RankingResult:
    """Marginal ranking: two-sided normal P-value of each (x_j, W)."""
    b = np.asarray(instance.xtw, dtype=float)
    scale = np.sqrt(instance.gram_diag())
    scores = 2.0 * normal_sf(np.abs(b) / scale)
    return RankingResult(scores=scores, method="US")


def rank_features_gs(instance: RegressionInstance, gram, delta: float = 0.0,
                     m0: int = RANKING_DEFAULT_M0, cap: int = 10_000_000) -> RankingResult:
    """Graph-guided ranking via chi-square P-values of subgraph projections.

    The neighborhood graph keeps edges where |gram(i, j)| >= delta; every
    connected subgraph of size <= m0 gets the P-value
    P(chi2_{|I|} > ||P^I W||^2), and feature j scores the minimum over
    subgraphs containing j (its singleton always participates).
    """
    g = graph_from_matrix(gram, delta)
    if g.num_nodes != instance.p:
        raise DomainError("gram dimension must match instance")
    subsets = enum_connected_subgraphs(g, m0, cap=cap)
    b = np.asarray(instance.xtw, dtype=float)
    scores = np.ones(instance.p)

    singles = [s[0] for s in subsets if len(s) == 1]
    if singles:
        idx = np.asarray(singles, dtype=int)
        diag = instance.gram_diag()[idx]
        pv = chisq_sf(1, b[idx] ** 2 / diag)
        np.minimum.at(scores, idx, pv)

    pairs = [s for s in subsets if len(s) == 2]
    if pairs:
        ii = np.asarray([s[0] for s in pairs], dtype=int)
        jj = np.asarray([s[1] for s in pairs], dtype=int)
        diag = instance.gram_diag()
        gij = _pair_entries(instance.gram, ii, jj)
        gii, gjj = diag[ii], diag[jj]
        det = gii * gjj - gij * gij
        ok = det > GRAM_RCOND * np.maximum(gii * gjj, 1.0)
        quad = np.full(ii.shape, np.nan)
        bi, bj = b[ii], b[jj]
        quad[ok] = (gjj[ok] * bi[ok] ** 2 - 2 * gij[ok] * bi[ok] * bj[ok]
                    + gii[ok] * bj[ok] ** 2) / det[ok]
        pv = np.ones_like(quad)
        pv[ok] = chisq_sf(2, quad[ok])
        np.minimum.at(scores, ii, pv)
        np.minimum.at(scores, jj, pv)

    for sub in subsets:
        if len(sub) <= 2:
            continue
        try:
            quad = instance.quadform(sub)
        except DegeneracyError:
            continue
        pv = chisq_sf(len(sub), quad)
        for j in sub:
            scores[j] = min(scores[j], pv)

    return RankingResult(scores=scores, method="GS")


def _pair_entries(gram, ii, jj):
    if sp.issparse(gram):
        return np.asarray(gram[ii, jj]).ravel()
    return np.asarray(gram)[ii, jj]


# ---------------------------------------------------------------------------
# ROC evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            for f, t in zip(self.fpr, self.tpr):
                writer.writerow([format(float(f), ".17g"), format(float(t), ".17g")])


def roc_curve(scores, truth) -> RocCurve:
    """ROC of a significance ranking against a true support set.

    scores may be a RankingResult or an array (lower = more significant).
    truth is a boolean mask or an index set, and must be a nonempty proper
    subset. Tied scores advance the sweep together; AUC is the trapezoidal
    area, so ties contribute half credit.
    """
    vals = np.asarray(getattr(scores, "scores", scores), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("scores must be finite")
    p = vals.shape[0]
    mask = np.zeros(p, dtype=bool)
    truth_arr = np.asarray(truth)
    if truth_arr.dtype == bool:
        if truth_arr.shape != (p,):
            raise DomainError("truth mask length must match scores")
        mask = truth_arr
    else:
        mask[np.asarray(truth_arr, dtype=int)] = True
    npos = int(mask.sum())
    if npos == 0 or npos == p:
        raise DomainError("truth must be a nonempty proper subset")
    order = np.argsort(vals, kind="stable")
    sorted_vals = vals[order]
    sorted_true = mask[order]
    # group ties: cumulative counts at the last element of each tie block
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0)
    ends = np.append(boundaries, p - 1)
    cum_tp = np.cumsum(sorted_true)[ends]
    cum_fp = np.cumsum(~sorted_true)[ends]
    tpr = np.concatenate([[0.0], cum_tp / npos])
    fpr = np.concatenate([[0.0], cum_fp / (p - npos)])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, auc=auc)
