"""Sparse-signal detection via the Higher Criticism family.

P-value pipelines under three noise transforms (marginal, whitened,
innovated), the orthodox HC statistic and its heavy-tail-guarded variant,
simulated and asymptotic critical values, the innovated HC test with its
degree-inflated threshold, the oracle likelihood-ratio statistic, and Monte
Carlo size/power estimation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .models import PrecisionModel, gen_arw
from .numerics import RngStream, normal_sf

# P-values equal to 0 or 1 are clamped here to keep the HC denominator finite.
PVALUE_CLAMP = 1e-15

TRANSFORMS = ("none", "whitened", "innovated")
SIDES = ("upper", "two")
VARIANTS = ("ohc", "hcplus", "bhc", "whc", "ihc")


@dataclass(frozen=True)
class PValueVector:
    values: np.ndarray
    side: str
    transform: str


@dataclass(frozen=True)
class DetectionResult:
    statistic: float
    argmax_index: int
    threshold: float | None
    reject: bool
    variant: str
    clamped: bool = False


def pvalues(y: np.ndarray, omega: PrecisionModel, transform: str = "none",
            side: str = "upper") -> PValueVector:
    """Per-coordinate P-values of the observation under a noise transform.

    transform "none" standardizes each Y_i by sqrt(Sigma(i,i)); "whitened"
    applies Omega^{1/2} (unit noise variance); "innovated" applies Omega,
    whose unit diagonal makes the transformed variance 1. Upper-side
    P-values are P(N(0,1) >= t), two-sided are P(|N(0,1)| >= |t|).
    """
    if transform not in TRANSFORMS:
        raise DomainError(f"unknown transform {transform!r}")
    if side not in SIDES:
        raise DomainError(f"unknown side {side!r}")
    y = np.asarray(y, dtype=float)
    if y.shape != (omega.p,):
        raise DomainError("y length must match omega dimension")
    if transform == "none":
        t = y / np.sqrt(omega.sigma_diag())
    elif transform == "whitened":
        t = omega.sqrt_matvec(y)
    else:
        t = omega.matvec(y)
    if side == "upper":
        vals = normal_sf(t)
    else:
        vals = 2.0 * normal_sf(np.abs(t))
    return PValueVector(values=vals, side=side, transform=transform)


def _pvalue_array(pv) -> np.ndarray:
    vals = pv.values if isinstance(pv, PValueVector) else np.asarray(pv, dtype=float)
    if vals.ndim != 1 or vals.size < 2:
        raise DomainError("need a vector of at least two P-values")
    if np.any(vals < 0) or np.any(vals > 1):
        raise DomainError("P-values must lie in [0, 1]")
    return vals


def _hc_objective(sorted_p: np.ndarray, p: int) -> np.ndarray:
    i = np.arange(1, sorted_p.size + 1)
    return math.sqrt(p) * (i / p - sorted_p) / np.sqrt(sorted_p * (1.0 - sorted_p))


def hc_statistic(pv, variant: str = "ohc") -> DetectionResult:
    """Orthodox HC: maximize the standardized rank discrepancy over i <= p/2.

    Ties take the smallest index. No threshold is attached; the result's
    reject flag is False until a test wraps it.
    """
    vals = _pvalue_array(pv)
    p = vals.size
    clamped = bool(np.any(vals <= 0.0) or np.any(vals >= 1.0))
    vals = np.clip(vals, PVALUE_CLAMP, 1.0 - PVALUE_CLAMP)
    srt = np.sort(vals)
    upper = p // 2
    obj = _hc_objective(srt[:upper], p)
    k = int(np.argmax(obj))
    return DetectionResult(statistic=float(obj[k]), argmax_index=k + 1,
                           threshold=None, reject=False, variant=variant,
                           clamped=clamped)


def hc_plus_statistic(pv, alpha0: float = 0.5) -> DetectionResult:
    """HC restricted to i <= alpha0 * p with sorted P-values above 1/p.

    The feasible set may be empty, in which case the statistic is -inf and
    the test never rejects.
    """
    if not 0.0 < alpha0 <= 0.5:
        raise DomainError("alpha0 must lie in (0, 0.5]")
    vals = _pvalue_array(pv)
    p = vals.size
    clamped = bool(np.any(vals <= 0.0) or np.any(vals >= 1.0))
    vals = np.clip(vals, PVALUE_CLAMP, 1.0 - PVALUE_CLAMP)
    srt = np.sort(vals)
    upper = int(math.floor(alpha0 * p))
    head = srt[:upper]
    obj = _hc_objective(head, p)
    feasible = head > 1.0 / p
    if not np.any(feasible):
        return DetectionResult(statistic=-math.inf, argmax_index=0,
                               threshold=None, reject=False, variant="hcplus",
                               clamped=clamped)
    obj = np.where(feasible, obj, -math.inf)
    k = int(np.argmax(obj))
    return DetectionResult(statistic=float(obj[k]), argmax_index=k + 1,
                           threshold=None, reject=False, variant="hcplus",
                           clamped=clamped)


# ---------------------------------------------------------------------------
# critical values
# ---------------------------------------------------------------------------

def asymptotic_critical_value(p) -> float:
    """Large-p reference sqrt(2 log log p); crude for any finite p."""
    if p <= math.e:
        raise DomainError("p must exceed e for the asymptotic reference")
    return math.sqrt(2.0 * math.log(math.log(p)))


@dataclass(frozen=True)
class CriticalValueTable:
    """Simulated null quantiles of an HC variant at one dimension."""

    p: int
    variant: str
    alphas: tuple
    quantiles: tuple
    num_null_reps: int
    seed: int
    alpha0: float = 0.5

    @property
    def asymptotic(self) -> float:
        return asymptotic_critical_value(self.p)

    def value(self, alpha: float) -> float:
        for a, q in zip(self.alphas, self.quantiles):
            if abs(a - alpha) <= 1e-12:
                return q
        raise DomainError(f"alpha {alpha} not in simulated grid {self.alphas}")

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "alpha", "variant", "quantile", "num_reps", "seed"])
            for a, q in zip(self.alphas, self.quantiles):
                writer.writerow([self.p, format(a, ".17g"), self.variant,
                                 format(q, ".17g"), self.num_null_reps, self.seed])

    @classmethod
    def load_csv(cls, path) -> "CriticalValueTable":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["p", "alpha", "variant", "quantile", "num_reps", "seed"]:
                raise DomainError(f"unexpected critical value header {header!r}")
            rows = list(reader)
        if not rows:
            raise DomainError("empty critical value table")
        p = int(rows[0][0])
        variant = rows[0][2]
        reps = int(rows[0][4])
        seed = int(rows[0][5])
        alphas = tuple(float(r[1]) for r in rows)
        quantiles = tuple(float(r[3]) for r in rows)
        return cls(p=p, variant=variant, alphas=alphas, quantiles=quantiles,
                   num_null_reps=reps, seed=seed)


def critical_value(p: int, alphas, variant: str = "ohc",
                   num_null_reps: int = 1000, rng: RngStream | None = None,
                   alpha0: float = 0.5) -> CriticalValueTable:
    """Simulate null quantiles of an HC variant over iid uniform P-values.

    The null draws take Y ~ N(0, I_p), under which the P-values are exactly
    iid uniform, so the statistic is simulated on sorted uniforms directly.
    """
    if rng is None:
        raise DomainError("an RngStream is required for reproducible tables")
    if num_null_reps < 100:
        raise DomainError("num_null_reps must be at least 100")
    if variant not in ("ohc", "hcplus"):
        raise DomainError("tables are simulated for the 'ohc' or 'hcplus' functional")
    alphas = [float(a) for a in np.atleast_1d(alphas)]
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise DomainError(f"alpha {a} outside (0, 1)")
    stats = np.empty(num_null_reps)
    for k in range(num_null_reps):
        u = rng.uniform(p)
        if variant == "ohc":
            stats[k] = hc_statistic(u).statistic
        else:
            stats[k] = hc_plus_statistic(u, alpha0=alpha0).statistic
    quantiles = tuple(float(np.quantile(stats, 1.0 - a)) for a in alphas)
    return CriticalValueTable(p=int(p), variant=variant, alphas=tuple(alphas),
                              quantiles=quantiles, num_null_reps=num_null_reps,
                              seed=rng.root_seed, alpha0=alpha0)


# ---------------------------------------------------------------------------
# tests
# ---------------------------------------------------------------------------

def ihc_test(y: np.ndarray, omega: PrecisionModel, alpha: float,
             table: CriticalValueTable) -> DetectionResult:
    """Innovated HC test: reject when the statistic reaches d* h(p, alpha).

    d* is the maximum row-nonzero count of the precision matrix; the
    critical value h(p, alpha) comes from a table simulated for the orthodox
    statistic on uniforms at the same dimension.
    """
    y = np.asarray(y, dtype=float)
    if table.variant != "ohc":
        raise DomainError("ihc_test needs a table for the orthodox statistic")
    if table.p != y.shape[0]:
        raise DomainError(f"table dimension {table.p} != data dimension {y.shape[0]}")
    pv = pvalues(y, omega, transform="innovated", side="two")
    res = hc_statistic(pv, variant="ihc")
    threshold = omega.row_nonzero_max() * table.value(alpha)
    return replace(res, threshold=threshold, reject=bool(res.statistic >= threshold))


def lr_statistic(y: np.ndarray, epsilon: float, tau: float) -> float:
    """Oracle log-likelihood ratio for the two-point mixture alternative.

    Sum of log((1 - eps) + eps * exp(tau Y_i - tau^2 / 2)), evaluated in
    log space so large exponents cannot overflow.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if tau < 0.0:
        raise DomainError("tau must be non-negative")
    y = np.asarray(y, dtype=float)
    expo = tau * y - 0.5 * tau * tau
    terms = np.logaddexp(math.log1p(-epsilon), math.log(epsilon) + expo)
    return float(np.sum(terms))


def _variant_statistic(y: np.ndarray, omega: PrecisionModel, variant: str,
                       alpha0: float = 0.5) -> float:
    if variant == "ohc":
        pv = pvalues(y, omega, "none", "upper")
        return hc_statistic(pv, variant="ohc").statistic
    if variant == "hcplus":
        pv = pvalues(y, omega, "none", "upper")
        return hc_plus_statistic(pv, alpha0=alpha0).statistic
    if variant == "bhc":
        pv = pvalues(y, omega, "none", "two")
        return hc_statistic(pv, variant="bhc").statistic
    if variant == "whc":
        pv = pvalues(y, omega, "whitened", "two")
        return hc_statistic(pv, variant="whc").statistic
    if variant == "ihc":
        pv = pvalues(y, omega, "innovated", "two")
        return hc_statistic(pv, variant="ihc").statistic
    raise DomainError(f"unknown variant {variant!r}")


def variant_threshold(omega: PrecisionModel, variant: str, alpha: float,
                      table: CriticalValueTable) -> float:
    mult = omega.row_nonzero_max() if variant == "ihc" else 1.0
    return mult * table.value(alpha)


@dataclass(frozen=True)
class PowerEstimate:
    size: float
    power: float
    size_se: float
    power_se: float
    threshold: float
    reps: int


def power_estimate(params, omega: PrecisionModel, variant: str,
                   alpha: float, reps: int, rng: RngStream,
                   table: CriticalValueTable | None = None,
                   alpha0: float = 0.5) -> PowerEstimate:
    """Monte Carlo size and power at a shared simulated critical value.

    params is an ArwParams or MixtureParams; only (p, epsilon, tau) are used.

    Replicate k draws its null and alternative data from substreams
    rng.child(1).child(k), so calls sharing a root stream are paired draw
    for draw (common random numbers across parameter grids).
    """
    if reps < 50:
        raise DomainError("reps must be at least 50")
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    if table is None:
        functional = "hcplus" if variant == "hcplus" else "ohc"
        table = critical_value(params.p, [alpha], variant=functional,
                               num_null_reps=max(1000, reps),
                               rng=rng.child(0), alpha0=alpha0)
    threshold = variant_threshold(omega, variant, alpha, table)
    null_rejects = 0
    alt_rejects = 0
    lane = rng.child(1)
    for k in range(reps):
        rep = lane.child(k)
        y0 = omega.sample_noise(rep.child(0))
        if _variant_statistic(y0, omega, variant, alpha0) >= threshold:
            null_rejects += 1
        inst = gen_arw(params, omega, rep.child(1))
        if _variant_statistic(inst.y, omega, variant, alpha0) >= threshold:
            alt_rejects += 1
    size = null_rejects / reps
    power = alt_rejects / reps
    return PowerEstimate(
        size=size, power=power,
        size_se=math.sqrt(max(size * (1 - size), 1e-12) / reps),
        power_se=math.sqrt(max(power * (1 - power), 1e-12) / reps),
        threshold=threshold, reps=reps,
    )
