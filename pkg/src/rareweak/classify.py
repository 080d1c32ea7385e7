"""HC-thresholded linear classification.

Aggregates training rows into a feature z-vector, estimates the contrast
direction by clipping the innovated transform at a data-driven Higher
Criticism threshold, and classifies fresh rows with the resulting linear
rule. Includes Monte Carlo misclassification estimation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import PrecisionModel, class_rows, gen_class_sample, ClassSample
from .numerics import RngStream, normal_sf

DEFAULT_ALPHA0 = 0.10


@dataclass(frozen=True)
class FeatureZVector:
    z: np.ndarray
    n: int


def z_vector(sample: ClassSample) -> FeatureZVector:
    """Z = (1/sqrt(n)) sum_i label_i * row_i, distributed N(sqrt(n) mu, Sigma)."""
    n = sample.n
    if n < 1:
        raise DomainError("need at least one training row")
    z = sample.features.T @ sample.labels.astype(float) / math.sqrt(n)
    return FeatureZVector(z=z, n=n)


def clip_threshold(z: np.ndarray, t: float) -> np.ndarray:
    """Clipping rule sgn(z) * 1{|z| >= t}, entries in {-1, 0, +1}."""
    if t <= 0:
        raise DomainError("threshold must be positive")
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) >= t, np.sign(z), 0.0).astype(np.int8)


@dataclass(frozen=True)
class HctThreshold:
    threshold: float
    argmax_index: int


def hct_threshold(zvec: FeatureZVector, omega: PrecisionModel,
                  alpha0: float = DEFAULT_ALPHA0,
                  use_raw_z: bool = False) -> HctThreshold:
    """Higher Criticism threshold for feature selection.

    Two-sided P-values of the innovated transform Omega Z are sorted and the
    score sqrt(p) (i/p - pi_(i)) / sqrt((i/p)(1 - i/p)) is maximized over
    i <= alpha0 * p (ties to the smallest i). The threshold is the i-th
    largest |Omega Z| at the maximizer; the denominator here uses i/p, not
    the P-value, unlike the detection statistic. With use_raw_z the
    threshold is read off |Z| instead while the ranking still comes from
    Omega Z.
    """
    if not 0.0 < alpha0 <= 0.5:
        raise DomainError("alpha0 must lie in (0, 0.5]")
    z = np.asarray(zvec.z, dtype=float)
    p = z.shape[0]
    if omega.p != p:
        raise DomainError("omega dimension must match z")
    upper = int(math.floor(alpha0 * p))
    if upper < 1:
        raise DomainError(f"alpha0 * p < 1 (p={p}); input too small for HCT")
    wz = omega.matvec(z)
    pv = 2.0 * normal_sf(np.abs(wz))
    order = np.argsort(pv, kind="stable")
    srt = pv[order][:upper]
    i = np.arange(1, upper + 1)
    frac = i / p
    scores = math.sqrt(p) * (frac - srt) / np.sqrt(frac * (1.0 - frac))
    k = int(np.argmax(scores))
    scale = np.abs(z) if use_raw_z else np.abs(wz)
    threshold = float(np.sort(scale)[::-1][k])
    return HctThreshold(threshold=threshold, argmax_index=k + 1)


@dataclass
class HctModel:
    """Trained rule: clipped contrast estimate and its linear weights."""

    mu_hat: np.ndarray
    threshold: float
    argmax_index: int
    alpha0: float
    omega: PrecisionModel
    degenerate: bool

    @property
    def weights(self) -> np.ndarray:
        return self.omega.matvec(self.mu_hat.astype(float))

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"threshold={format(self.threshold, '.17g')},"
                     f"argmax={self.argmax_index},"
                     f"alpha0={format(self.alpha0, '.17g')}\n")
            writer = csv.writer(fh)
            writer.writerow(["index", "mu_hat"])
            for i, v in enumerate(self.mu_hat):
                writer.writerow([i, int(v)])


def train_hct(sample: ClassSample, omega: PrecisionModel,
              alpha0: float = DEFAULT_ALPHA0, use_raw_z: bool = False) -> HctModel:
    """Fit the HC-thresholded rule: mu_hat = clip(Omega Z) at the HCT."""
    zv = z_vector(sample)
    sel = hct_threshold(zv, omega, alpha0=alpha0, use_raw_z=use_raw_z)
    wz = omega.matvec(zv.z)
    if sel.threshold > 0.0:
        mu_hat = clip_threshold(wz, sel.threshold)
    else:
        mu_hat = np.zeros(omega.p, dtype=np.int8)  # all statistics exactly zero
    degenerate = not np.any(mu_hat)
    if degenerate:
        warnings.warn("HCT selected no features; classifier degenerates to +1")
    return HctModel(mu_hat=mu_hat, threshold=sel.threshold,
                    argmax_index=sel.argmax_index, alpha0=alpha0,
                    omega=omega, degenerate=degenerate)


def classify_batch(model: HctModel, rows: np.ndarray,
                   omega: PrecisionModel | None = None) -> np.ndarray:
    """Labels sign((mu_hat)' Omega row) per row; exact zeros classify as +1."""
    omega = model.omega if omega is None else omega
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != omega.p:
        raise DomainError(f"row dimension {rows.shape[1]} != p {omega.p}")
    scores = rows @ omega.matvec(model.mu_hat.astype(float))
    return np.where(scores >= 0.0, 1, -1).astype(int)


@dataclass(frozen=True)
class ClassificationErrorReport:
    mean_error: float
    se: float
    errors: np.ndarray
    reps: int


def classification_error(vartheta: float, r: float, theta: float, p: int,
                         omega: PrecisionModel, reps: int, test_size: int,
                         rng: RngStream, alpha0: float = DEFAULT_ALPHA0,
                         map_fn=None) -> ClassificationErrorReport:
    """Held-out misclassification of the trained rule, averaged over replicates.

    Replicate k trains on a fresh sample (substream k.0) and evaluates on
    test_size fresh rows with the same contrast vector (substream k.1).
    map_fn may supply a parallel map; replicates seed themselves, so any
    execution order gives the same result.
    """
    if reps < 20:
        raise DomainError("reps must be at least 20")
    if test_size < 1:
        raise DomainError("test_size must be positive")

    def one_rep(k):
        rep = rng.child(k)
        sample = gen_class_sample(p, vartheta, r, theta, omega, rep.child(0))
        model = train_hct(sample, omega, alpha0=alpha0)
        test_rng = rep.child(1)
        labels = np.where(test_rng.uniform(test_size) < 0.5, 1, -1).astype(int)
        rows = class_rows(sample.mu, labels, omega, test_rng)
        pred = classify_batch(model, rows)
        return float(np.mean(pred != labels))

    mapper = map if map_fn is None else map_fn
    errors = np.asarray(list(mapper(one_rep, range(reps))), dtype=float)
    mean = float(np.mean(errors))
    se = float(np.std(errors, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return ClassificationErrorReport(mean_error=mean, se=se, errors=errors, reps=reps)
