"""Synthetic data generators for rare/weak signal studies.

Provides the sparse-signal mean model (signals of strength sqrt(2 r log p)
planted at rate p^-vartheta), Gaussian observations under structured
precision matrices, the regression reformulation used by screening, two-class
classification samples, banded-covariance samples, and the paired-signal
design used for feature-ranking studies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import graph as graphmod
from .errors import DomainError, FactorizationError, GenerationError
from .numerics import (
    BandedSymmetric,
    RngStream,
    ZERO_TOL,
    chol_banded,
    restricted_quadform,
)

# Densify the Gram matrix of a regression instance up to this dimension;
# beyond it subset extraction falls back to sparse slicing.
DENSE_GRAM_LIMIT = 2048


def sparsity_level(p, vartheta: float) -> float:
    """Signal prevalence epsilon_p = p^-vartheta."""
    return float(p) ** (-vartheta)


def signal_strength(p, r: float) -> float:
    """Per-signal magnitude tau_p = sqrt(2 r log p)."""
    return math.sqrt(2.0 * r * math.log(p))


def sample_size(p, theta: float) -> int:
    """Training size n = round(p^theta), banker's rounding."""
    return int(round(float(p) ** theta))


@dataclass(frozen=True)
class ArwParams:
    """Rare/weak calibration: dimension p, sparsity exponent, strength exponent."""

    p: int
    vartheta: float
    r: float

    def __post_init__(self):
        if self.p < 2:
            raise DomainError("p must be >= 2")
        if not 0.0 < self.vartheta < 1.0:
            raise DomainError("vartheta must lie in (0, 1)")
        if self.r <= 0.0:
            raise DomainError("r must be positive")

    @property
    def epsilon(self) -> float:
        return sparsity_level(self.p, self.vartheta)

    @property
    def tau(self) -> float:
        return signal_strength(self.p, self.r)


@dataclass(frozen=True)
class MixtureParams:
    """Raw two-point mixture calibration, untied from the (vartheta, r) scaling.

    Useful for degenerate corners such as epsilon = 0, where the alternative
    coincides with the null.
    """

    p: int
    epsilon: float
    tau: float

    def __post_init__(self):
        if self.p < 2:
            raise DomainError("p must be >= 2")
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError("epsilon must lie in [0, 1)")
        if self.tau < 0.0:
            raise DomainError("tau must be non-negative")


class PrecisionModel:
    """A p x p symmetric positive-definite precision matrix with unit diagonal.

    Three kinds are supported: the identity, the two-by-two block model
    (diagonal 1, within-pair coupling h0), and an arbitrary user matrix.
    Derived objects (square root, inverse diagonal, noise factor) are
    computed per connected component of the sparsity graph and cached, so
    instances should be treated as immutable.
    """

    def __init__(self, kind: str, p: int, h0: float | None = None, matrix=None):
        self.kind = kind
        self.p = int(p)
        self.h0 = h0
        if self.p < 1:
            raise DomainError("p must be >= 1")
        if kind == "identity":
            self._omega = sp.identity(self.p, format="csr")
        elif kind == "block2":
            if self.p % 2 != 0:
                raise DomainError("block2 requires even p")
            if h0 is None or not -1.0 < h0 < 1.0:
                raise DomainError("block2 requires |h0| < 1")
            i = np.arange(self.p)
            partner = i ^ 1
            rows = np.concatenate([i, i])
            cols = np.concatenate([i, partner])
            vals = np.concatenate([np.ones(self.p), np.full(self.p, float(h0))])
            self._omega = sp.csr_matrix((vals, (rows, cols)), shape=(self.p, self.p))
        elif kind == "custom":
            a = np.asarray(matrix, dtype=float)
            if a.shape != (self.p, self.p):
                raise DomainError("matrix shape must be (p, p)")
            if np.max(np.abs(a - a.T)) > 1e-10:
                raise DomainError("precision matrix must be symmetric")
            if np.max(np.abs(np.diag(a) - 1.0)) > 1e-8:
                raise DomainError("precision matrix must have unit diagonal")
            a = np.where(np.abs(a) > ZERO_TOL, a, 0.0)
            self._omega = sp.csr_matrix(a)
        else:
            raise DomainError(f"unknown precision kind {kind!r}")
        self._graph = None
        self._components = None
        self._sqrt = None
        self._sigma_sqrt = None
        self._sigma_diag = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, p: int) -> "PrecisionModel":
        return cls("identity", p)

    @classmethod
    def block2(cls, p: int, h0: float) -> "PrecisionModel":
        return cls("block2", p, h0=h0)

    @classmethod
    def custom(cls, matrix) -> "PrecisionModel":
        matrix = np.asarray(matrix, dtype=float)
        return cls("custom", matrix.shape[0], matrix=matrix)

    # -- structure ----------------------------------------------------------

    @property
    def omega(self) -> sp.csr_matrix:
        return self._omega

    def dense(self) -> np.ndarray:
        return self._omega.toarray()

    def graph(self, delta: float = 0.0) -> graphmod.DependencyGraph:
        if delta == 0.0:
            if self._graph is None:
                self._graph = graphmod.graph_from_matrix(self._omega, 0.0)
            return self._graph
        return graphmod.graph_from_matrix(self._omega, delta)

    def row_nonzero_max(self) -> int:
        return graphmod.row_nonzero_max(self.graph())

    def _component_list(self):
        if self._components is None:
            self._components = [
                np.asarray(c, dtype=int)
                for c in graphmod.connected_components(self.graph())
            ]
        return self._components

    def _component_factors(self):
        """Per-component eigendecompositions, assembled into sparse maps.

        Builds Omega^{1/2} and Sigma^{1/2} = Omega^{-1/2} together, plus the
        diagonal of Sigma, reusing one eigh per component.
        """
        if self._sqrt is not None:
            return
        if self.kind == "identity":
            eye = sp.identity(self.p, format="csr")
            self._sqrt = eye
            self._sigma_sqrt = eye
            self._sigma_diag = np.ones(self.p)
            return
        dense_omega = None
        rows, cols, sqrt_vals, isqrt_vals = [], [], [], []
        sigma_diag = np.zeros(self.p)
        for comp in self._component_list():
            if comp.size == 1:
                i = int(comp[0])
                rows.append(np.array([i]))
                cols.append(np.array([i]))
                sqrt_vals.append(np.array([1.0]))
                isqrt_vals.append(np.array([1.0]))
                sigma_diag[i] = 1.0
                continue
            if dense_omega is None:
                dense_omega = self._omega.toarray()
            block = dense_omega[np.ix_(comp, comp)]
            w, v = np.linalg.eigh(block)
            if w[0] <= 1e-12:
                raise FactorizationError(
                    f"precision matrix is not positive definite on component "
                    f"starting at {comp[0]} (min eigenvalue {w[0]:.3e})"
                )
            s = (v * np.sqrt(w)) @ v.T
            si = (v / np.sqrt(w)) @ v.T
            sigma_diag[comp] = np.sum(v * v / w, axis=1)
            grid_r, grid_c = np.meshgrid(comp, comp, indexing="ij")
            rows.append(grid_r.ravel())
            cols.append(grid_c.ravel())
            sqrt_vals.append(s.ravel())
            isqrt_vals.append(si.ravel())
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        shape = (self.p, self.p)
        self._sqrt = sp.csr_matrix((np.concatenate(sqrt_vals), (rows, cols)), shape=shape)
        self._sigma_sqrt = sp.csr_matrix(
            (np.concatenate(isqrt_vals), (rows, cols)), shape=shape
        )
        self._sigma_diag = sigma_diag

    # -- linear maps --------------------------------------------------------

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Omega @ v (also accepts stacked rows of shape (k, p), applied per row)."""
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            return self._omega @ v
        return (self._omega @ v.T).T

    def sqrt_matvec(self, v: np.ndarray) -> np.ndarray:
        """Omega^{1/2} @ v."""
        self._component_factors()
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            return self._sqrt @ v
        return (self._sqrt @ v.T).T

    def sqrt_matrix(self) -> sp.csr_matrix:
        self._component_factors()
        return self._sqrt

    def sigma_diag(self) -> np.ndarray:
        """Diagonal of Sigma = Omega^{-1}."""
        self._component_factors()
        return self._sigma_diag

    def sample_noise(self, rng: RngStream, size: int | None = None) -> np.ndarray:
        """Draw from N(0, Sigma): one vector, or size independent rows."""
        self._component_factors()
        if size is None:
            g = rng.standard_normal(self.p)
            if self.kind == "identity":
                return g
            return self._sigma_sqrt @ g
        g = rng.standard_normal((int(size), self.p))
        if self.kind == "identity":
            return g
        return (self._sigma_sqrt @ g.T).T

    def __repr__(self):
        extra = f", h0={self.h0}" if self.kind == "block2" else ""
        return f"PrecisionModel(kind={self.kind!r}, p={self.p}{extra})"


@dataclass
class ArwInstance:
    """One generated draw: signal vector, observation, and its calibration."""

    beta: np.ndarray
    y: np.ndarray
    params: ArwParams
    omega: PrecisionModel

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


def gen_arw(params, omega: PrecisionModel, rng: RngStream) -> ArwInstance:
    """Generate signals iid Bernoulli(epsilon) * tau and add N(0, Sigma) noise.

    params is an ArwParams (epsilon and tau derived from the exponents) or a
    MixtureParams with raw values. Draw order is fixed (support first, then
    noise) so streams replay exactly.
    """
    if omega.p != params.p:
        raise DomainError(f"omega dimension {omega.p} != p {params.p}")
    support = rng.uniform(params.p) < params.epsilon
    beta = np.where(support, params.tau, 0.0)
    y = beta + omega.sample_noise(rng)
    return ArwInstance(beta=beta, y=y, params=params, omega=omega)


@dataclass
class RegressionInstance:
    """Regression form W = X beta + z with Gram matrix G = X'X.

    Projections only need (gram, xtw); the explicit design and response are
    kept when available so both encodings can be exercised. For a precision
    model Omega, X = Omega^{1/2}, W = X Y, G = Omega, and X'W = Omega Y.
    """

    gram: object  # dense ndarray or sparse matrix
    xtw: np.ndarray
    x: object = None
    w: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.xtw.shape[0]

    def gram_sub(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        if sp.issparse(self.gram):
            return self.gram[idx][:, idx].toarray()
        return self.gram[np.ix_(idx, idx)]

    def gram_diag(self) -> np.ndarray:
        if sp.issparse(self.gram):
            return np.asarray(self.gram.diagonal())
        return np.diag(self.gram)

    def quadform(self, idx, bvec: np.ndarray | None = None) -> float:
        """||P^I (response)||^2 over the columns in idx, via the Gram system."""
        idx = np.asarray(sorted(set(int(i) for i in idx)), dtype=int)
        b = self.xtw if bvec is None else bvec
        return restricted_quadform(self.gram_sub(idx), b[idx], index_set=idx)


def to_regression(inst: ArwInstance) -> RegressionInstance:
    """Rewrite Y = beta + noise as W = X beta + z with X = Omega^{1/2}."""
    return regression_from_y(inst.y, inst.omega)


def regression_from_y(y: np.ndarray, omega: PrecisionModel) -> RegressionInstance:
    y = np.asarray(y, dtype=float)
    if y.shape != (omega.p,):
        raise DomainError("y length must match omega dimension")
    x = omega.sqrt_matrix()
    w = x @ y
    gram = omega.omega
    if omega.p <= DENSE_GRAM_LIMIT:
        gram = gram.toarray()
        x = x.toarray()
    xtw = omega.matvec(y)
    return RegressionInstance(gram=gram, xtw=xtw, x=x, w=w)


def regression_from_design(x: np.ndarray, w: np.ndarray) -> RegressionInstance:
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[0] != w.shape[0]:
        raise DomainError("design and response dimensions differ")
    return RegressionInstance(gram=x.T @ x, xtw=x.T @ w, x=x, w=w)


# ---------------------------------------------------------------------------
# classification samples
# ---------------------------------------------------------------------------

@dataclass
class ClassSample:
    """Two-class training data: rows distributed N(label * mu, Sigma)."""

    features: np.ndarray
    labels: np.ndarray
    mu: np.ndarray

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


def class_rows(mu: np.ndarray, labels: np.ndarray, omega: PrecisionModel,
               rng: RngStream) -> np.ndarray:
    """Feature rows N(label_i * mu, Sigma) for given labels."""
    labels = np.asarray(labels, dtype=float)
    noise = omega.sample_noise(rng, size=labels.shape[0])
    return labels[:, None] * mu[None, :] + noise


def gen_class_sample(p: int, vartheta: float, r: float, theta: float,
                     omega: PrecisionModel, rng: RngStream,
                     n: int | None = None) -> ClassSample:
    """Two-class sample with contrast sqrt(n) * mu_i iid from the rare/weak mixture.

    n defaults to round(p^theta). Draw order: contrast support, labels, noise.
    """
    if omega.p != p:
        raise DomainError("omega dimension must equal p")
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if n is None:
        n = sample_size(p, theta)
    n = int(n)
    if n < 1:
        raise DomainError(f"derived sample size n={n} is too small")
    eps = sparsity_level(p, vartheta)
    tau = signal_strength(p, r)
    mu = np.where(rng.uniform(p) < eps, tau / math.sqrt(n), 0.0)
    labels = np.where(rng.uniform(n) < 0.5, 1, -1).astype(int)
    features = class_rows(mu, labels, omega, rng)
    return ClassSample(features=features, labels=labels, mu=mu)


# ---------------------------------------------------------------------------
# banded covariance samples
# ---------------------------------------------------------------------------

def gen_banded_sample(p: int, n: int, band_spec, rng: RngStream,
                      max_retries: int = 20, shrink: float = 0.9):
    """Draw n rows of N(0, Sigma) where Sigma has unit diagonal and sparse bands.

    band_spec lists one (epsilon, tau) mixture per off-diagonal k = 1..b;
    each band entry is tau with probability epsilon, else 0. If the drawn
    matrix is not positive definite, all off-diagonals are shrunk by the
    factor `shrink` and the factorization retried up to max_retries times.

    Returns (samples, sigma) with sigma a BandedSymmetric.
    """
    p, n = int(p), int(n)
    if p < 2 or n < 1:
        raise DomainError("need p >= 2 and n >= 1")
    b = len(band_spec)
    if b >= p:
        raise DomainError("bandwidth must be smaller than p")
    bands = np.zeros((b + 1, p))
    bands[0] = 1.0
    for k, (eps, tau) in enumerate(band_spec, start=1):
        if not 0.0 <= eps <= 1.0:
            raise DomainError("band epsilon must lie in [0, 1]")
        bands[k, : p - k] = np.where(rng.uniform(p - k) < eps, float(tau), 0.0)
    factor = None
    for _ in range(max_retries + 1):
        sigma = BandedSymmetric(bands)
        try:
            factor = chol_banded(sigma)
            break
        except FactorizationError:
            bands = bands.copy()
            bands[1:] *= shrink
    if factor is None:
        from scipy.linalg import eig_banded

        w = eig_banded(bands, lower=True, eigvals_only=True, select="i",
                       select_range=(0, 0))
        raise GenerationError(
            f"covariance not positive definite after {max_retries} shrink retries "
            f"(min eigenvalue about {w[0]:.3e})"
        )
    z = rng.standard_normal((n, p))
    samples = factor.right_apply(z)
    return samples, sigma


def banded_true_bandwidth(sigma: BandedSymmetric, tol: float = ZERO_TOL) -> int:
    """Largest k whose off-diagonal holds any entry above tol, else 0."""
    b = 0
    for k in range(1, sigma.bandwidth + 1):
        if np.any(np.abs(sigma.offdiagonal(k)) > tol):
            b = k
    return b


# ---------------------------------------------------------------------------
# paired-signal design
# ---------------------------------------------------------------------------

def draw_paired_beta(p: int, epsilon: float, tau: float, rng: RngStream) -> np.ndarray:
    """Signal pairs iid: (tau, tau) w.p. eps/2, (tau, 0) w.p. eps/2, else (0, 0)."""
    if p % 2 != 0:
        raise DomainError("paired design requires even p")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError("epsilon must lie in [0, 1]")
    u = rng.uniform(p // 2)
    beta = np.zeros(p)
    both = u < epsilon / 2.0
    single = (u >= epsilon / 2.0) & (u < epsilon)
    beta[0::2] = np.where(both | single, float(tau), 0.0)
    beta[1::2] = np.where(both, float(tau), 0.0)
    return beta


def block_sigma_dense(p: int, h0: float) -> np.ndarray:
    """Blockwise 2x2 covariance: unit diagonal, within-pair coupling h0."""
    if p % 2 != 0:
        raise DomainError("block covariance requires even p")
    if not -1.0 < h0 < 1.0:
        raise DomainError("|h0| < 1 required")
    sigma = np.eye(p)
    i = np.arange(0, p, 2)
    sigma[i, i + 1] = h0
    sigma[i + 1, i] = h0
    return sigma


def gen_paired_design(n: int, p: int, epsilon: float, h0: float, tau: float,
                      rng: RngStream):
    """n rows iid N(beta, (1/n) Sigma) with Sigma blockwise 2x2 and paired beta.

    Returns (rows, beta). Draw order: beta, then the noise block.
    """
    n, p = int(n), int(p)
    if p % 2 != 0:
        raise DomainError("paired design requires even p")
    if not -1.0 < h0 < 1.0:
        raise DomainError("|h0| < 1 required")
    if n < 1:
        raise DomainError("n must be >= 1")
    beta = draw_paired_beta(p, epsilon, tau, rng)
    g = rng.standard_normal((n, p))
    a = 0.5 * (math.sqrt(1.0 + h0) + math.sqrt(1.0 - h0))
    b = 0.5 * (math.sqrt(1.0 + h0) - math.sqrt(1.0 - h0))
    noise = np.empty_like(g)
    noise[:, 0::2] = a * g[:, 0::2] + b * g[:, 1::2]
    noise[:, 1::2] = b * g[:, 0::2] + a * g[:, 1::2]
    rows = beta[None, :] + noise / math.sqrt(n)
    return rows, beta


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def save_vector_csv(path, values, value_col: str = "value"):
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", value_col])
        for i, v in enumerate(values):
            writer.writerow([i, format(float(v), ".17g")])


def load_vector_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2 or header[0] != "index":
            raise DomainError(f"unexpected vector CSV header {header!r}")
        vals = [float(row[1]) for row in reader]
    return np.asarray(vals)


def save_instance_csv(inst: ArwInstance, beta_path, y_path):
    save_vector_csv(beta_path, inst.beta)
    save_vector_csv(y_path, inst.y)
