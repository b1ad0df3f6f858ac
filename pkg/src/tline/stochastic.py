"""Non-intrusive UQ: tensor Gauss-Legendre collocation, Sobol indices,
Bernoulli failure curves and a Monte Carlo baseline.

Quantities of interest are arrays whose first axis runs over realizations
(grid nodes in lexicographic order, or MC samples). Reductions accumulate
in that fixed order so results do not depend on how realizations were
scheduled.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

VARIANCE_FLOOR = 1e-14


@dataclass(frozen=True)
class RandomParameter:
    name: str
    mean: float
    half_width_frac: float = 0.10

    def __post_init__(self):
        if not 0 < self.half_width_frac < 1:
            raise ValueError("half_width_frac must lie in (0, 1)")
        if self.mean <= 0:
            raise ValueError(f"{self.name}: mean must be positive for a positive support")

    @property
    def bounds(self) -> tuple[float, float]:
        d = self.half_width_frac * self.mean
        return self.mean - d, self.mean + d

    @property
    def density(self) -> float:
        lo, hi = self.bounds
        return 1.0 / (hi - lo)

    def map(self, eta):
        """[-1, 1] -> [a, b]."""
        lo, hi = self.bounds
        return lo + (hi - lo) * (np.asarray(eta, dtype=float) + 1.0) / 2.0

    def sample(self, rng: np.random.Generator, size=None):
        lo, hi = self.bounds
        return rng.uniform(lo, hi, size)


def gauss_legendre(n: int):
    """n-point rule on [-1, 1]; weights sum to 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class CollocationGrid:
    params: tuple[RandomParameter, ...]
    n: int = 5

    def __post_init__(self):
        if not 1 <= len(self.params) <= 5:
            raise ValueError("tensor grids support 1 to 5 dimensions")
        if len({p.name for p in self.params}) != len(self.params):
            raise ValueError("duplicate parameter")

    @property
    def dims(self) -> int:
        return len(self.params)

    @property
    def size(self) -> int:
        return self.n ** self.dims

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @property
    def rule(self):
        return gauss_legendre(self.n)

    @property
    def indices(self) -> np.ndarray:
        """(size, dims) per-dimension point indices, last dimension fastest."""
        return np.array(list(itertools.product(range(self.n), repeat=self.dims)), dtype=int).reshape(-1, self.dims)

    @property
    def eta(self) -> np.ndarray:
        return self.rule[0][self.indices]

    @property
    def nodes(self) -> np.ndarray:
        """(size, dims) physical coordinates."""
        eta = self.eta
        return np.column_stack([p.map(eta[:, j]) for j, p in enumerate(self.params)])

    @property
    def weights(self) -> np.ndarray:
        """Products of the raw Gauss-Legendre weights (sum 2**dims)."""
        return np.prod(self.rule[1][self.indices], axis=1)

    @property
    def probability_weights(self) -> np.ndarray:
        """(Prod w)(Prod rho)(Prod J) = (1/2)**dims Prod w for uniform inputs."""
        return self.weights * 0.5 ** self.dims

    def realizations(self) -> list[dict]:
        names = [p.name for p in self.params]
        return [dict(zip(names, map(float, row))) for row in self.nodes]


def _fold(weights, q) -> np.ndarray:
    """sum_i w_i q_i accumulated in index order."""
    q = np.asarray(q, dtype=float)
    if q.shape[0] != len(weights):
        raise ValueError(f"expected {len(weights)} realizations, got {q.shape[0]}")
    acc = np.zeros(q.shape[1:])
    for w, qi in zip(weights, q):
        acc += w * qi
    return acc


def expectation(grid: CollocationGrid, qoi) -> np.ndarray:
    return _fold(grid.probability_weights, qoi)


def std_dev(grid: CollocationGrid, qoi, mean=None) -> np.ndarray:
    qoi = np.asarray(qoi, dtype=float)
    mean = expectation(grid, qoi) if mean is None else np.asarray(mean, dtype=float)
    var = _fold(grid.probability_weights, (qoi - mean) ** 2)
    return np.sqrt(np.maximum(var, 0.0))


def sobol_first_order(grid: CollocationGrid, qoi):
    """First-order indices, shape (dims, *qoi.shape[1:]), and a low-variance mask.

    For dimension j the conditional mean E[Q | xi_j = point p] integrates the
    other dimensions by quadrature; its variance over the points of xi_j,
    divided by the total variance, is S_j.
    """
    qoi = np.asarray(qoi, dtype=float)
    tail = qoi.shape[1:]
    q = qoi.reshape(grid.shape + tail)
    pw = grid.rule[1] / 2.0
    mean = expectation(grid, qoi)
    var = std_dev(grid, qoi, mean) ** 2
    low = var < VARIANCE_FLOOR
    out = np.zeros((grid.dims,) + tail)
    for j in range(grid.dims):
        cond = np.moveaxis(q, j, 0)
        for _ in range(grid.dims - 1):
            cond = np.einsum("pi...,i->p...", cond, pw)
        vj = _fold(pw, (cond - mean) ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[j] = np.where(low, 0.0, vj / np.where(low, 1.0, var))
    return np.clip(out, 0.0, 1.0), low


def bernoulli_transform(theta_max, theta_lim: float) -> np.ndarray:
    """0 before the first exceedance of theta_lim, 1 from it onwards.

    NaN entries (a run stopped after failure) do not reset the indicator.
    """
    x = np.asarray(theta_max, dtype=float)
    with np.errstate(invalid="ignore"):
        hit = (x > theta_lim).astype(float)
    return np.maximum.accumulate(hit, axis=-1)


def probability_of_failure(grid: CollocationGrid, h_b) -> np.ndarray:
    return np.clip(expectation(grid, h_b), 0.0, 1.0)


def uniform_sampler(params):
    """Sampler drawing one dict of independent +-10% uniforms per call."""
    params = tuple(params)

    def draw(rng: np.random.Generator) -> dict:
        return {p.name: float(p.sample(rng)) for p in params}
    return draw


def draw_samples(sampler, n_samples: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    return [sampler(rng) for _ in range(n_samples)]


def monte_carlo(sampler, n_samples: int, qoi, seed: int) -> np.ndarray:
    """Plain average of ``qoi(sample)`` over seeded draws."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    samples = draw_samples(sampler, n_samples, seed)
    values = np.array([np.asarray(qoi(s), dtype=float) for s in samples])
    return _fold(np.full(n_samples, 1.0 / n_samples), values)


def relative_error(field, reference) -> float:
    field = np.asarray(field, dtype=float)
    reference = np.asarray(reference, dtype=float)
    ref = np.linalg.norm(reference)
    if ref == 0:
        raise ValueError("reference has zero norm")
    return float(np.linalg.norm(field - reference) / ref)


def truncation_index(series) -> int:
    """Length of the shortest all-finite prefix across realizations."""
    s = np.asarray(series, dtype=float)
    finite = np.isfinite(s)
    lengths = np.where(finite.all(axis=1), s.shape[1], np.argmin(finite, axis=1))
    return int(lengths.min())
