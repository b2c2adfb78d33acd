"""Kernel selection: median heuristic, grid search, and ARD training.

The gradient of the t-statistic is assembled analytically: t is a
rational function of the scalar Gram contractions, so each d(t)/d(theta)
is one chain-rule pass contracting the derivative matrices from
kernels.gram_gradients against the contraction derivatives.  No autodiff
machinery is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DimensionError, NumericalError
from .estimators import (
    VARIANCE_FLOOR,
    Contractions,
    contractions,
    estimate,
    estimate_power,
    mmd2_u,
    variance_from_contractions,
)
from .kernels import GramBundle, GramGradients, KernelSpec, gram_bundle, gram_gradients, joint_gram
from .nulldist import sample_null_optimized, threshold

CRITERIA = ("max-mmd", "max-t", "max-power")
DEFAULT_GRID_COUNT = 30
DEFAULT_GRID_SPAN = 32.0  # grid spans [median/32, median*32]


@dataclass
class CandidateScore:
    spec: KernelSpec
    mmd2: float
    variance: float
    t_stat: float
    power_estimate: float | None = None


@dataclass
class SelectionReport:
    criterion: str
    candidates: list[CandidateScore]
    chosen: int
    split_seed: int = 0


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    iterations: int = 100
    batch_size: int = 500
    floor: float = VARIANCE_FLOOR
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.batch_size < 4:
            raise ValueError(f"batch_size must be >= 4, got {self.batch_size}")


def median_heuristic(X, Y, cap: int = 2000, seed: int = 0) -> float:
    """Median pairwise Euclidean distance over the pooled data.

    Exact if the pooled size is at most cap, otherwise computed on a
    seeded uniform subsample of cap points.
    """
    Z = np.vstack([np.atleast_2d(np.asarray(X, dtype=np.float64)),
                   np.atleast_2d(np.asarray(Y, dtype=np.float64))])
    if Z.shape[0] < 2:
        raise DimensionError(f"median heuristic needs >= 2 pooled points, got {Z.shape[0]}")
    if Z.shape[0] > cap:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        Z = Z[rng.choice(Z.shape[0], size=cap, replace=False)]
    return float(np.median(pdist(Z)))


def default_grid(sigma_median: float, count: int = DEFAULT_GRID_COUNT,
                 span: float = DEFAULT_GRID_SPAN) -> list[KernelSpec]:
    """count log-spaced RBF bandwidths centered on the median heuristic."""
    bws = np.geomspace(sigma_median / span, sigma_median * span, count)
    return [KernelSpec("rbf", float(np.log(b))) for b in bws]


def _criterion_value(score: CandidateScore, criterion: str) -> float:
    if criterion == "max-mmd":
        return score.mmd2
    if criterion == "max-t":
        return score.t_stat
    if criterion == "max-power":
        assert score.power_estimate is not None
        return score.power_estimate
    raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")


def score_candidates(
    X,
    Y,
    candidates: list[KernelSpec],
    with_power: bool = False,
    alpha: float = 0.1,
    B: int = 200,
    seed: int = 0,
    floor: float = VARIANCE_FLOOR,
    threads: int = 1,
) -> list[CandidateScore]:
    """Evaluate mmd2/variance/t (and optionally predicted power) per candidate."""
    out = []
    for idx, spec in enumerate(candidates):
        G = gram_bundle(spec, X, Y)
        est = estimate(G, floor=floor)
        power = None
        if with_power:
            jg = joint_gram(spec, X, Y)
            null = sample_null_optimized(jg, B=B, seed=_candidate_seed(seed, idx), threads=threads)
            c_alpha = G.m * threshold(null, alpha)
            power = estimate_power(est.mmd2, max(est.variance, floor), c_alpha, G.m)
        out.append(CandidateScore(spec, est.mmd2, est.variance, est.t_stat, power))
    return out


def _candidate_seed(seed: int, idx: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(idx,)).generate_state(1)[0])


def choose(scores: list[CandidateScore], criterion: str) -> int:
    """Argmax of the criterion; ties broken by smallest bandwidth."""
    best = 0
    for i in range(1, len(scores)):
        vi = _criterion_value(scores[i], criterion)
        vb = _criterion_value(scores[best], criterion)
        if vi > vb or (vi == vb and scores[i].spec.bandwidth < scores[best].spec.bandwidth):
            best = i
    return best


def grid_select(
    X,
    Y,
    candidates: list[KernelSpec],
    criterion: str = "max-t",
    alpha: float = 0.1,
    B: int = 200,
    seed: int = 0,
    floor: float = VARIANCE_FLOOR,
    threads: int = 1,
) -> SelectionReport:
    """Score every candidate kernel on (X, Y) and pick the criterion argmax."""
    if not candidates:
        raise ValueError("candidate list is empty")
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    scores = score_candidates(
        X, Y, candidates,
        with_power=(criterion == "max-power"),
        alpha=alpha, B=B, seed=seed, floor=floor, threads=threads,
    )
    return SelectionReport(criterion=criterion, candidates=scores,
                           chosen=choose(scores, criterion), split_seed=seed)


def split_train_test(X, Y, fraction: float = 0.5, seed: int = 0):
    """Seeded uniform split into (X_tr, Y_tr, X_te, Y_te), equal m per side."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(f"sample sizes differ: {X.shape[0]} vs {Y.shape[0]}")
    m = X.shape[0]
    n_tr = round(fraction * m)
    if n_tr < 4 or m - n_tr < 4:
        raise DimensionError(f"split of m={m} at fraction={fraction} leaves a half below 4 points")
    ss_x, ss_y = np.random.SeedSequence(seed).spawn(2)
    ix = np.random.default_rng(ss_x).permutation(m)
    iy = np.random.default_rng(ss_y).permutation(m)
    return X[ix[:n_tr]], Y[iy[:n_tr]], X[ix[n_tr:]], Y[iy[n_tr:]]


# --- gradient of the t-statistic -------------------------------------------


def _mmd2_gradient(dG: GramGradients, m: int) -> np.ndarray:
    out = np.empty(dG.n_params)
    for p in range(dG.n_params):
        cross = dG.dKXY[p].sum() - np.trace(dG.dKXY[p])
        out[p] = (dG.dKtXX[p].sum() + dG.dKtYY[p].sum() - 2.0 * cross) / (m * (m - 1))
    return out


def _variance_gradient(G: GramBundle, c: Contractions, dG: GramGradients) -> np.ndarray:
    m = c.m
    out = np.empty(dG.n_params)
    for p in range(dG.n_params):
        Gxx, Gyy, Gxy = dG.dKtXX[p], dG.dKtYY[p], dG.dKXY[p]
        gxx_row = Gxx.sum(axis=1)
        gyy_row = Gyy.sum(axis=1)
        gxy_row = Gxy.sum(axis=1)
        gxy_col = Gxy.sum(axis=0)
        s_gxx = gxx_row.sum()
        s_gyy = gyy_row.sum()
        s_gxy = gxy_row.sum()

        dv = (
            2.0
            / (m**2 * (m - 1) ** 2)
            * (
                4.0 * (c.ktxx_rowsum @ gxx_row)
                - 2.0 * np.einsum("ij,ij->", G.KtXX, Gxx)
                + 4.0 * (c.ktyy_rowsum @ gyy_row)
                - 2.0 * np.einsum("ij,ij->", G.KtYY, Gyy)
            )
        )
        dv -= (
            (4 * m - 6)
            / (m**3 * (m - 1) ** 3)
            * 2.0
            * (c.sum_ktxx * s_gxx + c.sum_ktyy * s_gyy)
        )
        dv += (
            4 * (m - 2)
            / (m**3 * (m - 1) ** 2)
            * 2.0
            * (c.kxy_rowsum @ gxy_row + c.kxy_colsum @ gxy_col)
        )
        dv -= 4 * (m - 3) / (m**3 * (m - 1) ** 2) * 2.0 * np.einsum("ij,ij->", G.KXY, Gxy)
        dv -= (8 * m - 12) / (m**5 * (m - 1)) * 2.0 * c.sum_kxy * s_gxy
        dv += (
            8.0
            / (m**3 * (m - 1))
            * (
                ((s_gxx + s_gyy) * c.sum_kxy + (c.sum_ktxx + c.sum_ktyy) * s_gxy) / m
                - (gxx_row @ c.kxy_rowsum + c.ktxx_rowsum @ gxy_row)
                - (gyy_row @ c.kxy_colsum + c.ktyy_rowsum @ gxy_col)
            )
        )
        out[p] = dv
    return out


def t_stat_and_gradient(
    spec: KernelSpec, X, Y, floor: float = VARIANCE_FLOOR
) -> tuple[float, np.ndarray]:
    """t-statistic and its gradient w.r.t. the kernel's log-parameters.

    When the variance sits at the floor, the denominator is constant and
    only the numerator contributes to the gradient.
    """
    G = gram_bundle(spec, X, Y)
    if G.m < 4:
        raise NumericalError(f"t-statistic needs m >= 4, got {G.m}")
    dG = gram_gradients(spec, X, Y)
    c = contractions(G)
    M = mmd2_u(G)
    V = variance_from_contractions(c)
    dM = _mmd2_gradient(dG, G.m)
    Vf = max(V, floor)
    sq = math.sqrt(Vf)
    t = M / sq
    if V > floor:
        dV = _variance_gradient(G, c, dG)
        grad = dM / sq - 0.5 * M * dV / (Vf * sq)
    else:
        grad = dM / sq
    return t, grad


# --- ARD training -----------------------------------------------------------


@dataclass
class AdamState:
    """Adaptive-moment ascent on a flat parameter vector."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None)  # type: ignore[assignment]
    v: np.ndarray = field(default=None)  # type: ignore[assignment]

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return params + self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train_ard(
    X_tr, Y_tr, init: KernelSpec, cfg: TrainConfig
) -> tuple[KernelSpec, np.ndarray]:
    """Stochastic gradient ascent of the t-statistic over log-parameters.

    Each iteration draws one fresh seeded index batch (without
    replacement) shared by X_tr and Y_tr, preserving the estimator's
    row pairing; on identical training sets the objective stays exactly
    zero.  Returns the trained spec and the per-iteration trace of the
    minibatch t-statistic.
    """
    X_tr = np.atleast_2d(np.asarray(X_tr, dtype=np.float64))
    Y_tr = np.atleast_2d(np.asarray(Y_tr, dtype=np.float64))
    m_tr = min(X_tr.shape[0], Y_tr.shape[0])
    if cfg.batch_size > m_tr:
        raise DimensionError(f"batch_size {cfg.batch_size} exceeds training size {m_tr}")
    spec = init
    params = spec.params()
    adam = AdamState(lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    trace = np.empty(cfg.iterations)
    for it in range(cfg.iterations):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(it,)))
        batch = rng.choice(m_tr, size=cfg.batch_size, replace=False)
        t, grad = t_stat_and_gradient(spec, X_tr[batch], Y_tr[batch], floor=cfg.floor)
        trace[it] = t
        params = adam.step(params, grad)
        spec = spec.with_params(params)
    return spec, trace
