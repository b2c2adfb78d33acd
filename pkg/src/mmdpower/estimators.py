"""Unbiased MMD^2, its variance estimator, the t-statistic, and power.

The variance estimator may legitimately be negative (it is unbiased for a
nonnegative quantity), so the t-statistic floors it before taking the
square root.  VARIANCE_FLOOR is the package-wide default floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError
from .kernels import GramBundle

VARIANCE_FLOOR = 1e-8


@dataclass
class EstimatorOutput:
    mmd2: float
    variance: float
    t_stat: float
    m: int


@dataclass
class Contractions:
    """The scalar Gram contractions the variance estimator is built from."""

    m: int
    ktxx_rowsum: np.ndarray  # KtXX e
    ktyy_rowsum: np.ndarray
    kxy_rowsum: np.ndarray  # KXY e
    kxy_colsum: np.ndarray  # KXY^T e
    sum_ktxx: float  # e^T KtXX e
    sum_ktyy: float
    sum_kxy: float  # e^T KXY e
    fro_ktxx: float  # ||KtXX||_F^2
    fro_ktyy: float
    fro_kxy: float
    sq_ktxx_rowsum: float  # ||KtXX e||^2
    sq_ktyy_rowsum: float
    sq_kxy_rowsum: float  # ||KXY e||^2
    sq_kxy_colsum: float  # ||KXY^T e||^2
    ktxx_kxy: float  # e^T KtXX KXY e
    ktyy_kxyt: float  # e^T KtYY KXY^T e


def contractions(G: GramBundle) -> Contractions:
    # dtype-preserving: a longdouble GramBundle yields longdouble scalars,
    # which the identity tests rely on
    rx = G.KtXX.sum(axis=1)
    ry = G.KtYY.sum(axis=1)
    cr = G.KXY.sum(axis=1)
    cc = G.KXY.sum(axis=0)
    return Contractions(
        m=G.m,
        ktxx_rowsum=rx,
        ktyy_rowsum=ry,
        kxy_rowsum=cr,
        kxy_colsum=cc,
        sum_ktxx=rx.sum(),
        sum_ktyy=ry.sum(),
        sum_kxy=cr.sum(),
        fro_ktxx=np.einsum("ij,ij->", G.KtXX, G.KtXX),
        fro_ktyy=np.einsum("ij,ij->", G.KtYY, G.KtYY),
        fro_kxy=np.einsum("ij,ij->", G.KXY, G.KXY),
        sq_ktxx_rowsum=rx @ rx,
        sq_ktyy_rowsum=ry @ ry,
        sq_kxy_rowsum=cr @ cr,
        sq_kxy_colsum=cc @ cc,
        # symmetry of KtXX lets e^T KtXX KXY e contract through row sums
        ktxx_kxy=rx @ cr,
        ktyy_kxyt=ry @ cc,
    )


def mmd2_u(G: GramBundle) -> float:
    """Unbiased quadratic-time MMD^2 estimate.

    Assembled through the pairwise h-matrix H = KtXX + KtYY - (C + C^T)
    with C = KXY minus its diagonal; this cancels exactly (bitwise) when
    Y == X and is symmetric under swapping X and Y.
    """
    m = G.m
    if m < 2:
        raise NumericalError(f"mmd2_u needs m >= 2, got {m}")
    C = G.KXY.copy()
    np.fill_diagonal(C, 0.0)
    H = (G.KtXX + G.KtYY) - (C + C.T)
    return float(H.sum()) / (m * (m - 1))


def variance_hat(G: GramBundle) -> float:
    """Unbiased estimate of the asymptotic variance of mmd2_u.

    May be negative on near-degenerate data; callers wanting a ratio
    should floor it (see t_statistic).
    """
    m = G.m
    if m < 4:
        raise NumericalError(f"variance_hat needs m >= 4, got {m}")
    c = contractions(G)
    return float(variance_from_contractions(c))


def variance_from_contractions(c: Contractions):
    # each term divides the (dtype-preserving) contraction expression by an
    # exact integer, so extended-precision inputs keep their precision
    m = c.m
    v = 2 * (
        2 * c.sq_ktxx_rowsum - c.fro_ktxx + 2 * c.sq_ktyy_rowsum - c.fro_ktyy
    ) / (m**2 * (m - 1) ** 2)
    v -= (4 * m - 6) * (c.sum_ktxx**2 + c.sum_ktyy**2) / (m**3 * (m - 1) ** 3)
    v += 4 * (m - 2) * (c.sq_kxy_rowsum + c.sq_kxy_colsum) / (m**3 * (m - 1) ** 2)
    v -= 4 * (m - 3) * c.fro_kxy / (m**3 * (m - 1) ** 2)
    v -= (8 * m - 12) * c.sum_kxy**2 / (m**5 * (m - 1))
    v += 8 * (
        (c.sum_ktxx + c.sum_ktyy) * c.sum_kxy / m - c.ktxx_kxy - c.ktyy_kxyt
    ) / (m**3 * (m - 1))
    return v


def t_statistic(G: GramBundle, floor: float = VARIANCE_FLOOR) -> float:
    """mmd2_u / sqrt(max(variance_hat, floor))."""
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    v = variance_hat(G)
    return mmd2_u(G) / math.sqrt(max(v, floor))


def estimate(G: GramBundle, floor: float = VARIANCE_FLOOR) -> EstimatorOutput:
    """All three statistics in one pass over the contractions."""
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    mmd2 = mmd2_u(G)
    v = variance_hat(G)
    return EstimatorOutput(
        mmd2=mmd2, variance=v, t_stat=mmd2 / math.sqrt(max(v, floor)), m=G.m
    )


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def estimate_power(mmd2: float, variance: float, c_alpha: float, m: int) -> float:
    """Asymptotic power Phi(mmd2/sqrt(V) - c_alpha/(m sqrt(V))).

    c_alpha is on the m * MMD^2 scale (the test-statistic scale).
    """
    if variance <= 0:
        raise NumericalError(f"estimate_power needs variance > 0, got {variance}")
    if m < 1:
        raise DimensionError(f"m must be >= 1, got {m}")
    sv = math.sqrt(variance)
    return normal_cdf(mmd2 / sv - c_alpha / (m * sv))
