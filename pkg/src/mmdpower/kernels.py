"""RBF / ARD-RBF kernels, Gram matrices, and analytic parameter gradients.

Conventions fixed here and relied on everywhere else:

  k(x, y) = exp(-sum_d w_d^2 (x_d - y_d)^2 / (2 sigma^2))

with plain RBF having all w_d = 1.  The bandwidth sigma and the
per-dimension weights w_d are stored in log-space so that gradient-based
optimization is unconstrained and positivity holds by construction.
Weights enter squared, so their sign never matters and gradients are
smooth through zero.

Squared distances are computed from explicit coordinate differences
(chunked over rows to bound scratch memory) rather than the usual
|x|^2 + |y|^2 - 2<x,y> expansion.  The difference form is exactly
symmetric in its arguments at the bit level, which the estimator
identities downstream depend on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

RBF = "rbf"
ARD = "ard"

# target scratch size (in doubles) for chunked pairwise differences
_CHUNK_DOUBLES = 1 << 22


@dataclass(frozen=True)
class KernelSpec:
    """RBF or ARD-RBF kernel parameters, stored in log-space."""

    kind: str = RBF
    log_bandwidth: float = 0.0
    log_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (RBF, ARD):
            raise ValueError(f"unknown kernel kind: {self.kind!r}")
        sigma = np.exp(self.log_bandwidth)
        if not np.isfinite(sigma) or sigma <= 0.0:
            raise ValueError(f"bandwidth exp({self.log_bandwidth}) is not positive and finite")
        if self.kind == ARD:
            if self.log_weights is None:
                raise ValueError("ARD-RBF requires log_weights")
            object.__setattr__(
                self, "log_weights", np.asarray(self.log_weights, dtype=np.float64)
            )
        elif self.log_weights is not None:
            raise ValueError("plain RBF takes no log_weights")

    @property
    def bandwidth(self) -> float:
        return float(np.exp(self.log_bandwidth))

    def weights(self, d: int) -> np.ndarray:
        """Decoded per-dimension weights for data of dimension d."""
        if self.kind == RBF:
            return np.ones(d)
        w = np.exp(self.log_weights)
        if w.shape[0] != d:
            raise DimensionError(f"ARD weight count {w.shape[0]} != data dimension {d}")
        return w

    def param_names(self, d: int) -> list[str]:
        names = ["log_bandwidth"]
        if self.kind == ARD:
            names += [f"log_weight_{i}" for i in range(d)]
        return names

    def params(self) -> np.ndarray:
        """Flat parameter vector [log_bandwidth, log_weights...]."""
        if self.kind == RBF:
            return np.array([self.log_bandwidth])
        return np.concatenate([[self.log_bandwidth], self.log_weights])

    def with_params(self, p: np.ndarray) -> "KernelSpec":
        p = np.asarray(p, dtype=np.float64)
        if self.kind == RBF:
            if p.shape != (1,):
                raise DimensionError("plain RBF has exactly one parameter")
            return KernelSpec(RBF, float(p[0]))
        return KernelSpec(ARD, float(p[0]), p[1:].copy())

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "log_bandwidth": self.log_bandwidth}
        if self.kind == ARD:
            out["log_weights"] = [float(v) for v in self.log_weights]
        return out

    @staticmethod
    def from_dict(d: dict) -> "KernelSpec":
        lw = d.get("log_weights")
        return KernelSpec(
            d["kind"],
            float(d["log_bandwidth"]),
            None if lw is None else np.asarray(lw, dtype=np.float64),
        )


@dataclass
class GramBundle:
    """Kernel sub-matrices for one (X, Y) pair.

    KtXX and KtYY are symmetric with exactly zero diagonal; KXY has no
    structural constraints.
    """

    KXY: np.ndarray
    KtXX: np.ndarray
    KtYY: np.ndarray
    m: int


@dataclass
class JointGram:
    """Symmetric kernel matrix over the pooled sample Z = X stacked on Y."""

    K: np.ndarray
    m: int


@dataclass
class GramGradients:
    """Per-parameter elementwise derivatives of the GramBundle matrices.

    Parameter order matches KernelSpec.params(): log_bandwidth first, then
    ARD log_weights (if any).
    """

    dKXY: list[np.ndarray] = field(default_factory=list)
    dKtXX: list[np.ndarray] = field(default_factory=list)
    dKtYY: list[np.ndarray] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return len(self.dKXY)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"dataset must be 2-D (rows = observations), got ndim={X.ndim}")
    return X


def _check_pair(X, Y) -> tuple[np.ndarray, np.ndarray]:
    X, Y = _as_matrix(X), _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return X, Y


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances via explicit differences.

    Bit-symmetric: _sq_dists(A, A)[i, j] == _sq_dists(A, A)[j, i] exactly,
    because (a-b)^2 == (b-a)^2 in IEEE arithmetic and the reduction order
    over dimensions is fixed.
    """
    n, d = A.shape
    out = np.empty((n, B.shape[0]))
    chunk = max(1, _CHUNK_DOUBLES // max(B.shape[0] * max(d, 1), 1))
    for s in range(0, n, chunk):
        diff = A[s : s + chunk, None, :] - B[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[s : s + chunk])
    return out


def _scaled(X: np.ndarray, spec: KernelSpec) -> np.ndarray:
    w = spec.weights(X.shape[1])
    return X * (w / spec.bandwidth)


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"point shapes differ: {x.shape} vs {y.shape}")
    K = _kernel_matrix(x[None, :], y[None, :], spec)
    return float(K[0, 0])


def _kernel_matrix(X: np.ndarray, Y: np.ndarray, spec: KernelSpec) -> np.ndarray:
    D2 = _sq_dists(_scaled(X, spec), _scaled(Y, spec))
    np.multiply(D2, -0.5, out=D2)
    return np.exp(D2, out=D2)


def _symmetrize_zero_diag(K: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle; diagonal forced to exact zero."""
    U = np.triu(K, 1)
    return U + U.T


def gram_bundle(spec: KernelSpec, X, Y) -> GramBundle:
    """Compute KXY, KtXX, KtYY for samples of equal size m >= 2."""
    X, Y = _check_pair(X, Y)
    m = X.shape[0]
    if Y.shape[0] != m:
        raise DimensionError(f"sample sizes differ: {m} vs {Y.shape[0]}")
    if m < 2:
        raise DimensionError(f"need m >= 2 samples, got {m}")
    KXY = _kernel_matrix(X, Y, spec)
    KtXX = _symmetrize_zero_diag(_kernel_matrix(X, X, spec))
    KtYY = _symmetrize_zero_diag(_kernel_matrix(Y, Y, spec))
    return GramBundle(KXY=KXY, KtXX=KtXX, KtYY=KtYY, m=m)


def joint_gram(spec: KernelSpec, X, Y) -> JointGram:
    """Kernel matrix over the pooled sample, computed once and mirrored."""
    X, Y = _check_pair(X, Y)
    m = X.shape[0]
    if Y.shape[0] != m:
        raise DimensionError(f"sample sizes differ: {m} vs {Y.shape[0]}")
    if m < 2:
        raise DimensionError(f"need m >= 2 samples, got {m}")
    Z = np.vstack([X, Y])
    K = _kernel_matrix(Z, Z, spec)
    U = np.triu(K, 1)
    K = U + U.T
    np.fill_diagonal(K, 1.0)  # k(x, x) = 1 for (ARD-)RBF
    return JointGram(K=K, m=m)


def bundle_from_joint(jg: JointGram) -> GramBundle:
    """Recover the GramBundle view of a pooled kernel matrix."""
    m = jg.m
    KtXX = jg.K[:m, :m].copy()
    np.fill_diagonal(KtXX, 0.0)
    KtYY = jg.K[m:, m:].copy()
    np.fill_diagonal(KtYY, 0.0)
    return GramBundle(KXY=jg.K[:m, m:].copy(), KtXX=KtXX, KtYY=KtYY, m=m)


def gram_gradients(spec: KernelSpec, X, Y) -> GramGradients:
    """Elementwise dK/dtheta for each log-parameter of the kernel.

    dk/dlog(sigma) = k * sum_d w_d^2 (x_d - y_d)^2 / sigma^2
    dk/dlog(w_d)   = -k * w_d^2 (x_d - y_d)^2 / sigma^2
    """
    X, Y = _check_pair(X, Y)
    m = X.shape[0]
    if Y.shape[0] != m:
        raise DimensionError(f"sample sizes differ: {m} vs {Y.shape[0]}")
    if m < 2:
        raise DimensionError(f"need m >= 2 samples, got {m}")
    Xs, Ys = _scaled(X, spec), _scaled(Y, spec)

    out = GramGradients()
    pairs = [(Xs, Ys, "xy"), (Xs, Xs, "xx"), (Ys, Ys, "yy")]
    mats: dict[str, list[np.ndarray]] = {"xy": [], "xx": [], "yy": []}
    for A, B, tag in pairs:
        D2 = _sq_dists(A, B)
        K = np.exp(-0.5 * D2)
        grads = [K * D2]  # d/dlog(sigma): the whole scaled distance reappears
        if spec.kind == ARD:
            for dim in range(X.shape[1]):
                dd = (A[:, dim, None] - B[None, :, dim]) ** 2
                grads.append(-K * dd)
        if tag != "xy":
            grads = [_symmetrize_zero_diag(G) for G in grads]
        mats[tag] = grads
    out.dKXY = mats["xy"]
    out.dKtXX = mats["xx"]
    out.dKtYY = mats["yy"]
    return out
