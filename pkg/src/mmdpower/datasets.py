"""Synthetic benchmark generators and dataset file I/O.

Binary format: magic b"MMD1", then row count and column count as
little-endian unsigned 64-bit integers, then row-major float64 payload.
CSV: headerless comma-separated floats, written with 17 significant
digits so text round trips recover the exact double.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DimensionError

MAGIC = b"MMD1"
FORMATS = ("csv", "bin")


@dataclass(frozen=True)
class BlobsParams:
    """5x5-grid blobs benchmark: P and Q differ only in within-blob
    covariance shape, parameterized by the eigenvalue ratio epsilon."""

    epsilon: float
    m: int
    grid_size: int = 5
    spacing: float = 10.0
    seed: int = 0

    @property
    def rho(self) -> float:
        return (self.epsilon - 1.0) / (self.epsilon + 1.0)


def blobs_generate(p: BlobsParams) -> tuple[np.ndarray, np.ndarray]:
    """Draw (X, Y) from the blobs benchmark.

    Each sample picks a grid center uniformly and adds 2-D Gaussian noise:
    identity covariance for X, covariance [[1, rho], [rho, 1]] for Y with
    rho = (eps-1)/(eps+1).  X and Y use independent child streams, so
    changing epsilon never alters X.
    """
    if p.m < 1:
        raise DimensionError(f"m must be >= 1, got {p.m}")
    if p.epsilon < 1.0:
        raise ValueError(f"epsilon must be >= 1, got {p.epsilon}")
    ss_x, ss_y = np.random.SeedSequence(p.seed).spawn(2)
    X = _blobs_half(np.random.default_rng(ss_x), p, rho=0.0)
    Y = _blobs_half(np.random.default_rng(ss_y), p, rho=p.rho)
    return X, Y


def _blobs_half(rng: np.random.Generator, p: BlobsParams, rho: float) -> np.ndarray:
    centers = rng.integers(0, p.grid_size, size=(p.m, 2)).astype(np.float64) * p.spacing
    noise = rng.standard_normal((p.m, 2))
    # exact Cholesky factor of [[1, rho], [rho, 1]]
    shaped = np.empty_like(noise)
    shaped[:, 0] = noise[:, 0]
    shaped[:, 1] = rho * noise[:, 0] + np.sqrt(1.0 - rho * rho) * noise[:, 1]
    return centers + shaped


def gauss_vs_laplace(m: int, d: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """X ~ N(0, I_d); Y has i.i.d. Laplace coordinates with matched moments
    (zero mean, unit variance, i.e. scale 1/sqrt(2))."""
    if m < 1 or d < 1:
        raise DimensionError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    ss_x, ss_y = np.random.SeedSequence(seed).spawn(2)
    X = np.random.default_rng(ss_x).standard_normal((m, d))
    Y = np.random.default_rng(ss_y).laplace(0.0, 1.0 / np.sqrt(2.0), size=(m, d))
    return X, Y


def write_dataset(ds: np.ndarray, path, format: str = "bin") -> None:
    ds = np.ascontiguousarray(np.asarray(ds, dtype=np.float64))
    if ds.ndim != 2:
        raise DimensionError(f"dataset must be 2-D, got ndim={ds.ndim}")
    path = Path(path)
    if format == "bin":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", ds.shape[0], ds.shape[1]))
            fh.write(ds.astype("<f8").tobytes())
    elif format == "csv":
        with open(path, "w") as fh:
            for row in ds:
                fh.write(",".join(f"{v:.17g}" for v in row))
                fh.write("\n")
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def read_dataset(path, format: str = "bin") -> np.ndarray:
    path = Path(path)
    if format == "bin":
        return _read_bin(path)
    if format == "csv":
        return _read_csv(path)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def _read_bin(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if len(data) == 0:
        raise DataFormatError(f"{path}: empty file")
    if len(data) < 20 or data[:4] != MAGIC:
        raise DataFormatError(f"{path}: bad magic (not an MMD1 dataset)")
    rows, cols = struct.unpack("<QQ", data[4:20])
    expected = 20 + rows * cols * 8
    if len(data) != expected:
        raise DataFormatError(
            f"{path}: payload is {len(data) - 20} bytes, expected {rows}x{cols}x8"
        )
    return np.frombuffer(data, dtype="<f8", offset=20).reshape(rows, cols).copy()


def _read_csv(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    ncols = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
            if ncols is None:
                ncols = len(vals)
            elif len(vals) != ncols:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {ncols} columns, got {len(vals)}"
                )
            rows.append(vals)
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    return np.asarray(rows, dtype=np.float64)
