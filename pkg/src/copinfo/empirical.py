"""Rank transforms, the empirical copula, and exact rank statistics.

Everything downstream of raw data flows through :class:`RankMatrix`: an
n x d integer matrix whose columns are permutations of 1..n.  Ties are
broken by a seeded uniform shuffle so pipelines stay reproducible; the
seed is a required argument, never hidden global state.

The empirical copula uses the R/(n+1) normalization throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "RankMatrix",
    "rank_transform",
    "ecop_eval",
    "empirical_ccte",
    "jensen_bound",
    "empirical_cmi2",
    "load_matrix_csv",
]


@dataclass(frozen=True, eq=False)
class RankMatrix:
    """n x d ranks, each column a permutation of 1..n."""

    ranks: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranks)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise ValueError(f"ranks must be a 2-D matrix, got shape {r.shape}")
        if not np.issubdtype(r.dtype, np.integer):
            raise ValueError("ranks must be integers")
        n = r.shape[0]
        expected = np.arange(1, n + 1)
        for k in range(r.shape[1]):
            if not np.array_equal(np.sort(r[:, k]), expected):
                raise ValueError(f"column {k} is not a permutation of 1..{n}")
        object.__setattr__(self, "ranks", r.astype(np.int64, copy=False))

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]

    def scaled(self) -> np.ndarray:
        """R/(n+1), the pseudo-observations."""
        return self.ranks / (self.n + 1.0)


def rank_transform(data, seed) -> RankMatrix:
    """Column-wise ranks with ties broken by a seeded uniform shuffle.

    Deterministic given the seed.  NaN entries are rejected.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-D, got shape {x.shape}")
    if np.isnan(x).any():
        raise ValueError("data contains NaN entries")
    rng = np.random.default_rng(seed)
    n, d = x.shape
    out = np.empty((n, d), dtype=np.int64)
    for k in range(d):
        order = np.lexsort((rng.random(n), x[:, k]))
        out[order, k] = np.arange(1, n + 1)
    return RankMatrix(out)


def ecop_eval(r: RankMatrix, u) -> np.ndarray | float:
    """Empirical copula: (1/n) sum_j prod_k 1{R_jk/(n+1) <= u_k}."""
    pts = np.asarray(u, dtype=float)
    scalar = pts.ndim == 1
    if scalar:
        pts = pts[None, :]
    if pts.shape[1] != r.d:
        raise ValueError(f"points have dimension {pts.shape[1]}, ranks have {r.d}")
    thresh = r.scaled()  # (n, d)
    ok = np.ones((pts.shape[0], r.n), dtype=bool)
    for k in range(r.d):
        ok &= thresh[None, :, k] <= pts[:, k, None]
    vals = ok.mean(axis=1)
    return float(vals[0]) if scalar else vals


def empirical_ccte(r: RankMatrix, alpha: float, quad=None):
    """Cumulative copula Tsallis entropy of the empirical copula (quadrature)."""
    from .copulas import empirical_copula
    from .measures import ccte

    return ccte(empirical_copula(r), alpha, quad)


def jensen_bound(r: RankMatrix, alpha: float) -> float:
    """Concavity (Jensen) upper bound for the empirical entropy.

    Returns -R * log_alpha(R) where R is the mass mean
    (1/n) sum_j prod_k (1 - R_jk/(n+1)); the empirical entropy at the same
    order never exceeds it.
    """
    if alpha == 1.0:
        raise ValueError("bound defined for alpha != 1")
    mass = float(np.mean(np.prod(1.0 - r.scaled(), axis=1)))
    return -mass * (mass ** (alpha - 1.0) - 1.0) / (alpha - 1.0)


def empirical_cmi2(r: RankMatrix) -> float:
    """Exact order-2 cumulative mutual information of the empirical copula.

    Evaluates int (C_n - Pi)^2 / Pi in closed form from the ranks, O(n^2 d):

        (1/n^2) sum_ij prod_k [-log max(R_ik, R_jk)/(n+1)]
        - (2/n) sum_i prod_k [1 - R_ik/(n+1)] + 2^-d
    """
    m = r.scaled()
    n, d = r.n, r.d
    lg = -np.log(m)
    pair = np.ones((n, n))
    for k in range(d):
        # -log of the max is the min of the -logs
        pair *= np.minimum.outer(lg[:, k], lg[:, k])
    t1 = float(pair.sum()) / (n * n)
    t2 = 2.0 * float(np.prod(1.0 - m, axis=1).sum()) / n
    return t1 - t2 + 0.5**d


def load_matrix_csv(path) -> np.ndarray:
    """Read an n x d numeric matrix from CSV, tolerating one header row."""
    path = Path(path)
    rows: list[list[str]] = []
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    start = 0
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        start = 1  # header row
    if start == len(rows):
        raise ValueError(f"{path}: no data rows")
    try:
        mat = np.array([[float(c) for c in row] for row in rows[start:]])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric data ({exc})") from None
    if mat.ndim != 2 or mat.shape[1] < 2:
        raise ValueError(f"{path}: need at least two numeric columns")
    return mat
