"""Training-objective kernel: in-batch negative loss, FLOPS and joint-FLOPS
sparsity regularizers, with analytic gradients.

No model training happens here; the functions operate on dense N x V
representation matrices so gradients can be checked directly against
central finite differences (see :func:`gradient_selftest`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DataError, DimensionMismatchError, NonSquareError


def _as_matrix(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DataError(f"{name} must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class Batch:
    """Paired query/document representation rows over a shared vocabulary."""

    q_reps: np.ndarray
    d_reps: np.ndarray

    def __post_init__(self):
        q = _as_matrix(self.q_reps, "q_reps")
        d = _as_matrix(self.d_reps, "d_reps")
        if q.shape != d.shape:
            raise DimensionMismatchError(
                f"q_reps {q.shape} and d_reps {d.shape} must have identical shape"
            )
        if np.any(q < 0) or np.any(d < 0):
            raise DataError("representations must be non-negative")
        object.__setattr__(self, "q_reps", q)
        object.__setattr__(self, "d_reps", d)

    @property
    def size(self) -> int:
        return self.q_reps.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.q_reps.shape[1]


def score_matrix(batch: Batch) -> np.ndarray:
    """S[i, j] = <query row i, document row j>."""
    return batch.q_reps @ batch.d_reps.T


def in_batch_loss(scores) -> float:
    """Mean softmax cross-entropy where row i's positive is document i and
    the other in-batch documents are its negatives.

    Stabilized with max subtraction, so score magnitudes up to ~1e4 stay
    finite. Equals ln N when every score in a row is identical.
    """
    s = _as_matrix(scores, "scores")
    n = s.shape[0]
    if s.shape[1] != n:
        raise NonSquareError(f"score matrix must be square, got {s.shape}")
    row_max = s.max(axis=1, keepdims=True)
    lse = row_max[:, 0] + np.log(np.exp(s - row_max).sum(axis=1))
    return float(np.mean(lse - np.diag(s)))


def in_batch_loss_grad(scores) -> np.ndarray:
    """d(in_batch_loss)/dS = (softmax(S, rows) - I) / N."""
    s = _as_matrix(scores, "scores")
    n = s.shape[0]
    if s.shape[1] != n:
        raise NonSquareError(f"score matrix must be square, got {s.shape}")
    z = np.exp(s - s.max(axis=1, keepdims=True))
    p = z / z.sum(axis=1, keepdims=True)
    return (p - np.eye(n)) / n


def flops_loss(reps) -> float:
    """Squared norm of the column-mean representation."""
    r = _as_matrix(reps, "reps")
    mean = r.mean(axis=0)
    return float(mean @ mean)


def flops_loss_grad(reps) -> np.ndarray:
    """d(flops_loss)/dreps[i, j] = 2 * column_mean[j] / N."""
    r = _as_matrix(reps, "reps")
    n = r.shape[0]
    return np.tile(2.0 * r.mean(axis=0) / n, (n, 1))


def joint_flops_loss(q_reps, d_reps) -> float:
    """Inner product of the query-side and document-side column means.

    Symmetric in its arguments; reduces to flops_loss when both sides are
    the same matrix. Row counts may differ, vocabularies may not.
    """
    q = _as_matrix(q_reps, "q_reps")
    d = _as_matrix(d_reps, "d_reps")
    if q.shape[1] != d.shape[1]:
        raise DimensionMismatchError(
            f"vocab dimensions differ: {q.shape[1]} vs {d.shape[1]}"
        )
    return float(q.mean(axis=0) @ d.mean(axis=0))


def joint_flops_grad(q_reps, d_reps) -> tuple[np.ndarray, np.ndarray]:
    """Gradients w.r.t. both sides: d/dq[i,j] = d_mean[j]/N_q and vice versa."""
    q = _as_matrix(q_reps, "q_reps")
    d = _as_matrix(d_reps, "d_reps")
    if q.shape[1] != d.shape[1]:
        raise DimensionMismatchError(
            f"vocab dimensions differ: {q.shape[1]} vs {d.shape[1]}"
        )
    gq = np.tile(d.mean(axis=0) / q.shape[0], (q.shape[0], 1))
    gd = np.tile(q.mean(axis=0) / d.shape[0], (d.shape[0], 1))
    return gq, gd


def central_difference(
    f: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5
) -> np.ndarray:
    """Central finite-difference gradient of a scalar function, entry by entry."""
    g = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        lo = x.copy()
        hi = x.copy()
        lo[idx] -= eps
        hi[idx] += eps
        g[idx] = (f(hi) - f(lo)) / (2.0 * eps)
    return g


def _grad_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max absolute deviation relative to the gradient's overall scale."""
    scale = max(float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


@dataclass(frozen=True)
class SelftestCheck:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def gradient_selftest(
    seed: int = 0,
    sizes: tuple[tuple[int, int], ...] = ((2, 5), (4, 16), (8, 32)),
    instances: int = 50,
    eps: float = 1e-5,
    tolerance: float = 1e-5,
) -> list[SelftestCheck]:
    """Verify loss values and gradients on random instances.

    Values are checked against closed forms (uniform scores -> ln N,
    stability at |S| = 1e4); each analytic gradient is checked against the
    central-difference gradient on ``instances`` random draws per size.
    """
    rng = np.random.default_rng(seed)
    checks: list[SelftestCheck] = []

    uniform_err = 0.0
    for n in (1, 2, 3, 10):
        got = in_batch_loss(np.full((n, n), 1.7))
        uniform_err = max(uniform_err, float(abs(got - np.log(n))))
    checks.append(SelftestCheck("in_batch_loss uniform == ln N", uniform_err, 1e-9))

    big = rng.uniform(-1e4, 1e4, size=(6, 6))
    stable = in_batch_loss(big)
    checks.append(
        SelftestCheck(
            "in_batch_loss finite at |S| = 1e4",
            0.0 if np.isfinite(stable) else np.inf,
            0.0,
        )
    )

    err_ib = err_fl = err_jq = err_jd = 0.0
    for n, v in sizes:
        for _ in range(instances):
            s = rng.uniform(0.0, 5.0, size=(n, n))
            err_ib = max(
                err_ib,
                _grad_error(
                    in_batch_loss_grad(s), central_difference(in_batch_loss, s, eps)
                ),
            )
            r = rng.uniform(0.0, 5.0, size=(n, v))
            err_fl = max(
                err_fl,
                _grad_error(flops_loss_grad(r), central_difference(flops_loss, r, eps)),
            )
            q = rng.uniform(0.0, 5.0, size=(n, v))
            d = rng.uniform(0.0, 5.0, size=(max(1, n - 1), v))
            gq, gd = joint_flops_grad(q, d)
            err_jq = max(
                err_jq,
                _grad_error(
                    gq, central_difference(lambda x: joint_flops_loss(x, d), q, eps)
                ),
            )
            err_jd = max(
                err_jd,
                _grad_error(
                    gd, central_difference(lambda x: joint_flops_loss(q, x), d, eps)
                ),
            )
    checks.append(SelftestCheck("in_batch_loss_grad vs central differences", err_ib, tolerance))
    checks.append(SelftestCheck("flops_loss_grad vs central differences", err_fl, tolerance))
    checks.append(SelftestCheck("joint_flops_grad (query side) vs central differences", err_jq, tolerance))
    checks.append(SelftestCheck("joint_flops_grad (document side) vs central differences", err_jd, tolerance))
    return checks
