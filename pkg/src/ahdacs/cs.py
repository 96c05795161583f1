"""Compressive-sensing core: measurement counts, sensing matrices, OMP recovery.

Sender and receiver both regenerate the Gaussian sensing matrix from a
seed derived from ``(global seed, level, cluster index, round)``, so a
packet only has to carry the sparsity and the vector length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import idct

from ._validation import InvalidParameterError, check_int, check_vector

__all__ = [
    "MeasurementPlan",
    "MeasurementPacket",
    "OMPResult",
    "measurement_count",
    "gate_bound",
    "cs_gate",
    "derive_seed",
    "sensing_matrix",
    "measure",
    "dct_basis",
    "omp",
    "recover",
]

RIDGE = 1e-10
_COND_LIMIT = 1e10


def measurement_count(K, N):
    """``ceil(K * log2(N))``."""
    K = check_int(K, "K", minimum=1)
    N = check_int(N, "N", minimum=2)
    return int(math.ceil(K * math.log2(N)))


def gate_bound(N):
    """``N / log2(N)``, or 0.0 for ``N <= 3`` where the gate is degenerate."""
    if N <= 3:
        return 0.0
    return N / math.log2(N)


def cs_gate(K, N):
    """True when compressive measurement pays off: ``N >= 4`` and ``K < N/log2 N``."""
    return N >= 4 and K < N / math.log2(N)


def derive_seed(*keys):
    """Fold integer keys into a 63-bit seed via :class:`numpy.random.SeedSequence`."""
    words = [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 32 | int(state[1])) & 0x7FFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class MeasurementPlan:
    K: int
    N: int
    M: int
    seed: int

    @classmethod
    def for_signal(cls, K, N, seed):
        return cls(K, N, measurement_count(K, N), seed)


@dataclass(frozen=True)
class MeasurementPacket:
    plan: MeasurementPlan
    measurements: np.ndarray
    origin: tuple  # (level, cluster index)

    def __post_init__(self):
        if len(self.measurements) != self.plan.M:
            raise InvalidParameterError(
                f"packet carries {len(self.measurements)} measurements, plan says {self.plan.M}"
            )


def sensing_matrix(M, N, seed):
    """``M x N`` matrix of i.i.d. N(0, 1/M) entries, reproducible from ``seed``."""
    M = check_int(M, "M", minimum=1)
    N = check_int(N, "N", minimum=1)
    if M > N:
        raise InvalidParameterError(f"M ({M}) must not exceed N ({N})")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return rng.standard_normal((M, N)) / math.sqrt(M)


def measure(matrix, x):
    A = np.asarray(matrix, dtype=float)
    x = check_vector(x)
    if A.ndim != 2 or A.shape[1] != x.size:
        raise InvalidParameterError(f"cannot apply a {A.shape} matrix to a length-{x.size} vector")
    return A @ x


def dct_basis(N):
    """Columns are the orthonormal DCT atoms: ``x = dct_basis(N) @ coeffs``."""
    return idct(np.eye(N), type=2, norm="ortho", axis=0)


@dataclass
class OMPResult:
    coef: np.ndarray
    support: list
    residual_norm: float
    ridge_used: bool = False


def omp(A, y, n_iter):
    """Orthogonal matching pursuit run for exactly ``n_iter`` selections.

    Atoms are picked on normalized correlations; once chosen an atom is
    never picked again. Stops early only when ``y`` is exactly zero or every
    atom has been used.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n_atoms = A.shape[1]
    coef = np.zeros(n_atoms)
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return OMPResult(coef, [], 0.0)
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = np.inf
    support = []
    residual = y.copy()
    sol = np.zeros(0)
    ridge_used = False
    for _ in range(min(n_iter, n_atoms)):
        score = np.abs(A.T @ residual) / norms
        score[support] = -np.inf
        support.append(int(np.argmax(score)))
        sub = A[:, support]
        if np.linalg.cond(sub) > _COND_LIMIT:
            ridge_used = True
            G = sub.T @ sub + RIDGE * np.eye(len(support))
            sol = np.linalg.solve(G, sub.T @ y)
        else:
            sol = np.linalg.lstsq(sub, y, rcond=None)[0]
        residual = y - sub @ sol
    coef[support] = sol
    return OMPResult(coef, support, float(np.linalg.norm(residual)), ridge_used)


def recover(y, plan, full_output=False):
    """Reconstruct the length-``plan.N`` signal from its measurements.

    Solves for a ``plan.K``-sparse DCT spectrum with :func:`omp` against the
    regenerated sensing matrix and returns the inverse transform. With
    ``full_output`` the :class:`OMPResult` is returned as well.
    """
    y = np.asarray(y, dtype=float).ravel()
    if plan.M < 1:
        raise InvalidParameterError("plan.M must be at least 1")
    if y.size != plan.M:
        raise InvalidParameterError(f"expected {plan.M} measurements, got {y.size}")
    Phi = sensing_matrix(plan.M, plan.N, plan.seed)
    Psi = dct_basis(plan.N)
    res = omp(Phi @ Psi, y, plan.K)
    x_hat = Psi @ res.coef
    return (x_hat, res) if full_output else x_hat
