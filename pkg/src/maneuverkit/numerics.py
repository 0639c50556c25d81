"""Small numerical kernels shared by every learning module.

Everything runs in 64-bit floats: the gradient checks elsewhere in the
package compare analytic and finite-difference derivatives at 1e-4 relative
tolerance, which float32 cannot support.

Randomness goes through :func:`make_rng`, a seeded PCG64 generator, so any
experiment can be replayed exactly from the seed recorded in its checkpoint.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Seeded deterministic random generator (NumPy PCG64).

    Equal seeds produce identical streams on every platform, which is the
    reproducibility contract all training and generation code relies on.
    """
    return np.random.Generator(np.random.PCG64(seed))


def check_finite(name: str, value: np.ndarray | float) -> None:
    """Raise ValueError if ``value`` contains NaN or Inf."""
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} contains non-finite values")


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product with an explanatory shape diagnostic."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim != 2 or v.ndim != 1:
        raise ValueError(f"matvec expects a matrix and a vector, got shapes {m.shape} and {v.shape}")
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"matvec dimension mismatch: matrix is {m.shape[0]}x{m.shape[1]}, vector has length {v.shape[0]}")
    return m @ v


def softmax(v: np.ndarray) -> np.ndarray:
    """Probability vector exp(v_i) / sum_j exp(v_j).

    Always subtracts the max first: callers feed logits whose spread covers
    many orders of magnitude (e.g. per-model log-likelihoods).
    """
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("softmax of an empty vector is undefined")
    check_finite("softmax input", v)
    shifted = v - np.max(v)
    e = np.exp(shifted)
    return e / np.sum(e)


def softmax_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a 2-d array, max-subtracted per row."""
    m = np.asarray(m, dtype=float)
    shifted = m - np.max(m, axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=1, keepdims=True)


def logsumexp(v: np.ndarray) -> float:
    """log(sum(exp(v))) computed without overflow."""
    v = np.asarray(v, dtype=float)
    hi = np.max(v)
    if not np.isfinite(hi):
        return float(hi)
    return float(hi + np.log(np.sum(np.exp(v - hi))))


def finite_diff_grad(
    f: Callable[[np.ndarray], float], p: np.ndarray, eps: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient (f(p+eps*e_i) - f(p-eps*e_i)) / (2 eps).

    Used as the independent oracle against hand-written backpropagation.
    ``f`` must be scalar-valued and finite near ``p``.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    p = np.asarray(p, dtype=float)
    grad = np.zeros_like(p)
    work = p.copy()
    for i in range(p.size):
        orig = work.flat[i]
        work.flat[i] = orig + eps
        f_plus = f(work)
        work.flat[i] = orig - eps
        f_minus = f(work)
        work.flat[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise ValueError(f"objective returned a non-finite value near coordinate {i}")
        grad.flat[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """v / ||v||_2, passing an all-zero vector through unchanged."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v.copy()
    return v / norm
