"""Chain-rule sampling for projection determinantal point processes.

Given a full-column-rank feature matrix Phi (N x d), the measure on
d-subsets K with P(K) proportional to det(Phi[K])^2 is the projection DPP
with kernel Phi (Phi^T Phi)^-1 Phi^T. Sampling runs the exact chain rule:
at step t the next item is drawn with probability (residual leverage)/(d-t),
maintaining an orthonormal basis of the selected rows' span.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalDegeneracy

# Gram-Schmidt drift is repaired on this cadence.
REORTH_INTERVAL = 16

_LEVERAGE_FLOOR = 1e-12


def draw_categorical(lev: np.ndarray, chosen: list[int], rng: np.random.Generator) -> int:
    """Draw an index proportionally to clamped leverages, excluding chosen."""
    probs = np.clip(lev, 0.0, None)
    if chosen:
        probs[chosen] = 0.0
    total = float(probs.sum())
    if total <= _LEVERAGE_FLOOR:
        raise NumericalDegeneracy("no leverage mass left to sample from")
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * total, side="right"))
    return min(idx, len(lev) - 1)


def sample_projection_dpp(features: np.ndarray, rng: np.random.Generator) -> list[int]:
    """Sample a d-subset of row indices with P(K) ~ det(features[K])^2.

    The feature matrix must have full column rank d. Returns indices in
    selection order.
    """
    phi = np.asarray(features, dtype=float)
    d = phi.shape[1]
    # Orthonormalize columns once; initial leverages are squared row norms.
    q, r = np.linalg.qr(phi)
    if np.min(np.abs(np.diag(r))) <= 0:
        raise NumericalDegeneracy("feature matrix is column rank deficient")
    lev = np.einsum("ij,ij->i", q, q)
    basis = np.zeros((d, d))
    chosen: list[int] = []
    for t in range(d):
        idx = draw_categorical(lev, chosen, rng)
        w = q[idx].copy()
        for j in range(t):
            w -= (w @ basis[j]) * basis[j]
        norm2 = float(w @ w)
        if norm2 <= _LEVERAGE_FLOOR:
            raise NumericalDegeneracy(f"residual direction collapsed at step {t}")
        basis[t] = w / np.sqrt(norm2)
        chosen.append(idx)
        lev = lev - (q @ basis[t]) ** 2
        if (t + 1) % REORTH_INTERVAL == 0 and t + 1 < d:
            _reorthonormalize(basis, t + 1)
            proj = q @ basis[: t + 1].T
            lev = np.einsum("ij,ij->i", q, q) - np.sum(proj * proj, axis=1)
    return chosen


def _reorthonormalize(basis: np.ndarray, count: int) -> None:
    # two-pass modified Gram-Schmidt on the kept prefix
    for _ in range(2):
        for i in range(count):
            v = basis[i]
            for j in range(i):
                v -= (v @ basis[j]) * basis[j]
            nrm = np.linalg.norm(v)
            if nrm <= 0:
                raise NumericalDegeneracy("basis collapsed during reorthonormalization")
            basis[i] = v / nrm
