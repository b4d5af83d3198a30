"""Local expansion of the self-convolution divergence near uniform.

The function under study is f(nu) = KL(nu || pair_convolution(nu)) as a
function of the simplex coordinates (nu(a))_{a != 0}, with nu(0)
eliminated. At the uniform point f vanishes with zero gradient and
Hessian Q = |G| (I + J); the quadratic model, its analytic derivatives,
finite-difference oracles, and the lattice Riemann sum that integrates
the limiting Gaussian to 1 all live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .abelian import AbelianGroup, addition_index, negation_index
from .errors import BoundaryPoint, OutOfRange, OutOfWindow
from .linalg_exact import IntMatrix
from .moments import WindowParams

GRADIENT_FD_STEP = 1e-5
HESSIAN_FD_STEP = 1e-4
_INTERIOR_MARGIN_STEPS = 10.0


@dataclass(frozen=True)
class SimplexPoint:
    """Interior simplex point: probabilities of the non-identity elements.

    The identity coordinate is eliminated: nu(0) = 1 - sum(coords).
    """

    group: AbelianGroup
    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) != self.group.order - 1:
            raise OutOfRange("need |G| - 1 coordinates")

    @classmethod
    def uniform(cls, group: AbelianGroup) -> "SimplexPoint":
        k = group.order
        return cls(group, (1.0 / k,) * (k - 1))

    def shifted(self, offset) -> "SimplexPoint":
        off = tuple(float(x) for x in offset)
        return SimplexPoint(self.group, tuple(c + x for c, x in zip(self.coords, off)))

    def full_vector(self) -> np.ndarray:
        nu0 = 1.0 - sum(self.coords)
        return np.array([nu0, *self.coords])

    def require_interior(self, margin: float = 0.0) -> np.ndarray:
        nu = self.full_vector()
        if np.any(nu <= margin):
            raise BoundaryPoint(f"point within {margin} of the simplex boundary")
        return nu


def _conv_full(group: AbelianGroup, nu: np.ndarray) -> np.ndarray:
    table = negation_index(group)[addition_index(group)]
    return np.array([(nu * nu[table[a]]).sum() for a in range(group.order)])


def f_value(x: SimplexPoint) -> float:
    """KL(nu || pair_convolution(nu)) at a strict-interior point."""
    nu = x.require_interior()
    mu = _conv_full(x.group, nu)
    return float(np.sum(nu * np.log(nu / mu)))


def analytic_gradient(x: SimplexPoint) -> np.ndarray:
    """Closed-form gradient in the eliminated-coordinate chart."""
    group = x.group
    nu = x.require_interior()
    mu = _conv_full(group, nu)
    negi = negation_index(group)
    addi = addition_index(group)
    k = group.order
    grad = np.empty(k - 1)
    for ai, a in enumerate(range(1, k)):
        s = 0.0
        for c in range(k):
            s += (nu[c] / mu[c]) * 2.0 * (nu[negi[addi[a, c]]] - nu[negi[c]])
        grad[ai] = (
            math.log(nu[a])
            - math.log(nu[0])
            - math.log(mu[a])
            + math.log(mu[0])
            - s
        )
    return grad


def analytic_hessian(x: SimplexPoint) -> np.ndarray:
    """Closed-form Hessian; the diagonal is the a == b specialization."""
    group = x.group
    nu = x.require_interior()
    mu = _conv_full(group, nu)
    negi = negation_index(group)
    addi = addition_index(group)
    k = group.order
    hess = np.empty((k - 1, k - 1))
    for ai, a in enumerate(range(1, k)):
        for bi, b in enumerate(range(1, k)):
            nab = negi[addi[a, b]]  # -(a+b)
            na = negi[a]
            nb = negi[b]
            val = 1.0 / nu[0]
            if a == b:
                val += 1.0 / nu[a]
            val -= 2.0 * (nu[nab] - nu[na]) / mu[a]
            val += 2.0 * (nu[nb] - nu[0]) / mu[0]
            val += (
                -2.0 * nu[nab] / mu[nab]
                + 2.0 * nu[na] / mu[na]
                + 2.0 * nu[nb] / mu[nb]
                - 2.0 * nu[0] / mu[0]
            )
            val -= 2.0 * (nu[nab] - nu[nb]) / mu[b]
            val += 2.0 * (nu[na] - nu[0]) / mu[0]
            acc = 0.0
            for c in range(k):
                acc += (
                    (nu[c] / (mu[c] * mu[c]))
                    * 4.0
                    * (nu[negi[addi[a, c]]] - nu[negi[c]])
                    * (nu[negi[addi[b, c]]] - nu[negi[c]])
                )
            hess[ai, bi] = val + acc
    return hess


def fd_gradient(x: SimplexPoint, h: float = GRADIENT_FD_STEP) -> np.ndarray:
    """Central-difference oracle for the gradient."""
    x.require_interior(margin=_INTERIOR_MARGIN_STEPS * h)
    k = x.group.order
    grad = np.empty(k - 1)
    for i in range(k - 1):
        e = [0.0] * (k - 1)
        e[i] = h
        up = f_value(x.shifted(e))
        e[i] = -h
        down = f_value(x.shifted(e))
        grad[i] = (up - down) / (2.0 * h)
    return grad


def fd_hessian(x: SimplexPoint, h: float = HESSIAN_FD_STEP) -> np.ndarray:
    """Central second-difference oracle for the Hessian."""
    x.require_interior(margin=_INTERIOR_MARGIN_STEPS * h)
    k = x.group.order
    dim = k - 1
    hess = np.empty((dim, dim))
    f0 = f_value(x)
    for i in range(dim):
        e = [0.0] * dim
        e[i] = h
        fp = f_value(x.shifted(e))
        e[i] = -h
        fm = f_value(x.shifted(e))
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(dim):
        for j in range(i + 1, dim):
            vals = {}
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    e = [0.0] * dim
                    e[i] = si * h
                    e[j] = sj * h
                    vals[(si, sj)] = f_value(x.shifted(e))
            mixed = (
                vals[(1.0, 1.0)] - vals[(1.0, -1.0)] - vals[(-1.0, 1.0)] + vals[(-1.0, -1.0)]
            ) / (4.0 * h * h)
            hess[i, j] = mixed
            hess[j, i] = mixed
    return hess


def q_matrix(order: int) -> IntMatrix:
    """Hessian at uniform: (order-1) x (order-1) with diag 2g, off-diag g."""
    if order < 1:
        raise OutOfRange("order must be >= 1")
    g = order
    dim = g - 1
    if dim == 0:
        return IntMatrix(0, 0, [])
    return IntMatrix.from_rows(
        [[2 * g if i == j else g for j in range(dim)] for i in range(dim)]
    )


def taylor_residual(group: AbelianGroup, n: int, offset, constant: float = 1.0) -> float:
    """|n f(uniform + x) - (n/2) x^T Q x| for an offset inside the window.

    Offsets must satisfy ||x||_inf <= t_n / n (the window box rescaled to
    simplex coordinates); outside that raises OutOfWindow.
    """
    w = WindowParams(group, n, constant)
    off = np.asarray(offset, dtype=float)
    if off.shape != (group.order - 1,):
        raise OutOfRange("offset dimension must be |G| - 1")
    if np.max(np.abs(off)) > w.t_n / n:
        raise OutOfWindow(f"offset leaves the window box t_n/n = {w.t_n / n:.3g}")
    x = SimplexPoint.uniform(group).shifted(off)
    q = np.array(q_matrix(group.order).entries, dtype=float)
    quad = 0.5 * n * float(off @ q @ off)
    return abs(n * f_value(x) - quad)


def gaussian_riemann_sum(order: int, n: int, box_radius: float) -> float:
    """Riemann sum of the limiting Gaussian on the (1/sqrt(n))-lattice box.

    The quadratic form splits as y^T Q y = g (sum y_i^2 + (sum y_i)^2),
    so the boxed lattice sum factorizes through the distribution of the
    coordinate total: per-axis weights are convolved (exactly) and paired
    with the coupling weight exp(-g s^2 / 2). Normalization is
    sqrt(det Q) / sqrt(2 pi n)^(g-1) with det Q = g^g; the anchored lattice
    makes the total converge to 1.
    """
    if order < 2:
        raise OutOfRange("order must be >= 2")
    if n < 1 or box_radius <= 0:
        raise OutOfRange("need n >= 1 and a positive box radius")
    g = order
    dim = g - 1
    kmax = int(math.floor(box_radius * math.sqrt(n)))
    ks = np.arange(-kmax, kmax + 1, dtype=float)
    axis_weight = np.exp(-0.5 * g * ks * ks / n)
    conv = axis_weight
    for _ in range(dim - 1):
        conv = np.convolve(conv, axis_weight)
    svals = np.arange(-dim * kmax, dim * kmax + 1, dtype=float)
    coupled = conv * np.exp(-0.5 * g * svals * svals / n)
    norm = g ** (g / 2.0) / (2.0 * math.pi * n) ** (dim / 2.0)
    return float(coupled.sum() * norm)
