"""Discrete Gagliardo energy, nonlocal density, energy gradient, Kelvin
transform, and the scalar inequalities the analysis relies on.

All lattice sums follow one bookkeeping convention: fields vanish on
exterior nodes, so the quadratic-form part runs over interior pairs,
interactions with exterior lattice cells enter through the per-node
``ext`` aggregate, and everything beyond the cell box through ``tail``.
With u_i the interior values, h the spacing and N the dimension,

  energy  = h^{2N} [ sum_{i!=j} K_ij |u_i-u_j|^p + 2 sum_i ext_i |u_i|^p ]
            + 2 h^N sum_i tail_i |u_i|^p

which is the straightforward Riemann approximation of the double
integral of |u(x)-u(y)|^p |x-y|^{-(N+ps)} over R^N x R^N (each pair
(interior, zero-region) appears twice in the ordered double sum, hence
the factors 2).  ``energy_gradient`` is the exact gradient of this
expression, and ``ds_density`` partitions it exactly across interior
nodes: each interior-interior pair contributes half its mass to either
endpoint, and all mass a node exchanges with the zero region is
assigned to that node, so h^N * sum(density) == energy identically.
"""

from __future__ import annotations

import numpy as np

from .errors import PoleEvaluation, ZeroField
from .field import Field, check_same_grid
from .kernel import PairWeights

GRADIENT_BLOCK = 1024


def signed_power(t: np.ndarray, e: float) -> np.ndarray:
    """|t|^{e-?}... the convention t^{e} := |t|^{e-1} t for real t."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** e


def _pair_quadratic(u: np.ndarray, w: PairWeights) -> float:
    # sum over ordered interior pairs of K_ij |u_i - u_j|^p
    if w.p == 2.0:
        Ku = w.K @ u
        return float(2.0 * ((u * u) @ w.row_sums) - 2.0 * (u @ Ku))
    total = 0.0
    for i0 in range(0, u.size, GRADIENT_BLOCK):
        diff = u[i0:i0 + GRADIENT_BLOCK, None] - u[None, :]
        total += float(np.sum(w.K[i0:i0 + GRADIENT_BLOCK] * np.abs(diff) ** w.p))
    return total


def gagliardo_energy(u: Field, w: PairWeights) -> float:
    """Discrete [u]^p_{s,p} over all of R^N (lattice sum plus tail)."""
    check_same_grid(u, w.grid)
    v = u.interior_values
    h = w.grid.h
    hN = w.grid.cell_volume
    pw = np.abs(v) ** w.p
    pair = _pair_quadratic(v, w)
    return hN * hN * (pair + 2.0 * float(pw @ w.ext)) + 2.0 * hN * float(pw @ w.tail)


def ds_density(u: Field, w: PairWeights) -> Field:
    """Per-node nonlocal density whose lattice integral is the energy.

    h^N * sum(density) == gagliardo_energy(u) holds exactly (same
    additions in the same order), which is what makes the concentration
    measures reconstruct functional values without drift.
    """
    check_same_grid(u, w.grid)
    v = u.interior_values
    hN = w.grid.cell_volume
    pw = np.abs(v) ** w.p
    if w.p == 2.0:
        Kv = w.K @ v
        Kv2 = w.K @ (v * v)
        rows = (v * v) * w.row_sums - 2.0 * v * Kv + Kv2
    else:
        rows = np.empty_like(v)
        for i0 in range(0, v.size, GRADIENT_BLOCK):
            diff = v[i0:i0 + GRADIENT_BLOCK, None] - v[None, :]
            rows[i0:i0 + GRADIENT_BLOCK] = np.sum(
                w.K[i0:i0 + GRADIENT_BLOCK] * np.abs(diff) ** w.p, axis=1
            )
    dens = hN * (rows + 2.0 * pw * w.ext) + 2.0 * pw * w.tail
    return u.with_interior(dens)


def energy_gradient(u: Field, w: PairWeights) -> Field:
    """Exact gradient of gagliardo_energy with respect to node values;
    exterior entries are zero by construction."""
    check_same_grid(u, w.grid)
    v = u.interior_values
    hN = w.grid.cell_volume
    p = w.p
    if p == 2.0:
        pair = w.row_sums * v - w.K @ v
        vp = v
    else:
        vp = signed_power(v, p - 1.0)
        pair = np.empty_like(v)
        for i0 in range(0, v.size, GRADIENT_BLOCK):
            diff = v[i0:i0 + GRADIENT_BLOCK, None] - v[None, :]
            pair[i0:i0 + GRADIENT_BLOCK] = np.sum(
                w.K[i0:i0 + GRADIENT_BLOCK] * signed_power(diff, p - 1.0), axis=1
            )
    g = 2.0 * p * hN * hN * (pair + w.ext * vp) + 2.0 * p * hN * w.tail * vp
    return u.with_interior(g)


def kelvin_transform(func, z, s: float, dim: int):
    """Inversion-conjugate of an evaluable field (the p = 2 transform).

    Returns a callable (m, dim) -> (m,) evaluating
    |x-z|^{2s-dim} * func(z + (x-z)/|x-z|^2).  Raises PoleEvaluation when
    asked for the value at z itself.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size != dim:
        raise ValueError("pole dimension mismatch")
    expo = dim - 2.0 * s

    def transformed(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = pts - z
        r2 = (d * d).sum(axis=1)
        if np.any(r2 == 0.0):
            raise PoleEvaluation("Kelvin transform evaluated at its pole")
        inv = z + d / r2[:, None]
        return r2 ** (-0.5 * expo) * np.asarray(func(inv), dtype=float)

    return transformed


def sign_inequality_holds(a, b, p: float, rtol: float = 1e-12) -> np.ndarray:
    """Pointwise inequality behind the energy-doubling bound:
    +-(a-b)^{p-1} (a_pm - b_pm) >= |a_pm - b_pm|^p for both signs.

    rtol guards only against last-ulp rounding in the powers; the
    mathematical inequality is not approximate.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    base = signed_power(a - b, p - 1.0)
    ok = np.ones(np.broadcast(a, b).shape, dtype=bool)
    for sign in (1.0, -1.0):
        ap = np.maximum(sign * a, 0.0)
        bp = np.maximum(sign * b, 0.0)
        lhs = sign * base * (ap - bp)
        rhs = np.abs(ap - bp) ** p
        scale = np.maximum(np.maximum(np.abs(lhs), rhs), 1.0)
        ok &= lhs >= rhs - rtol * scale
    return ok


def leibniz_constant(p: float, theta) -> float:
    """C_theta = (1 - (1+theta)^{-1/(p-1)})^{-(p-1)}; theta scalar or array."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("theta must be positive")
    out = (1.0 - (1.0 + theta) ** (-1.0 / (p - 1.0))) ** (-(p - 1.0))
    return float(out) if out.ndim == 0 else out


def scalar_leibniz_check(a: float, b: float, p: float, theta: float,
                         rtol: float = 1e-12) -> bool:
    """|a+b|^p <= (1+theta)|a|^p + C_theta |b|^p."""
    lhs = np.abs(np.asarray(a) + np.asarray(b)) ** p
    rhs = (1.0 + theta) * np.abs(a) ** p + leibniz_constant(p, theta) * np.abs(b) ** p
    scale = np.maximum(np.maximum(lhs, rhs), 1.0)
    return bool(np.all(lhs <= rhs + rtol * scale))


def require_nonzero(u: Field):
    if u.is_zero():
        raise ZeroField("operation undefined for the zero field")
