import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fracground as fg
from fracground.errors import GridMismatch, PoleEvaluation
from fracground.operators import leibniz_constant, signed_power

from conftest import random_field


def naive_energy(u, w):
    """Independent O(n^2) python-loop evaluation of the lattice energy."""
    g = u.grid
    hN = g.cell_volume
    p = w.p
    alpha = g.dim + p * w.s
    Xi = g.interior_nodes
    Xe = g.exterior_nodes
    v = u.interior_values
    pair = 0.0
    for i in range(len(v)):
        for j in range(len(v)):
            if i == j:
                continue
            d = np.linalg.norm(Xi[i] - Xi[j])
            pair += abs(v[i] - v[j]) ** p * d ** (-alpha)
    extpart = 0.0
    for i in range(len(v)):
        for e in range(Xe.shape[0]):
            d = np.linalg.norm(Xi[i] - Xe[e])
            extpart += abs(v[i]) ** p * d ** (-alpha)
    tailpart = sum(abs(v[i]) ** p * w.tail[i] for i in range(len(v)))
    return hN * hN * (pair + 2 * extpart) + 2 * hN * tailpart


def test_zero_field_energy(line_grid, line_weights):
    assert fg.gagliardo_energy(fg.zeros(line_grid), line_weights) == 0.0


def test_energy_positive_iff_nonzero(line_grid, line_weights, rng):
    u = random_field(line_grid, rng)
    assert fg.gagliardo_energy(u, line_weights) > 0.0


def test_single_node_energy_against_direct_sum():
    g = fg.build_grid(fg.Ball((0.0,), 1.2), 0.5)   # 5 interior nodes
    w = fg.build_pair_weights(g, 2.0, 0.25)
    vals = np.zeros(g.n_interior)
    vals[2] = 1.5
    u = fg.from_interior(g, vals)
    assert fg.gagliardo_energy(u, w) == pytest.approx(naive_energy(u, w), rel=1e-12)


@pytest.mark.parametrize("pcase", ["p2", "p3"])
def test_energy_matches_naive_oracle(line_grid, line_weights, line_weights_p3, rng, pcase):
    w = line_weights if pcase == "p2" else line_weights_p3
    for _ in range(3):
        u = random_field(line_grid, rng)
        assert fg.gagliardo_energy(u, w) == pytest.approx(naive_energy(u, w), rel=1e-12)


def test_energy_matches_naive_oracle_2d(disk_grid, disk_weights, rng):
    u = random_field(disk_grid, rng)
    assert fg.gagliardo_energy(u, disk_weights) == pytest.approx(
        naive_energy(u, disk_weights), rel=1e-12)


def test_translation_invariance():
    h = 0.25
    spec = fg.Ball((0.0,), 1.0)
    g0 = fg.build_grid(spec, h)
    g1 = fg.build_grid(spec.translated([4 * h]), h)
    w0 = fg.build_pair_weights(g0, 2.0, 0.25)
    w1 = fg.build_pair_weights(g1, 2.0, 0.25)
    vals = np.sin(np.linspace(0, 3, g0.n_interior))
    u0 = fg.from_interior(g0, vals)
    u1 = fg.from_interior(g1, vals)
    assert fg.gagliardo_energy(u1, w1) == pytest.approx(
        fg.gagliardo_energy(u0, w0), rel=1e-12)


def test_homogeneity_exact_for_binary_scales(line_grid, line_weights, rng):
    u = random_field(line_grid, rng)
    E = fg.gagliardo_energy(u, line_weights)
    for t in (2.0, 0.25, 8.0):
        # binary scale factors commute exactly with the float power
        assert fg.gagliardo_energy(u.scaled(t), line_weights) == t ** 2 * E


@pytest.mark.parametrize("pcase,t", [("p2", 1.7), ("p2", -0.3), ("p3", 2.3)])
def test_homogeneity_generic(line_grid, line_weights, line_weights_p3, rng, pcase, t):
    w = line_weights if pcase == "p2" else line_weights_p3
    u = random_field(line_grid, rng)
    E = fg.gagliardo_energy(u, w)
    assert fg.gagliardo_energy(u.scaled(t), w) == pytest.approx(abs(t) ** w.p * E, rel=1e-10)


@pytest.mark.parametrize("pcase", ["p2", "p3"])
def test_euler_identity(line_grid, line_weights, line_weights_p3, rng, pcase):
    w = line_weights if pcase == "p2" else line_weights_p3
    u = random_field(line_grid, rng)
    g = fg.energy_gradient(u, w)
    lhs = float(g.values @ u.values)
    assert lhs == pytest.approx(w.p * fg.gagliardo_energy(u, w), rel=1e-10)


@pytest.mark.parametrize("pcase,tol", [("p2", 1e-6), ("p3", 1e-4)])
def test_gradient_matches_central_differences(rng, pcase, tol):
    g = fg.build_grid(fg.Ball((0.0,), 1.0), 0.11)   # < 50 nodes
    p, s = (2.0, 0.25) if pcase == "p2" else (3.0, 0.2)
    w = fg.build_pair_weights(g, p, s)
    u = random_field(g, rng)
    grad = fg.energy_gradient(u, w).values
    scale = float(np.max(np.abs(u.values)))
    delta = 1e-6 * scale
    idx = np.flatnonzero(g.interior_mask)[::3]
    for i in idx:
        up = u.values.copy(); up[i] += delta
        dn = u.values.copy(); dn[i] -= delta
        fd = (fg.gagliardo_energy(fg.Field(g, up), w)
              - fg.gagliardo_energy(fg.Field(g, dn), w)) / (2 * delta)
        assert abs(grad[i] - fd) / (abs(grad[i]) + 1.0) < tol


def test_gradient_zero_field_and_exterior_zeros(line_grid, line_weights, rng):
    assert not fg.energy_gradient(fg.zeros(line_grid), line_weights).values.any()
    u = random_field(line_grid, rng)
    g = fg.energy_gradient(u, line_weights)
    assert not g.values[~line_grid.interior_mask].any()


def test_gradient_linearity_p2(line_grid, line_weights, rng):
    u = random_field(line_grid, rng)
    v = random_field(line_grid, rng)
    a, b = 1.3, -0.7
    lhs = fg.energy_gradient(fg.Field(line_grid, a * u.values + b * v.values), line_weights)
    rhs = a * fg.energy_gradient(u, line_weights).values \
        + b * fg.energy_gradient(v, line_weights).values
    assert np.allclose(lhs.values, rhs, rtol=1e-12, atol=1e-12)


def test_density_zero_field(line_grid, line_weights):
    assert not fg.ds_density(fg.zeros(line_grid), line_weights).values.any()


@pytest.mark.parametrize("pcase", ["p2", "p3"])
def test_density_partitions_energy(line_grid, line_weights, line_weights_p3, rng, pcase):
    w = line_weights if pcase == "p2" else line_weights_p3
    for _ in range(5):
        u = random_field(line_grid, rng)
        dens = fg.ds_density(u, w)
        total = line_grid.cell_volume * float(np.sum(dens.values))
        assert total == pytest.approx(fg.gagliardo_energy(u, w), rel=1e-12)


def test_density_partitions_energy_2d(disk_grid, disk_weights, rng):
    u = random_field(disk_grid, rng)
    dens = fg.ds_density(u, disk_weights)
    total = disk_grid.cell_volume * float(np.sum(dens.values))
    assert total == pytest.approx(fg.gagliardo_energy(u, disk_weights), rel=1e-12)


def _quarter_rotation_index(grid):
    """Flat-index permutation of the lattice map (x, y) -> (-y, x)."""
    lookup = {}
    for idx, pt in enumerate(map(tuple, np.round(grid.nodes / grid.h).astype(int))):
        lookup[pt] = idx
    perm = np.empty(grid.n_nodes, dtype=int)
    for idx, (ix, iy) in enumerate(np.round(grid.nodes / grid.h).astype(int)):
        perm[idx] = lookup[(-iy, ix)]
    return perm


def test_density_four_fold_rotation_symmetry(disk_grid, disk_weights):
    r = np.linalg.norm(disk_grid.interior_nodes, axis=1)
    u = fg.from_interior(disk_grid, np.exp(-3 * r * r))
    dens = fg.ds_density(u, disk_weights).values
    perm = _quarter_rotation_index(disk_grid)
    # identical multisets of addends, different summation order: equality
    # holds to float associativity, not bitwise
    assert np.allclose(dens, dens[perm], rtol=1e-12, atol=1e-300)


def test_grid_mismatch_rejected(line_grid, line_weights, rng):
    other = fg.build_grid(fg.Ball((0.0,), 1.0), 0.11)
    u = random_field(other, rng)
    with pytest.raises(GridMismatch):
        fg.gagliardo_energy(u, line_weights)
    with pytest.raises(GridMismatch):
        fg.ds_density(u, line_weights)
    with pytest.raises(GridMismatch):
        fg.energy_gradient(u, line_weights)


# --- scalar inequalities ----------------------------------------------------

def test_sign_inequality_fuzz_million(rng):
    n = 250_000
    for p in (2.0, 2.5, 3.0, 4.0):
        a = rng.standard_normal(n) * rng.lognormal(0, 2, n)
        b = rng.standard_normal(n) * rng.lognormal(0, 2, n)
        assert np.all(fg.sign_inequality_holds(a, b, p)), f"violation at p={p}"


@settings(max_examples=300)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(1.1, 6.0))
def test_sign_inequality_hypothesis(a, b, p):
    assert fg.sign_inequality_holds(a, b, p)


def test_leibniz_trivial_cases():
    assert fg.scalar_leibniz_check(1.0, 0.0, 2.0, 0.5)
    assert fg.scalar_leibniz_check(0.0, 1.0, 2.0, 0.5)
    assert leibniz_constant(2.0, 1.0) >= 1.0


def test_leibniz_fuzz_million(rng):
    n = 250_000
    for p in (1.5, 2.0, 3.0, 5.0):
        a = rng.standard_normal(n) * rng.lognormal(0, 2, n)
        b = rng.standard_normal(n) * rng.lognormal(0, 2, n)
        theta = rng.lognormal(0, 1, n)
        lhs = np.abs(a + b) ** p
        rhs = (1 + theta) * np.abs(a) ** p + leibniz_constant(p, theta) * np.abs(b) ** p
        scale = np.maximum(np.maximum(lhs, rhs), 1.0)
        assert np.all(lhs <= rhs + 1e-12 * scale), f"violation at p={p}"


@settings(max_examples=300)
@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4),
       st.floats(1.1, 5.0), st.floats(0.01, 10.0))
def test_leibniz_hypothesis(a, b, p, theta):
    assert fg.scalar_leibniz_check(a, b, p, theta)


def test_signed_power_convention():
    assert signed_power(-2.0, 1.0) == -2.0
    assert signed_power(-2.0, 2.0) == -4.0          # |t| t convention, p = 3
    assert signed_power(3.0, 0.5) == pytest.approx(np.sqrt(3))


# --- Kelvin transform -------------------------------------------------------

def test_kelvin_involution():
    u = fg.bubble(0.5, (0.3, 0.0), 0.5, 2)
    z = (2.5, 0.5)
    uu = fg.kelvin_transform(fg.kelvin_transform(u, z, 0.5, 2), z, 0.5, 2)
    pts = np.array([[0.0, 0.0], [0.4, -0.2], [1.0, 1.0], [-0.7, 0.1]])
    assert np.allclose(uu(pts), u(pts), rtol=1e-12)


def test_kelvin_of_constant_is_kernel_power():
    const = lambda pts: np.ones(np.atleast_2d(pts).shape[0])
    z = np.array([0.0, 0.0])
    s = 0.5
    ku = fg.kelvin_transform(const, z, s, 2)
    pts = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 4.0]])
    r = np.linalg.norm(pts - z, axis=1)
    assert np.allclose(ku(pts), r ** (2 * s - 2.0), rtol=1e-12)


def test_kelvin_pole_rejected():
    u = fg.bubble(0.5, (0.0, 0.0), 0.5, 2)
    ku = fg.kelvin_transform(u, (1.0, 1.0), 0.5, 2)
    with pytest.raises(PoleEvaluation):
        ku(np.array([[1.0, 1.0]]))


def test_kelvin_preserves_critical_norm():
    # |u*|_{2*} = |u|_{2*}; Riemann sums at two resolutions agree within 1%
    s, N = 0.5, 2
    two_star = fg.critical_exponent(N, 2.0, s)
    u = fg.bubble(0.4, (0.5, 0.0), s, N)
    z = (3.0, 0.0)
    ku = fg.kelvin_transform(u, z, s, N)

    def crit_norm(f, h, half=6.0, exclude=None):
        ax = np.arange(-half, half + h / 2, h)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        if exclude is not None:
            keep = np.linalg.norm(pts - exclude, axis=1) > 1e-9
            pts = pts[keep]
        vals = f(pts)
        return (h * h * np.sum(np.abs(vals) ** two_star)) ** (1 / two_star)

    for h in (0.05, 0.025):
        nu = crit_norm(u, h)
        nku = crit_norm(ku, h, exclude=np.asarray(z, dtype=float))
        assert abs(nku - nu) / nu < 0.01, (h, nu, nku)
