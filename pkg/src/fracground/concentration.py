"""Concentration diagnostics: limiting measures, bubble families, the
truncated-bubble energy estimate, the vanishing lemma, moving-plane
monotonicity and the annulus location prediction.

The two measures attached to a field are the nonlocal density
mu = |D^s u|^p (partitioned so its lattice integral reproduces the
Gagliardo energy) and nu = |u|^{p*}.  Concentration is summarized by the
nu-argmax node, the radius collecting half the nu-mass, the distance of
the concentration point to the boundary, and an energy-window class
comparing (s/N) mu_total against the one-bubble quantum
(s/N) S^{N/ps} and twice it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .domain import Annulus, DomainSpec, diameter, distance_to_boundary
from .errors import InvalidTheta, NotAnnulus, ZeroMeasure
from .field import Field
from .kernel import PairWeights, critical_exponent
from .operators import ds_density, gagliardo_energy

ENERGY_BAND = 0.05
MOVING_PLANE_RAYS = 32
MOVING_PLANE_SAMPLES = 64


# ---------------------------------------------------------------------------
# measures and concentration reports

@dataclass
class MeasurePair:
    mu: Field            # |D^s u|^p density per node
    nu: Field            # |u|^{p*} density per node
    mu_total: float      # == gagliardo_energy(u)
    nu_total: float      # == |u|_{p*}^{p*}
    p: float
    s: float
    p_star: float


def measures(u: Field, w: PairWeights) -> MeasurePair:
    mu = ds_density(u, w)
    p_star = w.p_star
    nu = u.with_interior(np.abs(u.interior_values) ** p_star)
    hN = u.grid.cell_volume
    return MeasurePair(
        mu=mu,
        nu=nu,
        mu_total=hN * float(np.sum(mu.values)),
        nu_total=hN * float(np.sum(nu.values)),
        p=w.p,
        s=w.s,
        p_star=p_star,
    )


@dataclass
class ConcentrationReport:
    xbar: np.ndarray
    xbar_index: int
    barycenter: np.ndarray
    half_mass_radius: float
    boundary_dist: float
    mu_total: float
    nu_total: float
    energy_class: str    # below_ground | ground_window | two_bubble_window | higher | unclassified

    def to_json(self) -> dict:
        return {
            "xbar": list(map(float, self.xbar)),
            "xbar_index": self.xbar_index,
            "barycenter": list(map(float, self.barycenter)),
            "half_mass_radius": self.half_mass_radius,
            "boundary_dist": self.boundary_dist,
            "mu_total": self.mu_total,
            "nu_total": self.nu_total,
            "energy_class": self.energy_class,
        }


def classify_energy(level: float, quantum: float, band: float = ENERGY_BAND) -> str:
    """Place an energy level against the one- and two-bubble thresholds."""
    t1, t2 = quantum, 2.0 * quantum
    if level < t1 * (1.0 - band):
        return "below_ground"
    if level <= t1 * (1.0 + band):
        return "ground_window"
    if level < t2 * (1.0 - band):
        return "two_bubble_window"
    return "higher"


def concentration_point(m: MeasurePair, spec: DomainSpec, S_hat: float = None) -> ConcentrationReport:
    """Locate the dominant nu-atom; ties break to the first node in
    row-major order (np.argmax semantics)."""
    if m.nu_total <= 0.0:
        raise ZeroMeasure("nu carries no mass")
    grid = m.nu.grid
    dens = m.nu.values
    idx = int(np.argmax(dens))
    xbar = grid.nodes[idx]

    hN = grid.cell_volume
    masses = hN * dens
    bary = (masses[:, None] * grid.nodes).sum(axis=0) / masses.sum()

    d = np.linalg.norm(grid.nodes - xbar, axis=1)
    order = np.argsort(d, kind="stable")
    csum = np.cumsum(masses[order])
    k = int(np.searchsorted(csum, 0.5 * m.nu_total))
    half_radius = float(d[order][min(k, d.size - 1)])

    if S_hat is None:
        cls = "unclassified"
    else:
        N = grid.dim
        quantum = (m.s / N) * S_hat ** (N / (m.p * m.s))
        cls = classify_energy((m.s / N) * m.mu_total, quantum)
    return ConcentrationReport(
        xbar=xbar,
        xbar_index=idx,
        barycenter=bary,
        half_mass_radius=half_radius,
        boundary_dist=distance_to_boundary(spec, xbar),
        mu_total=m.mu_total,
        nu_total=m.nu_total,
        energy_class=cls,
    )


def ball_mass(m_field: Field, center, radius: float) -> float:
    """Lattice mass of a density field over the closed ball B_radius(center)."""
    grid = m_field.grid
    d = np.linalg.norm(grid.nodes - np.asarray(center, dtype=float), axis=1)
    return grid.cell_volume * float(np.sum(m_field.values[d <= radius]))


@dataclass
class CCMarginReport:
    radii: list
    margins: list            # mu(B_rho) - S_h * nu(B_rho)^{p/p*}
    global_margin: float     # mu_total - S_h * nu_total^{p/p*}
    nu_total: float
    nu_quantum_gap: float    # nu_total - S_h^{N/ps}

    def to_json(self) -> dict:
        return {
            "radii": self.radii,
            "margins": self.margins,
            "global_margin": self.global_margin,
            "nu_total": self.nu_total,
            "nu_quantum_gap": self.nu_quantum_gap,
        }


def cc_inequality_check(m: MeasurePair, S_hat_h: float, radii) -> CCMarginReport:
    """Margins of the concentration-compactness inequality
    mu(B) >= S nu(B)^{p/p*} around the dominant atom, plus the distance
    of the total nu-mass from the one-bubble quantum S^{N/ps}."""
    grid = m.nu.grid
    if m.nu_total > 0.0:
        xbar = grid.nodes[int(np.argmax(m.nu.values))]
    else:
        xbar = grid.nodes[0]
    expo = m.p / m.p_star
    margins = []
    for rho in radii:
        mu_b = ball_mass(m.mu, xbar, rho)
        nu_b = ball_mass(m.nu, xbar, rho)
        margins.append(mu_b - S_hat_h * nu_b ** expo)
    global_margin = m.mu_total - S_hat_h * m.nu_total ** expo
    N = grid.dim
    quantum = S_hat_h ** (N / (m.p * m.s))
    return CCMarginReport(
        radii=[float(r) for r in radii],
        margins=margins,
        global_margin=global_margin,
        nu_total=m.nu_total,
        nu_quantum_gap=m.nu_total - quantum,
    )


# ---------------------------------------------------------------------------
# bubble family (p = 2 profiles)

def _sphere_area(N: int) -> float:
    # length of S^{N-1}: 2 for N=1, 2*pi for N=2
    return 2.0 if N == 1 else 2.0 * np.pi


def radial_integral(f, N: int, lo: float = 0.0, hi: float = np.inf, **kw) -> float:
    """integral over R^N of a radial profile f(r) between radii lo and hi."""
    area = _sphere_area(N)
    val = quad(lambda r: f(r) * r ** (N - 1), lo, hi, limit=400, **kw)[0]
    return area * val


class BubbleProfile:
    """Rescaled Sobolev extremal V_delta(x) = amp * delta^{-(N-2s)/2}
    (1 + (|x-center|/delta)^2)^{-(N-2s)/2}, evaluable anywhere."""

    def __init__(self, delta: float, center, s: float, N: int, amplitude: float = None):
        if delta <= 0:
            raise ValueError("delta must be positive")
        if N <= 2 * s:
            raise ValueError("bubble profile needs N > 2s")
        self.delta = float(delta)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.s = float(s)
        self.N = int(N)
        self.beta = 0.5 * (N - 2.0 * s)
        if amplitude is None:
            # unit critical norm |V|_{2*} = 1, fixed numerically; the value
            # is delta-independent by scaling
            two_star = critical_exponent(N, 2.0, s)
            raw = radial_integral(lambda r: (1.0 + r * r) ** (-self.beta * two_star), N)
            amplitude = raw ** (-1.0 / two_star)
        self.amplitude = float(amplitude)

    def radial(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float)) / self.delta
        return self.amplitude * self.delta ** (-self.beta) * (1.0 + r * r) ** (-self.beta)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(pts - self.center, axis=1)
        return self.radial(r)

    def rescaled(self, factor: float) -> "BubbleProfile":
        return BubbleProfile(self.delta, self.center, self.s, self.N,
                             amplitude=self.amplitude * factor)


def bubble(delta: float, center, s: float, N: int) -> BubbleProfile:
    """Unit-critical-norm bubble at scale delta."""
    return BubbleProfile(delta, center, s, N)


def equation_normalized_bubble(delta: float, center, s: float, N: int, S: float) -> BubbleProfile:
    """Bubble scaled so that (for the exact extremal) [V]^2 = S^{N/2s} and
    |V|_{2*}^{2*} = S^{N/2s}: amplitude factor S^{(N-2s)/(4s)} over unit norm."""
    lam = S ** ((N - 2.0 * s) / (4.0 * s))
    return bubble(delta, center, s, N).rescaled(lam)


class TruncatedBubble:
    """Compactly supported bubble v_delta = G_delta(V_delta).

    G_delta vanishes below V_delta(theta), is linear with slope
    m_delta = V_delta(1)/(V_delta(1) - V_delta(theta)) between the
    breakpoints, and is the identity above V_delta(1); the result keeps
    the bubble inside B_1, interpolates on 1 <= r <= theta and vanishes
    for r >= theta.
    """

    def __init__(self, delta: float, theta: float, s: float, N: int, amplitude: float = None):
        if theta <= 1.0:
            raise InvalidTheta("theta must exceed 1")
        if delta > 0.5:
            raise ValueError("truncated bubble requires delta <= 1/2")
        self.V = BubbleProfile(delta, (0.0,) * N, s, N, amplitude=amplitude)
        self.delta = float(delta)
        self.theta = float(theta)
        self.s = float(s)
        self.N = int(N)
        self.v1 = float(self.V.radial(1.0))
        self.vt = float(self.V.radial(theta))
        self.m = self.v1 / (self.v1 - self.vt)

    def g(self, t) -> np.ndarray:
        """The truncation map G_delta applied to bubble values t >= 0."""
        t = np.asarray(t, dtype=float)
        return np.where(
            t <= self.vt, 0.0,
            np.where(t <= self.v1, self.m * (t - self.vt), t),
        )

    def radial(self, r) -> np.ndarray:
        return self.g(self.V.radial(r))

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.radial(np.linalg.norm(pts, axis=1))


def truncated_bubble(delta: float, theta: float, s: float, N: int,
                     amplitude: float = None) -> TruncatedBubble:
    return TruncatedBubble(delta, theta, s, N, amplitude=amplitude)


# ---------------------------------------------------------------------------
# truncated-bubble energy estimate

@dataclass
class ImmanuelReport:
    deltas: list
    gaps: list               # [v_d]^2_h - S^{N/2s}
    slope: float             # log-log fit of gap vs delta
    expected_rate: float     # N - 2s for p = 2
    integral_deficits: list  # int v^{2*-eps} - int V^{2*-eps}, <= 0
    S_ref: float

    def to_json(self) -> dict:
        return {
            "deltas": self.deltas,
            "gaps": self.gaps,
            "slope": self.slope,
            "expected_rate": self.expected_rate,
            "integral_deficits": self.integral_deficits,
            "S_ref": self.S_ref,
        }


def immanuel_check(delta_list, theta: float, s: float, N: int, S_ref: float,
                   nodes_per_delta: int = 16, eps: float = 0.0) -> ImmanuelReport:
    """Gagliardo gap of the truncated equation-normalized bubble.

    For each delta the truncated bubble is sampled on a lattice over its
    support ball with spacing delta/nodes_per_delta and the discrete
    energy is compared against the one-bubble quantum S_ref^{N/2s}.  The
    expected decay rate of the gap is delta^{N-2s}.
    """
    from .domain import Ball
    from .field import from_function
    from .grid import build_grid
    from .kernel import build_pair_weights

    lam = S_ref ** ((N - 2.0 * s) / (4.0 * s))
    two_star = critical_exponent(N, 2.0, s)
    q_int = two_star - eps
    quantum = S_ref ** (N / (2.0 * s))

    deltas = [float(d) for d in delta_list]
    gaps = []
    deficits = []
    for d in deltas:
        vb = truncated_bubble(d, theta, s, N)
        vb = TruncatedBubble(d, theta, s, N, amplitude=vb.V.amplitude * lam)
        h = d / nodes_per_delta
        grid = build_grid(Ball((0.0,) * N, theta), h)
        w = build_pair_weights(grid, 2.0, s)
        fld = from_function(grid, vb)
        gaps.append(gagliardo_energy(fld, w) - quantum)
        iv = radial_integral(lambda r: vb.radial(r) ** q_int, N, 0.0, theta,
                             points=[1.0, theta])
        iV = radial_integral(lambda r: vb.V.radial(r) ** q_int, N)
        deficits.append(iv - iV)

    pos = all(g > 0 for g in gaps)
    slope = float(np.polyfit(np.log(deltas), np.log(gaps), 1)[0]) if pos else float("nan")
    return ImmanuelReport(
        deltas=deltas,
        gaps=gaps,
        slope=slope,
        expected_rate=N - 2.0 * s,
        integral_deficits=deficits,
        S_ref=S_ref,
    )


# ---------------------------------------------------------------------------
# vanishing lemma

@dataclass
class VanishReport:
    deltas: list
    values: list             # F(delta) = delta^N int_{B_delta^c} |u|^p |x|^{-(N+ps)}
    fitted_exponent: float
    expected_exponent: float

    def to_json(self) -> dict:
        return {
            "deltas": self.deltas,
            "values": self.values,
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
        }


def vanish_check(u, delta_list, p: float, s: float, N: int,
                 r_max: float = np.inf) -> VanishReport:
    """Decay table of the tail functional behind the vanishing lemma.

    ``u`` is an evaluable field; radial profiles (anything exposing
    ``.radial``) integrate by radial quadrature, general callables are
    averaged over 64 directions first.
    """
    alpha = N + p * s
    if hasattr(u, "radial"):
        prof = lambda r: np.abs(u.radial(r)) ** p
    elif N == 1:
        prof = lambda r: 0.5 * (np.abs(u(np.array([[r]]))[0]) ** p
                                + np.abs(u(np.array([[-r]]))[0]) ** p) * 2.0 / 2.0
    else:
        ang = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])

        def prof(r):
            return float(np.mean(np.abs(u(r * dirs)) ** p))

    deltas = [float(d) for d in delta_list]
    vals = []
    for d in deltas:
        integrand = lambda r: prof(r) * r ** (-alpha) * r ** (N - 1)
        v = _sphere_area(N) * quad(integrand, d, r_max, limit=400)[0]
        vals.append(d ** N * v)
    if all(v > 0 for v in vals):
        expo = float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])
    else:
        expo = float("nan")
    return VanishReport(
        deltas=deltas,
        values=vals,
        fitted_exponent=expo,
        expected_exponent=N - s * p,
    )


# ---------------------------------------------------------------------------
# moving planes and the annulus location

@dataclass
class MovingPlaneReport:
    M: float
    n_rays: int
    max_violation_inner: float   # relative to per-ray profile scale
    max_violation_outer: float

    @property
    def max_violation(self) -> float:
        return max(self.max_violation_inner, self.max_violation_outer)

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "n_rays": self.n_rays,
            "max_violation_inner": self.max_violation_inner,
            "max_violation_outer": self.max_violation_outer,
            "max_violation": self.max_violation,
        }


def _profile_violation(values: np.ndarray) -> float:
    """Largest decrease along a profile that should be non-decreasing,
    relative to the profile's own scale."""
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0
    drops = np.maximum(values[:-1] - values[1:], 0.0)
    return float(np.max(drops)) / scale


def moving_plane_monotonicity(u: Field, spec: Annulus, s: float,
                              n_rays: int = MOVING_PLANE_RAYS,
                              n_samples: int = MOVING_PLANE_SAMPLES) -> MovingPlaneReport:
    """Monotonicity of the Kelvin-weighted radial profiles (p = 2).

    After rescaling the annulus to B_R \\ B_1 (R = r2/r1), the profiles
    t -> t^{N-2s} u(t r1 x0) on [1, M] and t -> (t+1)^{N-2s} u((R-t) r1 x0)
    on [0, M] with M = 2/(1 + 1/R) must be non-decreasing for every unit
    direction x0.  Field values come from multilinear interpolation, so
    sub-grid wiggles below the interpolation error are expected.
    """
    if not isinstance(spec, Annulus) or np.any(np.asarray(spec.center)):
        raise NotAnnulus("moving-plane check requires an origin-centered annulus")
    N = u.grid.dim
    R = spec.r2 / spec.r1
    M = 2.0 / (1.0 + 1.0 / R)
    expo = N - 2.0 * s

    worst_in = 0.0
    worst_out = 0.0
    angles = np.linspace(0.0, 2.0 * np.pi, n_rays, endpoint=False)
    for ang in angles:
        if N == 1:
            x0 = np.array([np.sign(np.cos(ang)) or 1.0])
        else:
            x0 = np.array([np.cos(ang), np.sin(ang)])
        t_in = np.linspace(1.0, M, n_samples)
        pts = (t_in[:, None] * spec.r1) * x0[None, :]
        prof = t_in ** expo * u.interpolate(pts)
        worst_in = max(worst_in, _profile_violation(prof))

        t_out = np.linspace(0.0, M, n_samples)
        pts = ((R - t_out)[:, None] * spec.r1) * x0[None, :]
        prof = (t_out + 1.0) ** expo * u.interpolate(pts)
        worst_out = max(worst_out, _profile_violation(prof))
    return MovingPlaneReport(
        M=M,
        n_rays=n_rays,
        max_violation_inner=worst_in,
        max_violation_outer=worst_out,
    )


def harmonic_mean_radius(r1: float, r2: float) -> float:
    return 2.0 * r1 * r2 / (r1 + r2)


@dataclass
class AnnulusLocationReport:
    xbar_radius: float
    target_radius: float
    deviation: float
    relative_deviation: float

    def to_json(self) -> dict:
        return {
            "xbar_radius": self.xbar_radius,
            "target_radius": self.target_radius,
            "deviation": self.deviation,
            "relative_deviation": self.relative_deviation,
        }


def annulus_location_check(report: ConcentrationReport, r1: float, r2: float) -> AnnulusLocationReport:
    """Deviation of |xbar| from the harmonic mean 2 r1 r2 / (r1 + r2)."""
    if not (0 < r1 < r2):
        raise NotAnnulus("need 0 < r1 < r2")
    target = harmonic_mean_radius(r1, r2)
    rad = float(np.linalg.norm(report.xbar))
    return AnnulusLocationReport(
        xbar_radius=rad,
        target_radius=target,
        deviation=rad - target,
        relative_deviation=abs(rad - target) / target,
    )


@dataclass
class BoundaryDistanceTrend:
    eps: list
    distances: list
    tail_floor: float     # min over the last three entries

    def to_json(self) -> dict:
        return {"eps": self.eps, "distances": self.distances, "tail_floor": self.tail_floor}


def boundary_distance_trend(eps_list, reports, spec: DomainSpec) -> BoundaryDistanceTrend:
    """Per-epsilon boundary distance of the concentration point with the
    floor over the sweep tail (last three entries)."""
    dists = [float(r.boundary_dist) for r in reports]
    tail = dists[-3:] if len(dists) >= 3 else dists
    return BoundaryDistanceTrend(
        eps=[float(e) for e in eps_list],
        distances=dists,
        tail_floor=min(tail),
    )
