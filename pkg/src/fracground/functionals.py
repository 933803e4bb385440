"""Norms, energy functionals, Nehari rescaling and constant estimators.

The free functional at exponent q is

  J_q(u) = (1/p) [u]^p - (1/q) |u|_q^q,

whose critical points solve the nonlocal equation with right-hand side
u^{q-1}.  On the Nehari set ([u]^p = |u|_q^q) the functional reduces to
(1/p - 1/q)[u]^p, and the ground level is the closed form
(1/p - 1/q) S_q^{q/(q-p)} in terms of the constrained Rayleigh infimum
S_q.  The nearly-critical functional is J_q at q = p* - eps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidExponent, ZeroField
from .field import Field, check_same_grid
from .kernel import PairWeights, critical_exponent
from .operators import gagliardo_energy, require_nonzero


def lq_norm(u: Field, q: float) -> float:
    """(h^N sum |u_i|^q)^{1/q}."""
    if q < 1:
        raise InvalidExponent("q must be >= 1")
    hN = u.grid.cell_volume
    return float((hN * np.sum(np.abs(u.interior_values) ** q)) ** (1.0 / q))


@dataclass(frozen=True)
class EnergyReport:
    """Energy ledger of one field at one exponent."""

    seminorm_p: float          # [u]^p
    lq: dict                   # exponent -> |u|_exponent
    q: float
    eps: float                 # p* - q
    J_q: float                 # (1/p)[u]^p - (1/q)|u|_q^q  (equals I_eps)
    rayleigh: float            # [u]^p / |u|_q^p, nan for the zero field
    p: float
    p_star: float

    @property
    def I_eps(self) -> float:
        return self.J_q

    def to_json(self) -> dict:
        return {
            "seminorm_p": self.seminorm_p,
            "lq": {str(k): v for k, v in self.lq.items()},
            "q": self.q,
            "eps": self.eps,
            "J_q": self.J_q,
            "rayleigh": self.rayleigh,
            "p": self.p,
            "p_star": self.p_star,
        }


def j_functional(u: Field, w: PairWeights, q: float) -> EnergyReport:
    """Evaluate J_q and the quantities it is assembled from."""
    p = w.p
    p_star = w.p_star
    if not (p < q <= p_star):
        raise InvalidExponent(f"need p < q <= p* = {p_star}, got q = {q}")
    semi = gagliardo_energy(u, w)
    nq = lq_norm(u, q)
    nps = lq_norm(u, p_star)
    J = semi / p - nq ** q / q
    rayleigh = semi / nq ** p if nq > 0 else float("nan")
    return EnergyReport(
        seminorm_p=semi,
        lq={q: nq, p_star: nps},
        q=q,
        eps=p_star - q,
        J_q=J,
        rayleigh=rayleigh,
        p=p,
        p_star=p_star,
    )


def nehari_scale(u: Field, w: PairWeights, q: float) -> Field:
    """Rescale t*u onto the Nehari set: t = ([u]^p / |u|_q^q)^{1/(q-p)}."""
    require_nonzero(u)
    p = w.p
    if q <= p:
        raise InvalidExponent("Nehari rescaling needs q > p")
    semi = gagliardo_energy(u, w)
    nq_q = lq_norm(u, q) ** q
    t = (semi / nq_q) ** (1.0 / (q - p))
    return u.scaled(t)


def ground_level_formula(p: float, q: float, S_q: float) -> float:
    """c_q = (1/p - 1/q) S_q^{q/(q-p)}."""
    if q <= p:
        raise InvalidExponent("ground level needs q > p")
    if S_q <= 0:
        raise ValueError("S_q must be positive")
    return (1.0 / p - 1.0 / q) * S_q ** (q / (q - p))


def hardy_ratio(u: Field, p: float, s: float) -> float:
    """(h^N sum' |u_i|^p |x_i|^{-sp}) / [u]^p, nodes within h/2 of the
    origin excluded from the numerator (singularity guard)."""
    require_nonzero(u)
    grid = u.grid
    r = np.linalg.norm(grid.interior_nodes, axis=1)
    keep = r >= grid.h / 2
    vi = u.interior_values[keep]
    num = grid.cell_volume * float(np.sum(np.abs(vi) ** p * r[keep] ** (-s * p)))
    from .kernel import build_pair_weights  # local import: heavy constructor

    w = build_pair_weights(grid, p, s)
    return num / gagliardo_energy(u, w)


def hardy_ratio_with_weights(u: Field, w: PairWeights) -> float:
    """hardy_ratio against prebuilt weights (avoids reassembly)."""
    require_nonzero(u)
    check_same_grid(u, w.grid)
    grid = u.grid
    r = np.linalg.norm(grid.interior_nodes, axis=1)
    keep = r >= grid.h / 2
    vi = u.interior_values[keep]
    num = grid.cell_volume * float(np.sum(np.abs(vi) ** w.p * r[keep] ** (-w.s * w.p)))
    return num / gagliardo_energy(u, w)


@dataclass
class SobolevEstimate:
    """Refinement study of the discrete critical Rayleigh infimum."""

    p: float
    s: float
    dim: int
    entries: list = field(default_factory=list)  # (radius, h, S_h) in schedule order
    S_hat: float = float("nan")                  # Richardson-extrapolated value
    bracket: tuple = (float("nan"), float("nan"))

    def finest(self) -> float:
        return self.entries[-1][2]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "s": self.s,
            "dim": self.dim,
            "entries": [list(e) for e in self.entries],
            "S_hat": self.S_hat,
            "bracket": list(self.bracket),
        }


def sobolev_constant_estimate(p: float, s: float, dim: int, schedule,
                              radii=(4.0, 8.0), tol: float = 1e-10,
                              max_iters: int = 60000, threads: int = 1) -> SobolevEstimate:
    """Estimate the critical Sobolev constant by refinement on balls.

    ``schedule`` is a decreasing list of spacings; the discrete Rayleigh
    quotient at q = p* is minimized on Ball(0, R) for each R in ``radii``
    and each h.  The estimate extrapolates the finest two entries of the
    largest ball by two-point Richardson assuming first-order behavior,
    and brackets with the finest raw value.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .domain import Ball
    from .grid import build_grid
    from .kernel import build_pair_weights
    from .solver import rayleigh_minimize

    critical_exponent(dim, p, s)  # validates N > ps
    schedule = [float(h) for h in schedule]
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing")

    jobs = [(R, h) for R in radii for h in schedule]

    def run(job):
        R, h = job
        grid = build_grid(Ball((0.0,) * dim, R), h)
        w = build_pair_weights(grid, p, s)
        q = w.p_star
        res = rayleigh_minimize(grid, w, q, tol=tol, max_iters=max_iters)
        return (R, h, res.rayleigh)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(run, jobs))
    else:
        entries = [run(j) for j in jobs]

    est = SobolevEstimate(p=p, s=s, dim=dim, entries=entries)
    # Richardson on the two finest spacings of the largest ball
    tailpair = [e for e in entries if e[0] == max(radii)][-2:]
    if len(tailpair) == 2:
        (_, h1, S1), (_, h2, S2) = tailpair
        S0 = S2 + (S2 - S1) * h2 / (h1 - h2)
        est.S_hat = S0
        est.bracket = (min(S0, S2), max(S0, S2))
    else:
        est.S_hat = entries[-1][2]
        est.bracket = (est.S_hat, est.S_hat)
    return est
