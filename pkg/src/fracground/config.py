"""Run configuration: JSON schema, validation, canonical hashing.

A run config pins the domain, the exponents, the lattice spacing, the
eps schedule, the solver settings, and the named verifiers to execute.
The hash is taken over the canonical serialization (sorted keys, fixed
separators), so key order in the source JSON cannot change it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .domain import DomainSpec, domain_from_json
from .errors import ConfigError
from .kernel import critical_exponent
from .solver import SolverConfig

KNOWN_CHECKS = (
    "concentration",
    "cc_inequality",
    "annulus_location",
    "moving_plane",
    "boundary_distance",
    "nonradial_gap",
    "sign_inequality",
)


@dataclass
class RunConfig:
    domain: DomainSpec
    p: float
    s: float
    h: float
    eps_list: list
    solver: SolverConfig = field(default_factory=SolverConfig)
    checks: list = field(default_factory=list)
    output_dir: str = "out"
    threads: int = 1

    def __post_init__(self):
        try:
            critical_exponent(self.domain.dim, self.p, self.s)
        except Exception as e:
            raise ConfigError(str(e)) from e
        if self.h <= 0:
            raise ConfigError("h must be positive")
        eps = [float(e) for e in self.eps_list]
        if not eps:
            raise ConfigError("eps_list must not be empty")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        unknown = [c for c in self.checks if c not in KNOWN_CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; known: {list(KNOWN_CHECKS)}")
        self.eps_list = eps

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "p": self.p,
            "s": self.s,
            "h": self.h,
            "eps_list": list(self.eps_list),
            "solver": self.solver.to_json(),
            "checks": list(self.checks),
            "output_dir": self.output_dir,
            "threads": self.threads,
        }

    def canonical(self) -> str:
        return canonical_json(self.to_json())

    def config_hash(self) -> str:
        # output_dir and threads do not affect results, so they are not hashed
        doc = self.to_json()
        doc.pop("output_dir", None)
        doc.pop("threads", None)
        return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _solver_from_json(obj: dict) -> SolverConfig:
    kw = {}
    for key in ("max_iters", "grad_tol", "step0", "backtrack", "rng_seed"):
        if key in obj:
            kw[key] = obj[key]
    if "init" in obj:
        init = obj["init"]
        if not isinstance(init, (list, tuple)) or not init:
            raise ConfigError("solver.init must be a non-empty list")
        kind = init[0]
        if kind == "bump":
            if len(init) != 3:
                raise ConfigError('bump init is ["bump", [center...], width]')
            kw["init"] = ("bump", tuple(float(c) for c in init[1]), float(init[2]))
        elif kind == "radial_gaussian":
            kw["init"] = tuple(["radial_gaussian"] + [float(v) for v in init[1:]])
        elif kind == "random":
            kw["init"] = ("random",)
        else:
            raise ConfigError(f"unknown init kind {kind!r}")
    try:
        return SolverConfig(**kw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad solver config: {e}") from e


def config_from_json(obj: dict) -> RunConfig:
    try:
        domain = domain_from_json(obj["domain"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad domain: {e}") from e
    missing = [k for k in ("p", "s", "h", "eps_list") if k not in obj]
    if missing:
        raise ConfigError(f"config lacks keys {missing}")
    return RunConfig(
        domain=domain,
        p=float(obj["p"]),
        s=float(obj["s"]),
        h=float(obj["h"]),
        eps_list=list(obj["eps_list"]),
        solver=_solver_from_json(obj.get("solver", {})),
        checks=list(obj.get("checks", [])),
        output_dir=str(obj.get("output_dir", "out")),
        threads=int(obj.get("threads", 1)),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_json(obj)
