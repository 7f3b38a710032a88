"""Gradient-flow dynamics of free disclinations.

Each disclination moves with velocity equal to the force acting on it.  The
trajectory is computed with the adaptive Dormand-Prince stepper and sampled on
a uniform time grid; collisions (pairs closer than a critical distance) and
approaches to the boundary are recorded as events.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .core import (
    CoincidentPositionsError,
    Configuration,
    energy_of,
    forces_of,
)
from .integrate import DomainExit, DormandPrince, Step, StepSizeCollapse, bisect_event

logger = logging.getLogger(__name__)

STATIONARY_FORCE = 1e-12
EVENT_TIME_TOL = 1e-9

COLLISION_BEGIN = "collision-begin"
COLLISION_END = "collision-end"
BOUNDARY_APPROACH = "boundary-approach"
STEP_COLLAPSE = "step-size-collapse"


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 0.05
    t_end: float = 1.0
    sample_interval: float = 0.01
    collision_distance: float = 0.05
    boundary_margin: float = 0.01

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "t_end", "sample_interval",
                     "collision_distance", "boundary_margin"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.rel_tol > 1e-3 or self.abs_tol > 1e-3:
            raise ValueError("rel_tol and abs_tol must not exceed 1e-3")
        if self.collision_distance >= 2.0:
            raise ValueError("collision_distance must be smaller than the disk diameter")
        if self.boundary_margin >= 1.0:
            raise ValueError("boundary_margin must be smaller than 1")

    def replace(self, **changes) -> "IntegratorSettings":
        return replace(self, **changes)


@dataclass(frozen=True)
class Event:
    kind: str
    time: float
    subjects: tuple[int, ...]


@dataclass
class Trace:
    """Sampled trajectory.

    ``positions`` has shape ``(n_samples, N, 2)`` and ``forces`` the same;
    ``energies`` has shape ``(n_samples,)``.  ``forces`` are the free forces
    ``-grad H``, also for constrained (glide) motion.
    """

    angles: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    energies: np.ndarray
    forces: np.ndarray
    events: list[Event] = field(default_factory=list)
    termination: str = "t_end"

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> Iterator[tuple[float, Configuration, float, np.ndarray]]:
        for i in range(len(self.times)):
            yield self.times[i], self.configuration(i), self.energies[i], self.forces[i]

    def configuration(self, i: int) -> Configuration:
        return Configuration.from_arrays(self.angles, self.positions[i])

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


def sample_grid(t_end: float, interval: float) -> np.ndarray:
    n = int(math.floor(t_end / interval + 1e-9))
    grid = interval * np.arange(n + 1)
    if t_end - grid[-1] > 1e-9 * interval:
        return np.append(grid, t_end)
    grid[-1] = t_end
    return grid


class Recorder:
    """Samples accepted steps on a uniform grid and watches pair/boundary events.

    Shared by the free and the glide integrators; the velocity field does not
    matter here, only the positions along the step.
    """

    def __init__(self, angles, y0, settings: IntegratorSettings):
        self.s = np.asarray(angles, dtype=float)
        self.n = len(self.s)
        self.settings = settings
        self.grid = sample_grid(settings.t_end, settings.sample_interval)
        self.next_sample = 0
        self.times: list[float] = []
        self.positions: list[np.ndarray] = []
        self.energies: list[float] = []
        self.forces: list[np.ndarray] = []
        self.events: list[Event] = []
        self.pairs = [(k, h) for k in range(self.n) for h in range(k + 1, self.n)]
        X0 = np.asarray(y0, dtype=float).reshape(-1, 2)
        self.colliding = {p: self._pair_gap(X0, p) <= 0 for p in self.pairs}
        self.near_boundary = [self._boundary_gap(X0, k) > 0 for k in range(self.n)]
        for p, inside in self.colliding.items():
            # already within the critical distance: open the collision at T=0
            if inside:
                self.events.append(Event(COLLISION_BEGIN, 0.0, p))
        for k, near in enumerate(self.near_boundary):
            if near:
                self.events.append(Event(BOUNDARY_APPROACH, 0.0, (k,)))

    def _pair_gap(self, X, p):
        k, h = p
        return math.hypot(*(X[k] - X[h])) - self.settings.collision_distance

    def _boundary_gap(self, X, k):
        return math.hypot(*X[k]) - (1.0 - self.settings.boundary_margin)

    @property
    def done(self) -> bool:
        return self.next_sample >= len(self.grid)

    def add_sample(self, t, y):
        X = np.asarray(y, dtype=float).reshape(-1, 2)
        self.times.append(float(t))
        self.positions.append(X.copy())
        self.energies.append(energy_of(self.s, X))
        self.forces.append(forces_of(self.s, X))

    def start(self, y0):
        self.add_sample(self.grid[0], y0)
        self.next_sample = 1

    def record(self, step: Step):
        while self.next_sample < len(self.grid) and self.grid[self.next_sample] <= step.t1 + 1e-12:
            t = min(self.grid[self.next_sample], step.t1)
            self.add_sample(self.grid[self.next_sample], step(t))
            self.next_sample += 1
        self._watch(step)

    def _watch(self, step: Step):
        X1 = step.y1.reshape(-1, 2)
        for p in self.pairs:
            inside = self._pair_gap(X1, p) <= 0
            if inside != self.colliding[p]:
                g = lambda t, y, p=p: self._pair_gap(y.reshape(-1, 2), p)
                t_ev = bisect_event(g, step, EVENT_TIME_TOL)
                self.events.append(Event(COLLISION_BEGIN if inside else COLLISION_END, t_ev, p))
                self.colliding[p] = inside
        for k in range(self.n):
            near = self._boundary_gap(X1, k) > 0
            if near and not self.near_boundary[k]:
                g = lambda t, y, k=k: self._boundary_gap(y.reshape(-1, 2), k)
                self.events.append(Event(BOUNDARY_APPROACH, bisect_event(g, step, EVENT_TIME_TOL), (k,)))
            self.near_boundary[k] = near

    def freeze(self, y):
        """Fill the remaining grid with a constant state."""
        while not self.done:
            self.add_sample(self.grid[self.next_sample], y)
            self.next_sample += 1

    def trace(self, termination: str) -> Trace:
        events = sorted(self.events, key=lambda e: (e.time, e.kind, e.subjects))
        return Trace(
            angles=self.s.copy(),
            times=np.array(self.times),
            positions=np.array(self.positions).reshape(-1, self.n, 2),
            energies=np.array(self.energies),
            forces=np.array(self.forces).reshape(-1, self.n, 2),
            events=events,
            termination=termination,
        )


def free_rhs(angles):
    s = np.asarray(angles, dtype=float)

    def rhs(t, y):
        X = y.reshape(-1, 2)
        if ((X**2).sum(-1) >= 1.0).any():
            raise DomainExit("a disclination left the open unit disk")
        return forces_of(s, X).ravel()

    return rhs


def _check_initial(cfg: Configuration):
    X = cfg.positions
    if ((X**2).sum(-1) >= 1.0).any():
        raise ValueError("initial positions must lie in the open unit disk")
    forces_of(cfg.angles, X)  # raises on superposed pairs


def simulate(cfg0: Configuration, settings: IntegratorSettings | None = None) -> Trace:
    """Integrate the free gradient flow from ``cfg0`` up to ``settings.t_end``."""
    settings = settings or IntegratorSettings()
    _check_initial(cfg0)
    s = cfg0.angles
    y0 = cfg0.positions.ravel()
    rec = Recorder(s, y0, settings)
    rec.start(y0)
    rhs = free_rhs(s)
    stepper = DormandPrince(rhs, 0.0, y0, rtol=settings.rel_tol, atol=settings.abs_tol,
                            max_step=settings.max_step)
    termination = "t_end"
    while not rec.done:
        if np.abs(stepper.f).max() < STATIONARY_FORCE:
            rec.freeze(stepper.y)
            termination = "stationary"
            break
        try:
            step = stepper.advance(settings.t_end)
        except StepSizeCollapse as exc:
            logger.warning("%s", exc)
            rec.events.append(Event(STEP_COLLAPSE, exc.t, ()))
            termination = STEP_COLLAPSE
            break
        rec.record(step)
    logger.debug("simulate: %d steps accepted, %d rejected", stepper.n_accepted, stepper.n_rejected)
    return rec.trace(termination)


def analytic_single(s: float, rho0: float, phi0: float, T):
    """Exact position of a lone disclination started at polar ``(rho0, phi0)``.

    Vectorised over ``T``; returns shape ``(2,)`` for scalar ``T`` and
    ``(len(T), 2)`` otherwise.
    """
    if not 0.0 < rho0 < 1.0:
        raise ValueError("rho0 must lie in (0, 1)")
    T = np.asarray(T, dtype=float)
    mu0 = (1.0 - rho0**2) / rho0**2
    rho = 1.0 / np.sqrt(1.0 + mu0 * np.exp(-4.0 * s**2 * T))
    out = np.stack([rho * math.cos(phi0), rho * math.sin(phi0)], axis=-1)
    return out


def energy_dissipation_rate(cfg: Configuration) -> float:
    """``dH/dT = -sum_k |F_k|^2`` along the free flow."""
    F = forces_of(cfg.angles, cfg.positions)
    return -float((F**2).sum())
