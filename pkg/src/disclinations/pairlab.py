"""Reduced two-disclination models.

* the symmetric dipole ``s1 = -s2`` placed symmetrically about the origin,
  which reduces to a scalar ODE for the separation ``Delta``;
* the superposed pair held together by a holonomic constraint, both in the
  small-offset form (``X2 = X1 - eps``) and in the limiting effective form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import forces_of
from .flow import sample_grid
from .integrate import DomainExit, DormandPrince, StepSizeCollapse

NEAR_ZERO = "near-zero"
NEAR_TWO = "near-two"
NEAR_ZERO_MAX = 0.05
NEAR_TWO_MIN = 1.95


@dataclass(frozen=True)
class DipoleState:
    delta: float
    s: float

    def __post_init__(self):
        if not 0.0 < self.delta < 2.0:
            raise ValueError("separation must lie in (0, 2)")
        if self.s == 0:
            raise ValueError("Frank angle must be non-zero")


@dataclass(frozen=True)
class EffectivePair:
    s1: float
    s2: float
    pos: tuple[float, float]

    def __post_init__(self):
        if self.s1 == 0 or self.s2 == 0:
            raise ValueError("Frank angles must be non-zero")
        p = np.asarray(self.pos, dtype=float)
        if p.shape != (2,) or p @ p >= 1.0:
            raise ValueError("common position must lie in the open unit disk")
        object.__setattr__(self, "pos", (float(p[0]), float(p[1])))

    @property
    def s_eff(self) -> float:
        return (self.s1 + self.s2) / math.sqrt(2.0)


def _shape(delta):
    # G(delta) / (4 s^2 delta); its root is the equilibrium separation
    return (4.0 - delta**2) / (4.0 + delta**2) + 2.0 * math.log(4.0 * delta / (4.0 + delta**2))


def _shape_log(u):
    # same as _shape(exp(u)), valid after exp(u) underflows
    d2 = math.exp(2.0 * u)
    return (4.0 - d2) / (4.0 + d2) + 2.0 * (math.log(4.0) + u - math.log(4.0 + d2))


def dipole_rhs(st: DipoleState) -> float:
    """Rate of change of the dipole separation."""
    return 4.0 * st.s**2 * st.delta * _shape(st.delta)


def find_dipole_equilibrium(s: float = 1.0, tol: float = 1e-12) -> float:
    """Unstable equilibrium separation of the symmetric dipole, by bisection.

    The root does not depend on ``s``: the Frank angle only scales the
    right-hand side, so bisection runs on the scale-free factor.
    """
    if s == 0:
        raise ValueError("Frank angle must be non-zero")
    a, b = 1e-3, 1.9
    fa = _shape(a)
    if fa >= 0 or _shape(b) <= 0:
        raise RuntimeError("equilibrium not bracketed")
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = _shape(m)
        if fm < 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


@dataclass
class DipoleTrace:
    s: float
    times: np.ndarray
    delta: np.ndarray
    log_delta: np.ndarray

    def positions(self) -> np.ndarray:
        """Positions ``(Delta/2, 0)`` and ``(-Delta/2, 0)``, shape ``(n, 2, 2)``."""
        out = np.zeros((len(self.times), 2, 2))
        out[:, 0, 0] = 0.5 * self.delta
        out[:, 1, 0] = -0.5 * self.delta
        return out


def simulate_dipole(delta0: float, s: float, t_end: float, *, rel_tol=1e-11, abs_tol=1e-12,
                    sample_interval=0.01, max_step=0.05) -> DipoleTrace:
    """Integrate the separation of a symmetric zero-charge dipole.

    The state is ``log(Delta)``: the attracting branch sends ``Delta`` to zero
    super-exponentially, which the logarithm keeps representable.
    """
    DipoleState(delta0, s)

    def rhs(t, u):
        if not u[0] < math.log(2.0):
            raise DomainExit("separation reached the disk diameter")
        return np.array([4.0 * s**2 * _shape_log(u[0])])

    grid = sample_grid(t_end, sample_interval)
    logs = [math.log(delta0)]
    stepper = DormandPrince(rhs, 0.0, [math.log(delta0)], rtol=rel_tol, atol=abs_tol,
                            max_step=max_step)
    i = 1
    while i < len(grid):
        step = stepper.advance(t_end)
        while i < len(grid) and grid[i] <= step.t1 + 1e-12:
            logs.append(float(step(min(grid[i], step.t1))[0]))
            i += 1
    logs = np.array(logs)
    return DipoleTrace(s, grid, np.exp(logs), logs)


def dipole_asymptotic(delta0: float, s: float, T, branch: str):
    """Closed-form separation from the leading behaviour of the dipole law."""
    T = np.asarray(T, dtype=float)
    if branch == NEAR_ZERO:
        if not 0.0 < delta0 <= NEAR_ZERO_MAX:
            raise ValueError(f"near-zero branch needs 0 < delta0 <= {NEAR_ZERO_MAX}")
        return np.exp(math.log(delta0) * np.exp(8.0 * s**2 * T))
    if branch == NEAR_TWO:
        if not NEAR_TWO_MIN <= delta0 < 2.0:
            raise ValueError(f"near-two branch needs {NEAR_TWO_MIN} <= delta0 < 2")
        return 2.0 - (2.0 - delta0) * np.exp(-4.0 * s**2 * T)
    raise ValueError(f"unknown branch {branch!r}")


# --------------------------------------------------------------------------
# superposed pair


def effective_pair_rhs(ep: EffectivePair):
    """Common velocity of a constrained superposed pair and the reaction on the first member."""
    X = np.array(ep.pos)
    w = 1.0 - X @ X
    velocity = 2.0 * ep.s_eff**2 * w * X
    multiplier = (ep.s2**2 - ep.s1**2) * w * X
    return velocity, multiplier


@dataclass
class PairTrace:
    """Trajectory of a constrained pair; ``multiplier`` is the reaction on the first member."""

    s1: float
    s2: float
    times: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    multiplier: np.ndarray
    eps: np.ndarray
    termination: str = "t_end"

    @property
    def residual(self) -> np.ndarray:
        """Violation ``|X1 - X2 - eps|`` of the constraint at each sample."""
        return np.linalg.norm(self.xi1 - self.xi2 - self.eps, axis=1)


def _integrate_planar(rhs, x0, t_end, rel_tol, abs_tol, sample_interval, max_step):
    """Sample ``x' = rhs(x)``; stops early, with a reason, if the state leaves the disk."""
    grid = sample_grid(t_end, sample_interval)
    out = [np.array(x0, dtype=float)]
    stepper = DormandPrince(rhs, 0.0, x0, rtol=rel_tol, atol=abs_tol, max_step=max_step)
    i = 1
    termination = "t_end"
    while i < len(grid):
        if not np.any(stepper.f):
            out.extend([stepper.y.copy()] * (len(grid) - i))
            termination = "stationary"
            break
        try:
            step = stepper.advance(t_end)
        except StepSizeCollapse:
            termination = "step-size-collapse"
            break
        while i < len(grid) and grid[i] <= step.t1 + 1e-12:
            out.append(step(min(grid[i], step.t1)))
            i += 1
    return grid[: len(out)], np.array(out), termination


def _eps_vector(eps):
    e = np.asarray(eps, dtype=float)
    if e.ndim == 0:
        e = np.array([float(e), 0.0])
    if e.shape != (2,) or not np.hypot(*e) > 0:
        raise ValueError("eps must be a non-zero scalar or 2-vector")
    return e


def constrained_velocity(s1, s2, xi1, eps):
    """Velocity of the first member and the multiplier for the offset constraint."""
    X = np.array([xi1, np.asarray(xi1) - eps])
    F = forces_of([s1, s2], X)
    v = 0.5 * (F[0] + F[1])
    return v, F[1] - v


def simulate_constrained_eps(s1, s2, xi10, eps, t_end, *, rel_tol=1e-11, abs_tol=1e-13,
                             sample_interval=0.01, max_step=0.05) -> PairTrace:
    """Integrate a pair held at the fixed offset ``X1 - X2 = eps``.

    ``eps`` may be a scalar, taken as ``(eps, 0)``.  The leading member can
    reach the boundary in finite time; the trace then ends there with
    ``termination == "step-size-collapse"``.
    """
    e = _eps_vector(eps)
    x0 = np.asarray(xi10, dtype=float)
    if x0 @ x0 >= 1.0 or (x0 - e) @ (x0 - e) >= 1.0:
        raise ValueError("both members must start in the open unit disk")

    def rhs(t, x):
        if x @ x >= 1.0 or (x - e) @ (x - e) >= 1.0:
            raise DomainExit("a member left the open unit disk")
        return constrained_velocity(s1, s2, x, e)[0]

    times, xi1, why = _integrate_planar(rhs, x0, t_end, rel_tol, abs_tol, sample_interval, max_step)
    xi2 = xi1 - e
    lam = np.array([constrained_velocity(s1, s2, x, e)[1] for x in xi1])
    return PairTrace(s1, s2, times, xi1, xi2, lam, e, why)


def simulate_effective_pair(s1, s2, xi0, t_end, *, rel_tol=1e-11, abs_tol=1e-13,
                            sample_interval=0.01, max_step=0.05) -> PairTrace:
    """Integrate the limiting dynamics of a pair that stays exactly superposed."""
    EffectivePair(s1, s2, tuple(xi0))

    def rhs(t, x):
        if x @ x >= 1.0:
            raise DomainExit("the pair left the open unit disk")
        return effective_pair_rhs(EffectivePair(s1, s2, (x[0], x[1])))[0]

    times, xi, why = _integrate_planar(rhs, np.asarray(xi0, dtype=float), t_end, rel_tol,
                                       abs_tol, sample_interval, max_step)
    lam = np.array([effective_pair_rhs(EffectivePair(s1, s2, (x[0], x[1])))[1] for x in xi])
    return PairTrace(s1, s2, times, xi, xi.copy(), lam, np.zeros(2), why)
