"""Dormand-Prince 5(4) stepper with PI step-size control.

Only the pieces the simulators need: an adaptive stepper that hands back one
accepted step at a time, a 4th order continuous extension over each step, and a
bisection root finder on that interpolant for event location.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CoincidentPositionsError

# Dormand & Prince (1980) coefficients.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# Shampine's continuous extension, columns multiply theta**1..4
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents (Hairer, Norsett & Wanner, DOPRI5)
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA
# steps shorter than this fraction of max(|t|, 1) count as a stall; a state
# pinned against the domain edge otherwise creeps forward by ~1e-13 per step
MIN_RELATIVE_STEP = 1e-12


class StepSizeCollapse(RuntimeError):
    def __init__(self, t, reason):
        self.t = float(t)
        self.reason = reason
        super().__init__(f"step size collapsed at T={t:.12g}: {reason}")


class DomainExit(ValueError):
    """Raised by a right-hand side evaluated outside its domain."""


@dataclass(frozen=True)
class Step:
    """One accepted step with Dormand-Prince 4th order dense output.

    ``q`` holds the interpolation coefficients; ``span`` is the length of the
    step the coefficients were built for, which stays fixed when the step is
    truncated at an event.
    """

    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    q: np.ndarray
    span: float

    @property
    def h(self) -> float:
        return self.t1 - self.t0

    def __call__(self, t: float) -> np.ndarray:
        if t == self.t1:
            return self.y1.copy()
        if t == self.t0 or self.span == 0.0:
            return self.y0.copy()
        th = (t - self.t0) / self.span
        p = np.array([th, th**2, th**3, th**4])
        return self.y0 + self.span * (self.q @ p)

    def derivative(self, t: float) -> np.ndarray:
        th = (t - self.t0) / self.span
        return self.q @ np.array([1.0, 2 * th, 3 * th**2, 4 * th**3])

    def truncate(self, t: float) -> "Step":
        """Restrict the step to ``[t0, t]``, reusing the interpolant."""
        return Step(self.t0, t, self.y0, self(t), self.f0, self.derivative(t), self.q, self.span)


def bisect_event(g, step: Step, tol: float = 1e-9) -> float:
    """Locate a sign change of ``g(t, y)`` on ``step`` by bisection.

    ``g`` must differ in sign at the two ends of the step; the returned time
    lies within ``tol`` of the crossing on the interpolant and on the side
    where the sign has already changed.
    """
    a, b = step.t0, step.t1
    ga = g(a, step(a))
    while b - a > tol:
        m = 0.5 * (a + b)
        gm = g(m, step(m))
        if (gm > 0) == (ga > 0) and gm != 0.0:
            a, ga = m, gm
        else:
            b = m
    return b


class DormandPrince:
    """Adaptive explicit RK 5(4) integrator for ``y' = rhs(t, y)``.

    The right-hand side may raise :class:`~disclinations.core.CoincidentPositionsError`
    or :class:`DomainExit`; the step is then rejected and retried with a
    smaller size.  When the step size becomes negligible a
    :class:`StepSizeCollapse` is raised.
    """

    def __init__(self, rhs, t0, y0, *, rtol=1e-8, atol=1e-10, max_step=math.inf,
                 first_step=None):
        self.rhs = rhs
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.max_step = float(max_step)
        self.f = np.asarray(rhs(self.t, self.y), dtype=float)
        self.h = first_step if first_step is not None else self._initial_step()
        self._err_old = 1e-4
        self.n_rejected = 0
        self.n_accepted = 0

    def _norm(self, e, y0, y1):
        sc = self.atol + self.rtol * np.maximum(np.abs(y0), np.abs(y1))
        return math.sqrt(float(np.mean((e / sc) ** 2))) if e.size else 0.0

    def _initial_step(self):
        # Hairer, Norsett & Wanner, II.4
        y0, f0 = self.y, self.f
        sc = self.atol + self.rtol * np.abs(y0)
        d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
        d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, self.max_step)
        try:
            f1 = np.asarray(self.rhs(self.t + h0, y0 + h0 * f0), dtype=float)
            d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
        except (CoincidentPositionsError, DomainExit):
            return h0 * 1e-3
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        return min(100 * h0, h1, self.max_step)

    def _attempt(self, h):
        t, y = self.t, self.y
        k = [self.f]
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
            k.append(np.asarray(self.rhs(t + _C[i] * h, yi), dtype=float))
        y_new = y + h * sum(b * kj for b, kj in zip(_B, k) if b != 0.0)
        err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
        # FSAL: the last stage is the derivative at the new point
        return y_new, np.array(k), self._norm(err, y, y_new)

    def advance(self, t_limit: float) -> Step:
        """Take one accepted step that does not go past ``t_limit``."""
        if t_limit <= self.t:
            raise ValueError("t_limit must lie ahead of the current time")
        h = min(self.h, self.max_step)
        while True:
            scale = max(abs(self.t), 1.0)
            hmin = max(16 * np.spacing(scale), MIN_RELATIVE_STEP * scale)
            last = False
            if self.t + h >= t_limit or t_limit - (self.t + h) < hmin:
                h = t_limit - self.t
                last = True
            if h < hmin:
                raise StepSizeCollapse(self.t, "step below floating-point resolution")
            try:
                y_new, K, err = self._attempt(h)
                f_new = K[6]
                if not np.all(np.isfinite(y_new)):
                    raise DomainExit("non-finite state")
            except (CoincidentPositionsError, DomainExit) as exc:
                self.n_rejected += 1
                h *= 0.25
                if h < hmin:
                    raise StepSizeCollapse(self.t, str(exc)) from exc
                continue
            if not math.isfinite(err):
                self.n_rejected += 1
                h *= 0.25
                if h < hmin:
                    raise StepSizeCollapse(self.t, "non-finite error estimate")
                continue
            if err <= 1.0:
                fac = _SAFETY * err ** (-_ALPHA) * self._err_old**_BETA if err > 0 else _MAX_FACTOR
                fac = min(_MAX_FACTOR, max(_MIN_FACTOR, fac))
                self._err_old = max(err, 1e-4)
                t_new = t_limit if last else self.t + h
                q = K.reshape(7, -1).T @ _P
                step = Step(self.t, t_new, self.y, y_new, self.f, f_new, q, t_new - self.t)
                self.t, self.y, self.f = t_new, y_new, f_new
                h_next = h * fac
                if last:
                    # a clipped final step says nothing about the natural step size
                    h_next = max(h_next, self.h)
                self.h = min(h_next, self.max_step)
                self.n_accepted += 1
                return step
            self.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
            if h < hmin:
                raise StepSizeCollapse(self.t, "error control cannot be met")
