"""Motion restricted to a finite set of glide directions.

Each disclination moves along the admissible direction best aligned with the
force acting on it, with speed equal to the projected force.  Where two
directions are equally aligned the velocity becomes set-valued and the motion
is understood in Filippov's sense: a trajectory reaching the switching
surface either crosses it (cross-slip) or slides along it with a convex blend
of the two one-sided fields (fine cross-slip).

Switching surfaces are never built explicitly.  For a disclination moving
along ``g_minus`` the surface towards a competing direction ``g_plus`` is the
zero set of ``e(X) = F_k(X) . (g_plus - g_minus)``; its normal is the
normalised gradient of ``e`` over all 2N coordinates, which by construction
points from the ``g_minus`` side to the ``g_plus`` side.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Configuration, forces_of
from .flow import (
    STATIONARY_FORCE,
    STEP_COLLAPSE,
    EVENT_TIME_TOL,
    Event,
    IntegratorSettings,
    Recorder,
    Trace,
    _check_initial,
)
from .integrate import DomainExit, DormandPrince, Step, StepSizeCollapse, bisect_event

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9
NORMAL_FD_STEP = 1e-7
# relaxation rate pulling a sliding state back onto its switching surface
SLIDING_RELAXATION = 20.0

ZERO_FORCE = "zero-force"
UNIQUE = "unique"
TIE = "tie"

CROSS_SLIP = "cross-slip"
SLIDING_BEGIN = "sliding-begin"
SLIDING_END = "sliding-end"


class InvalidGlideSetError(ValueError):
    pass


class SlidingConditionError(ValueError):
    """The one-sided forces do not both point into the switching surface."""


@dataclass(frozen=True)
class GlideSet:
    """Finite set of unit glide directions, closed under negation."""

    directions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        G = np.asarray(self.directions, dtype=float)
        if G.ndim != 2 or G.shape[1] != 2:
            raise InvalidGlideSetError("directions must be a list of 2-vectors")
        M = len(G)
        if M < 4 or M % 2:
            raise InvalidGlideSetError(f"need an even number of directions >= 4, got {M}")
        if not np.all(np.isfinite(G)) or np.abs(np.hypot(G[:, 0], G[:, 1]) - 1.0).max() > 1e-12:
            raise InvalidGlideSetError("directions must be unit vectors")
        dist = np.hypot(*(G[:, None, :] - G[None, :, :]).transpose(2, 0, 1))
        if (dist[np.triu_indices(M, 1)] < 1e-12).any():
            raise InvalidGlideSetError("directions must be pairwise distinct")
        for g in G:
            if np.hypot(*(G + g).T).min() > 1e-12:
                raise InvalidGlideSetError(f"set is not closed under negation: -{tuple(g)} missing")
        if np.linalg.matrix_rank(G, tol=1e-9) < 2:
            raise InvalidGlideSetError("directions do not span the plane")
        object.__setattr__(self, "directions", tuple((float(a), float(b)) for a, b in G))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.directions)

    def __len__(self) -> int:
        return len(self.directions)

    @classmethod
    def from_angles(cls, angles) -> "GlideSet":
        """Build the set ``{+-(cos a, sin a)}`` from half of the directions."""
        a = np.asarray(angles, dtype=float)
        a = np.concatenate([a, a + math.pi])
        return cls(tuple(zip(np.cos(a), np.sin(a))))


def axes() -> GlideSet:
    return GlideSet(((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)))


def hexagonal() -> GlideSet:
    return GlideSet.from_angles([0.0, math.pi / 3, 2 * math.pi / 3])


GLIDE_SETS = {"axes": axes, "hex": hexagonal}


def glide_set(name: str) -> GlideSet:
    try:
        return GLIDE_SETS[name]()
    except KeyError:
        raise InvalidGlideSetError(f"unknown glide set {name!r}; choose from {sorted(GLIDE_SETS)}") from None


@dataclass(frozen=True)
class DirectionSelection:
    """Maximising directions for one force.

    For a tie the two directions are ordered counter-clockwise, so that
    ``directions[0]`` plays the role of ``g_minus`` and ``directions[1]`` of
    ``g_plus``.  For a zero force every direction maximises; ``directions``
    is then empty and the projected force is zero.
    """

    status: str
    directions: tuple[np.ndarray, ...]
    projected_forces: tuple[np.ndarray, ...]
    indices: tuple[int, ...] = ()


def select_directions(force, gs: GlideSet, tie_tol: float = TIE_TOL) -> DirectionSelection:
    if not isinstance(gs, GlideSet):
        raise InvalidGlideSetError("expected a GlideSet")
    if tie_tol < 0:
        raise ValueError("tie_tol must be non-negative")
    F = np.asarray(force, dtype=float)
    G = gs.array
    norm = math.hypot(*F)
    if norm == 0.0:
        return DirectionSelection(ZERO_FORCE, (), (np.zeros(2),))
    dots = G @ F
    order = np.argsort(-dots, kind="stable")
    i, j = int(order[0]), int(order[1])
    if dots[i] - dots[j] <= tie_tol * norm:
        gi, gj = G[i], G[j]
        if gi[0] * gj[1] - gi[1] * gj[0] < 0:
            i, j = j, i
        top = max(dots[i], dots[j])
        return DirectionSelection(TIE, (G[i].copy(), G[j].copy()), (top * G[i], top * G[j]), (i, j))
    return DirectionSelection(UNIQUE, (G[i].copy(),), (dots[i] * G[i],), (i,))


@dataclass(frozen=True)
class ForceSet:
    """Convex hull of the admissible projected forces: a point or a segment."""

    endpoints: tuple[np.ndarray, ...]

    @property
    def is_segment(self) -> bool:
        return len(self.endpoints) == 2

    def at(self, alpha: float) -> np.ndarray:
        """Point ``(1 - alpha) * start + alpha * end`` of the set."""
        if not self.is_segment:
            return self.endpoints[0].copy()
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        return (1.0 - alpha) * self.endpoints[0] + alpha * self.endpoints[1]


def convexified_force(sel: DirectionSelection) -> ForceSet:
    return ForceSet(tuple(np.array(p, dtype=float) for p in sel.projected_forces))


def sliding_coefficient(f_minus, f_plus, normal) -> float:
    """Blend weight ``alpha`` making the combined force tangent to the surface."""
    N = np.asarray(normal, dtype=float)
    a = float(np.dot(f_minus, N))
    b = float(np.dot(f_plus, N))
    if not (a > 0.0 and b < 0.0):
        raise SlidingConditionError(
            f"sliding needs F-.N > 0 and F+.N < 0, got {a:.3g} and {b:.3g}")
    return a / (a - b)


def blended_force(f_minus, f_plus, normal):
    """``(alpha, F0)`` with ``F0 = (1 - alpha) F- + alpha F+`` and ``F0 . N = 0``."""
    alpha = sliding_coefficient(f_minus, f_plus, normal)
    F0 = (1.0 - alpha) * np.asarray(f_minus, dtype=float) + alpha * np.asarray(f_plus, dtype=float)
    return alpha, F0


@dataclass(frozen=True)
class SlidingInfo:
    active_index: int
    normal: np.ndarray
    alpha: float


# --------------------------------------------------------------------------
# inclusion integrator


@dataclass(frozen=True)
class _Glide:
    j: int


@dataclass(frozen=True)
class _Slide:
    jm: int
    jp: int
    # signs of F-.N and F+.N when sliding began
    sa: float
    sb: float


@dataclass
class GlideTrace(Trace):
    """Trace of a glide trajectory.

    ``sliding_log`` holds one ``(T, k, F_k . g0, alpha)`` record per accepted
    step for every sliding disclination.
    """

    sliding_log: list = field(default_factory=list)


def _switching(s, G, k, jm, jp, y):
    F = forces_of(s, y.reshape(-1, 2))
    return float(F[k] @ (G[jp] - G[jm]))


def _surface_gradient(s, G, k, jm, jp, y, step=NORMAL_FD_STEP):
    grad = np.empty_like(y)
    for i in range(len(y)):
        yp, ym = y.copy(), y.copy()
        yp[i] += step
        ym[i] -= step
        grad[i] = (_switching(s, G, k, jm, jp, yp) - _switching(s, G, k, jm, jp, ym)) / (2 * step)
    return grad


class _Field:
    """Velocity of the glide dynamics for fixed per-disclination modes."""

    def __init__(self, s, G, modes):
        self.s = s
        self.G = G
        self.modes = modes

    def one_sided(self, F, k, j):
        g = self.G[j]
        return (F[k] @ g) * g

    def evaluate(self, y):
        """Return ``(velocity, {k: (alpha, a, b, e)})`` at state ``y``."""
        X = y.reshape(-1, 2)
        F = forces_of(self.s, X)
        V = np.zeros_like(X)
        slides = {}
        for k, m in enumerate(self.modes):
            if isinstance(m, _Glide):
                V[k] = self.one_sided(F, k, m.j)
            else:
                fm, fp = self.one_sided(F, k, m.jm), self.one_sided(F, k, m.jp)
                V[k] = 0.5 * (fm + fp)
                grad = _surface_gradient(self.s, self.G, k, m.jm, m.jp, y)
                slides[k] = (fm, fp, grad, float(F[k] @ (self.G[m.jp] - self.G[m.jm])))
        info = {}
        # Jacobi sweeps: each sliding alpha sees the others' current velocities
        for _ in range(3 if len(slides) > 1 else 1):
            for k, (fm, fp, grad, e) in slides.items():
                gn = math.sqrt(grad @ grad)
                N = grad / gn
                Vm, Vp = V.copy(), V.copy()
                Vm[k], Vp[k] = fm, fp
                a = float(Vm.ravel() @ N)
                b = float(Vp.ravel() @ N)
                if a == b:
                    alpha = 0.5
                else:
                    alpha = (a + SLIDING_RELAXATION * e / gn) / (a - b)
                    alpha = min(1.0, max(0.0, alpha))
                V[k] = (1.0 - alpha) * fm + alpha * fp
                info[k] = (alpha, a, b, e)
        return V.ravel(), info

    def rhs(self, t, y):
        X = y.reshape(-1, 2)
        if ((X**2).sum(-1) >= 1.0).any():
            raise DomainExit("a disclination left the open unit disk")
        return self.evaluate(y)[0]

    def crossing_sides(self, y, k, jm, jp):
        """``(F-.N, F+.N)`` for a tentative switch of ``k`` from ``jm`` to ``jp``."""
        X = y.reshape(-1, 2)
        F = forces_of(self.s, X)
        V, _ = self.evaluate(y)
        V = V.reshape(-1, 2)
        grad = _surface_gradient(self.s, self.G, k, jm, jp, y)
        N = grad / math.sqrt(grad @ grad)
        Vm, Vp = V.copy(), V.copy()
        Vm[k] = self.one_sided(F, k, jm)
        Vp[k] = self.one_sided(F, k, jp)
        return float(Vm.ravel() @ N), float(Vp.ravel() @ N)


def _overtake(F, G, k, own, tie_tol):
    """Largest margin by which a direction outside ``own`` beats the best of ``own``."""
    dots = G @ F[k]
    best_own = max(dots[j] for j in own)
    others = [i for i in range(len(G)) if i not in own]
    i = max(others, key=lambda i: dots[i])
    return float(dots[i] - best_own - tie_tol * math.hypot(*F[k])), i


class _Monitor:
    """Detects the first mode change along an accepted step."""

    def __init__(self, s, G, field_: _Field, tie_tol):
        self.s, self.G, self.field, self.tie_tol = s, G, field_, tie_tol

    def indicators(self, y):
        """List of ``(k, name, value)``; a positive value calls for a mode change."""
        X = y.reshape(-1, 2)
        F = forces_of(self.s, X)
        out = []
        for k, m in enumerate(self.field.modes):
            if isinstance(m, _Glide):
                if F[k] @ F[k] == 0.0:
                    continue
                out.append((k, "overtake", _overtake(F, self.G, k, (m.j,), self.tie_tol)[0]))
            else:
                out.append((k, "overtake", _overtake(F, self.G, k, (m.jm, m.jp), self.tie_tol)[0]))
                a, b = self.field.crossing_sides(y, k, m.jm, m.jp)
                out.append((k, "a", -m.sa * a))
                out.append((k, "b", -m.sb * b))
        return out

    def first_change(self, step: Step):
        """``(t, k, name)`` of the earliest indicator turning positive on ``step``, or None."""
        end = self.indicators(step.y1)
        hits = [(k, name) for k, name, v in end if v > 0]
        if not hits:
            return None
        best = None
        for k, name in hits:
            def g(t, y, k=k, name=name):
                for kk, nn, v in self.indicators(y):
                    if kk == k and nn == name:
                        return v
                raise RuntimeError("indicator vanished")
            start = g(step.t0, step.y0)
            t = step.t0 if start > 0 else bisect_event(lambda t, y: -g(t, y), step, EVENT_TIME_TOL)
            if best is None or t < best[0]:
                best = (t, k, name)
        return best


def _initial_mode(field_: _Field, y, k, tie_tol):
    s, G = field_.s, field_.G
    F = forces_of(s, y.reshape(-1, 2))
    sel = select_directions(F[k], GlideSet(tuple(map(tuple, G))), tie_tol)
    if sel.status == ZERO_FORCE:
        return _Glide(0), None
    if sel.status == UNIQUE:
        return _Glide(sel.indices[0]), None
    jm, jp = sel.indices
    a, b = field_.crossing_sides(y, k, jm, jp)
    if a * b < 0:
        return _Slide(jm, jp, math.copysign(1.0, a), math.copysign(1.0, b)), SLIDING_BEGIN
    return (_Glide(jp) if a + b >= 0 else _Glide(jm)), None


def _classify_switch(field_: _Field, y, k, jm, jp):
    """Mode of ``k`` after reaching the surface between ``jm`` (current) and ``jp``."""
    a, b = field_.crossing_sides(y, k, jm, jp)
    if b > 0:
        return _Glide(jp), CROSS_SLIP
    if a > 0:
        return _Slide(jm, jp, 1.0, -1.0), SLIDING_BEGIN
    # both one-sided fields point back: the trajectory only grazed the surface
    return _Glide(jm), None


def integrate_inclusion(cfg0: Configuration, gs: GlideSet,
                        settings: IntegratorSettings | None = None,
                        tie_tol: float = TIE_TOL) -> GlideTrace:
    """Integrate the glide-constrained dynamics from ``cfg0``.

    Events ``cross-slip``, ``sliding-begin`` and ``sliding-end`` are added to
    the collision and boundary events of the free flow.  The recorded forces
    are the free forces, not the projected velocities.
    """
    settings = settings or IntegratorSettings()
    if not isinstance(gs, GlideSet):
        raise InvalidGlideSetError("expected a GlideSet")
    _check_initial(cfg0)
    s = cfg0.angles
    G = gs.array
    y = cfg0.positions.ravel().copy()
    n = len(s)
    rec = Recorder(s, y, settings)
    rec.start(y)
    log: list = []

    field_ = _Field(s, G, [_Glide(0)] * n)
    modes = []
    for k in range(n):
        m, kind = _initial_mode(field_, y, k, tie_tol)
        modes.append(m)
        if kind:
            rec.events.append(Event(kind, 0.0, (k,)))
    field_ = _Field(s, G, modes)

    t = 0.0
    termination = "t_end"
    stepper = None
    last_switch = {}
    while not rec.done:
        if stepper is None:
            stepper = DormandPrince(field_.rhs, t, y, rtol=settings.rel_tol, atol=settings.abs_tol,
                                    max_step=settings.max_step)
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
        monitor = _Monitor(s, G, field_, tie_tol)
        hit = monitor.first_change(step)
        if hit is None:
            rec.record(step)
            t, y = step.t1, step.y1
            _log_sliding(log, field_, t, y)
            continue
        t_ev, k, name = hit
        if t_ev > step.t0:
            step = step.truncate(t_ev)
            rec.record(step)
        t, y = t_ev, step(t_ev) if t_ev > step.t0 else step.y0
        _log_sliding(log, field_, t, y)
        modes = list(field_.modes)
        new, kind = _switch(field_, y, k, name, tie_tol)
        if last_switch.get(k) == t and kind is None:
            # no progress since the last switch of k: take the g+ branch
            new, kind = _Glide(_target(field_, y, k, tie_tol)), CROSS_SLIP
        modes[k] = new
        last_switch[k] = t
        if kind:
            rec.events.append(Event(kind, t, (k,)))
        field_ = _Field(s, G, modes)
        stepper = None
    tr = rec.trace(termination)
    return GlideTrace(tr.angles, tr.times, tr.positions, tr.energies, tr.forces, tr.events,
                      tr.termination, log)


def _target(field_: _Field, y, k, tie_tol):
    F = forces_of(field_.s, y.reshape(-1, 2))
    return int(np.argmax(field_.G @ F[k]))


def _switch(field_: _Field, y, k, name, tie_tol):
    m = field_.modes[k]
    F = forces_of(field_.s, y.reshape(-1, 2))
    G = field_.G
    if isinstance(m, _Glide):
        _, jp = _overtake(F, G, k, (m.j,), tie_tol)
        return _classify_switch(field_, y, k, m.j, jp)
    if name == "overtake":
        _, i = _overtake(F, G, k, (m.jm, m.jp), tie_tol)
        return _Glide(i), SLIDING_END
    a, b = field_.crossing_sides(y, k, m.jm, m.jp)
    # the monitor that did not change sign tells which side the state leaves to
    keep = b if name == "a" else a
    return (_Glide(m.jp) if keep > 0 else _Glide(m.jm)), SLIDING_END


def _log_sliding(log, field_: _Field, t, y):
    if not any(isinstance(m, _Slide) for m in field_.modes):
        return
    _, info = field_.evaluate(y)
    for k, (alpha, a, b, e) in sorted(info.items()):
        log.append((float(t), k, e, alpha))
