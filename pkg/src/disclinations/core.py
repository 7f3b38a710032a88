"""Closed-form energy and forces for wedge disclinations in the unit disk.

All quantities are nondimensional: lengths are measured in units of the disk
radius, energies in units of ``E R^2 / (16 pi (1 - nu^2))`` and time in units
of ``R^2 / (lambda C)``.

The array-level functions (:func:`energy_of`, :func:`forces_of`) take a vector
of Frank angles ``s`` with shape ``(N,)`` and positions ``X`` with shape
``(N, 2)``; they are what the integrators call in their inner loops.  The
object-level functions take :class:`Disclination` / :class:`Configuration`
values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

# Pairs closer than this are treated as superposed.
MIN_SEPARATION = 1e-12

_BOUNDARY_SLACK = 1e-12


class CoincidentPositionsError(ValueError):
    """Two disclinations occupy (numerically) the same point."""

    def __init__(self, pair, distance):
        self.pair = tuple(int(i) for i in pair)
        self.distance = float(distance)
        super().__init__(
            f"disclinations {self.pair[0]} and {self.pair[1]} are superposed "
            f"(distance {self.distance:.3g} < {MIN_SEPARATION:g})"
        )


class InvalidScalesError(ValueError):
    pass


@dataclass(frozen=True)
class Disclination:
    """A wedge disclination: Frank angle ``angle`` located at ``(x, y)``."""

    angle: float
    x: float
    y: float

    def __post_init__(self):
        angle, x, y = float(self.angle), float(self.x), float(self.y)
        if not all(math.isfinite(v) for v in (angle, x, y)):
            raise ValueError("disclination fields must be finite")
        if angle == 0.0:
            raise ValueError("Frank angle must be non-zero")
        if x * x + y * y > 1.0 + _BOUNDARY_SLACK:
            raise ValueError(f"position ({x}, {y}) lies outside the closed unit disk")
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def pos(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Configuration:
    """Ordered, immutable collection of disclinations."""

    disclinations: tuple[Disclination, ...]

    def __post_init__(self):
        items = tuple(self.disclinations)
        if not items:
            raise ValueError("a configuration needs at least one disclination")
        object.__setattr__(self, "disclinations", items)

    @classmethod
    def from_arrays(cls, angles: Iterable[float], positions) -> "Configuration":
        angles = np.asarray(list(angles) if not isinstance(angles, np.ndarray) else angles,
                            dtype=float).reshape(-1)
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        if len(angles) != len(positions):
            raise ValueError("angles and positions differ in length")
        return cls(tuple(Disclination(a, p[0], p[1]) for a, p in zip(angles, positions)))

    def __len__(self) -> int:
        return len(self.disclinations)

    def __iter__(self) -> Iterator[Disclination]:
        return iter(self.disclinations)

    def __getitem__(self, k) -> Disclination:
        return self.disclinations[k]

    @property
    def angles(self) -> np.ndarray:
        return np.array([d.angle for d in self.disclinations])

    @property
    def positions(self) -> np.ndarray:
        return np.array([[d.x, d.y] for d in self.disclinations])

    def with_positions(self, positions) -> "Configuration":
        return Configuration.from_arrays(self.angles, positions)

    def min_separation(self) -> float:
        X = self.positions
        if len(X) < 2:
            return math.inf
        D = X[:, None, :] - X[None, :, :]
        d = np.sqrt((D**2).sum(-1))
        return float(d[np.triu_indices(len(X), 1)].min())


@dataclass(frozen=True)
class PhysicalScales:
    """Dimensional material and geometric data used to convert time."""

    young_modulus: float
    poisson_ratio: float
    radius: float
    mobility: float

    def __post_init__(self):
        if not -1.0 < self.poisson_ratio < 0.5:
            raise InvalidScalesError("Poisson ratio must lie in (-1, 0.5)")
        for name in ("young_modulus", "radius", "mobility"):
            if not getattr(self, name) > 0:
                raise InvalidScalesError(f"{name} must be positive")

    @property
    def energy_scale(self) -> float:
        """``C = E R^2 / (16 pi (1 - nu^2))``."""
        return self.young_modulus * self.radius**2 / (
            16.0 * math.pi * (1.0 - self.poisson_ratio**2)
        )


def to_nondimensional(ps: PhysicalScales, t_physical: float) -> float:
    """Convert a physical time to the nondimensional time ``lambda C t / R^2``."""
    if not isinstance(ps, PhysicalScales):
        raise InvalidScalesError("expected a PhysicalScales instance")
    return ps.mobility * ps.energy_scale / ps.radius**2 * t_physical


# --------------------------------------------------------------------------
# pair quantities


def _log_ratio(d2, q):
    # log(d2 / (d2 + q)) without forming the ratio first
    return np.log(d2) - np.log(d2 + q)


def pair_ratio(a, b) -> float:
    """Ratio ``|a-b|^2 / (|a-b|^2 + (1-|a|^2)(1-|b|^2))`` of two positions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d2 = float(((a - b) ** 2).sum())
    if d2 < MIN_SEPARATION**2:
        raise CoincidentPositionsError((0, 1), math.sqrt(d2))
    q = (1.0 - a @ a) * (1.0 - b @ b)
    return d2 / (d2 + q)


def _check_pair(k: Disclination, h: Disclination):
    d2 = (k.x - h.x) ** 2 + (k.y - h.y) ** 2
    if d2 < MIN_SEPARATION**2:
        raise CoincidentPositionsError((0, 1), math.sqrt(d2))


def force_self(d: Disclination) -> np.ndarray:
    """Radial force exerted by the boundary alone, ``2 s^2 (1-|X|^2) X``."""
    X = d.pos
    return 2.0 * d.angle**2 * (1.0 - X @ X) * X


def force_boundary_pair(k: Disclination, h: Disclination) -> np.ndarray:
    """Boundary action on ``k`` modulated by ``h``; radial with respect to ``k``."""
    _check_pair(k, h)
    phi = pair_ratio(k.pos, h.pos)
    Xk, Xh = k.pos, h.pos
    return 2.0 * k.angle * h.angle * (1.0 - phi) * (1.0 - Xh @ Xh) * Xk


def mutual_factor(phi):
    """Scalar ``1 - phi + log(phi)``; strictly negative on (0, 1)."""
    phi = np.asarray(phi, dtype=float)
    return 1.0 - phi + np.log(phi)


def force_mutual_pair(k: Disclination, h: Disclination) -> np.ndarray:
    """Direct interaction of ``k`` with ``h`` along the segment joining them."""
    _check_pair(k, h)
    Xk, Xh = k.pos, h.pos
    d2 = float(((Xk - Xh) ** 2).sum())
    q = (1.0 - Xk @ Xk) * (1.0 - Xh @ Xh)
    log_phi = float(_log_ratio(d2, q))
    phi = d2 / (d2 + q)
    return 2.0 * k.angle * h.angle * (1.0 - phi + log_phi) * (Xh - Xk)


# --------------------------------------------------------------------------
# array kernels


def _pair_geometry(X):
    """Return (D, d2, q, w) with ``D[k, h] = X[h] - X[k]`` and ``w = 1 - |X|^2``."""
    w = 1.0 - (X**2).sum(-1)
    D = X[None, :, :] - X[:, None, :]
    d2 = (D**2).sum(-1)
    q = w[:, None] * w[None, :]
    return D, d2, q, w


def _guard(d2):
    n = len(d2)
    iu = np.triu_indices(n, 1)
    off = d2[iu]
    j = int(np.argmin(off))
    if off[j] < MIN_SEPARATION**2:
        raise CoincidentPositionsError((iu[0][j], iu[1][j]), math.sqrt(off[j]))


def energy_of(s, X) -> float:
    s = np.asarray(s, dtype=float)
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    w = 1.0 - (X**2).sum(-1)
    H = 0.5 * float((s**2 * w**2).sum())
    n = len(s)
    if n < 2:
        return H
    D, d2, q, w = _pair_geometry(X)
    _guard(d2)
    iu = np.triu_indices(n, 1)
    ss = (s[:, None] * s[None, :])[iu]
    d2u, qu = d2[iu], q[iu]
    H += float((ss * qu).sum())
    H += float((ss * d2u * _log_ratio(d2u, qu)).sum())
    return H


def force_terms_of(s, X):
    """Return the three force contributions ``(self, boundary_pair, mutual)``.

    Each has shape ``(N, 2)``; their sum is ``-grad H``.
    """
    s = np.asarray(s, dtype=float)
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    n = len(s)
    D, d2, q, w = _pair_geometry(X)
    f1 = 2.0 * (s**2 * w)[:, None] * X
    if n < 2:
        z = np.zeros_like(X)
        return f1, z, z.copy()
    _guard(d2)
    eye = np.eye(n, dtype=bool)
    d2s = np.where(eye, 1.0, d2)
    qs = np.where(eye, 1.0, q)
    phi = d2s / (d2s + qs)
    log_phi = _log_ratio(d2s, qs)
    ss = np.where(eye, 0.0, s[:, None] * s[None, :])
    c2 = 2.0 * ss * (1.0 - phi) * w[None, :]
    f2 = c2.sum(1)[:, None] * X
    c3 = 2.0 * ss * (1.0 - phi + log_phi)
    f3 = (c3[:, :, None] * D).sum(1)
    return f1, f2, f3


def forces_of(s, X) -> np.ndarray:
    f1, f2, f3 = force_terms_of(s, X)
    return f1 + f2 + f3


# --------------------------------------------------------------------------
# configuration-level API


def energy(cfg: Configuration) -> float:
    """Nondimensional elastic energy of a configuration."""
    return energy_of(cfg.angles, cfg.positions)


def superposed_energy(s1: float, s2: float, p) -> float:
    """Energy of two disclinations in the limit where they sit at the same point ``p``."""
    p = np.asarray(p, dtype=float)
    return 0.5 * (s1 + s2) ** 2 * (1.0 - p @ p) ** 2


def forces(cfg: Configuration) -> np.ndarray:
    """All forces ``-grad_k H`` as an ``(N, 2)`` array."""
    return forces_of(cfg.angles, cfg.positions)


def total_force(cfg: Configuration, k: int) -> np.ndarray:
    return forces(cfg)[k]


def force_decomposition(cfg: Configuration, k: int):
    """Self, boundary-pair and mutual contributions to the force on ``k``."""
    f1, f2, f3 = force_terms_of(cfg.angles, cfg.positions)
    return f1[k], f2[k], f3[k]


def rotated(cfg: Configuration, theta: float) -> Configuration:
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return cfg.with_positions(cfg.positions @ R.T)


def is_interior(X: Sequence) -> bool:
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    return bool(((X**2).sum(-1) < 1.0).all())
