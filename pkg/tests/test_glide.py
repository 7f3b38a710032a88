import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disclinations import glide
from disclinations.core import Configuration, forces_of
from disclinations.flow import COLLISION_BEGIN, IntegratorSettings
from disclinations.glide import (
    GlideSet,
    InvalidGlideSetError,
    SlidingConditionError,
    integrate_inclusion,
    select_directions,
)

AXES = glide.axes()
HEX = glide.hexagonal()


# -- glide sets --------------------------------------------------------------

@pytest.mark.parametrize("dirs", [
    ((1, 0), (-1, 0)),                            # too few
    ((1, 0), (0, 1), (-1, 0), (0, -1), (0.6, 0.8)),  # odd
    ((1, 0), (0, 1), (-1, 0), (0, -2)),           # not unit
    ((1, 0), (0, 1), (-1, 0), (1, 0)),            # duplicate, not closed
    ((1, 0), (0, 1), (-1, 0), (0.6, 0.8)),        # not closed
    ((1, 0), (-1, 0), (1, 0), (-1, 0)),           # duplicate and no span
])
def test_invalid_glide_sets(dirs):
    with pytest.raises(InvalidGlideSetError):
        GlideSet(dirs)


def test_named_sets():
    assert len(AXES) == 4 and len(HEX) == 6
    assert np.allclose(np.hypot(*HEX.array.T), 1.0)
    assert glide.glide_set("hex") == HEX
    with pytest.raises(InvalidGlideSetError):
        glide.glide_set("square")


# -- direction selection -----------------------------------------------------

def test_select_unique():
    sel = select_directions([0.3, 0.1], AXES)
    assert sel.status == glide.UNIQUE
    assert np.array_equal(sel.directions[0], [1, 0])
    assert np.allclose(sel.projected_forces[0], [0.3, 0.0])


def test_select_tie():
    sel = select_directions([0.5, 0.5], AXES)
    assert sel.status == glide.TIE
    # counter-clockwise order: g- = e_x, g+ = e_y
    assert np.array_equal(sel.directions[0], [1, 0])
    assert np.array_equal(sel.directions[1], [0, 1])
    fs = glide.convexified_force(sel)
    assert fs.is_segment
    assert np.allclose(fs.endpoints[0], [0.5, 0]) and np.allclose(fs.endpoints[1], [0, 0.5])
    assert np.allclose(fs.at(0.5), [0.25, 0.25])
    with pytest.raises(ValueError):
        fs.at(1.5)


def test_select_zero_force():
    sel = select_directions([0.0, 0.0], HEX)
    assert sel.status == glide.ZERO_FORCE
    assert sel.directions == ()
    assert np.array_equal(sel.projected_forces[0], [0, 0])


def test_select_tie_tolerance():
    sel = select_directions([1.0, 1.0 - 1e-12], AXES)
    assert sel.status == glide.TIE
    assert select_directions([1.0, 1.0 - 1e-12], AXES, tie_tol=0.0).status == glide.UNIQUE
    with pytest.raises(ValueError):
        select_directions([1, 0], AXES, tie_tol=-1)


forces = st.tuples(st.floats(-10, 10), st.floats(-10, 10)).filter(lambda f: math.hypot(*f) > 1e-6)


@given(forces, st.sampled_from([AXES, HEX]))
def test_projection_bound_and_maximality(F, gs):
    F = np.array(F)
    sel = select_directions(F, gs)
    best = (gs.array @ F).max()
    for g, p in zip(sel.directions, sel.projected_forces):
        assert F @ g >= best - glide.TIE_TOL * np.hypot(*F)
        assert np.hypot(*p) <= np.hypot(*F) * (1 + 1e-15)
        assert F @ g >= 0


# -- sliding -----------------------------------------------------------------

def test_sliding_coefficient_hand_values():
    N = np.array([1.0, 0.0])
    assert glide.sliding_coefficient([1, 0], [-1, 0], N) == 0.5
    assert glide.sliding_coefficient([3, 0], [-1, 0], N) == 0.75
    with pytest.raises(SlidingConditionError):
        glide.sliding_coefficient([1, 0], [1, 0], N)
    with pytest.raises(SlidingConditionError):
        glide.sliding_coefficient([-1, 0], [-1, 0], N)


vecs = st.tuples(st.floats(-5, 5), st.floats(-5, 5))


@given(vecs, vecs, st.floats(0, 2 * math.pi))
def test_blended_force_is_tangent(fm, fp, th):
    N = np.array([math.cos(th), math.sin(th)])
    a, b = np.dot(fm, N), np.dot(fp, N)
    if not (a > 1e-6 and b < -1e-6):
        return
    alpha, F0 = glide.blended_force(fm, fp, N)
    assert 0 < alpha < 1
    assert abs(F0 @ N) <= 1e-12 * (abs(a) + abs(b))


# -- single disclination -----------------------------------------------------

def test_single_moves_along_x():
    cfg = Configuration.from_arrays([1.0], [(0.3, 0.05)])
    tr = integrate_inclusion(cfg, AXES, IntegratorSettings(t_end=0.5))
    assert np.all(tr.positions[:, 0, 1] == 0.05)
    assert np.all(np.diff(tr.positions[:, 0, 0]) > 0)
    assert not [e for e in tr.events if e.kind.startswith("sliding")]


def test_single_on_diagonal_slides():
    cfg = Configuration.from_arrays([1.0], [(0.3, 0.3)])
    tr = integrate_inclusion(cfg, AXES, IntegratorSettings(t_end=0.5))
    assert tr.events[0].kind == glide.SLIDING_BEGIN and tr.events[0].time == 0.0
    assert np.abs(tr.positions[:, 0, 0] - tr.positions[:, 0, 1]).max() < 1e-12
    assert np.all(np.diff(tr.positions[:, 0, 0]) > 0)


def test_origin_is_stationary_under_glide():
    tr = integrate_inclusion(Configuration.from_arrays([1.0], [(0, 0)]), HEX, IntegratorSettings(t_end=0.3))
    assert tr.termination == "stationary"
    assert np.all(tr.positions == 0)


# -- pairs -------------------------------------------------------------------

def test_cross_slip_scenario():
    cfg = Configuration.from_arrays([1, -1], [(-0.3, 0.15), (0.3, -0.18)])
    tr = integrate_inclusion(cfg, AXES, IntegratorSettings(t_end=0.6))
    kinds = [e.kind for e in tr.events]
    assert kinds == [glide.CROSS_SLIP]
    assert tr.events[0].subjects == (0,)
    # before the cross-slip D1 moves along x, afterwards along y
    i = np.searchsorted(tr.times, tr.events[0].time)
    assert np.all(np.diff(tr.positions[:i, 0, 1]) == 0)
    assert np.all(np.diff(tr.positions[i + 1:, 0, 0]) == 0)


def test_sliding_scenario_residual():
    cfg = Configuration.from_arrays([1, -1], [(-0.3, 0.2), (0.3, 0.0)])
    tr = integrate_inclusion(cfg, AXES, IntegratorSettings(t_end=1.0))
    kinds = [e.kind for e in tr.events]
    assert glide.SLIDING_BEGIN in kinds and COLLISION_BEGIN in kinds
    assert tr.sliding_log
    assert max(abs(e) for _, _, e, _ in tr.sliding_log) < 1e-6
    assert all(0 <= a <= 1 for *_, a in tr.sliding_log)


def test_dissipation_along_inclusion():
    for gs in (AXES, HEX):
        cfg = Configuration.from_arrays([1, -1, 1], [(-0.3, 0.2), (0.3, 0.0), (0.1, -0.4)])
        st_ = IntegratorSettings(t_end=1.0)
        tr = integrate_inclusion(cfg, gs, st_)
        assert np.all(np.diff(tr.energies) <= 10 * st_.abs_tol)
        assert np.all((tr.positions**2).sum(-1) < 1)


def test_rejects_non_glide_set():
    with pytest.raises(InvalidGlideSetError):
        integrate_inclusion(Configuration.from_arrays([1.0], [(0.1, 0)]), [(1, 0), (0, 1)])


def test_switching_normal_points_to_plus_side():
    # for a single disclination on the diagonal, g- = e_x and g+ = e_y; the
    # switching function e = F.(g+ - g-) grows towards the g+ side (y > x)
    s = np.array([1.0])
    G = AXES.array
    y = np.array([0.3, 0.3])
    N = glide._surface_gradient(s, G, 0, 0, 1, y)
    N = N / np.linalg.norm(N)
    assert N[1] > 0 > N[0]
    above = glide._switching(s, G, 0, 0, 1, y + 1e-4 * N)
    assert above > 0
    F = forces_of(s, y.reshape(1, 2))[0]
    assert glide._switching(s, G, 0, 0, 1, y) == pytest.approx(F @ (G[1] - G[0]), abs=1e-15)
