"""Acceptance criteria, one test each, at the stated tolerances.

Every test reports a pass/fail line through the ``acceptance_report``
fixture; the lines are printed under the "acceptance criteria" heading of the
pytest summary.  Run as a script to print the lines without pytest.
"""
import math
import time

import numpy as np
import pytest

from disclinations import cli, flow, glide, pairlab, scenarios, verify
from disclinations.core import Configuration
from disclinations.flow import IntegratorSettings


def criterion_1():
    t0 = time.perf_counter()
    r = verify.check_gradient(np.random.default_rng(0), n_cases=100)
    dt = time.perf_counter() - t0
    ok = r.max_rel_error < 1e-6 and dt < 5.0
    return ok, f"max rel error {r.max_rel_error:.2e} (< 1e-6), {dt:.2f} s (< 5 s)"


def criterion_2():
    t0 = time.perf_counter()
    cfg = Configuration.from_arrays([1.0], [(0.5, 0.0)])
    tr = flow.simulate(cfg, IntegratorSettings(t_end=2.0, rel_tol=1e-9, abs_tol=1e-9))
    dt = time.perf_counter() - t0
    err = np.abs(tr.positions[:, 0] - flow.analytic_single(1.0, 0.5, 0.0, tr.times)).max()
    drift = np.abs(np.arctan2(tr.positions[:, 0, 1], tr.positions[:, 0, 0])).max()
    ok = err < 1e-6 and drift < 1e-9 and dt < 1.0
    return ok, f"position error {err:.2e} (< 1e-6), angular drift {drift:.1e} (< 1e-9), {dt:.2f} s (< 1 s)"


def criterion_3():
    x = pairlab.find_dipole_equilibrium(1.0)
    res = abs(pairlab.dipole_rhs(pairlab.DipoleState(x, 1.0)))
    ok = 0.75 <= x <= 0.85 and res < 1e-10
    return ok, f"Delta_eq = {x:.12f} in [0.75, 0.85], |G| = {res:.1e} (< 1e-10)"


def _full_dipole_gap(d0, t_end):
    tr = pairlab.simulate_dipole(d0, 1.0, t_end)
    full = flow.simulate(Configuration.from_arrays([1, -1], [(d0 / 2, 0), (-d0 / 2, 0)]),
                         IntegratorSettings(t_end=t_end, rel_tol=1e-11, abs_tol=1e-13))
    # the planar run stops when the attracting pair reaches the separation
    # guard; compare on the samples both runs produced
    n = min(len(tr.times), len(full.times))
    d = full.positions[:n, 0, 0] - full.positions[:n, 1, 0]
    return np.abs(d - tr.delta[:n]).max(), n


def criterion_4():
    lo = pairlab.simulate_dipole(0.4, 1.0, 1.0)
    hi = pairlab.simulate_dipole(1.2, 1.0, 2.0)
    down = bool(np.all(np.diff(lo.log_delta) < 0)) and lo.delta.min() < 0.05
    up = bool(np.all(np.diff(hi.delta) > 0)) and hi.delta.max() > 1.95
    t_lo = lo.times[np.argmax(lo.delta < 0.05)]
    t_hi = hi.times[np.argmax(hi.delta > 1.95)]
    g_lo, n_lo = _full_dipole_gap(0.4, 1.0)
    g_hi, n_hi = _full_dipole_gap(1.2, 2.0)
    ok = down and up and g_lo < 1e-6 and g_hi < 1e-6
    return ok, (f"0.4 decreasing, < 0.05 at T={t_lo:.2f}; 1.2 increasing, > 1.95 at T={t_hi:.2f}; "
                f"4D gap {g_lo:.1e} ({n_lo} samples), {g_hi:.1e} ({n_hi} samples) (< 1e-6)")


def criterion_5():
    tr = pairlab.simulate_dipole(1.95, 1.0, 1.0, sample_interval=0.001)
    approx = pairlab.dipole_asymptotic(1.95, 1.0, tr.times, pairlab.NEAR_TWO)
    rel = np.abs((2 - approx) - (2 - tr.delta)) / (2 - tr.delta)
    return rel.max() < 0.01, f"max relative error of (2 - Delta) {rel.max():.2%} (< 1%)"


def criterion_6():
    gaps = []
    for eps in (1e-2, 1e-3, 1e-4):
        tr = pairlab.simulate_constrained_eps(1, 2, (0.3, 0.0), eps, 1.0)
        ref = flow.analytic_single(3 / math.sqrt(2), 0.3, 0.0, tr.times)
        gaps.append(np.abs(tr.xi1 - ref).max())
    mono = gaps[0] > gaps[1] > gaps[2]
    lam = 0.0
    rng = np.random.default_rng(0)
    for s1, s2 in ((1, 1), (1, -1), (2, -2), (1.5, 1.5)):
        for _ in range(50):
            p = verify.random_configuration(rng, 1).positions[0]
            lam = max(lam, np.abs(pairlab.effective_pair_rhs(pairlab.EffectivePair(s1, s2, tuple(p)))[1]).max())
        tr = pairlab.simulate_effective_pair(s1, s2, (0.3, 0.1), 1.0)
        lam = max(lam, np.abs(tr.multiplier).max())
    ok = mono and lam == 0.0
    return ok, "gaps " + ", ".join(f"{g:.1e}" for g in gaps) + f" decreasing; |s1|=|s2| multiplier max {lam:.1e}"


def criterion_7():
    worst = 0.0
    for s in (1.0, 2.0):
        tr = pairlab.simulate_effective_pair(s, -s, (0.3, -0.2), 1.0)
        worst = max(worst, np.abs(tr.xi1 - tr.xi1[0]).max(), np.abs(tr.xi2 - tr.xi2[0]).max())
    return worst < 1e-10, f"max displacement {worst:.1e} (< 1e-10)"


def criterion_8():
    r = scenarios.execute(scenarios.get_builtin("benchmark3"))
    X = r.positions
    d = np.hypot(*(X[:, 0] - X[:, 1]).T)
    rho3 = np.hypot(*X[:, 2].T)
    sign = np.sign(np.diff(d))
    changes = int(np.count_nonzero(sign[1:] != sign[:-1]))
    i = int(np.argmax(d))
    shape = sign[0] > 0 and 0 < i < len(d) - 1
    rising = np.all(np.diff(rho3[i:]) > 0)
    ok = bool(shape and rising and changes == 1)
    return ok, (f"|X1-X2| rises to {d[i]:.4f} at T={r.times[i]:.2f} then falls; "
                f"|X3| {rho3[i]:.3f} -> {rho3[-1]:.3f}; {changes} sign change(s)")


def criterion_9():
    r = scenarios.execute(scenarios.get_builtin("benchmark4"))
    T, X = r.times, r.positions
    a, b = X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]
    area = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    near = (T >= 4.0) & (T <= 6.0)
    late = (T >= 6.0) & (T <= 8.0)
    rmin = np.hypot(X[..., 0], X[..., 1]).min(1)
    aligned = area[near].min() < 1e-2
    outward = bool(np.all(np.diff(rmin[late]) > 0))
    j = int(np.argmin(area))
    return aligned and outward, (f"min area on [4, 6] {area[near].min():.3e} (< 1e-2), area at T=5 "
                                 f"{area[np.argmin(np.abs(T - 5))]:.3e}, global min {area[j]:.3e} at "
                                 f"T={T[j]:.2f}; outward on [6, 8]: {outward}")


def criterion_10():
    worst_rise = worst_rel = 0.0
    ok = True
    for sc in scenarios.builtin_scenarios():
        tol = sc.settings.abs_tol
        r = scenarios.execute(sc)
        rise = float(np.diff(r.energies).max())
        worst_rise = max(worst_rise, rise)
        ok &= rise <= 10 * tol
        # the rate check needs a finer sampling than the default 0.01: the
        # fourth-order stencil error at 0.01 exceeds the 1e-3 target
        dt = 1e-3
        fine = scenarios.execute(scenarios.Scenario(sc.name, sc.disclinations, sc.mode, sc.glide_set,
                                                    sc.settings.replace(sample_interval=dt)))
        H, T = fine.energies, fine.times
        dH = (H[:-4] - 8 * H[1:-3] + 8 * H[3:-1] - H[4:]) / (12 * dt)
        rate = -(fine.force_norms[2:-2] ** 2).sum(1)
        Tc = T[2:-2]
        marks = np.array([0.0] + [e.time for e in fine.events])
        away = np.abs(Tc[:, None] - marks[None]).min(1) > 2.5 * dt
        rel = np.abs(dH[away] - rate[away]) / np.abs(rate[away])
        worst_rel = max(worst_rel, rel.max())
        ok &= rel.max() < 1e-3
    return bool(ok), f"max energy rise {worst_rise:.1e} (<= 10 abs_tol), max dH/dT relative error {worst_rel:.1e} (< 1e-3)"


def criterion_11():
    N = np.array([1.0, 0.0])
    hand = (glide.sliding_coefficient([1, 0], [-1, 0], N) == 0.5
            and glide.sliding_coefficient([3, 0], [-1, 0], N) == 0.75)
    fine = glide.integrate_inclusion(Configuration.from_arrays([1, -1], [(-0.3, 0.2), (0.3, 0.0)]),
                                     glide.axes(), IntegratorSettings(t_end=1.0))
    residual = max(abs(e) for _, _, e, _ in fine.sliding_log)
    slid = any(e.kind == glide.SLIDING_BEGIN for e in fine.events)
    cross = glide.integrate_inclusion(Configuration.from_arrays([1, -1], [(-0.3, 0.15), (0.3, -0.18)]),
                                      glide.axes(), IntegratorSettings(t_end=0.6))
    switches = [e for e in cross.events if e.kind in (glide.CROSS_SLIP, glide.SLIDING_BEGIN, glide.SLIDING_END)]
    ok = hand and slid and residual < 1e-6 and len(switches) == 1
    return ok, (f"alpha hand cases {'exact' if hand else 'wrong'}; sliding residual {residual:.1e} "
                f"over {len(fine.sliding_log)} samples (< 1e-6); cross-slip scenario {len(switches)} switch event(s)")


def criterion_12(tmp):
    a, b = tmp / "a.csv", tmp / "b.csv"
    same = True
    for name in ("benchmark1", "benchmark3"):
        cli.main(["run", name, "--out", str(a), "--seed", "3"])
        cli.main(["run", name, "--out", str(b), "--seed", "3"])
        same &= a.read_bytes() == b.read_bytes()
        same &= a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()
    code = cli.main(["selfcheck", "--seed", "0"])
    return same and code == 0, f"byte-identical traces: {same}; selfcheck --seed 0 exit code {code}"


TITLES = {
    1: "gradient consistency",
    2: "exact single-disclination solution",
    3: "dipole equilibrium",
    4: "basin dichotomy",
    5: "near-two asymptotic law",
    6: "constrained-pair limit",
    7: "annihilation stationarity",
    8: "benchmark3 splitting",
    9: "benchmark4 alignment",
    10: "energy decay",
    11: "glide mechanics",
    12: "determinism",
}


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, acceptance_report):
    ok, detail = globals()[f"criterion_{number}"]()
    assert acceptance_report(number, TITLES[number], ok, detail), detail


def test_criterion_12(tmp_path, acceptance_report, capsys):
    ok, detail = criterion_12(tmp_path)
    assert acceptance_report(12, TITLES[12], ok, detail), detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for n in range(1, 13):
        if n == 12:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = criterion_12(Path(d))
        else:
            ok, detail = globals()[f"criterion_{n}"]()
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {TITLES[n]} -- {detail}")
