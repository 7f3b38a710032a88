"""Built-in benchmarks, scenario documents and trace files.

A scenario is stored as a JSON document::

    {
      "name": "benchmark1",
      "mode": "free",                      # free | glide | dipole | constrained-pair
      "disclinations": [{"angle": 1, "x": -0.3, "y": 0}, ...],
      "glide_set": null,                   # "axes", "hex" or a list of [gx, gy]
      "settings": {"t_end": 1.6, ...},     # any IntegratorSettings field
      "description": "..."
    }

Unknown keys are rejected.  A trace is a comma-separated file whose numeric
rows are ``T, x1, y1, ..., xN, yN, H, |F1|, ..., |FN|``; every other line
starts with ``#`` so ``numpy.loadtxt(path, delimiter=",")`` reads the rows
directly.  A JSON sidecar with the same base name repeats the metadata.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .core import MIN_SEPARATION, Configuration, energy_of, forces_of, superposed_energy
from .flow import IntegratorSettings, Trace, simulate
from .glide import GlideSet, InvalidGlideSetError, glide_set, integrate_inclusion
from .pairlab import simulate_dipole, simulate_effective_pair

MODES = ("free", "glide", "dipole", "constrained-pair")
REGULARIZATION_OFFSET = 1e-8


class ConfigError(ValueError):
    """A scenario document could not be parsed or violates an invariant."""


@dataclass(frozen=True)
class Scenario:
    name: str
    disclinations: Configuration
    mode: str = "free"
    glide_set: object = None  # None, a registered name, or a GlideSet
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)
    description: str = ""

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise ConfigError("name: must be a non-empty string")
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.mode == "glide" and self.glide_set is None:
            raise ConfigError("glide_set: glide mode requires a glide set")
        if self.glide_set is not None:
            try:
                self.glide()
            except InvalidGlideSetError as exc:
                raise ConfigError(f"glide_set: {exc}") from None
        cfg = self.disclinations
        if self.mode in ("dipole", "constrained-pair") and len(cfg) != 2:
            raise ConfigError(f"disclinations: {self.mode} mode needs exactly two disclinations")
        if self.mode == "dipole":
            if cfg[0].angle != -cfg[1].angle:
                raise ConfigError("disclinations: dipole mode needs s1 = -s2")
            if np.abs(cfg[0].pos + cfg[1].pos).max() > 1e-12:
                raise ConfigError("disclinations: dipole mode needs positions symmetric about the origin")
            d = float(np.hypot(*(cfg[0].pos - cfg[1].pos)))
            if not 0.0 < d < 2.0:
                raise ConfigError("disclinations: dipole separation must lie in (0, 2)")
        if self.mode == "constrained-pair" and cfg.min_separation() > 0.0:
            raise ConfigError("disclinations: constrained-pair mode needs a superposed pair")
        if self.mode != "constrained-pair":
            for d in cfg:
                if d.x * d.x + d.y * d.y >= 1.0:
                    raise ConfigError("disclinations: positions must lie in the open unit disk")

    def glide(self) -> GlideSet | None:
        g = self.glide_set
        if g is None or isinstance(g, GlideSet):
            return g
        if isinstance(g, str):
            return glide_set(g)
        return GlideSet(tuple(tuple(map(float, v)) for v in g))


def _triangle(side):
    R = side / math.sqrt(3.0)
    # D2 at the apex, D1 and D3 at the base corners
    angles = np.radians([210.0, 90.0, 330.0])
    return [(R * math.cos(a), R * math.sin(a)) for a in angles]


def _heptagon(radius):
    return [(radius * math.cos(2 * math.pi * k / 7), radius * math.sin(2 * math.pi * k / 7))
            for k in range(7)]


def builtin_scenarios() -> list[Scenario]:
    S = IntegratorSettings
    return [
        Scenario("benchmark1", Configuration.from_arrays([1.0, -2.0], [(-0.3, 0.0), (0.3, 0.0)]),
                 settings=S(t_end=1.6),
                 description="s = (+1, -2) placed symmetrically at distance 0.6"),
        Scenario("benchmark2", Configuration.from_arrays([1.0, -2.0], [(0.3, 0.0), (0.3, 0.0)]),
                 settings=S(t_end=1.0),
                 description="superposed pair s = (+1, -2) at (0.3, 0), free to split"),
        Scenario("benchmark3", Configuration.from_arrays([1.0, -1.0, 1.0],
                                                         [(0.3, 0.0), (0.3, 0.0), (-0.3, 0.0)]),
                 settings=S(t_end=1.0),
                 description="superposed pair (+1, -1) at (0.3, 0) split by +1 at (-0.3, 0)"),
        Scenario("benchmark4", Configuration.from_arrays([1.0, -1.0, 1.0], _triangle(0.48)),
                 settings=S(t_end=8.0),
                 description="triplet (+1, -1, +1) on an equilateral triangle of side 0.48"),
        Scenario("benchmark5", Configuration.from_arrays([(-1.0) ** k for k in range(7)],
                                                         _heptagon(0.5)),
                 settings=S(t_end=4.0),
                 description="alternating charges on a regular heptagon of circumradius 0.5"),
    ]


def get_builtin(name: str) -> Scenario:
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    raise ConfigError(f"unknown scenario {name!r}")


# --------------------------------------------------------------------------
# documents

_TOP_KEYS = {"name", "mode", "disclinations", "glide_set", "settings", "description"}
_DISC_KEYS = {"angle", "x", "y"}
_SETTINGS_KEYS = {f.name for f in fields(IntegratorSettings)}


def serialize_scenario(sc: Scenario) -> dict:
    g = sc.glide_set
    if isinstance(g, GlideSet):
        g = [list(v) for v in g.directions]
    return {
        "name": sc.name,
        "mode": sc.mode,
        "disclinations": [{"angle": d.angle, "x": d.x, "y": d.y} for d in sc.disclinations],
        "glide_set": g,
        "settings": asdict(sc.settings),
        "description": sc.description,
    }


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def scenario_from_dict(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("document: expected an object at the top level")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"document: unknown keys {sorted(unknown)}")
    for key in ("name", "disclinations"):
        if key not in doc:
            raise ConfigError(f"{key}: missing")
    items = doc["disclinations"]
    if not isinstance(items, list) or not items:
        raise ConfigError("disclinations: expected a non-empty list")
    angles, pos = [], []
    for i, d in enumerate(items):
        where = f"disclinations[{i}]"
        if not isinstance(d, dict):
            raise ConfigError(f"{where}: expected an object")
        bad = set(d) - _DISC_KEYS
        if bad:
            raise ConfigError(f"{where}: unknown keys {sorted(bad)}")
        missing = _DISC_KEYS - set(d)
        if missing:
            raise ConfigError(f"{where}: missing {sorted(missing)}")
        s = _number(d["angle"], f"{where}.angle")
        x, y = _number(d["x"], f"{where}.x"), _number(d["y"], f"{where}.y")
        if s == 0.0:
            raise ConfigError(f"{where}.angle: Frank angle must be non-zero")
        if x * x + y * y >= 1.0:
            raise ConfigError(f"{where}: position ({x}, {y}) violates the disk constraint |X| < 1")
        angles.append(s)
        pos.append((x, y))
    raw = doc.get("settings") or {}
    if not isinstance(raw, dict):
        raise ConfigError("settings: expected an object")
    bad = set(raw) - _SETTINGS_KEYS
    if bad:
        raise ConfigError(f"settings: unknown keys {sorted(bad)}")
    try:
        settings = IntegratorSettings(**{k: _number(v, f"settings.{k}") for k, v in raw.items()})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"settings: {exc}") from None
    desc = doc.get("description", "")
    if not isinstance(desc, str):
        raise ConfigError("description: expected a string")
    return Scenario(str(doc["name"]), Configuration.from_arrays(angles, pos),
                    mode=doc.get("mode", "free"), glide_set=doc.get("glide_set"),
                    settings=settings, description=desc)


def parse_config(text: str) -> Scenario:
    """Parse a JSON scenario document; errors carry line/column or field names."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def load_scenario(target: str) -> Scenario:
    """A built-in name or the path of a scenario document."""
    names = [sc.name for sc in builtin_scenarios()]
    if target in names:
        return get_builtin(target)
    p = Path(target)
    if not p.exists():
        raise ConfigError(f"{target!r} is neither a built-in scenario ({', '.join(names)}) nor a file")
    return parse_config(p.read_text())


# --------------------------------------------------------------------------
# running


def regularize(cfg: Configuration, offset: float = REGULARIZATION_OFFSET):
    """Split superposed pairs by ``+-offset`` along the axis to the nearest other feature.

    The feature is the nearest other disclination, or the origin when there
    is none.  The member whose force from everything except its partner
    points more towards the feature is moved towards it.  Returns the new
    configuration and a description (``None`` if nothing was superposed).
    """
    X = cfg.positions.copy()
    s = cfg.angles
    n = len(s)
    notes = []
    for k in range(n):
        for h in range(k + 1, n):
            if np.hypot(*(X[k] - X[h])) >= MIN_SEPARATION:
                continue
            others = [i for i in range(n) if i not in (k, h)]
            if others:
                far = min(others, key=lambda i: np.hypot(*(X[i] - X[k])))
                target = X[far]
                label = f"D{far + 1}"
            else:
                target = np.zeros(2)
                label = "the origin"
            axis = target - X[k]
            norm = np.hypot(*axis)
            axis = axis / norm if norm > 0 else np.array([1.0, 0.0])

            def pull(i, partner):
                keep = [j for j in range(n) if j != partner]
                F = forces_of(s[keep], X[keep])
                return F[keep.index(i)] @ axis

            lead, trail = (k, h) if pull(k, h) >= pull(h, k) else (h, k)
            X[lead] = X[lead] + offset * axis
            X[trail] = X[trail] - offset * axis
            notes.append(f"D{lead + 1} moved by +{offset:g} and D{trail + 1} by -{offset:g} "
                         f"along ({axis[0]:.17g}, {axis[1]:.17g}) towards {label}")
    if not notes:
        return cfg, None
    return cfg.with_positions(X), "; ".join(notes)


@dataclass
class RunResult:
    """Samples and metadata of one scenario run, ready to be written."""

    scenario: Scenario
    times: np.ndarray
    positions: np.ndarray
    energies: np.ndarray
    force_norms: np.ndarray
    events: list
    termination: str
    regularization: str | None = None


def _from_trace(sc, tr: Trace, note):
    return RunResult(sc, tr.times, tr.positions, tr.energies, np.hypot(tr.forces[..., 0], tr.forces[..., 1]),
                     list(tr.events), tr.termination, note)


def execute(sc: Scenario) -> RunResult:
    st = sc.settings
    if sc.mode in ("free", "glide"):
        cfg, note = regularize(sc.disclinations)
        if sc.mode == "free":
            return _from_trace(sc, simulate(cfg, st), note)
        return _from_trace(sc, integrate_inclusion(cfg, sc.glide(), st), note)
    if sc.mode == "dipole":
        cfg = sc.disclinations
        axis = cfg[0].pos / np.hypot(*cfg[0].pos)
        s = abs(cfg[0].angle)
        delta0 = float(np.hypot(*(cfg[0].pos - cfg[1].pos)))
        dt = simulate_dipole(delta0, s, st.t_end, rel_tol=st.rel_tol, abs_tol=st.abs_tol,
                             sample_interval=st.sample_interval, max_step=st.max_step)
        ok = dt.delta >= MIN_SEPARATION
        n = len(dt.times) if ok.all() else int(np.argmin(ok))
        X = 0.5 * dt.delta[:n, None, None] * np.array([axis, -axis])[None]
        H = np.array([energy_of(cfg.angles, x) for x in X])
        F = np.array([forces_of(cfg.angles, x) for x in X])
        why = "t_end" if n == len(dt.times) else "separation-below-guard"
        return RunResult(sc, dt.times[:n], X, H, np.hypot(F[..., 0], F[..., 1]), [], why)
    cfg = sc.disclinations
    s1, s2 = cfg.angles
    pt = simulate_effective_pair(s1, s2, cfg[0].pos, st.t_end, rel_tol=st.rel_tol, abs_tol=st.abs_tol,
                                 sample_interval=st.sample_interval, max_step=st.max_step)
    X = np.stack([pt.xi1, pt.xi2], axis=1)
    H = np.array([superposed_energy(s1, s2, x) for x in pt.xi1])
    v = np.hypot(*(2.0 * ((s1 + s2) / math.sqrt(2)) ** 2 * (1 - (pt.xi1**2).sum(1))[:, None] * pt.xi1).T)
    return RunResult(sc, pt.times, X, H, np.stack([v, v], axis=1), [], pt.termination)


def columns(n: int) -> list[str]:
    cols = ["T"]
    for k in range(1, n + 1):
        cols += [f"x{k}", f"y{k}"]
    cols.append("H")
    cols += [f"|F{k}|" for k in range(1, n + 1)]
    return cols


def _fmt(v) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class TraceFile:
    path: Path
    sidecar: Path
    n_rows: int
    columns: tuple
    termination: str
    events: tuple


def write_trace(result: RunResult, out_path, seed: int = 0) -> TraceFile:
    out = Path(out_path)
    sc = result.scenario
    n = len(sc.disclinations)
    cols = columns(n)
    echo = serialize_scenario(sc)
    lines = [
        "# disclinations trace",
        f"# version: {__version__}",
        f"# seed: {seed}",
        f"# scenario: {json.dumps(echo, sort_keys=True)}",
        f"# regularization: {result.regularization or 'none'}",
        "# integrator: Dormand-Prince 5(4), settings as in the scenario echo",
        f"# termination: {result.termination}",
        "# columns: " + ",".join(cols),
    ]
    for i, t in enumerate(result.times):
        row = [t, *result.positions[i].ravel(), result.energies[i], *result.force_norms[i]]
        lines.append(",".join(_fmt(v) for v in row))
    lines.append("# events: kind,T,subjects (1-based)")
    ev = []
    for e in result.events:
        subj = [i + 1 for i in e.subjects]
        ev.append({"kind": e.kind, "time": e.time, "subjects": subj})
        lines.append(f"# event: {e.kind},{_fmt(e.time)},{' '.join(map(str, subj))}")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    side = out.with_suffix(".json")
    meta = {
        "version": __version__,
        "seed": seed,
        "scenario": echo,
        "regularization": result.regularization,
        "termination": result.termination,
        "columns": cols,
        "rows": len(result.times),
        "events": ev,
    }
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return TraceFile(out, side, len(result.times), tuple(cols), result.termination, tuple(ev))


def run_scenario(sc: Scenario, out_path, seed: int = 0) -> TraceFile:
    """Run ``sc`` and write its trace (and sidecar) to ``out_path``."""
    return write_trace(execute(sc), out_path, seed)


def read_trace(path):
    """Return ``(columns, rows, events)`` of a trace file."""
    cols, events, rows = None, [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# columns: "):
            cols = line[len("# columns: "):].split(",")
        elif line.startswith("# event: "):
            kind, t, subj = line[len("# event: "):].split(",")
            events.append((kind, float(t), tuple(int(v) for v in subj.split())))
        elif line and not line.startswith("#"):
            rows.append([float(v) for v in line.split(",")])
    return cols, np.array(rows), events
