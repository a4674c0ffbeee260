"""Problem instances: targets, time windows, validation and JSON I/O."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .geometry import ArcPiece, LinePiece, Point2, Trajectory, TOL, dist

SCHEMA_VERSION = 1
SPEED_RTOL = 1e-9


class Kind(str, enum.Enum):
    SIMPLE = "simple"
    COMPLEX = "complex"
    GENERIC = "generic"


class ParseError(ValueError):
    def __init__(self, field: str, line: Optional[int] = None, detail: str = ""):
        self.field = field
        self.line = line
        msg = field if line is None else f"{field} (line {line})"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    rule: str
    target_id: Optional[int] = None
    detail: str = ""

    def __str__(self):
        who = "instance" if self.target_id is None else f"target {self.target_id}"
        return f"{self.rule}({who}){': ' + self.detail if self.detail else ''}"


@dataclass(frozen=True)
class TimeWindow:
    lo: float
    hi: float

    @property
    def duration(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Target:
    id: int
    trajectory: Trajectory
    windows: tuple

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))

    @property
    def speed(self) -> float:
        return self.trajectory.speed

    def position_at(self, t: float) -> Point2:
        return self.trajectory.position_at(t)


@dataclass(frozen=True)
class Instance:
    depot: Point2
    v_max: float
    horizon: float
    targets: tuple
    kind: Kind = Kind.SIMPLE
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depot", Point2(float(self.depot[0]), float(self.depot[1])))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def n(self) -> int:
        return len(self.targets)

    def target(self, target_id: int) -> Target:
        t = self.targets[target_id - 1]
        if t.id != target_id:
            t = next(x for x in self.targets if x.id == target_id)
        return t

    @property
    def is_linear(self) -> bool:
        return all(t.trajectory.is_linear for t in self.targets)


def validate(inst: Instance) -> list:
    """Return every rule violation; an empty list means the instance is valid."""
    out = []
    if not inst.v_max > 0:
        out.append(Violation("NonPositiveSpeedCap", detail=f"v_max={inst.v_max}"))
    if not inst.horizon > 0:
        out.append(Violation("NonPositiveHorizon", detail=f"horizon={inst.horizon}"))
    if not (math.isfinite(inst.depot[0]) and math.isfinite(inst.depot[1])):
        out.append(Violation("NonFiniteDepot"))
    ids = [t.id for t in inst.targets]
    if ids != list(range(1, len(ids) + 1)):
        out.append(Violation("NonContiguousIds", detail=f"ids={ids}"))
    for tgt in inst.targets:
        out.extend(_validate_target(tgt, inst))
    return out


def _validate_target(tgt: Target, inst: Instance) -> list:
    out = []
    traj = tgt.trajectory
    if not tgt.speed < inst.v_max:
        out.append(Violation("SpeedExceedsAgent", tgt.id, f"speed={tgt.speed} v_max={inst.v_max}"))
    prev = None
    for k, piece in enumerate(traj.pieces):
        pts = (piece.start_point, piece.end_point)
        if not all(math.isfinite(c) for p in pts for c in p):
            out.append(Violation("NonFiniteCoordinate", tgt.id, f"piece {k}"))
        implied = piece.speed
        if abs(implied - traj.speed) > SPEED_RTOL * max(1.0, traj.speed):
            out.append(Violation("SpeedMismatch", tgt.id, f"piece {k} implied {implied}"))
        if prev is not None:
            if prev.t_end != piece.t_start:
                out.append(Violation("TimeGap", tgt.id, f"between pieces {k - 1} and {k}"))
            if dist(prev.end_point, piece.start_point) > TOL:
                out.append(Violation("Discontinuous", tgt.id, f"between pieces {k - 1} and {k}"))
        prev = piece
    if not tgt.windows:
        out.append(Violation("NoWindows", tgt.id))
    for k, w in enumerate(tgt.windows):
        if not w.lo < w.hi:
            out.append(Violation("EmptyWindow", tgt.id, f"window {k}"))
        if w.lo < 0 or w.hi > inst.horizon:
            out.append(Violation("WindowOutsideHorizon", tgt.id, f"window {k}"))
        if w.lo < traj.t_start or w.hi > traj.t_end:
            out.append(Violation("WindowOutsideTrajectory", tgt.id, f"window {k}"))
    for k in range(1, len(tgt.windows)):
        a, b = tgt.windows[k - 1], tgt.windows[k]
        if b.lo < a.lo:
            out.append(Violation("UnsortedWindows", tgt.id))
        elif b.lo <= a.hi:
            out.append(Violation("OverlappingWindows", tgt.id, f"windows {k - 1} and {k}"))
    return out


# ---------------------------------------------------------------------------
# JSON


def piece_to_dict(piece) -> dict:
    if isinstance(piece, LinePiece):
        return {"type": "line", "start": list(piece.start), "end": list(piece.end),
                "t_start": piece.t_start, "t_end": piece.t_end}
    return {"type": "arc", "center": list(piece.center), "radius": piece.radius,
            "theta_start": piece.theta_start, "theta_end": piece.theta_end,
            "ccw": piece.ccw, "t_start": piece.t_start, "t_end": piece.t_end}


def to_dict(inst: Instance) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "units": {"length": "units", "time": "s", "speed": "units/s"},
        "kind": inst.kind.value,
        "depot": list(inst.depot),
        "v_max": inst.v_max,
        "horizon": inst.horizon,
        "targets": [
            {"id": t.id, "speed": t.speed,
             "windows": [[w.lo, w.hi] for w in t.windows],
             "pieces": [piece_to_dict(p) for p in t.trajectory.pieces]}
            for t in inst.targets
        ],
    }


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=2) + "\n"


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst), encoding="utf-8")


def _req(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}{key}", detail="missing")
    return d[key]


def _num(d: dict, key: str, where: str) -> float:
    v = _req(d, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}{key}", detail="expected a number")
    return float(v)


def _point(d: dict, key: str, where: str) -> Point2:
    v = _req(d, key, where)
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v)):
        raise ParseError(f"{where}{key}", detail="expected [x, y]")
    return Point2(float(v[0]), float(v[1]))


def piece_from_dict(d: dict, where: str = ""):
    kind = _req(d, "type", where)
    try:
        if kind == "line":
            return LinePiece(_point(d, "start", where), _point(d, "end", where),
                             _num(d, "t_start", where), _num(d, "t_end", where))
        if kind == "arc":
            return ArcPiece(_point(d, "center", where), _num(d, "radius", where),
                            _num(d, "theta_start", where), _num(d, "theta_end", where),
                            bool(_req(d, "ccw", where)),
                            _num(d, "t_start", where), _num(d, "t_end", where))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{where}type", detail=str(exc)) from exc
    raise ParseError(f"{where}type", detail=f"unknown piece type {kind!r}")


def from_dict(doc: dict) -> Instance:
    version = _req(doc, "version", "")
    if version != SCHEMA_VERSION:
        raise ParseError("version", detail=f"unsupported version {version!r}")
    targets = []
    for k, td in enumerate(_req(doc, "targets", "")):
        where = f"targets[{k}]."
        pieces = [piece_from_dict(pd, f"{where}pieces[{m}].")
                  for m, pd in enumerate(_req(td, "pieces", where))]
        windows = []
        for m, w in enumerate(_req(td, "windows", where)):
            if not (isinstance(w, list) and len(w) == 2):
                raise ParseError(f"{where}windows[{m}]", detail="expected [lo, hi]")
            windows.append(TimeWindow(float(w[0]), float(w[1])))
        if not pieces:
            raise ParseError(f"{where}pieces", detail="empty")
        traj = Trajectory(tuple(pieces), _num(td, "speed", where))
        targets.append(Target(int(_req(td, "id", where)), traj, tuple(windows)))
    try:
        kind = Kind(_req(doc, "kind", ""))
    except ValueError as exc:
        raise ParseError("kind", detail=str(exc)) from exc
    return Instance(_point(doc, "depot", ""), _num(doc, "v_max", ""), _num(doc, "horizon", ""),
                    tuple(targets), kind)


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("json", exc.lineno, exc.msg) from exc
    inst = from_dict(doc)
    violations = validate(inst)
    if violations:
        raise ValidationError(violations)
    return inst


def load(path) -> Instance:
    return loads(Path(path).read_text(encoding="utf-8"))


def generate(cfg) -> Instance:
    """Random instance from a :class:`~mtbound.generator.GeneratorConfig`."""
    from .generator import generate as _generate

    return _generate(cfg)
