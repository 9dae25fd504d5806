"""Config ingestion and the plain-text output formats.

All writers are deterministic: fixed float formatting, no timestamps.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .conformal import GEOM_TOL, Ball
from .necklace import Necklace, ThreadSample, address_str, auto_beads, unit_circle_thread
from .polyline import Polyline

FLOAT_FMT = "{:.17g}"


class ConfigError(ValueError):
    """Config file is unreadable or malformed."""


@dataclass
class NecklaceConfig:
    ambient_dim: int
    k: int
    thread: object = "unit_circle"     # list of points or "unit_circle"
    beads: object = "auto"             # list of {center, radius} or "auto"
    tolerance: float = GEOM_TOL
    depth: int = 2
    thread_points: int = 360
    model_radius: float = 0.5          # bead radius of the trivial model (fiber/cover commands)
    reach: float | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "NecklaceConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        for key in ("ambient_dim", "k"):
            if key not in raw:
                raise ConfigError(f"missing required field {key!r}")
        try:
            cfg = cls(**raw)
            cfg.ambient_dim = int(cfg.ambient_dim)
            cfg.k = int(cfg.k)
            cfg.depth = int(cfg.depth)
            cfg.tolerance = float(cfg.tolerance)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.ambient_dim < 3:
            raise ConfigError("ambient_dim must be >= 3")
        if cfg.k < 3:
            raise ConfigError("k must be >= 3")
        if not (isinstance(cfg.thread, list) or cfg.thread in ("unit_circle", None)):
            raise ConfigError("thread must be a point list, \"unit_circle\" or null")
        if not (isinstance(cfg.beads, list) or cfg.beads == "auto"):
            raise ConfigError("beads must be a list of {center, radius} or \"auto\"")
        if isinstance(cfg.beads, list) and len(cfg.beads) != cfg.k:
            raise ConfigError(f"config lists {len(cfg.beads)} beads but k = {cfg.k}")
        return cfg

    def thread_sample(self) -> ThreadSample | None:
        if self.thread is None:
            return None
        if self.thread == "unit_circle":
            return unit_circle_thread(self.thread_points, self.ambient_dim) if self.ambient_dim == 3 else None
        pts = np.asarray(self.thread, float)
        if pts.ndim != 2 or pts.shape[1] != self.ambient_dim:
            raise ConfigError(f"thread points must be rows of length {self.ambient_dim}")
        return ThreadSample.from_points(pts)

    def necklace(self) -> Necklace:
        thread = self.thread_sample()
        if self.beads == "auto":
            if thread is None:
                raise ConfigError("beads \"auto\" needs a thread")
            return auto_beads(thread, self.k, reach=self.reach, tol=self.tolerance)
        try:
            balls = [Ball(b["center"], b["radius"]) for b in self.beads]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad bead entry: {exc}") from exc
        if any(b.dim != self.ambient_dim for b in balls):
            raise ConfigError("bead center dimension differs from ambient_dim")
        return Necklace.from_balls(thread, balls, self.tolerance)


def load_config(path) -> NecklaceConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return NecklaceConfig.from_dict(raw)


def _fmt(x) -> str:
    return FLOAT_FMT.format(float(x))


def write_point_cloud(path, points, radii=None, addresses=None, header: str = "") -> int:
    """One point per line; optional radius and dotted address columns."""
    P = np.atleast_2d(np.asarray(points, float))
    cols = [f"x{i + 1}" for i in range(P.shape[1])]
    if radii is not None:
        cols.append("radius")
    if addresses is not None:
        cols.append("address")
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write("# " + " ".join(cols) + "\n")
        for i, row in enumerate(P):
            parts = [_fmt(v) for v in row]
            if radii is not None:
                parts.append(_fmt(radii[i]))
            if addresses is not None:
                parts.append(address_str(addresses[i]))
            fh.write(" ".join(parts) + "\n")
    return P.shape[0]


def read_point_cloud(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        vals = []
        for p in parts:
            try:
                vals.append(float(p))
            except ValueError:
                break
        rows.append(vals)
    return np.array(rows, float)


def write_polyline(path, poly: Polyline, header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write(f"closed {1 if poly.closed else 0}\n")
        for row in poly.vertices:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_polyline(path) -> Polyline:
    """Vertex list with an optional ``closed 0|1`` line (default open)."""
    closed = False
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("closed"):
            closed = line.split()[1] == "1"
            continue
        rows.append([float(v) for v in line.split()])
    return Polyline(np.array(rows, float), closed=closed)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
            n += 1
    return n
