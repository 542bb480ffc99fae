"""The DLA engine: discrete attachments, the capacity clock, run records.

Randomness is addressed per step: step ``k`` (which creates particle
``k + 1``) draws attachment trials from substream ``(0, k, 0)``, capacity
probes from ``(0, k, 1)`` and its waiting time from ``(0, k, 2)`` of the
run seed. A run is therefore prefix-consistent (the first ``n`` particles of
a longer run equal a run of ``n``) and resumable from any checkpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .aggregate import Aggregate, Particle
from .errors import HypDLAError, InvariantViolation, MalformedRecord, StepFailed
from .geometry import IDENTITY, HalfPlanePoint, HypIsometry, isometry_apply
from .harmonic import CapacityEstimate, estimate_capacity, sample_attachment
from .rng import child, generator
from .walker import ProbeParams

RECORD_VERSION = 1
DEFAULT_ORIGIN = HalfPlanePoint(0.0, 1.0)


@dataclass(frozen=True)
class GrowthConfig:
    n_particles: int = 1000
    seed: int = 0
    mode: str = "discrete"
    probe: ProbeParams = field(default_factory=ProbeParams)
    capacity_probes: int = 2000
    embedding: HypIsometry = IDENTITY

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.mode not in ("discrete", "continuous"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def origin(self) -> HalfPlanePoint:
        return isometry_apply(self.embedding, DEFAULT_ORIGIN)

    def header(self) -> dict:
        p = self.probe
        return {
            "format": "hypdla-run",
            "version": RECORD_VERSION,
            "seed": self.seed,
            "mode": self.mode,
            "n_particles": self.n_particles,
            "eps_offset": p.eps_offset,
            "hit_shell": p.hit_shell,
            "floor_shell": p.floor_shell,
            "far_cutoff": p.far_cutoff,
            "max_steps": p.max_steps,
            "capacity_probes": self.capacity_probes,
            "embedding": {"alpha": self.embedding.alpha, "beta": self.embedding.beta,
                          "reflect": self.embedding.reflect},
        }

    @classmethod
    def from_header(cls, h: dict) -> "GrowthConfig":
        e = h["embedding"]
        return cls(
            n_particles=int(h["n_particles"]),
            seed=int(h["seed"]),
            mode=h["mode"],
            probe=ProbeParams(float(h["eps_offset"]), float(h["hit_shell"]), float(h["floor_shell"]),
                              float(h["far_cutoff"]), int(h["max_steps"])),
            capacity_probes=int(h["capacity_probes"]),
            embedding=HypIsometry(float(e["alpha"]), float(e["beta"]), bool(e["reflect"])),
        )


@dataclass
class StepResult:
    index: int
    dt: float | None
    trials: int
    exhausted: int
    capacity: CapacityEstimate | None


def new_aggregate(cfg: GrowthConfig) -> Aggregate:
    return Aggregate(cfg.origin)


def step(aggregate: Aggregate, cfg: GrowthConfig, threads: int = 1) -> tuple[Aggregate, float | None, StepResult]:
    """Attach one particle (in place) and return ``(aggregate, dt, details)``.

    In continuous mode ``dt`` is exponential with mean ``1 / Cap(A)``, where
    ``Cap`` is the Monte Carlo estimate; in discrete mode ``dt`` is ``None``
    and the birth time is the particle index.
    """
    k = len(aggregate) - 1
    cap = None
    if cfg.mode == "continuous":
        cap = estimate_capacity(aggregate, cfg.capacity_probes, cfg.probe, child(cfg.seed, 0, k, 1), threads=threads)
        dt = float(generator(cfg.seed, 0, k, 2).exponential(1.0 / cap.value))
        t = aggregate.particles[-1].birth_time + dt
    else:
        dt = None
        t = float(k + 1)
    att = sample_attachment(aggregate, cfg.probe, child(cfg.seed, 0, k, 0), threads=threads)
    aggregate.add(att.point, att.owner, t)
    return aggregate, dt, StepResult(k + 1, dt, att.trials, att.exhausted, cap)


# ---------------------------------------------------------------------------
# records


def _num(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"cannot serialise non-finite value {v}")
        return format(v, ".17g")
    raise TypeError(type(v))


def _dump(obj) -> str:
    """Compact JSON with floats at 17 significant digits and stable key order."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_dump(v) for v in obj) + "]"
    return _num(obj)


ROW_KEYS = ("i", "x", "y", "t", "parent", "trials")


@dataclass
class RunRecord:
    header: dict
    rows: list[dict]

    @property
    def config(self) -> GrowthConfig:
        return GrowthConfig.from_header(self.header)

    def dumps(self) -> str:
        return "\n".join([_dump(self.header)] + [_dump(r) for r in self.rows]) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "RunRecord":
        lines = text.splitlines()
        if not lines:
            raise MalformedRecord("empty record", 1)
        header = _parse(lines[0], 1)
        if header.get("format") != "hypdla-run":
            raise MalformedRecord("missing hypdla-run header", 1)
        rows = []
        for n, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            row = _parse(line, n)
            missing = [k for k in ROW_KEYS if k not in row]
            if missing:
                raise MalformedRecord(f"row lacks {missing}", n)
            if row["i"] != len(rows):
                raise MalformedRecord(f"expected row {len(rows)}, got {row['i']}", n)
            rows.append(row)
        if not rows:
            raise MalformedRecord("record has no particle rows", 1)
        return cls(header, rows)

    @classmethod
    def read(cls, path) -> "RunRecord":
        return cls.loads(Path(path).read_text())

    # -- views -------------------------------------------------------------

    @property
    def xy(self) -> np.ndarray:
        return np.array([(r["x"], r["y"]) for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return np.array([r["t"] for r in self.rows], dtype=float)

    @property
    def trials(self) -> np.ndarray:
        return np.array([r["trials"] for r in self.rows[1:]], dtype=np.int64)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([r.get("cap", np.nan) for r in self.rows[1:]], dtype=float)

    def acceptance_stats(self) -> dict:
        tr = self.trials
        if len(tr) == 0:
            return {"steps": 0}
        return {"steps": int(len(tr)), "mean_trials": float(tr.mean()), "max_trials": int(tr.max()),
                "acceptance_rate": float(len(tr) / tr.sum())}

    def to_aggregate(self, n: int | None = None, check: bool = True) -> Aggregate:
        rows = self.rows[: n if n is not None else len(self.rows)]
        particles = [
            Particle(HalfPlanePoint(float(r["x"]), float(r["y"]), float(r.get("xl", 0.0))), int(r["i"]), float(r["t"]),
                     None if r["parent"] < 0 else int(r["parent"]))
            for r in rows
        ]
        agg = Aggregate.from_particles(particles, check=False)
        if check:
            agg.validate()
        return agg

    def truncated(self, n: int) -> "RunRecord":
        h = dict(self.header)
        h["n_particles"] = n
        return RunRecord(h, self.rows[:n])


def _parse(line: str, n: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON ({exc.msg})", n) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("expected an object", n)
    return obj


def _row(p: Particle, trials: int, cap: CapacityEstimate | None) -> dict:
    row = {"i": p.birth_index, "x": p.center.x, "y": p.center.y, "t": p.birth_time,
           "parent": -1 if p.parent is None else p.parent, "trials": trials}
    if p.center.x_lo:
        row["xl"] = p.center.x_lo
    if cap is not None:
        row["cap"] = cap.value
        row["cap_se"] = cap.stderr
    return row


def run(cfg: GrowthConfig, threads: int = 1, progress: Callable[[int], None] | None = None,
        extra_header: dict | None = None) -> RunRecord:
    """Grow ``cfg.n_particles`` particles from the origin and record every step."""
    agg = new_aggregate(cfg)
    header = cfg.header()
    header["p0_estimate"] = estimate_capacity(agg, cfg.capacity_probes, cfg.probe, child(cfg.seed, 1),
                                              threads=threads).value
    if extra_header:
        header["config"] = extra_header
    rows = [_row(agg.particles[0], 0, None)]
    for _ in range(cfg.n_particles - 1):
        try:
            agg, _, res = step(agg, cfg, threads=threads)
        except HypDLAError as exc:
            raise StepFailed(str(exc), len(agg)) from exc
        rows.append(_row(agg.particles[-1], res.trials, res.capacity))
        if progress:
            progress(len(agg))
    return RunRecord(header, rows)


def grow(cfg: GrowthConfig, threads: int = 1) -> Aggregate:
    agg = new_aggregate(cfg)
    while len(agg) < cfg.n_particles:
        step(agg, cfg, threads=threads)
    return agg


# ---------------------------------------------------------------------------
# checkpoints


def checkpoint_dumps(aggregate: Aggregate) -> str:
    o = aggregate.origin
    header = {"format": "hypdla-checkpoint", "version": RECORD_VERSION, "origin": [o.x, o.y],
              "fixture": aggregate.fixture}
    lines = [_dump(header)]
    for p in aggregate.particles:
        row = {"i": p.birth_index, "x": p.center.x, "y": p.center.y, "t": p.birth_time,
               "parent": -1 if p.parent is None else p.parent}
        if p.center.x_lo:
            row["xl"] = p.center.x_lo
        lines.append(_dump(row))
    return "\n".join(lines) + "\n"


def checkpoint_save(aggregate: Aggregate, path) -> None:
    Path(path).write_text(checkpoint_dumps(aggregate))


def checkpoint_loads(text: str) -> Aggregate:
    lines = text.splitlines()
    if not lines:
        raise MalformedRecord("empty checkpoint", 1)
    header = _parse(lines[0], 1)
    if header.get("format") != "hypdla-checkpoint":
        raise MalformedRecord("missing hypdla-checkpoint header", 1)
    particles = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        row = _parse(line, n)
        try:
            i, x, y, t, parent = (row[k] for k in ("i", "x", "y", "t", "parent"))
            p = Particle(HalfPlanePoint(float(x), float(y), float(row.get("xl", 0.0))), int(i), float(t),
                         None if int(parent) < 0 else int(parent))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad particle row ({exc})", n) from None
        if p.birth_index != len(particles):
            raise InvariantViolation(f"row carries index {p.birth_index}", len(particles))
        particles.append(p)
    if not particles:
        raise MalformedRecord("checkpoint has no particles", 1)
    origin = header.get("origin")
    if origin is None or [particles[0].center.x, particles[0].center.y] != [float(v) for v in origin]:
        raise InvariantViolation("first particle differs from the recorded origin", 0)
    agg = Aggregate.from_particles(particles, fixture=bool(header.get("fixture", False)), check=False)
    agg.validate()
    return agg


def checkpoint_load(path) -> Aggregate:
    return checkpoint_loads(Path(path).read_text())
