"""``hypdla`` command line: grow, stats, render, verify, spiral.

Exit codes: 0 on success, 1 when an invariant or verification check fails,
2 on usage errors (bad flags, unknown config keys, unreadable input).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import suites
from .errors import HypDLAError, MalformedRecord
from .growth import GrowthConfig, RunRecord, checkpoint_dumps, checkpoint_loads, run
from .observables import StatsSeries, _series, density_profile, normalized_centers, spiral_fixture, stats_series
from .render import RenderOptions, render_svg
from .rng import default_threads
from .walker import ProbeParams

# config-file key -> (type, flag dest)
CONFIG_KEYS = {
    "particles": int, "seed": int, "mode": str, "threads": int,
    "eps_offset": float, "hit_shell": float, "floor_shell": float, "far_cutoff": float, "max_steps": int,
    "capacity_probes": int,
    "chart": str, "width": int, "highlight": str, "radius_shown": int,
    "turns": float, "runs": int, "pilot_runs": int, "cache_dir": str, "density_radii": str,
}

SYNOPSIS = """\
usage: hypdla [--config FILE] [--threads N] <command> ...
  grow    --particles N --seed S --mode discrete|continuous --out run.jsonl
  stats   --in run.jsonl --out stats.csv [--density-radii R1,R2,...]
  render  --in run.jsonl --chart disc|halfplane --out image.svg
  verify  --suite NAME [--runs K]
  spiral  --turns T --out fixture.jsonl"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypdla", description="Diffusion-limited aggregation on the hyperbolic plane.")
    p.add_argument("--config", help="key = value file; flags override its values")
    p.add_argument("--threads", type=int, help="parallelism hint (default $HYPDLA_THREADS or 1)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("grow", help="grow one aggregate and write its run record")
    g.add_argument("--particles", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--mode", choices=("discrete", "continuous"))
    g.add_argument("--eps-offset", type=float)
    g.add_argument("--hit-shell", type=float)
    g.add_argument("--floor-shell", type=float)
    g.add_argument("--far-cutoff", type=float)
    g.add_argument("--max-steps", type=int)
    g.add_argument("--capacity-probes", type=int)
    g.add_argument("--out", default="run.jsonl")

    s = sub.add_parser("stats", help="X, Y, tildeY, R per step (and density profile)")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", default="stats.csv")
    s.add_argument("--density-radii", help="comma-separated radii; profile goes to <out>.density.csv")

    r = sub.add_parser("render", help="SVG picture of an aggregate")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--chart", choices=("disc", "halfplane"))
    r.add_argument("--width", type=int)
    r.add_argument("--highlight", choices=("none", "front", "parent_edges"))
    r.add_argument("--radius-shown", type=int, choices=(1, 2))
    r.add_argument("--out", default="aggregate.svg")

    v = sub.add_parser("verify", help="run a verification battery")
    v.add_argument("--suite", required=True, choices=suites.SUITES)
    v.add_argument("--runs", type=int, help="measured runs for ensemble suites")
    v.add_argument("--pilot-runs", type=int)
    v.add_argument("--particles", type=int, help="particles per ensemble run")
    v.add_argument("--seed", type=int)
    v.add_argument("--cache-dir")
    v.add_argument("--json", help="also write the report as JSON")

    sp = sub.add_parser("spiral", help="write the zero-density spiral fixture")
    sp.add_argument("--turns", type=float)
    sp.add_argument("--out", default="spiral.jsonl")
    return p


def effective(args, file_cfg: dict) -> dict:
    """File values overlaid by explicitly given flags."""
    cfg = dict(file_cfg)
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if "threads" not in cfg:
        cfg["threads"] = default_threads()
    if cfg["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    return cfg


def _probe(cfg) -> ProbeParams:
    d = ProbeParams()
    return ProbeParams(cfg.get("eps_offset", d.eps_offset), cfg.get("hit_shell", d.hit_shell),
                       cfg.get("floor_shell", d.floor_shell), cfg.get("far_cutoff", d.far_cutoff),
                       cfg.get("max_steps", d.max_steps))


def _growth_config(cfg) -> GrowthConfig:
    return GrowthConfig(n_particles=cfg.get("particles", 1000), seed=cfg.get("seed", 0),
                        mode=cfg.get("mode", "discrete"), probe=_probe(cfg),
                        capacity_probes=cfg.get("capacity_probes", 2000))


def _load(path):
    """Run record or checkpoint at ``path``; returns ``(record or None, aggregate)``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    first = text.split("\n", 1)[0]
    if '"hypdla-checkpoint"' in first:
        return None, checkpoint_loads(text)
    rec = RunRecord.loads(text)
    return rec, rec.to_aggregate()


def _provenance(cfg, command) -> dict:
    c = {k: v for k, v in cfg.items() if k != "threads"}
    c["command"] = command
    return c


def cmd_grow(cfg, args) -> int:
    gc = _growth_config(cfg)
    rec = run(gc, threads=cfg["threads"], extra_header=_provenance(cfg, "grow"))
    rec.to_aggregate()
    _write(args.out, rec.dumps())
    print(f"grew {len(rec.rows)} particles -> {args.out}")
    return 0


def cmd_stats(cfg, args) -> int:
    rec, agg = _load(args.inp)
    if rec is not None:
        series = stats_series(rec)
    else:
        x, y = normalized_centers(agg)
        X, Y, tY = _series(x, y)
        series = StatsSeries(np.array([p.birth_time for p in agg.particles]), X, Y, tY)
    note = "config " + json.dumps(_provenance(cfg, "stats") | {"input": str(args.inp)}, sort_keys=True)
    _write(args.out, series.to_csv(note))
    radii = cfg.get("density_radii")
    if radii:
        try:
            rs = [float(v) for v in str(radii).split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad --density-radii {radii!r}") from None
        if any(r < 0 for r in rs):
            raise UsageError("density radii must be non-negative")
        out = str(args.out) + ".density.csv"
        _write(out, density_profile(agg, radii=rs).to_csv(note))
        print(f"density profile -> {out}")
    print(f"{len(series.X)} rows -> {args.out}")
    return 0


def cmd_render(cfg, args) -> int:
    _, agg = _load(args.inp)
    try:
        opts = RenderOptions(chart=cfg.get("chart", "disc"), width_px=cfg.get("width", 800),
                             highlight=cfg.get("highlight", "none"), radius_shown=cfg.get("radius_shown", 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    meta = _provenance(cfg, "render") | {"input": str(args.inp), "particles": len(agg)}
    Path(args.out).write_bytes(render_svg(agg, opts, meta))
    print(f"rendered {len(agg)} particles -> {args.out}")
    return 0


def cmd_spiral(cfg, args) -> int:
    turns = cfg.get("turns")
    if turns is None or turns <= 0:
        raise UsageError("spiral needs --turns > 0")
    agg = spiral_fixture(turns)
    _write(args.out, checkpoint_dumps(agg))
    print(f"spiral with {len(agg)} balls -> {args.out}")
    return 0


# suite -> (measured runs, particles per run)
ENSEMBLE_DEFAULTS = {"theorem4": (100, 2000), "density": (30, 2000), "reach": (100, 3000),
                     "lemmas": (100, 2000)}


def cmd_verify(cfg, args) -> int:
    name = args.suite
    seed = cfg.get("seed", 0)
    threads = cfg["threads"]
    if name in ENSEMBLE_DEFAULTS:
        runs, n = ENSEMBLE_DEFAULTS[name]
        runs = cfg.get("runs", runs)
        n = cfg.get("particles", n)
        pilot_n = cfg.get("pilot_runs", 20)
        if runs < 1 or pilot_n < 2 or n < 2:
            raise UsageError("need --runs >= 1, --pilot-runs >= 2 and --particles >= 2")
        try:
            seeds = suites.main_seeds(runs, seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        base = GrowthConfig(probe=_probe(cfg), capacity_probes=cfg.get("capacity_probes", 2000))
        cache = cfg.get("cache_dir")

        def note(i, total):
            print(f"  run {i}/{total}", file=sys.stderr, flush=True)

        pilot = suites.run_ensemble(suites.pilot_seeds(pilot_n, seed), n, base, cache, threads, note)
        recs = suites.run_ensemble(seeds, n, base, cache, threads, note)
        if name == "theorem4":
            rep = suites.theorem4_suite(recs, pilot)
        elif name == "density":
            rep = suites.density_suite(recs, pilot)
        elif name == "reach":
            rep = suites.reach_suite(recs, pilot)
        else:
            rep = suites.lemmas_suite(recs, pilot, seed=seed, n_particles=n)
    else:
        fn = {"geometry": suites.geometry_suite, "boundary": suites.boundary_suite,
              "walker": lambda seed: suites.walker_suite(seed, threads=threads),
              "capacity": lambda seed: suites.capacity_suite(seed, threads=threads),
              "harmonic": lambda seed: suites.harmonic_suite(seed, threads=threads),
              "growth": suites.growth_suite,
              "clock": lambda seed: suites.clock_suite(seed, threads=threads)}[name]
        rep = fn(seed=seed)
    rep.meta["config"] = _provenance(cfg, "verify")
    print(rep.text())
    if args.json:
        _write(args.json, rep.to_json() + "\n")
    for c in rep.failures():
        print(f"FAILED {rep.name}.{c.name}: value={c.value!r}", file=sys.stderr)
    return 0 if rep.passed else 1


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


COMMANDS = {"grow": cmd_grow, "stats": cmd_stats, "render": cmd_render, "verify": cmd_verify, "spiral": cmd_spiral}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing command")
        cfg = effective(args, read_config(args.config) if args.config else {})
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"hypdla: {exc}\n{SYNOPSIS}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parameter validation in the config dataclasses
        print(f"hypdla: {exc}\n{SYNOPSIS}", file=sys.stderr)
        return 2
    except MalformedRecord as exc:
        print(f"hypdla: malformed input: {exc}", file=sys.stderr)
        return 2
    except HypDLAError as exc:
        print(f"hypdla: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
