"""Config-driven experiment orchestration.

A run is a TOML config describing one experiment kind and a grid over
(L, v or T, ...).  Every grid point gets a deterministic stream id
hash(config_hash, point_index, "point"); points execute independently
(optionally across worker processes), write one fragment file each, and
the fragments concatenate in point order into the final JSON-lines
output, so completed runs are byte-identical no matter the scheduling.
A manifest tracks per-point status and checksums; rerunning a completed
point is a no-op unless forced.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__, experiments
from .lattice import Boundary, StripeKind
from .rng import RngStream, stable_hash64

KINDS = ("sa", "sa-to-t", "sw", "decay", "open-decay", "capture", "qa")


class ConfigError(ValueError):
    """Config schema violation with the offending key path."""


def _expect(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def load_config(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def _as_list(value):
    return value if isinstance(value, list) else [value]


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    grid: dict            # name -> list of values (cartesian product)
    params: dict          # shared scalars
    out: str
    raw: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: dict, source: str = "<config>") -> "ExperimentConfig":
        _expect("kind" in cfg, f"{source}:kind", "missing")
        kind = cfg["kind"]
        _expect(kind in KINDS, f"{source}:kind", f"unknown kind {kind!r}; expected one of {KINDS}")
        seed = cfg.get("seed", 0)
        _expect(isinstance(seed, int), f"{source}:seed", "expected integer")
        grid = cfg.get("grid", {})
        _expect(isinstance(grid, dict), f"{source}:grid", "expected a [grid] table")
        norm_grid = {}
        for key, val in grid.items():
            vals = _as_list(val)
            _expect(len(vals) > 0, f"{source}:grid.{key}", "empty list")
            for i, v in enumerate(vals):
                _expect(
                    isinstance(v, (int, float, str)),
                    f"{source}:grid.{key}[{i}]",
                    f"unsupported value {v!r}",
                )
            norm_grid[key] = vals
        if "L" in norm_grid:
            for i, v in enumerate(norm_grid["L"]):
                _expect(isinstance(v, int) and v >= 2, f"{source}:grid.L[{i}]", "expected integer L >= 2")
        params = cfg.get("params", {})
        _expect(isinstance(params, dict), f"{source}:params", "expected a [params] table")
        out = cfg.get("out", f"{kind.replace('-', '_')}.jsonl")
        _expect(isinstance(out, str), f"{source}:out", "expected string path")
        return cls(kind=kind, seed=seed, grid=norm_grid, params=params, out=out, raw=cfg)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(load_config(path), source=str(path))

    def config_hash(self) -> str:
        blob = json.dumps(
            {"kind": self.kind, "seed": self.seed, "grid": self.grid, "params": self.params},
            sort_keys=True,
        )
        return hashlib.blake2b(blob.encode(), digest_size=8).hexdigest()

    def points(self) -> list[dict]:
        """Cartesian product of the grid lists, in config key order."""
        keys = list(self.grid)
        combos = itertools.product(*(self.grid[k] for k in keys))
        return [dict(zip(keys, combo)) for combo in combos]

    def stream_for(self, point_index: int) -> RngStream:
        return RngStream(self.seed, stable_hash64(self.config_hash(), point_index, "point"))


# ---------------------------------------------------------------------------
# Point execution
# ---------------------------------------------------------------------------

def _velocity_to_sweeps(point: dict, params: dict, path: str) -> int:
    if "t_sa" in point or "t_sa" in params:
        t_sa = point.get("t_sa", params.get("t_sa"))
        _expect(isinstance(t_sa, int) and t_sa >= 1, f"{path}:t_sa", "expected integer >= 1")
        return t_sa
    v = point.get("v", params.get("v"))
    _expect(v is not None, path, "needs t_sa or v")
    t_sa = int(round(1.0 / float(v)))
    _expect(t_sa >= 1, f"{path}:v", "v must be <= 1 (t_sa = 1/v sweeps)")
    return t_sa


def run_point(config: ExperimentConfig, index: int, out_dir: Path) -> list[dict]:
    """Execute one grid point, returning its records."""
    point = config.points()[index]
    params = dict(config.params)
    rng = config.stream_for(index)
    kind = config.kind
    path = f"point[{index}]"
    merged = {**params, **point}

    if kind in ("sa", "sa-to-t"):
        L = int(merged["L"])
        t_sa = _velocity_to_sweeps(point, params, path)
        t_init = float(merged.get("T_init", 4.0))
        blocks = int(merged.get("blocks", 1))
        if kind == "sa":
            boundary = Boundary(merged.get("boundary", "periodic"))
            return experiments.sa_point(
                L, t_sa, t_init, blocks, rng,
                boundary=boundary,
                probe=str(merged.get("probe", "end")),
                n_equil=int(merged.get("n_equil", 32)),
                winding=bool(merged.get("winding", boundary is Boundary.PERIODIC)),
            )
        return experiments.sa_to_temperature_point(
            L, t_sa, t_init, float(merged["T_stop"]), blocks, rng,
            n_equil=int(merged.get("n_equil", 32)),
        )
    if kind == "sw":
        return experiments.sw_point(
            int(merged["L"]), float(merged["T"]), int(merged.get("samples", 1000)), rng,
            therm=int(merged.get("therm", 64)),
            boundary=Boundary(merged.get("boundary", "periodic")),
            winding=bool(merged.get("winding", True)),
        )
    if kind == "decay":
        cap = merged.get("cap")
        return experiments.decay_point(
            StripeKind(merged.get("kind_stripe", "horizontal10")),
            int(merged["L"]), float(merged["T"]), int(merged.get("reps", 10)), rng,
            fraction=Fraction(str(merged.get("fraction", "1/4"))),
            cap=None if cap is None else int(cap),
        )
    if kind == "open-decay":
        cap = merged.get("cap")
        return experiments.open_decay_point(
            int(merged["L"]), int(merged.get("reps", 10)), rng,
            cap=None if cap is None else int(cap),
        )
    if kind == "capture":
        L = int(merged["L"])
        t_sa = _velocity_to_sweeps(point, params, path)
        return experiments.capture_point(
            L, t_sa, float(merged.get("T_init", 4.0)), float(merged.get("T_star", 1.5)),
            int(merged.get("blocks", 1)), rng, out_dir=out_dir / "snapshots",
        )
    if kind == "qa":
        t_max = merged.get("t_max")
        if t_max is None:
            t_max = 1.0 / float(merged["v"])
        probes = merged.get("probes")
        if isinstance(probes, str):
            probes = None if probes == "default" else [float(x) for x in probes.split(",")]
        return experiments.qa_point(
            int(merged["L"]), float(t_max), rng,
            probes=probes,
            tol=float(merged.get("tol", 1e-12)),
            cache_dir=merged.get("basis_cache"),
            sample_n=int(merged.get("sample_n", 0)),
        )
    raise ConfigError(f"kind {kind!r} not executable")


# ---------------------------------------------------------------------------
# Manifest + grid driver
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    path: Path
    data: dict

    @classmethod
    def open(cls, out_dir: Path, config: ExperimentConfig) -> "RunManifest":
        path = out_dir / f"manifest_{config.config_hash()}.json"
        if path.exists():
            data = json.loads(path.read_text())
        else:
            data = {
                "config_hash": config.config_hash(),
                "kind": config.kind,
                "tool_version": __version__,
                "points": {},
                "events": [],
            }
        return cls(path, data)

    def status(self, index: int) -> str:
        return self.data["points"].get(str(index), {}).get("status", "pending")

    def checksum(self, index: int) -> str | None:
        return self.data["points"].get(str(index), {}).get("checksum")

    def mark(self, index: int, status: str, checksum: str | None = None, wall: float = 0.0) -> None:
        self.data["points"][str(index)] = {
            "status": status,
            "checksum": checksum,
            "wall_seconds": round(wall, 3),
        }
        self.data["events"].append({"point": index, "status": status, "at": time.time()})
        self.save()

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=1))
        tmp.replace(self.path)


def _fragment_path(out_dir: Path, config: ExperimentConfig, index: int) -> Path:
    return out_dir / "points" / config.config_hash() / f"{index:05d}.jsonl"


def _checksum_file(path: Path) -> str:
    h = hashlib.blake2b(digest_size=16)
    h.update(path.read_bytes())
    return h.hexdigest()


def _worker(args):
    cfg_dict, index, out_dir = args
    config = ExperimentConfig.from_dict(cfg_dict)
    records = run_point(config, index, Path(out_dir))
    from .records import write_records

    frag = _fragment_path(Path(out_dir), config, index)
    write_records(records, frag)
    return index, str(frag)


def run(config: ExperimentConfig, out_dir, workers: int = 1, force: bool = False) -> RunManifest:
    """Execute all pending grid points and assemble the final output.

    Safe to interrupt: completed points are skipped on the next call
    (their fragments are checksum-verified), and the concatenated output
    is identical to an uninterrupted run.
    """
    from .records import write_records

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.open(out_dir, config)
    points = config.points()
    pending = []
    for i in range(len(points)):
        frag = _fragment_path(out_dir, config, i)
        if (
            not force
            and manifest.status(i) == "done"
            and frag.exists()
            and manifest.checksum(i) == _checksum_file(frag)
        ):
            continue
        pending.append(i)

    def finish(i: int, frag: Path, wall: float):
        manifest.mark(i, "done", checksum=_checksum_file(frag), wall=wall)

    if workers <= 1:
        for i in pending:
            t0 = time.time()
            try:
                records = run_point(config, i, out_dir)
            except Exception as exc:  # per-point failure is recorded, not fatal
                manifest.mark(i, "failed")
                manifest.data["events"].append({"point": i, "error": repr(exc)})
                manifest.save()
                raise
            frag = _fragment_path(out_dir, config, i)
            write_records(records, frag)
            finish(i, frag, time.time() - t0)
    else:
        jobs = [(config.raw or {"kind": config.kind, "seed": config.seed, "grid": config.grid, "params": config.params, "out": config.out}, i, str(out_dir)) for i in pending]
        t0s = {i: time.time() for i in pending}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, frag in pool.map(_worker, jobs):
                finish(i, Path(frag), time.time() - t0s[i])

    # concatenate fragments in point order
    final = out_dir / config.out
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = final.with_name(final.name + ".tmp")
    with open(tmp, "w") as out:
        for i in range(len(points)):
            frag = _fragment_path(out_dir, config, i)
            if frag.exists():
                out.write(frag.read_text())
    tmp.replace(final)
    manifest.data["output"] = str(final)
    manifest.save()
    return manifest
