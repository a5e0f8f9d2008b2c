"""File formats: ELC1 snapshots, JSON run configs, CSV time series and JSON reports."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .coefficients import LeslieCoefficients
from .spectral import TorusGrid

MAGIC = "ELC1"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class Snapshot:
    grid: TorusGrid
    t: float
    fields: dict[str, np.ndarray]


def write_snapshot(path: str | Path, grid: TorusGrid, t: float, fields: dict[str, np.ndarray]) -> None:
    """One JSON header line, then each field as little-endian float64.

    Arrays are stored row-major over the grid with the component index
    fastest, i.e. as shape ``(n,) * dim + (components,)``.
    """
    header = {"magic": MAGIC, "dim": grid.dim, "n": grid.n, "length": grid.length, "t": t,
              "fields": [[name, int(np.prod(a.shape[:a.ndim - grid.dim], dtype=int))] for name, a in fields.items()]}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("ascii"))
        for name, a in fields.items():
            grid.check(a)
            comps = a.shape[:a.ndim - grid.dim]
            flat = a.reshape((-1,) + grid.shape) if comps else a[None]
            inter = np.moveaxis(flat, 0, -1)
            fh.write(np.ascontiguousarray(inter, dtype="<f8").tobytes())


def read_snapshot(path: str | Path) -> Snapshot:
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: not an ELC1 snapshot ({exc})") from None
        if header.get("magic") != MAGIC:
            raise ConfigError(f"{path}: bad magic {header.get('magic')!r}, expected {MAGIC!r}")
        grid = TorusGrid(int(header["dim"]), int(header["n"]), float(header.get("length", 1.0)))
        fields = {}
        npts = grid.n ** grid.dim
        for name, comps in header["fields"]:
            count = npts * comps
            raw = np.frombuffer(fh.read(8 * count), dtype="<f8")
            if raw.size != count:
                raise ConfigError(f"{path}: truncated data for field {name!r}")
            arr = np.moveaxis(raw.reshape(grid.shape + (comps,)), -1, 0).astype(float)
            fields[name] = arr if comps > 1 else arr[0]
        return Snapshot(grid, float(header["t"]), fields)


# ---------------------------------------------------------------------------
# run configuration

def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return cfg[key]


def parse_coefficients(raw: dict, where: str = "config") -> LeslieCoefficients:
    mu = _require(raw, "mu", where)
    if not isinstance(mu, list) or len(mu) != 6:
        raise ConfigError(f"{where}: 'mu' must be a list of six numbers (mu1..mu6)")
    return LeslieCoefficients(*(float(x) for x in mu), eps_penalty=float(raw.get("eps_penalty", 1.0)))


def parse_init(raw: dict, grid: TorusGrid, mu: LeslieCoefficients, where: str = "config"):
    from .linstab import LeslieUnstableParams, in_plane_geometry, solve_theta0_unstable, unstable_mode
    from .solver import ConstantDirectorPerturbed, FromFile, RandomSmooth, TaylorGreen

    kind = raw.get("kind", "RandomSmooth")
    director = raw.get("director")
    director = tuple(float(x) for x in director) if director is not None else None
    if kind == "TaylorGreen":
        return TaylorGreen(float(raw.get("amplitude", 1.0)), int(raw.get("wavenumber", 1)), director)
    if kind == "RandomSmooth":
        amps = raw.get("amplitudes", [0.5, 0.2])
        return RandomSmooth(int(raw.get("seed", 0)), int(raw.get("band", 2)),
                            (float(amps[0]), float(amps[1])), director)
    if kind == "ConstantDirectorPerturbed":
        params = LeslieUnstableParams(mu, float(_require(raw, "epsilon_leslie", where + ".init")))
        theta0 = solve_theta0_unstable(params)
        nu, n = in_plane_geometry(theta0, float(raw.get("phi", 0.0)), grid.dim)
        mode = unstable_mode(params, float(raw.get("m", 2.0)), nu, n)
        return ConstantDirectorPerturbed(mode, float(raw.get("amplitude", 1e-4)))
    if kind == "FromFile":
        return FromFile(str(_require(raw, "path", where + ".init")))
    raise ConfigError(f"{where}: unknown init kind {kind!r}")


def config_from_dict(raw: dict, where: str = "config", seed: int | None = None):
    """Build a RunConfig; ``seed`` overrides the RandomSmooth seed."""
    from .solver import RunConfig

    g = raw.get("grid", {})
    try:
        grid = TorusGrid(int(g.get("dim", 2)), int(g.get("n", 64)), float(g.get("length", 1.0)))
        mu = parse_coefficients(raw, where)
        init_raw = dict(raw.get("init", {}))
        if seed is not None:
            init_raw["seed"] = seed
        return RunConfig(
            grid=grid, mu=mu,
            dt=float(_require(raw, "dt", where)), t_end=float(_require(raw, "t_end", where)),
            init=parse_init(init_raw, grid, mu, where),
            output_every=int(raw.get("output_every", 1)),
            snapshot_every=int(raw.get("snapshot_every", 0)),
            dealias=bool(raw.get("dealias", True)),
            stab_velocity=float(raw.get("stab_velocity", 0.0)),
            stab_director=float(raw.get("stab_director", 0.0)),
            hyperviscosity=float(raw.get("hyperviscosity", 0.0)),
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"{where}: malformed value ({exc})") from None


def load_config_json(path: str | Path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def config_to_dict(cfg) -> dict:
    from .solver import ConstantDirectorPerturbed, FromFile, RandomSmooth, TaylorGreen

    init = cfg.init
    if isinstance(init, TaylorGreen):
        ij = {"kind": "TaylorGreen", "amplitude": init.amplitude, "wavenumber": init.wavenumber}
    elif isinstance(init, RandomSmooth):
        ij = {"kind": "RandomSmooth", "seed": init.seed, "band": init.band, "amplitudes": list(init.amplitudes)}
    elif isinstance(init, ConstantDirectorPerturbed):
        ij = {"kind": "ConstantDirectorPerturbed", "mode": init.mode.to_json(), "amplitude": init.amplitude}
    elif isinstance(init, FromFile):
        ij = {"kind": "FromFile", "path": init.path}
    else:
        ij = {"kind": type(init).__name__}
    if getattr(init, "director", None) is not None:
        ij["director"] = list(init.director)
    return {
        "grid": {"dim": cfg.grid.dim, "n": cfg.grid.n, "length": cfg.grid.length},
        **cfg.mu.to_json(), "dt": cfg.dt, "t_end": cfg.t_end, "init": ij,
        "output_every": cfg.output_every, "snapshot_every": cfg.snapshot_every, "dealias": cfg.dealias,
        "stab_velocity": cfg.stab_velocity, "stab_director": cfg.stab_director,
        "hyperviscosity": cfg.hyperviscosity,
    }


# ---------------------------------------------------------------------------
# outputs

def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_csv(path: str | Path, columns: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def _jsonable(x: Any):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def write_json(path: str | Path, obj: Any) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")

