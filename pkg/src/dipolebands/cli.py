"""Command-line front end: config parsing, dispatch, deterministic output.

Commands: bands | surface | find-cones | classify | sweep-beta | convergence.
Configuration comes from an optional key=value file (positional argument or
--config) plus flag overrides (flags win). Output goes to --out or stdout.
CSV uses 17 significant digits; every output embeds the resolved config.
Exit codes: 0 success, 2 usage/config error, 3 numerical failure.

The only environment variable honored is DIPOLEBANDS_THREADS (worker count
for the per-k fan-out; results are independent of it).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import bloch, dispersion, lattice, latticesums
from .bloch import EigenFailure
from .dispersion import FitDegenerate, NoClosure
from .lattice import BetaOutOfRange, UnknownLabel
from .latticesums import NonConvergent, RayleighAnomaly

_MODES = ("retarded", "quasistatic", "both")
_BLOCKS = ("out_of_plane", "in_plane", "all")
_FORMATS = ("csv", "json")

THREADS_ENV = "DIPOLEBANDS_THREADS"


class ConfigError(ValueError):
    """Bad configuration: unknown key, bad value, missing requirement."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration (strict: unknown keys are rejected)."""

    d0: float = 0.1
    beta: float = 1.0
    beta_start: float | None = None
    beta_stop: float | None = None
    beta_step: float = 0.005
    mode: str = "retarded"
    block: str = "all"
    pair: tuple = (0, 1)
    path: str = "figure"
    n_per_segment: int = 100
    grid: tuple | None = None
    region: tuple | None = None
    k_point: str | None = None
    ewald_splitting: float | None = None
    ewald_tolerance: float = 1e-10
    eps_deg: float = 1e-3
    fit_radius: float | None = None
    refine: bool = True
    format: str = "csv"
    out: str | None = None


def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_pair(v: str) -> tuple:
    parts = [p for p in v.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ValueError(f"pair needs two indices, got {v!r}")
    pair = (int(parts[0]), int(parts[1]))
    if pair[0] >= pair[1] or min(pair) < 0:
        raise ValueError(f"pair must be ascending non-negative, got {v!r}")
    return pair


def _parse_floats(v: str, n: int):
    parts = [p for p in v.replace(" ", "").split(",") if p]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {v!r}")
    return tuple(float(p) for p in parts)


def _parse_grid(v: str) -> tuple:
    parts = [p for p in v.replace(" ", "").split(",") if p]
    if len(parts) != 6:
        raise ValueError("grid is kx_min,kx_max,ky_min,ky_max,nx,ny")
    vals = tuple(float(p) for p in parts[:4]) + (int(parts[4]), int(parts[5]))
    if vals[4] < 1 or vals[5] < 1:
        raise ValueError("grid point counts must be >= 1")
    return vals


def _parse_choice(options):
    def parse(v: str) -> str:
        low = v.strip().lower().replace("-", "_")
        if low not in options:
            raise ValueError(f"must be one of {options}, got {v!r}")
        return low
    return parse


_PARSERS = {
    "d0": float,
    "beta": float,
    "beta_start": float,
    "beta_stop": float,
    "beta_step": float,
    "mode": _parse_choice(_MODES),
    "block": _parse_choice(_BLOCKS),
    "pair": _parse_pair,
    "path": str,
    "n_per_segment": int,
    "grid": _parse_grid,
    "region": lambda v: _parse_floats(v, 4),
    "k_point": str,
    "ewald_splitting": float,
    "ewald_tolerance": float,
    "eps_deg": float,
    "fit_radius": float,
    "refine": _parse_bool,
    "format": _parse_choice(_FORMATS),
    "out": str,
}


def load_config_file(path: str) -> dict:
    """Parse a key=value config file (strict keys, '#' comments)."""
    updates = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        updates[key] = value
    return updates


def resolve_config(file_updates: dict, flag_updates: dict) -> RunConfig:
    """Merge defaults <- file <- flags into a validated RunConfig."""
    cfg = RunConfig()
    for source in (file_updates, flag_updates):
        parsed = {}
        for key, value in source.items():
            if key not in _PARSERS:
                raise ConfigError(f"unknown config key: {key!r}")
            if value is None:
                continue
            try:
                parsed[key] = (
                    value if not isinstance(value, str)
                    else _PARSERS[key](value)
                )
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from exc
        cfg = replace(cfg, **parsed)
    if not (lattice.BETA_MIN <= cfg.beta <= lattice.BETA_MAX):
        raise ConfigError(
            f"beta={cfg.beta} outside [{lattice.BETA_MIN}, {lattice.BETA_MAX}]")
    for name in ("beta_start", "beta_stop"):
        val = getattr(cfg, name)
        if val is not None and not (
                lattice.BETA_MIN <= val <= lattice.BETA_MAX):
            raise ConfigError(
                f"{name}={val} outside "
                f"[{lattice.BETA_MIN}, {lattice.BETA_MAX}]")
    if cfg.d0 <= 0:
        raise ConfigError(f"d0 must be positive, got {cfg.d0}")
    return cfg


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    return {k: d[k] for k in sorted(d)}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _n_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(cfg: RunConfig, header: list, rows: list) -> str:
    lines = [f"# {k} = {v}" for k, v in _config_dict(cfg).items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _json_text(cfg: RunConfig, payload: dict) -> str:
    doc = {"config": _config_dict(cfg)}
    doc.update(payload)
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _resolve_k(cfg: RunConfig, recip) -> np.ndarray:
    if not cfg.k_point:
        raise ConfigError("k_point is required for this command")
    try:
        return recip.point(cfg.k_point)
    except UnknownLabel:
        pass
    try:
        return np.asarray(_parse_floats(cfg.k_point, 2))
    except ValueError as exc:
        raise ConfigError(f"bad k_point {cfg.k_point!r}: {exc}") from exc


def _path_labels(cfg: RunConfig) -> list:
    if cfg.path.strip().lower() == "figure":
        return ["M_bottom", "Kprime", "Gamma", "K", "M_top"]
    labels = [p.strip() for p in cfg.path.split(",") if p.strip()]
    if len(labels) < 2:
        raise ConfigError(f"path needs at least two labels, got {cfg.path!r}")
    return labels


def _block_pairs(cfg: RunConfig) -> list:
    if cfg.block != "all":
        return [(cfg.block, cfg.pair)]
    return [
        (bloch.OUT_OF_PLANE, (0, 1)),
        (bloch.IN_PLANE, (0, 1)),
        (bloch.IN_PLANE, (1, 2)),
        (bloch.IN_PLANE, (2, 3)),
    ]


def cmd_bands(cfg: RunConfig) -> str:
    spec = lattice.build_lattice(cfg.d0, cfg.beta)
    recip = lattice.reciprocal(spec)
    labels = _path_labels(cfg)
    try:
        samples = lattice.sample_path(recip, labels, cfg.n_per_segment)
    except UnknownLabel as exc:
        raise ConfigError(str(exc)) from exc
    modes = ("retarded", "quasistatic") if cfg.mode == "both" else (cfg.mode,)
    results = {
        m: bloch.bands_on_path(spec, samples, m, cfg.ewald_splitting,
                               cfg.ewald_tolerance, n_workers=_n_workers())
        for m in modes
    }
    header = ["arclength", "kx", "ky", "band_index", "block"]
    for m in modes:
        suffix = "" if len(modes) == 1 else f"_{m}"
        header += [f"detuning{suffix}", f"decay{suffix}"]
    header += ["in_light_cone", "anomalous"]
    rows = []
    first = results[modes[0]]
    for i, bs in enumerate(first):
        for band in range(6):
            if cfg.block != "all" and bs.block[band] != cfg.block:
                continue
            row = [bs.arclength, bs.k[0], bs.k[1], band, bs.block[band]]
            for m in modes:
                other = results[m][i]
                row += [other.detuning[band], other.decay[band]]
            row += [bs.in_light_cone,
                    any(results[m][i].anomalous for m in modes)]
            rows.append(row)
    return _csv_text(cfg, header, rows)


def cmd_surface(cfg: RunConfig) -> str:
    if cfg.grid is None:
        raise ConfigError("surface requires grid=kx_min,kx_max,ky_min,ky_max,nx,ny")
    if cfg.mode == "both":
        raise ConfigError("surface supports a single mode per run")
    x0, x1, y0, y1, nx, ny = cfg.grid
    spec = lattice.build_lattice(cfg.d0, cfg.beta)
    grid = bloch.bands_on_grid(
        spec, np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), cfg.mode,
        cfg.ewald_splitting, cfg.ewald_tolerance, n_workers=_n_workers())
    header = ["ix", "iy", "kx", "ky", "band_index", "block", "detuning",
              "decay", "in_light_cone", "anomalous"]
    rows = []
    for i in range(nx):
        for j in range(ny):
            for band in range(6):
                if cfg.block != "all" and grid.block[band] != cfg.block:
                    continue
                rows.append([
                    i, j, grid.kx[i], grid.ky[j], band, grid.block[band],
                    grid.detuning[i, j, band], grid.decay[i, j, band],
                    grid.in_light_cone[i, j], grid.anomalous[i, j],
                ])
    return _csv_text(cfg, header, rows)


def _report_payload(rep) -> dict:
    d = {
        "k_star": rep.k_star,
        "band_pair": list(rep.band_pair),
        "block": rep.block,
        "gap_min": rep.gap_min,
        "kind": rep.kind,
        "tilt": rep.tilt,
        "velocity_matrix": rep.velocity_matrix,
        "tilt_ratio": None if np.isnan(rep.tilt_ratio) else rep.tilt_ratio,
        "exponents": list(rep.exponents) if rep.exponents else None,
        "residuals": rep.residuals,
        "principal_axes": rep.principal_axes,
        "top_curvatures": (list(rep.top_curvatures)
                           if rep.top_curvatures else None),
        "beta": rep.beta,
        "d0": rep.d0,
        "mode": rep.mode,
    }
    return d


def cmd_find_cones(cfg: RunConfig) -> str:
    if cfg.mode == "both":
        raise ConfigError("find-cones supports a single mode per run")
    spec = lattice.build_lattice(cfg.d0, cfg.beta)
    reports = []
    for block, pair in _block_pairs(cfg):
        for rep in dispersion.find_degeneracies(
                spec, block, pair, cfg.region, cfg.mode, cfg.eps_deg,
                splitting=cfg.ewald_splitting,
                tolerance=cfg.ewald_tolerance):
            full = dispersion.classify(
                spec, rep.k_star, block, pair, cfg.mode, cfg.fit_radius,
                eps_deg=cfg.eps_deg, splitting=cfg.ewald_splitting,
                tolerance=cfg.ewald_tolerance)
            reports.append(_report_payload(full))
    return _json_text(cfg, {"reports": reports})


def cmd_classify(cfg: RunConfig) -> str:
    if cfg.mode == "both":
        raise ConfigError("classify supports a single mode per run")
    if cfg.block == "all":
        raise ConfigError("classify requires an explicit block")
    spec = lattice.build_lattice(cfg.d0, cfg.beta)
    recip = lattice.reciprocal(spec)
    k = _resolve_k(cfg, recip)
    if cfg.refine:
        gap = dispersion.make_gap_function(
            spec, cfg.block, cfg.pair, cfg.mode, cfg.ewald_splitting,
            cfg.ewald_tolerance)
        b1n = float(np.linalg.norm(recip.b1))
        k, _g = dispersion._refine_minimum(
            gap, k, 0.01 * b1n, dispersion.REFINE_FRAC * b1n)
    rep = dispersion.classify(
        spec, k, cfg.block, cfg.pair, cfg.mode, cfg.fit_radius,
        eps_deg=cfg.eps_deg, splitting=cfg.ewald_splitting,
        tolerance=cfg.ewald_tolerance)
    return _json_text(cfg, {"report": _report_payload(rep)})


def cmd_sweep_beta(cfg: RunConfig) -> str:
    if cfg.mode == "both":
        raise ConfigError("sweep-beta supports a single mode per run")
    if cfg.block == "all":
        raise ConfigError("sweep-beta requires an explicit block")
    if cfg.beta_start is None or cfg.beta_stop is None:
        raise ConfigError("sweep-beta requires beta_start and beta_stop")
    start_point = None
    if cfg.k_point:
        spec = lattice.build_lattice(cfg.d0, cfg.beta_start)
        start_point = _resolve_k(cfg, lattice.reciprocal(spec))
    traj = dispersion.tilt_transition_scan(
        cfg.d0, cfg.beta_start, cfg.beta_stop, cfg.block, cfg.pair,
        cfg.beta_step, cfg.mode, cfg.region, cfg.eps_deg,
        cfg.ewald_splitting, cfg.ewald_tolerance, start_point=start_point)
    payload = {
        "beta_values": list(traj.beta_values),
        "reports": [_report_payload(r) for r in traj.reports],
        "events": [dict(e) for e in traj.events],
    }
    return _json_text(cfg, payload)


def cmd_convergence(cfg: RunConfig) -> str:
    spec = lattice.build_lattice(cfg.d0, cfg.beta)
    recip = lattice.reciprocal(spec)
    k = _resolve_k(cfg, recip) if cfg.k_point else recip.K
    report = latticesums.sum_diagnostics(spec, k,
                                         tolerance=cfg.ewald_tolerance)
    if cfg.format == "json":
        return _json_text(cfg, {"diagnostics": report})
    rows = []
    for key in sorted(report):
        val = report[key]
        if isinstance(val, (list, tuple)):
            val = " ".join(_fmt(v) for v in val)
        elif isinstance(val, float):
            val = _fmt(val)
        rows.append([key, str(val)])
    return _csv_text(cfg, ["quantity", "value"], rows)


_COMMANDS = {
    "bands": cmd_bands,
    "surface": cmd_surface,
    "find-cones": cmd_find_cones,
    "classify": cmd_classify,
    "sweep-beta": cmd_sweep_beta,
    "convergence": cmd_convergence,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dipolebands",
        description="Band structures and Dirac-point taxonomy of anisotropic "
                    "dipole lattices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config_file", nargs="?", default=None,
                       help="key=value config file")
        p.add_argument("--config", dest="config_flag", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--d0", default=None)
        p.add_argument("--beta", default=None)
        p.add_argument("--mode", default=None)
        p.add_argument("--block", default=None)
        p.add_argument("--pair", default=None)
        p.add_argument("--format", dest="format_", default=None)
        p.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        file_updates = {}
        cfg_path = args.config_flag or args.config_file
        if cfg_path:
            file_updates = load_config_file(cfg_path)
        flag_updates = {
            "out": args.out, "d0": args.d0, "beta": args.beta,
            "mode": args.mode, "block": args.block, "pair": args.pair,
            "format": args.format_,
        }
        flag_updates = {k: v for k, v in flag_updates.items()
                        if v is not None}
        for item in args.sets:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            flag_updates[key] = value
        cfg = resolve_config(file_updates, flag_updates)
        text = _COMMANDS[args.command](cfg)
    except (ConfigError, BetaOutOfRange) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RayleighAnomaly, NonConvergent, EigenFailure, NoClosure,
            FitDegenerate) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _emit(cfg, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
