"""Deterministic output: CSV writers, field snapshots (raw little-endian
interleaved re/im with a JSON sidecar), and run manifests."""
from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .fields import Field, Grid


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns, rows):
    """Write rows (sequences aligned with `columns`) with deterministic
    float formatting."""
    path = Path(path)
    with path.open("w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return fmt_float(v)


def write_snapshot(path_base, f: Field, hbar: float, t: float):
    """Field snapshot: <base>.bin holds little-endian float64 pairs
    (re, im) in row-major order; <base>.json is the sidecar."""
    path_base = Path(path_base)
    flat = f.values.ravel()
    inter = np.empty(2 * flat.size, dtype="<f8")
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    path_base.with_suffix(".bin").write_bytes(inter.tobytes())
    sidecar = {
        "n": f.grid.points_per_axis,
        "dim": f.grid.dim,
        "L": f.grid.half_width,
        "hbar": hbar,
        "t": t,
    }
    path_base.with_suffix(".json").write_text(
        json.dumps(sidecar, sort_keys=True) + "\n", encoding="ascii"
    )


def read_snapshot(path_base):
    """Inverse of write_snapshot; returns (Field, sidecar dict)."""
    path_base = Path(path_base)
    meta = json.loads(path_base.with_suffix(".json").read_text(encoding="ascii"))
    grid = Grid(dim=meta["dim"], half_width=meta["L"], points_per_axis=meta["n"])
    raw = np.frombuffer(path_base.with_suffix(".bin").read_bytes(), dtype="<f8")
    values = (raw[0::2] + 1j * raw[1::2]).reshape(grid.shape)
    return Field(grid, values), meta


def config_hash(config: dict, seed: int) -> str:
    blob = json.dumps({"config": config, "seed": seed}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_json(path, payload: dict):
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n",
        encoding="ascii",
    )
    return Path(path)


def write_manifest(outdir, command: str, config: dict, seed: int, outputs, extra=None):
    """Run manifest: full config snapshot, content hash, artifact paths, and
    wall-clock metadata (the hash covers config + seed only, so reruns of an
    identical manifest reproduce the CSVs bit-identically)."""
    from . import __version__
    from .kernels import BACKEND

    outdir = Path(outdir)
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "config_sha256": config_hash(config, seed),
        "outputs": [str(Path(p).name) for p in outputs],
        "wallclock_unix": time.time(),
        "package_version": __version__,
        "kernel_backend": BACKEND,
    }
    if extra:
        payload.update(extra)
    return write_json(outdir / "manifest.json", payload)
