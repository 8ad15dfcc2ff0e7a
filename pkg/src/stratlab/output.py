"""Machine-readable artifacts: CSV series, verdicts, manifests, snapshots.

CSV files carry a fixed "t,value,label" header and 17-significant-digit
floats so that float64 values round-trip exactly (regression tests can
compare bytes). Field snapshots use a small binary container:

    bytes 0..7    magic "STRATFLD"
    uint32 LE     format version (1)
    uint32 LE     Nx
    uint32 LE     Ny
    float64 LE    t, beta, nu, kappa
    float64 LE    Nx*Ny values of omega, row-major (x slow, y fast)
    float64 LE    Nx*Ny values of theta, row-major

Grayscale dumps are binary PGM (P5), max-value normalized: the symmetric
range [-max|f|, max|f|] maps linearly onto 0..255.
"""
from __future__ import annotations

import json
import struct
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .diagnostics import CheckReport, ScalarSeries

SNAPSHOT_MAGIC = b"STRATFLD"
SNAPSHOT_VERSION = 1

__all__ = [
    "format_float", "write_series_csv", "read_series_csv",
    "write_verdicts", "write_manifest",
    "write_snapshot", "read_snapshot", "write_pgm",
]


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_series_csv(path, series_list) -> None:
    """All series in one CSV with columns t, value, label."""
    path = Path(path)
    lines = ["t,value,label"]
    for s in series_list:
        for t, v in zip(s.t, s.value):
            lines.append(f"{format_float(t)},{format_float(v)},{s.label}")
    path.write_text("\n".join(lines) + "\n")


def read_series_csv(path, label: str) -> ScalarSeries:
    """Extract one labeled series from a t,value,label CSV."""
    path = Path(path)
    ts, vs = [], []
    with path.open() as fh:
        header = fh.readline().strip()
        if header != "t,value,label":
            raise ValueError(f"unexpected CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t_s, v_s, lab = line.split(",", 2)
            if lab == label:
                ts.append(float(t_s))
                vs.append(float(v_s))
    if not ts:
        raise ValueError(f"label {label!r} not found in {path}")
    return ScalarSeries(label, np.array(ts), np.array(vs))


def write_verdicts(path, reports) -> bool:
    """Write CheckReports as JSON; returns True when all passed."""
    path = Path(path)
    payload = []
    for r in reports:
        d = asdict(r) if isinstance(r, CheckReport) else dict(r)
        d["bound"] = d.pop("name")
        payload.append(d)
    path.write_text(json.dumps(payload, indent=2, default=_json_num) + "\n")
    return all(p["passed"] for p in payload)


def _json_num(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float):
        return x
    raise TypeError(f"not JSON serializable: {type(x)}")


def write_manifest(path, experiment: str, config: dict, seed: int,
                   wall_time_s: float, outputs) -> None:
    from . import __version__
    from ._kernels import BACKEND_NAME
    payload = {
        "experiment": experiment,
        "version": __version__,
        "backend": BACKEND_NAME,
        "seed": seed,
        "wall_time_s": wall_time_s,
        "config": config,
        "outputs": sorted(str(o) for o in outputs),
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    Path(path).write_text(json.dumps(payload, indent=2, default=_json_num)
                          + "\n")


def write_snapshot(path, omega_phys: np.ndarray, theta_phys: np.ndarray,
                   t: float, beta: float, nu: float, kappa: float) -> None:
    omega_phys = np.ascontiguousarray(omega_phys, dtype="<f8")
    theta_phys = np.ascontiguousarray(theta_phys, dtype="<f8")
    if omega_phys.shape != theta_phys.shape or omega_phys.ndim != 2:
        raise ValueError("omega/theta must share a 2-d shape")
    nx, ny = omega_phys.shape
    with Path(path).open("wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<III", SNAPSHOT_VERSION, nx, ny))
        fh.write(struct.pack("<dddd", t, beta, nu, kappa))
        fh.write(omega_phys.tobytes(order="C"))
        fh.write(theta_phys.tobytes(order="C"))


def read_snapshot(path):
    """Returns (header dict, omega, theta) from a snapshot file."""
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ValueError("not a field snapshot (bad magic)")
    version, nx, ny = struct.unpack_from("<III", raw, 8)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    t, beta, nu, kappa = struct.unpack_from("<dddd", raw, 20)
    off = 52
    count = nx * ny
    omega = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
    theta = np.frombuffer(raw, dtype="<f8", count=count,
                          offset=off + 8 * count)
    header = {"version": version, "nx": nx, "ny": ny, "t": t,
              "beta": beta, "nu": nu, "kappa": kappa}
    return header, omega.reshape(nx, ny).copy(), theta.reshape(nx, ny).copy()


def write_pgm(path, field_phys: np.ndarray) -> None:
    """Binary PGM, Nx x Ny, [-max|f|, max|f|] mapped to 0..255."""
    a = np.asarray(field_phys, dtype=float)
    if a.ndim != 2:
        raise ValueError("field must be 2-d")
    nx, ny = a.shape
    vmax = float(np.abs(a).max())
    if vmax == 0.0:
        pix = np.full((nx, ny), 128, dtype=np.uint8)
    else:
        pix = np.clip(np.rint(127.5 * (1.0 + a / vmax)), 0, 255).astype(np.uint8)
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode())
        # PGM scans rows of the image: transpose so x runs along a scanline
        fh.write(pix.T.tobytes(order="C"))
