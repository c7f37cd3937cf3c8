"""Deterministic CSV/JSON readers and writers for the toolkit's data types.

All writers produce byte-identical output for identical inputs: floats are
rendered with shortest round-trip ``repr``, JSON keys are sorted, and files
are written atomically (temp file + rename).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .curves import DecayCurve
from .scan import DepthProfile, ScanGrid, Spectrum
from .spincore import OdmrSpectrum


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_json(path: Path, payload) -> None:
    atomic_write_text(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: Path):
    return json.loads(Path(path).read_text())


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    data = np.array(
        [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float
    )
    return header, data


def write_decay_csv(curve: DecayCurve, path: Path, sidecar: bool = True) -> None:
    """Write (time_s, signal) columns plus a JSON metadata sidecar."""
    path = Path(path)
    _write_csv(path, ["time_s", "signal"], [curve.times_s, curve.signal])
    if sidecar:
        write_json(path.with_suffix(".json"), curve.meta)


def read_decay_csv(path: Path) -> DecayCurve:
    path = Path(path)
    header, data = _read_csv(path)
    if header[:2] != ["time_s", "signal"]:
        raise ValueError(f"expected columns time_s, signal; got {header}")
    meta = {}
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = read_json(sidecar)
    return DecayCurve(times_s=data[:, 0], signal=data[:, 1], meta=meta)


def write_odmr_csv(spectrum: OdmrSpectrum, path: Path) -> None:
    _write_csv(
        Path(path),
        ["frequency_hz", "signal"],
        [spectrum.frequencies_hz, spectrum.signal],
    )


def odmr_line_table(spectrum: OdmrSpectrum) -> dict:
    return {
        "line_centers": [
            {"axis_index": i, "branch": b, "frequency_hz": f}
            for i, b, f in spectrum.line_centers
        ],
        "resolved_lines": [
            {"center_hz": c, "depth": d} for c, d in spectrum.resolved_lines
        ],
    }


def write_spectrum_csv(spec: Spectrum, path: Path) -> None:
    column = "wavelength_nm" if spec.unit == "nm" else "wavenumber_cm1"
    _write_csv(Path(path), [column, "counts"], [spec.values, spec.counts])


def read_spectrum_csv(path: Path) -> Spectrum:
    header, data = _read_csv(path)
    if header[0] == "wavelength_nm":
        unit = "nm"
    elif header[0] == "wavenumber_cm1":
        unit = "cm-1"
    else:
        raise ValueError(
            "first column must be wavelength_nm or wavenumber_cm1, "
            f"got {header[0]!r}"
        )
    return Spectrum(values=data[:, 0], counts=data[:, 1], unit=unit)


def write_depth_profile_csv(profile: DepthProfile, path: Path) -> None:
    _write_csv(Path(path), ["z_um", "counts"], [profile.z_um, profile.counts])


def read_depth_profile_csv(path: Path) -> DepthProfile:
    header, data = _read_csv(path)
    if header[:2] != ["z_um", "counts"]:
        raise ValueError(f"expected columns z_um, counts; got {header}")
    return DepthProfile(z_um=data[:, 0], counts=data[:, 1])


def write_t2_table_csv(rows, path: Path) -> None:
    """Flat (n, T2, p, stderr) table for plotting, one row per pulse count."""
    lines = ["n,t2_s,p,stderr_t2_s,stderr_p,converged,error"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row.n),
                    _fmt(row.t2_s),
                    _fmt(row.p),
                    _fmt(row.stderr_t2_s),
                    _fmt(row.stderr_p),
                    str(row.converged).lower(),
                    row.error or "",
                ]
            )
        )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def write_scan_grid_csv(grid: ScanGrid, path: Path) -> None:
    """Long-format writer: one (x_um, y_um, counts) row per pixel."""
    xg, yg = np.meshgrid(grid.x_um, grid.y_um)
    _write_csv(
        Path(path),
        ["x_um", "y_um", "counts"],
        [xg.ravel(), yg.ravel(), grid.counts.ravel()],
    )


def read_scan_grid_csv(path: Path) -> ScanGrid:
    """Read a grid in long format or dense-matrix format.

    Dense format: header ``y_um\\x_um, <x0>, <x1>, ...`` and one row per y
    value; long format: header ``x_um, y_um, counts``.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    if header[0].startswith("y_um"):
        x = np.array([float(v) for v in header[1:]])
        rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
        data = np.array(rows, dtype=float)
        return ScanGrid(x_um=x, y_um=data[:, 0], counts=data[:, 1:])
    if header[:3] != ["x_um", "y_um", "counts"]:
        raise ValueError(f"unrecognized scan-grid header: {header}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    counts = np.full((y.size, x.size), np.nan)
    ix = np.searchsorted(x, data[:, 0])
    iy = np.searchsorted(y, data[:, 1])
    counts[iy, ix] = data[:, 2]
    if np.any(np.isnan(counts)):
        raise ValueError("scan-grid CSV does not cover a full rectangular grid")
    return ScanGrid(x_um=x, y_um=y, counts=counts)
