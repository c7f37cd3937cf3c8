"""Reduction of confocal scan grids and PL spectra.

Implanted-spot detection with 2-D Gaussian shape fits, depth-profile film
thickness from a two-step logistic fit, spectral peak identification and
Lorentzian metrology (wavelength or wavenumber mode), NV charge-state
ratios from ZPL areas, Van-der-Pauw sheet-resistance solving, and a
background-purity report for area maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .levmar import NumericalFailure, lm_least_squares

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

#: Known zero-phonon lines and bands for wavelength-mode spectra (nm).
KNOWN_LINES_NM = {
    575.0: "NV0_ZPL",
    589.0: "implantation_defect",
    637.0: "NVminus_ZPL",
    738.0: "SiV_ZPL",
}
RAMAN_2ND_ORDER_BAND_NM = (600.0, 620.0)
LINE_MATCH_TOLERANCE_NM = 2.0

#: Known lines for wavenumber-mode (Raman) spectra (cm^-1).
KNOWN_LINES_CM1 = {1332.54: "diamond_raman"}
LINE_MATCH_TOLERANCE_CM1 = 2.0

# A depth-profile step must change the level by this fraction of the full
# count range to count as detected.
STEP_MIN_FRACTION = 0.15


class ScanError(RuntimeError):
    pass


class DepthProfileError(ScanError):
    """The depth profile does not show the expected two rising steps."""


class MissingZplError(ScanError):
    """A required zero-phonon line is absent from the spectrum."""


@dataclass
class ScanGrid:
    """Spatial count-rate raster with uniform axes in micrometers."""

    x_um: np.ndarray
    y_um: np.ndarray
    counts: np.ndarray  # shape (len(y_um), len(x_um))
    background_rate: float | None = None

    def __post_init__(self) -> None:
        self.x_um = np.asarray(self.x_um, dtype=float)
        self.y_um = np.asarray(self.y_um, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        for axis in (self.x_um, self.y_um):
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError("grid axes must be strictly increasing")
            steps = np.diff(axis)
            if steps.size and not np.allclose(steps, steps[0], rtol=1e-6):
                raise ValueError("grid axes must be uniformly spaced")
        if self.counts.shape != (self.y_um.size, self.x_um.size):
            raise ValueError("counts shape must be (len(y), len(x))")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")


@dataclass
class DepthProfile:
    """Count rate versus focal depth."""

    z_um: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.z_um = np.asarray(self.z_um, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.z_um.shape != self.counts.shape or self.z_um.ndim != 1:
            raise ValueError("z and counts must be 1-D arrays of equal length")
        if not np.all(np.diff(self.z_um) > 0):
            raise ValueError("z must be strictly increasing")


@dataclass
class Spectrum:
    """PL or Raman spectrum; ``unit`` is 'nm' or 'cm-1'."""

    values: np.ndarray
    counts: np.ndarray
    unit: str = "nm"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.values.shape != self.counts.shape or self.values.ndim != 1:
            raise ValueError("values and counts must be 1-D arrays of equal length")
        if not np.all(np.diff(self.values) > 0):
            raise ValueError("spectral axis must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.unit not in ("nm", "cm-1"):
            raise ValueError("unit must be 'nm' or 'cm-1'")


@dataclass
class SpotFit:
    centroid_x_um: float
    centroid_y_um: float
    fwhm_x_um: float
    fwhm_y_um: float
    peak_rate: float

    def as_dict(self) -> dict:
        return {
            "centroid_x_um": self.centroid_x_um,
            "centroid_y_um": self.centroid_y_um,
            "fwhm_x_um": self.fwhm_x_um,
            "fwhm_y_um": self.fwhm_y_um,
            "peak_rate": self.peak_rate,
        }


@dataclass
class PeakFit:
    center: float
    fwhm: float
    area: float
    amplitude: float
    label: str

    def as_dict(self) -> dict:
        return {
            "center": self.center,
            "fwhm": self.fwhm,
            "area": self.area,
            "amplitude": self.amplitude,
            "label": self.label,
        }


@dataclass
class ChargeRatio:
    ratio_c0_cminus: float
    kappa: float

    def __post_init__(self) -> None:
        if not self.ratio_c0_cminus > 0:
            raise ValueError("charge ratio must be positive")


@dataclass
class ThicknessResult:
    surface_z_um: float
    interface_z_um: float
    thickness_um: float

    def as_dict(self) -> dict:
        return {
            "surface_z_um": self.surface_z_um,
            "interface_z_um": self.interface_z_um,
            "thickness_um": self.thickness_um,
        }


@dataclass
class PurityReport:
    background_rate: float
    clean_fraction: float

    def as_dict(self) -> dict:
        return {
            "background_rate": self.background_rate,
            "clean_fraction": self.clean_fraction,
        }


def robust_background(counts: np.ndarray) -> float:
    """Median of the lowest decile of counts."""
    flat = np.sort(np.asarray(counts, dtype=float).ravel())
    decile = flat[: max(1, flat.size // 10)]
    return float(np.median(decile))


def _gaussian2d(params, xg, yg):
    amp, x0, y0, sx, sy, off = params
    return amp * np.exp(
        -((xg - x0) ** 2) / (2 * sx**2) - ((yg - y0) ** 2) / (2 * sy**2)
    ) + off


def detect_spots(
    grid: ScanGrid, threshold_sigma: float = 5.0, min_pixels: int = 5
) -> list[SpotFit]:
    """Locate and shape-fit bright spots on a scan grid.

    Pixels above ``background + threshold_sigma * sqrt(background)`` are
    grouped into connected regions; each region large enough is fitted with
    a 2-D Gaussian plus flat offset.  Returns spots sorted by peak rate
    (an empty list when nothing exceeds the threshold).
    """
    if grid.x_um.size < 8 or grid.y_um.size < 8:
        raise ValueError("grid must be at least 8x8")
    bg = grid.background_rate
    if bg is None:
        bg = robust_background(grid.counts)
    threshold = bg + threshold_sigma * math.sqrt(max(bg, 1.0))
    mask = grid.counts > threshold
    labels, n_regions = ndimage.label(mask)

    spots: list[SpotFit] = []
    xg_full, yg_full = np.meshgrid(grid.x_um, grid.y_um)
    for region in range(1, n_regions + 1):
        sel = labels == region
        if np.count_nonzero(sel) < min_pixels:
            continue
        iy, ix = np.nonzero(sel)
        # Expand the bounding box by half its size so tails constrain the fit.
        pad_y = max(3, (iy.max() - iy.min() + 1) // 2)
        pad_x = max(3, (ix.max() - ix.min() + 1) // 2)
        y0i, y1i = max(iy.min() - pad_y, 0), min(iy.max() + pad_y + 1, grid.y_um.size)
        x0i, x1i = max(ix.min() - pad_x, 0), min(ix.max() + pad_x + 1, grid.x_um.size)
        window = grid.counts[y0i:y1i, x0i:x1i]
        xg = xg_full[y0i:y1i, x0i:x1i]
        yg = yg_full[y0i:y1i, x0i:x1i]

        above = window - bg
        weights = np.clip(above, 0.0, None)
        total = weights.sum()
        cx = float((weights * xg).sum() / total)
        cy = float((weights * yg).sum() / total)
        sx = math.sqrt(max(float((weights * (xg - cx) ** 2).sum() / total), 1e-6))
        sy = math.sqrt(max(float((weights * (yg - cy) ** 2).sum() / total), 1e-6))
        amp0 = float(window.max() - bg)
        theta0 = np.array([amp0, cx, cy, sx, sy, bg])

        def residual(theta, _w=window, _xg=xg, _yg=yg):
            return (_gaussian2d(theta, _xg, _yg) - _w).ravel()

        res = lm_least_squares(
            residual,
            theta0,
            lower=[0.0, xg.min(), yg.min(), 1e-6, 1e-6, -np.inf],
            upper=[np.inf, xg.max(), yg.max(), np.inf, np.inf, np.inf],
        )
        amp, x0, y0, sx_f, sy_f, off = res.x
        spots.append(
            SpotFit(
                centroid_x_um=float(x0),
                centroid_y_um=float(y0),
                fwhm_x_um=float(FWHM_PER_SIGMA * abs(sx_f)),
                fwhm_y_um=float(FWHM_PER_SIGMA * abs(sy_f)),
                peak_rate=float(amp + off),
            )
        )
    spots.sort(key=lambda s: s.peak_rate, reverse=True)
    return spots


def _logistic(z, center, width):
    return 1.0 / (1.0 + np.exp(-(z - center) / width))


def film_thickness(profile: DepthProfile) -> ThicknessResult:
    """Film thickness from the two rising steps of a PL depth profile.

    The count rate steps up from ~zero (air) to the film level at the
    surface, then up again at the film/substrate interface (the substrate
    is the dirtier, brighter material).  Both steps are fitted jointly with
    a two-logistic model; thickness is the distance between step centers.

    Raises
    ------
    DepthProfileError
        If fewer than two rising steps are detectable, with an orientation
        hint when the profile instead steps downward.
    """
    z, counts = profile.z_um, profile.counts
    if z.size < 16:
        raise DepthProfileError("profile too short to locate two steps")
    span = float(np.ptp(counts))
    if span <= 0:
        raise DepthProfileError("profile is constant; no steps to detect")

    # Smooth, then segment contiguous rising regions; each region is one
    # candidate step, kept only if the level change across it is a sizable
    # fraction of the full span.
    width = max(3, z.size // 100)
    kernel = np.ones(width) / width
    smooth = np.convolve(counts, kernel, mode="same")
    grad = np.diff(smooth)

    def step_regions(gradient):
        top = float(np.max(gradient))
        if top <= 0:
            return []
        mask = gradient > 0.15 * top
        regions = []
        start = None
        for i, flag in enumerate(mask):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                regions.append((start, i))
                start = None
        if start is not None:
            regions.append((start, mask.size))
        steps = []
        for a, b in regions:
            lo_window = smooth[max(a - 3 * width, 0) : max(a - width, 1)]
            hi_window = smooth[min(b + width, smooth.size - 1) : b + 3 * width + 1]
            lo = float(np.median(lo_window)) if lo_window.size else smooth[0]
            hi = float(np.median(hi_window)) if hi_window.size else smooth[-1]
            if hi - lo >= STEP_MIN_FRACTION * span:
                center = a + int(np.argmax(gradient[a:b]))
                steps.append(center)
        return steps

    rising = step_regions(grad)
    if len(rising) != 2:
        hint = ""
        if len(rising) < 2 and smooth[0] - smooth[-1] >= STEP_MIN_FRACTION * span:
            hint = (
                "; the profile steps downward - counts must rise from air to "
                "film to substrate (is the z axis reversed?)"
            )
        raise DepthProfileError(f"found {len(rising)} rising step(s), need 2{hint}")

    rising.sort()
    z1_0, z2_0 = float(z[rising[0]]), float(z[rising[1]])
    base0 = float(np.median(counts[: max(rising[0] - width, 1)]))
    mid0 = float(np.median(counts[rising[0] + width : max(rising[1] - width, rising[0] + width + 1)]))
    top0 = float(np.median(counts[rising[1] + width :]))
    w0 = max(float(z[1] - z[0]) * width, 1e-3)
    theta0 = np.array([base0, mid0 - base0, z1_0, w0, top0 - mid0, z2_0, w0])

    def residual(theta):
        base, a1, c1, w1, a2, c2, w2 = theta
        model = base + a1 * _logistic(z, c1, abs(w1) + 1e-9) + a2 * _logistic(
            z, c2, abs(w2) + 1e-9
        )
        return model - counts

    res = lm_least_squares(residual, theta0)
    _, _, c1, _, _, c2, _ = res.x
    surface, interface = (float(c1), float(c2)) if c1 <= c2 else (float(c2), float(c1))
    return ThicknessResult(
        surface_z_um=surface,
        interface_z_um=interface,
        thickness_um=interface - surface,
    )


def _lorentzian(params, x):
    amp, center, fwhm, off = params
    half = fwhm / 2.0
    return amp / (1.0 + ((x - center) / half) ** 2) + off


def _label_for(center: float, unit: str) -> str:
    if unit == "nm":
        for line, label in KNOWN_LINES_NM.items():
            if abs(center - line) < LINE_MATCH_TOLERANCE_NM:
                return label
        lo, hi = RAMAN_2ND_ORDER_BAND_NM
        if lo <= center <= hi:
            return "raman_2nd_order_band"
    else:
        for line, label in KNOWN_LINES_CM1.items():
            if abs(center - line) < LINE_MATCH_TOLERANCE_CM1:
                return label
    return "unknown"


def _fit_one_peak(x, y, idx, baseline, neighbor_centers):
    """Lorentzian fit around one local maximum; returns (amp, center, fwhm)."""
    height = y[idx] - baseline
    half_level = baseline + height / 2.0
    i_left = idx
    while i_left > 0 and y[i_left] > half_level:
        i_left -= 1
    i_right = idx
    while i_right < y.size - 1 and y[i_right] > half_level:
        i_right += 1
    fwhm_est = max(float(x[i_right] - x[i_left]), 2 * float(x[1] - x[0]))

    half_window = 5.0 * fwhm_est
    others = np.abs(np.asarray(neighbor_centers) - x[idx])
    others = others[others > 0]
    if others.size:
        half_window = min(half_window, float(others.min()) / 2.0)
    sel = (x >= x[idx] - half_window) & (x <= x[idx] + half_window)
    if np.count_nonzero(sel) < 5:
        return None

    theta0 = np.array([height, float(x[idx]), fwhm_est, baseline])

    def residual(theta):
        return _lorentzian(theta, x[sel]) - y[sel]

    res = lm_least_squares(
        residual,
        theta0,
        lower=[0.0, x[sel].min(), 1e-12, -np.inf],
        upper=[np.inf, x[sel].max(), np.inf, np.inf],
    )
    amp, center, fwhm, _ = res.x
    return float(amp), float(center), float(abs(fwhm))


def identify_peaks(
    spec: Spectrum, noise_sigma: float = 5.0, deflation_passes: int = 3
) -> list[PeakFit]:
    """Find, fit, and label spectral peaks.

    Local maxima above the robust noise floor seed per-peak Lorentzian fits
    on windows of +-5 estimated FWHM (truncated halfway to the nearest
    neighboring candidate).  After the first pass, each peak is refitted on
    the data with the other fitted profiles subtracted, which removes the
    area bias from overlapping tails.  Labels come from the line catalog
    for the spectrum's unit; unmatched peaks are labeled ``unknown``.
    """
    x, y = spec.values, spec.counts
    if x.size < 50:
        raise ValueError("spectrum must have at least 50 samples")
    baseline = float(np.median(y))
    mad = float(np.median(np.abs(y - baseline)))
    noise = 1.4826 * mad
    floor = baseline + noise_sigma * noise

    interior = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] > floor)
    candidates = (np.nonzero(interior)[0] + 1).tolist()
    if not candidates:
        return []

    centers = x[np.array(candidates)]
    fits: list[tuple[int, tuple[float, float, float]]] = []
    for idx in candidates:
        fitted = _fit_one_peak(x, y, idx, baseline, centers)
        if fitted is not None:
            fits.append((idx, fitted))

    for _ in range(max(0, deflation_passes - 1)):
        refined = []
        for i, (idx, _) in enumerate(fits):
            cleaned = y.copy()
            for j, (_, (amp_j, c_j, w_j)) in enumerate(fits):
                if j != i:
                    cleaned -= _lorentzian((amp_j, c_j, w_j, 0.0), x)
            fitted = _fit_one_peak(x, cleaned, idx, baseline, centers)
            refined.append((idx, fitted if fitted is not None else fits[i][1]))
        fits = refined

    peaks = [
        PeakFit(
            center=center,
            fwhm=fwhm,
            area=float(math.pi * amp * fwhm / 2.0),
            amplitude=amp,
            label=_label_for(center, spec.unit),
        )
        for _, (amp, center, fwhm) in fits
    ]
    peaks.sort(key=lambda p: p.center)
    return peaks


def charge_ratio(spec: Spectrum, kappa: float = 1.0) -> ChargeRatio:
    """NV0 : NV- concentration ratio from the two ZPL areas.

    ratio = kappa * area(575 nm) / area(637 nm).  The calibration factor
    kappa (relative radiative efficiencies and spectrometer response)
    defaults to 1.

    Raises
    ------
    MissingZplError
        Naming the absent line if either ZPL is not found.
    """
    peaks = identify_peaks(spec)
    by_label = {p.label: p for p in peaks}
    if "NV0_ZPL" not in by_label:
        raise MissingZplError("NV0 ZPL at 575 nm not found in spectrum")
    if "NVminus_ZPL" not in by_label:
        raise MissingZplError("NV- ZPL at 637 nm not found in spectrum")
    ratio = kappa * by_label["NV0_ZPL"].area / by_label["NVminus_ZPL"].area
    return ChargeRatio(ratio_c0_cminus=float(ratio), kappa=kappa)


def van_der_pauw(r_a_ohm: float, r_b_ohm: float) -> tuple[float, float]:
    """Sheet resistance (ohm/sq) and conductance from two VdP resistances.

    Solves exp(-pi R_A / R_s) + exp(-pi R_B / R_s) = 1 by bisection with a
    Newton polish; for R_A = R_B = R the root is pi R / ln 2.  Returns
    ``(sheet_resistance, sheet_conductance)``.
    """
    if not (r_a_ohm > 0 and r_b_ohm > 0):
        raise ValueError("resistances must be positive")
    if not (math.isfinite(r_a_ohm) and math.isfinite(r_b_ohm)):
        raise NumericalFailure("resistances must be finite")

    def f(rs: float) -> float:
        return (
            math.exp(-math.pi * r_a_ohm / rs)
            + math.exp(-math.pi * r_b_ohm / rs)
            - 1.0
        )

    hi = math.pi * (r_a_ohm + r_b_ohm) / math.log(2.0)
    lo = hi * 1e-6
    while f(lo) > 0:
        lo *= 0.1
        if lo < hi * 1e-30:
            raise NumericalFailure("failed to bracket the Van-der-Pauw root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) / hi < 1e-14:
            break
    rs = 0.5 * (lo + hi)
    for _ in range(4):
        # df/drs = sum of pi*R_i/rs^2 * exp(-pi R_i/rs), always positive.
        df = (
            math.pi * r_a_ohm / rs**2 * math.exp(-math.pi * r_a_ohm / rs)
            + math.pi * r_b_ohm / rs**2 * math.exp(-math.pi * r_b_ohm / rs)
        )
        rs -= f(rs) / df
    if not math.isfinite(rs) or abs(f(rs)) > 1e-10:
        raise NumericalFailure("Van-der-Pauw solve did not reach tolerance")
    return rs, 1.0 / rs


def purity_report(grid: ScanGrid) -> PurityReport:
    """Fraction of pixels consistent with the shot-noise background level."""
    bg = robust_background(grid.counts)
    sigma = math.sqrt(max(bg, 1.0))
    clean = np.abs(grid.counts - bg) <= 2.0 * sigma
    return PurityReport(
        background_rate=bg, clean_fraction=float(np.mean(clean))
    )
