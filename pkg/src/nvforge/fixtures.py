"""Deterministic synthetic fixtures for tests, docs, and the CLI.

No raw maps or spectra are published for the reference experiments, so
every fixture here is a synthetic reconstruction targeted at the published
summary numbers (film thickness, spot widths, charge ratios, Raman width,
decay families).  All generators are pure functions of their seed.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.random import Generator, Philox

from . import presets
from .curves import DecayCurve
from .engines import decay_time_grid, simulate_analytic
from .implant import POST_ANNEAL, TABLE2_SAMPLES
from .scan import DepthProfile, ScanGrid, Spectrum
from .sequences import build_sequence

#: Target NV0:NV- area ratios for the three spectra fixtures.
S123_CHARGE_RATIOS = {"s1": 0.71, "s2": 2.8, "s3": 1.5}

FIG6_SURFACE_Z_UM = 0.0
FIG6_INTERFACE_Z_UM = 265.0

FIG5_SPOT_FWHM_UM = (15.0, 27.0)

RAMAN_PEAK_CM1 = 1332.54
RAMAN_FWHM_CM1 = 1.61


def _rng(seed: int, stream: int) -> Generator:
    return Generator(Philox(key=np.array([seed % 2**64, stream], dtype=np.uint64)))


def depth_profile_fig6(seed: int = 0, noise_rms: float = 60.0) -> DepthProfile:
    """Two-step PL depth profile: air -> 265 um film -> substrate."""
    z = np.arange(-60.0, 420.0, 0.5)
    base, film, substrate = 150.0, 5000.0, 21000.0
    counts = (
        base
        + (film - base) / (1.0 + np.exp(-(z - FIG6_SURFACE_Z_UM) / 1.5))
        + (substrate - film) / (1.0 + np.exp(-(z - FIG6_INTERFACE_Z_UM) / 2.5))
    )
    counts += noise_rms * _rng(seed, 6).standard_normal(z.size)
    return DepthProfile(z_um=z, counts=np.clip(counts, 0.0, None))


def spot_grid_fig5(seed: int = 0, background: float = 5000.0) -> ScanGrid:
    """Area scan with one implanted spot of FWHM (15, 27) um."""
    x = np.arange(-60.0, 60.0, 1.0)
    y = np.arange(-60.0, 60.0, 1.0)
    xg, yg = np.meshgrid(x, y)
    fx, fy = FIG5_SPOT_FWHM_UM
    sx = fx / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    sy = fy / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    counts = background + 30000.0 * np.exp(
        -(xg**2) / (2 * sx**2) - (yg**2) / (2 * sy**2)
    )
    counts += math.sqrt(background) * _rng(seed, 5).standard_normal(counts.shape)
    return ScanGrid(
        x_um=x, y_um=y, counts=np.clip(counts, 0.0, None), background_rate=background
    )


def halo_grid_s1(seed: int = 0, background: float = 5000.0) -> ScanGrid:
    """Implanted spot with a wide weak halo (two concentric Gaussians).

    Core FWHM 200 um with a 400 um FWHM halo at a few percent of the core
    amplitude, mimicking an aperture-free implantation.
    """
    x = np.arange(-1000.0, 1000.0, 12.5)
    y = np.arange(-1000.0, 1000.0, 12.5)
    xg, yg = np.meshgrid(x, y)
    k = 2.0 * math.sqrt(2.0 * math.log(2.0))
    s_core = 200.0 / k
    s_halo = 400.0 / k
    r2 = xg**2 + yg**2
    counts = (
        background
        + 30000.0 * np.exp(-r2 / (2 * s_core**2))
        + 1200.0 * np.exp(-r2 / (2 * s_halo**2))
    )
    counts += math.sqrt(background) * _rng(seed, 1).standard_normal(counts.shape)
    return ScanGrid(
        x_um=x, y_um=y, counts=np.clip(counts, 0.0, None), background_rate=background
    )


def purity_grid_s4(seed: int = 0, background: float = 5000.0):
    """Mostly-clean area map with one implanted oval.

    Returns ``(grid, expected_clean_fraction)`` where the expectation
    counts pixels whose noiseless level stays within 2*sqrt(background).
    """
    x = np.arange(0.0, 512.0, 4.0)
    y = np.arange(0.0, 512.0, 4.0)
    xg, yg = np.meshgrid(x, y)
    bump = 40000.0 * np.exp(
        -((xg - 280.0) ** 2) / (2 * 40.0**2) - ((yg - 220.0) ** 2) / (2 * 25.0**2)
    )
    sigma = math.sqrt(background)
    expected_clean = float(np.mean(bump <= 2.0 * sigma))
    counts = background + bump
    counts[bump <= 2.0 * sigma] = background  # keep the clean region exactly flat
    grid = ScanGrid(x_um=x, y_um=y, counts=counts, background_rate=None)
    return grid, expected_clean


def _lorentzian_profile(x: np.ndarray, center: float, fwhm: float, area: float):
    amp = 2.0 * area / (math.pi * fwhm)
    half = fwhm / 2.0
    return amp / (1.0 + ((x - center) / half) ** 2)


def spectrum_s123(sample: str) -> Spectrum:
    """Noiseless PL spectrum fixture with a pinned NV0:NV- area ratio.

    Contains both ZPLs, the 589 nm implantation-defect line, the broad
    second-order Raman band, and a flat baseline.  Areas are constructed by
    inverting the target ratio with kappa = 1.
    """
    key = sample.lower()
    if key not in S123_CHARGE_RATIOS:
        raise ValueError(f"unknown sample {sample!r}; expected one of s1, s2, s3")
    ratio = S123_CHARGE_RATIOS[key]
    wl = np.arange(520.0, 820.0, 0.2)
    area_nvm = 3000.0
    area_nv0 = ratio * area_nvm
    counts = np.full_like(wl, 200.0)
    counts += _lorentzian_profile(wl, 575.0, 2.6, area_nv0)
    counts += _lorentzian_profile(wl, 637.0, 3.2, area_nvm)
    counts += _lorentzian_profile(wl, 589.0, 2.0, 0.12 * area_nvm)
    counts += _lorentzian_profile(wl, 610.0, 14.0, 0.5 * area_nvm)
    return Spectrum(values=wl, counts=counts, unit="nm")


def raman_spectrum() -> Spectrum:
    """Noiseless diamond Raman line at 1332.54 cm^-1, FWHM 1.61 cm^-1."""
    wn = np.arange(1250.0, 1420.0, 0.05)
    counts = 50.0 + _lorentzian_profile(wn, RAMAN_PEAK_CM1, RAMAN_FWHM_CM1, 5000.0)
    return Spectrum(values=wn, counts=counts, unit="cm-1")


def decay_family_fig7(n_list=(4, 8, 16, 32, 64), n_points: int = 32):
    """CPMG decay-curve family for the paper-like bath (analytic engine)."""
    noise = presets.paper_like_noise()
    family: list[tuple[int, DecayCurve]] = []
    for n in n_list:
        seq = build_sequence("cpmg", tau_s=1e-6, n=int(n))
        times = decay_time_grid(seq, noise, n_points=n_points)
        family.append((int(n), simulate_analytic(seq, noise, times)))
    return family


def xy_curves_fig9(n_points: int = 32) -> dict[str, DecayCurve]:
    """XY4 and XY8 decay curves for the paper-like bath (analytic engine)."""
    noise = presets.paper_like_noise()
    out: dict[str, DecayCurve] = {}
    for kind in ("xy4", "xy8"):
        seq = build_sequence(kind, tau_s=1e-6)
        times = decay_time_grid(seq, noise, n_points=n_points)
        out[kind] = simulate_analytic(seq, noise, times)
    return out


def table2_metadata() -> dict:
    """Reference-sample implantation metadata, including the S5 dose flag."""
    return {
        "samples": [dict(sample) for sample in TABLE2_SAMPLES],
        "post_anneal": dict(POST_ANNEAL),
    }
