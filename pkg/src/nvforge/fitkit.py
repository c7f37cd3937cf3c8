"""Nonlinear least-squares fitting of decay models to sampled curves.

Four models are supported, each with a free amplitude ``a`` and baseline
``c`` on top of the physical parameters (baselines are routine in measured
PL curves; pass ``fix={"c": 0.0}`` to pin the offset):

- ``exp_t2star``:     a * exp(-t/T2*) + c
- ``stretched_exp``:  a * exp(-(t/T2)^p) + c
- ``t1_stretched``:   a * exp(-(t/T1)^q) + c
- ``fid_beats``:      a * exp(-t/T2*) * sum_m w_m cos(2 pi (delta + m*A) t) + c

Stretching exponents are bounded to [0.3, 3.0] to prevent degenerate fits.
Self-starting is deterministic: baselines from the curve tail, decay times
and exponents from a log(-log s) versus log t regression on the upper part
of the signal, and oscillation frequencies from the curve periodogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import DecayCurve
from .levmar import NumericalFailure, covariance_from_jacobian, lm_least_squares

EXPONENT_BOUNDS = (0.3, 3.0)

#: Default hyperfine multiplet: nuclear spin 1, equal projection weights.
TRIPLET_MULTIPLICITIES = ((-1.0, 1 / 3), (0.0, 1 / 3), (1.0, 1 / 3))

#: Spin-1/2 alternative (two lines split by the full coupling A).
DOUBLET_MULTIPLICITIES = ((-0.5, 0.5), (0.5, 0.5))


class FitError(RuntimeError):
    pass


class RankDeficientDataError(FitError):
    """The data carry no usable variation (e.g. constant signal)."""


class FitConvergenceError(FitError, NumericalFailure):
    """Fit failed to converge; ``best_result`` holds the best point found."""

    def __init__(self, message: str, best_result: "FitResult"):
        super().__init__(message)
        self.best_result = best_result


@dataclass(frozen=True)
class FitModel:
    """A named decay model with fixed structure and free parameters."""

    kind: str
    multiplicities: tuple[tuple[float, float], ...] | None = None

    @classmethod
    def exp_t2star(cls) -> "FitModel":
        return cls("exp_t2star")

    @classmethod
    def stretched_exp(cls) -> "FitModel":
        return cls("stretched_exp")

    @classmethod
    def t1_stretched(cls) -> "FitModel":
        return cls("t1_stretched")

    @classmethod
    def fid_beats(cls, multiplicities=TRIPLET_MULTIPLICITIES) -> "FitModel":
        weights = sum(w for _, w in multiplicities)
        if abs(weights - 1.0) > 1e-9:
            raise ValueError("multiplicity weights must sum to 1")
        return cls("fid_beats", tuple(multiplicities))

    @property
    def param_names(self) -> tuple[str, ...]:
        return {
            "exp_t2star": ("a", "t2_star_s", "c"),
            "stretched_exp": ("a", "t2_s", "p", "c"),
            "t1_stretched": ("a", "t1_s", "q", "c"),
            "fid_beats": ("a", "t2_star_s", "delta_hz", "a_hf_hz", "c"),
        }[self.kind]

    def predict(self, t: np.ndarray, theta: np.ndarray) -> np.ndarray:
        if self.kind == "exp_t2star":
            a, tc, c = theta
            return a * np.exp(-t / tc) + c
        if self.kind in ("stretched_exp", "t1_stretched"):
            a, tc, p, c = theta
            return a * np.exp(-((t / tc) ** p)) + c
        a, tc, delta, ahf, c = theta
        return a * np.exp(-t / tc) * self._beat(t, delta, ahf) + c

    def _beat(self, t: np.ndarray, delta: float, ahf: float) -> np.ndarray:
        out = np.zeros_like(t)
        for m, w in self.multiplicities:
            out += w * np.cos(2 * math.pi * (delta + m * ahf) * t)
        return out

    def jacobian(self, t: np.ndarray, theta: np.ndarray) -> np.ndarray:
        if self.kind == "exp_t2star":
            a, tc, c = theta
            env = np.exp(-t / tc)
            return np.column_stack([env, a * env * t / tc**2, np.ones_like(t)])
        if self.kind in ("stretched_exp", "t1_stretched"):
            a, tc, p, c = theta
            z = (t / tc) ** p
            env = np.exp(-z)
            # d/dp uses z*log(t/tc); safe because fits require t > 0.
            return np.column_stack(
                [
                    env,
                    a * env * z * p / tc,
                    -a * env * z * np.log(t / tc),
                    np.ones_like(t),
                ]
            )
        a, tc, delta, ahf, c = theta
        env = np.exp(-t / tc)
        beat = self._beat(t, delta, ahf)
        d_delta = np.zeros_like(t)
        d_ahf = np.zeros_like(t)
        for m, w in self.multiplicities:
            s = np.sin(2 * math.pi * (delta + m * ahf) * t)
            d_delta -= w * 2 * math.pi * t * s
            d_ahf -= w * m * 2 * math.pi * t * s
        return np.column_stack(
            [env * beat, a * env * beat * t / tc**2, a * env * d_delta, a * env * d_ahf, np.ones_like(t)]
        )

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        tiny = 1e-300
        lo_p, hi_p = EXPONENT_BOUNDS
        table = {
            "exp_t2star": ([-np.inf, tiny, -np.inf], [np.inf, np.inf, np.inf]),
            "stretched_exp": ([-np.inf, tiny, lo_p, -np.inf], [np.inf, np.inf, hi_p, np.inf]),
            "t1_stretched": ([-np.inf, tiny, lo_p, -np.inf], [np.inf, np.inf, hi_p, np.inf]),
            "fid_beats": (
                [-np.inf, tiny, -np.inf, 0.0, -np.inf],
                [np.inf, np.inf, np.inf, np.inf, np.inf],
            ),
        }
        lo, hi = table[self.kind]
        return np.asarray(lo), np.asarray(hi)

    def initial_guess(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "fid_beats":
            return self._fid_initial_guess(t, y)
        n_tail = max(1, t.size // 20)
        c0 = float(np.mean(y[-n_tail:]))
        a0 = float(np.max(y) - c0)
        if a0 <= 0:
            a0 = float(np.ptp(y)) or 1.0
            c0 = float(np.min(y))
        s = np.clip((y - c0) / a0, 1e-6, 1 - 1e-6)
        mask = s > 0.2
        t_scale = float(np.median(t))
        p0 = 1.0
        if np.count_nonzero(mask) >= 2:
            u = np.log(t[mask])
            v = np.log(-np.log(s[mask]))
            slope, intercept = np.polyfit(u, v, 1)
            if np.isfinite(slope) and slope > 0:
                p0 = float(np.clip(slope, *EXPONENT_BOUNDS))
                t_scale = float(np.exp(-intercept / slope))
        if self.kind == "exp_t2star":
            return np.array([a0, t_scale, c0])
        return np.array([a0, t_scale, p0, c0])

    def _fid_initial_guess(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        c0 = float(np.mean(y))
        resid = y - c0
        a0 = float(np.max(np.abs(resid))) or 1.0
        lines = spectral_lines(t, resid)
        freqs = np.array([f for f, _ in lines])
        # For a symmetric multiplet the unweighted line centroid equals the
        # detuning, and the largest offset is max|m| * A.
        delta0 = float(np.mean(freqs))
        max_m = max(abs(m) for m, _ in self.multiplicities) or 1.0
        ahf0 = float(np.max(np.abs(freqs - delta0))) / max_m
        t0 = float(t[-1] - t[0]) / 2.0
        return np.array([a0, t0, delta0, ahf0, c0])


def spectral_lines(t: np.ndarray, y: np.ndarray) -> list[tuple[float, float]]:
    """Significant oscillation lines of a (possibly log-sampled) curve.

    Resamples onto a uniform grid, zero pads, and returns the local maxima
    of |FFT| that reach 30% of the strongest one, as (frequency, magnitude)
    pairs sorted by frequency.  Always contains at least the global peak.
    """
    n_uniform = max(4096, 4 * t.size)
    tu = np.linspace(t[0], t[-1], n_uniform)
    yu = np.interp(tu, t, y)
    spec = np.abs(np.fft.rfft(yu, n=4 * n_uniform))
    freqs = np.fft.rfftfreq(4 * n_uniform, d=tu[1] - tu[0])
    spec[0] = 0.0
    k_peak = int(np.argmax(spec))
    interior = (spec[1:-1] > spec[:-2]) & (spec[1:-1] >= spec[2:])
    idx = set((np.nonzero(interior)[0] + 1).tolist()) | {k_peak}
    lines = [
        (float(freqs[k]), float(spec[k]))
        for k in sorted(idx)
        if spec[k] >= 0.3 * spec[k_peak]
    ]
    return lines


@dataclass
class FitResult:
    """Fitted parameters with standard errors from the Jacobian at optimum."""

    model_kind: str
    params: dict[str, float]
    stderr: dict[str, float]
    residual_rms: float
    converged: bool
    n_iter: int
    objective_trace: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "model": self.model_kind,
            "params": self.params,
            "stderr": self.stderr,
            "residual_rms": self.residual_rms,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }


def fit(
    curve: DecayCurve,
    model: FitModel,
    init: dict[str, float] | None = None,
    fix: dict[str, float] | None = None,
) -> FitResult:
    """Fit a decay model to a curve by damped least squares.

    Parameters
    ----------
    curve:
        Input data; requires strictly positive times and at least three
        data points per free parameter.
    init:
        Optional per-parameter overrides of the deterministic self-start.
    fix:
        Parameters to hold at given values (e.g. ``{"c": 0.0}``).

    Raises
    ------
    RankDeficientDataError
        For constant (informationless) signal.
    FitConvergenceError
        If the iteration cap is reached; carries the best-so-far result.
    """
    t = curve.times_s
    y = curve.signal
    if np.any(t <= 0):
        raise ValueError("fit requires strictly positive times")
    names = model.param_names
    fix = dict(fix or {})
    for name in fix:
        if name not in names:
            raise ValueError(f"unknown fixed parameter {name!r}")
    free_idx = [i for i, n in enumerate(names) if n not in fix]
    if t.size < 3 * len(free_idx):
        raise ValueError(
            f"need at least {3 * len(free_idx)} points to fit {len(free_idx)} parameters"
        )
    if float(np.ptp(y)) < 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        raise RankDeficientDataError("signal is constant; nothing to fit")

    theta_full = model.initial_guess(t, y)
    if init:
        for name, value in init.items():
            if name not in names:
                raise ValueError(f"unknown parameter {name!r}")
            theta_full[names.index(name)] = value
    for name, value in fix.items():
        theta_full[names.index(name)] = value

    lo_full, hi_full = model.bounds()

    def expand(theta_free: np.ndarray) -> np.ndarray:
        full = theta_full.copy()
        full[free_idx] = theta_free
        return full

    def residual(theta_free: np.ndarray) -> np.ndarray:
        return model.predict(t, expand(theta_free)) - y

    def jac(theta_free: np.ndarray) -> np.ndarray:
        return model.jacobian(t, expand(theta_free))[:, free_idx]

    res = lm_least_squares(
        residual,
        theta_full[free_idx],
        jacobian=jac,
        lower=lo_full[free_idx],
        upper=hi_full[free_idx],
    )

    theta_opt = expand(res.x)
    cov = covariance_from_jacobian(res.jacobian, res.sse, t.size)
    stderr_free = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    params = {n: float(v) for n, v in zip(names, theta_opt)}
    stderr = {n: 0.0 for n in names}
    for j, i in enumerate(free_idx):
        stderr[names[i]] = float(stderr_free[j])

    result = FitResult(
        model_kind=model.kind,
        params=params,
        stderr=stderr,
        residual_rms=float(np.sqrt(res.sse / t.size)),
        converged=res.converged,
        n_iter=res.n_iter,
        objective_trace=res.objective_trace,
    )
    if not res.converged:
        raise FitConvergenceError(f"fit did not converge: {res.message}", result)
    return result


def fit_envelope(
    curve: DecayCurve,
    multiplicities=TRIPLET_MULTIPLICITIES,
    init: dict[str, float] | None = None,
) -> FitResult:
    """Extract T2* from an oscillating free-induction curve.

    Fits the full beat model rather than a literal envelope trace, which is
    robust at beat nodes.  Requires at least five oscillation periods.
    """
    t = curve.times_s
    lines = spectral_lines(t, curve.signal - float(np.mean(curve.signal)))
    f_peak = max(lines, key=lambda line: line[1])[0]
    span = float(t[-1] - t[0])
    if f_peak * span < 5.0:
        raise ValueError(
            f"curve spans {f_peak * span:.2f} oscillation periods; need >= 5"
        )
    return fit(curve, FitModel.fid_beats(multiplicities), init=init)


@dataclass
class T2TableRow:
    n: int
    t2_s: float
    p: float
    stderr_t2_s: float
    stderr_p: float
    converged: bool
    error: str | None = None


def extract_t2_table(labeled_curves) -> list[T2TableRow]:
    """Fit a stretched exponential to each (n, curve) pair.

    Per-row failures are recorded in the row's ``error`` field instead of
    aborting the batch.
    """
    rows = []
    model = FitModel.stretched_exp()
    for n, curve in labeled_curves:
        try:
            r = fit(curve, model, fix={"c": 0.0})
            rows.append(
                T2TableRow(
                    n=int(n),
                    t2_s=r.params["t2_s"],
                    p=r.params["p"],
                    stderr_t2_s=r.stderr["t2_s"],
                    stderr_p=r.stderr["p"],
                    converged=r.converged,
                )
            )
        except FitError as exc:
            rows.append(
                T2TableRow(
                    n=int(n), t2_s=math.nan, p=math.nan, stderr_t2_s=math.nan,
                    stderr_p=math.nan, converged=False, error=str(exc),
                )
            )
    return rows
