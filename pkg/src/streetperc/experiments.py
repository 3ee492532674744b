"""Parameter sweeps, logistic transition fits, and the theta-U phase diagram."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DirectionError, NoTransitionError, ParameterError
from .geometry import Window
from .percolation import estimate_connection_probability
from .placement import NetworkParams, derive_parameters, substream_seed

RISING = "rising"
FALLING = "falling"

# Swept parameter name -> NetworkParams field. "U" and "nbar" need
# conversion (U -> user_intensity via ell1; nbar -> noise via power).
SWEEPABLE = ("U", "lambda", "theta", "tau", "p", "kappa", "nbar", "beta")
_FIELD_OF = {
    "lambda": "user_intensity",
    "theta": "interference_factor",
    "tau": "sinr_threshold",
    "p": "relay_prob",
    "kappa": "pathloss_scale",
    "beta": "pathloss_exponent",
}


@dataclass(frozen=True)
class CurvePoint:
    value: float
    replications: int
    successes: int
    probability: float
    ci_low: float
    ci_high: float
    status: str = "ok"


@dataclass(frozen=True)
class TransitionCurve:
    parameter: str
    points: tuple

    def __post_init__(self):
        values = self.values
        if len(values) > 1 and not np.all(np.diff(values) > 0):
            raise ParameterError("sweep grid values must be strictly increasing")

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p.probability for p in self.points])

    @property
    def replications(self) -> np.ndarray:
        return np.array([p.replications for p in self.points])

    def ok_points(self) -> "TransitionCurve":
        return TransitionCurve(self.parameter,
                               tuple(p for p in self.points if p.status == "ok"))


@dataclass(frozen=True)
class LogisticFit:
    slope: float
    intercept: float
    critical_value: float
    residual: float
    direction: str


@dataclass(frozen=True)
class PhaseDiagramRow:
    theta: float
    u1_star: float | None
    u2_star: float | None
    status: str
    midpoint_probability: float | None = None


@dataclass(frozen=True)
class PhaseDiagram:
    rows: tuple = field(default_factory=tuple)


def apply_parameter(params: NetworkParams, name: str, value: float) -> NetworkParams:
    """Return params with one swept parameter replaced."""
    if name == "U":
        ell1 = derive_parameters(params).mean_street_length
        return params.with_(user_intensity=value / ell1)
    if name == "nbar":
        return params.with_(noise=value * params.power)
    if name in _FIELD_OF:
        return params.with_(**{_FIELD_OF[name]: value})
    raise ParameterError(f"unknown sweep parameter {name!r}; "
                         f"expected one of {SWEEPABLE}")


def sweep(params: NetworkParams, name: str, grid, window: Window,
          replications: int, master_seed: int,
          workers: int | None = None) -> TransitionCurve:
    """Estimate the connection probability at every grid value.

    Each grid point gets its own derived master seed, so points are
    statistically independent and individually reproducible. Inadmissible
    points are reported with status "error" and NaN probability.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ParameterError("sweep grid must be nonempty")
    points = []
    for i, value in enumerate(grid):
        point_seed = substream_seed(master_seed, f"sweep:{name}", i)
        try:
            point_params = apply_parameter(params, name, float(value))
            est = estimate_connection_probability(point_params, window,
                                                  replications, point_seed,
                                                  workers=workers)
            points.append(CurvePoint(float(value), est.replications,
                                     est.successes, est.probability,
                                     est.ci_low, est.ci_high))
        except ParameterError:
            points.append(CurvePoint(float(value), 0, 0, float("nan"),
                                     float("nan"), float("nan"), "error"))
    return TransitionCurve(name, tuple(points))


def fit_logistic(values, probabilities, replications, direction: str) -> LogisticFit:
    """Least-squares line on logit-transformed probabilities.

    Probabilities are clipped to [1/(2R), 1 - 1/(2R)] so empirical 0s and 1s
    keep finite logits. The critical value is the inflection point -b/a of
    the fitted logistic.
    """
    if direction not in (RISING, FALLING):
        raise ValueError(f"direction must be {RISING!r} or {FALLING!r}")
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probabilities, dtype=float)
    reps = np.broadcast_to(np.asarray(replications, dtype=float), probs.shape)
    if len(values) < 3:
        raise NoTransitionError(f"need >= 3 points to fit, got {len(values)}")
    if np.all(probs <= 0.05) or np.all(probs >= 0.95):
        raise NoTransitionError("segment carries no transition "
                                "(probabilities all near 0 or all near 1)")
    if np.all(probs == probs[0]):
        raise NoTransitionError("constant-probability segment")

    clip_lo = 1.0 / (2.0 * reps)
    clipped = np.clip(probs, clip_lo, 1.0 - clip_lo)
    logit = np.log(clipped / (1.0 - clipped))
    slope, intercept = np.polyfit(values, logit, 1)
    if direction == RISING and slope <= 0:
        raise DirectionError(f"expected rising transition but slope = {slope}")
    if direction == FALLING and slope >= 0:
        raise DirectionError(f"expected falling transition but slope = {slope}")
    residual = float(np.sqrt(np.mean((logit - (slope * values + intercept)) ** 2)))
    return LogisticFit(float(slope), float(intercept),
                       float(-intercept / slope), residual, direction)


def _smooth3(probs: np.ndarray) -> np.ndarray:
    """3-point moving average; window shrinks at the grid edges."""
    out = np.empty_like(probs)
    for i in range(len(probs)):
        lo = max(0, i - 1)
        out[i] = probs[lo:i + 2].mean()
    return out


def extract_double_critical(curve: TransitionCurve):
    """Split at the smoothed plateau peak, fit rising then falling logistics.

    Returns (lower critical value or None, upper critical value or None);
    (None, None) when the smoothed curve never exceeds 0.5.
    """
    curve = curve.ok_points()
    values = curve.values
    probs = curve.probabilities
    reps = curve.replications
    if len(values) == 0:
        return None, None
    smooth = _smooth3(probs)
    if smooth.max() <= 0.5:
        return None, None
    peaks = np.nonzero(smooth == smooth.max())[0]
    mid = (len(values) - 1) / 2.0
    split = int(peaks[np.argmin(np.abs(peaks - mid))])

    lower = upper = None
    try:
        lower = fit_logistic(values[:split + 1], probs[:split + 1],
                             reps[:split + 1], RISING).critical_value
    except (NoTransitionError, DirectionError):
        pass
    try:
        upper = fit_logistic(values[split:], probs[split:],
                             reps[split:], FALLING).critical_value
    except (NoTransitionError, DirectionError):
        pass
    return lower, upper


DEFAULT_U_GRID = np.round(np.arange(0.0, 10.0 + 1e-9, 0.5), 6)


def phase_diagram(theta_grid, params: NetworkParams, window: Window,
                  replications: int, master_seed: int,
                  u_grid=DEFAULT_U_GRID, workers: int | None = None,
                  verify_midpoint: bool = False) -> PhaseDiagram:
    """U-sweep + double-critical extraction for every theta in the grid.

    Rows where a fit fails are flagged via status, never dropped. With
    ``verify_midpoint``, each supercritical row is re-simulated at
    U = (U1* + U2*) / 2 as a self-consistency check.
    """
    rows = []
    for j, theta in enumerate(np.asarray(theta_grid, dtype=float)):
        row_seed = substream_seed(master_seed, "phase-diagram", j)
        try:
            row_params = apply_parameter(params, "theta", float(theta))
        except ParameterError:
            rows.append(PhaseDiagramRow(float(theta), None, None, "error"))
            continue
        curve = sweep(row_params, "U", u_grid, window, replications,
                      row_seed, workers=workers)
        u1, u2 = extract_double_critical(curve)
        if u1 is None and u2 is None:
            status = "no-window"
        elif u1 is None or u2 is None:
            status = "partial"
        else:
            status = "ok"
        midpoint_prob = None
        if verify_midpoint and u1 is not None and u2 is not None:
            mid_params = apply_parameter(row_params, "U", 0.5 * (u1 + u2))
            est = estimate_connection_probability(
                mid_params, window, replications,
                substream_seed(row_seed, "midpoint"), workers=workers)
            midpoint_prob = est.probability
        rows.append(PhaseDiagramRow(float(theta), u1, u2, status, midpoint_prob))
    return PhaseDiagram(tuple(rows))


def pole_capacity(theta: float, tau: float) -> float:
    """Upper bound 1 + 1/(theta*tau) on simultaneous incoming links."""
    if theta < 0 or tau < 0:
        raise ParameterError("theta and tau must be >= 0")
    if theta * tau == 0.0:
        return math.inf
    return 1.0 + 1.0 / (theta * tau)


def hop_bound(hops_per_street: float, theta: float, tau: float) -> float:
    """Necessary-condition cap H * (1 + 1/(theta*tau)) / 2 on the upper
    critical user count."""
    if hops_per_street <= 0:
        raise ParameterError(f"hops_per_street must be > 0, got {hops_per_street}")
    return hops_per_street * pole_capacity(theta, tau) / 2.0
