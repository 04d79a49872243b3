"""Coupling sweeps around g_c and power-law exponent extraction."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateModel,
    DomainError,
    InsufficientData,
    NonPositiveValue,
    NotHurwitz,
    NumericalFailure,
)
from .model import ModelParams, Phase, critical_coupling, drift_diffusion
from .spectral import eigen_spectrum
from .steady import (
    QUADRATURE_LABELS,
    number_fluctuations,
    purity,
    quadrature_moments,
    solve_lyapunov,
)

__all__ = [
    "Side",
    "SweepSpec",
    "SweepRow",
    "SweepDataset",
    "PowerLawFit",
    "ExponentCell",
    "ExponentReport",
    "OBSERVABLES",
    "VALUE_COLUMNS",
    "sweep",
    "fit_power_law",
    "exponent_report",
]

OBSERVABLES = ("adr", "im_lambda", "dn1", "dn2", "dnb", "purity", "quadratures")
_COVARIANCE_OBSERVABLES = {"dn1", "dn2", "dnb", "purity", "quadratures"}
VALUE_COLUMNS = ("adr", "im_lambda_plus", "dn1", "dn2", "dnb", "purity", *QUADRATURE_LABELS)

FLAT_DECADES = 0.1
FLAT_SLOPE = 0.1
IM_ZERO_ATOL = 1e-8
QUADRATURE_ZERO_RTOL = 1e-8
MIN_FIT_POINTS = 5


class Side(str, enum.Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"
    BOTH = "both"

    def phases(self) -> tuple[Phase, ...]:
        if self is Side.NORMAL:
            return (Phase.NORMAL,)
        if self is Side.SUPERRADIANT:
            return (Phase.SUPERRADIANT,)
        return (Phase.NORMAL, Phase.SUPERRADIANT)


@dataclass(frozen=True)
class SweepSpec:
    side: Side = Side.BOTH
    rel_eps_min: float = 1e-4
    rel_eps_max: float = 1e-2
    points_per_decade: int = 20
    observables: frozenset = frozenset(OBSERVABLES)

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        obs = frozenset(self.observables)
        unknown = obs - set(OBSERVABLES)
        if unknown:
            raise DomainError(f"unknown observables: {sorted(unknown)}")
        object.__setattr__(self, "observables", obs)
        if not 0 < self.rel_eps_min < self.rel_eps_max:
            raise DomainError(
                f"need 0 < rel_eps_min < rel_eps_max, got {self.rel_eps_min}, {self.rel_eps_max}"
            )
        if int(self.points_per_decade) != self.points_per_decade or self.points_per_decade < 5:
            raise DomainError(f"points_per_decade must be an integer >= 5, got {self.points_per_decade}")
        object.__setattr__(self, "points_per_decade", int(self.points_per_decade))

    def eps_grid(self) -> np.ndarray:
        lo, hi = math.log10(self.rel_eps_min), math.log10(self.rel_eps_max)
        n = int(round((hi - lo) * self.points_per_decade)) + 1
        return np.logspace(lo, hi, max(n, 2))

    @property
    def needs_covariance(self) -> bool:
        return bool(self.observables & _COVARIANCE_OBSERVABLES)


@dataclass(frozen=True)
class SweepRow:
    g: float
    eps: float
    phase: Phase
    status: str
    values: dict = field(default_factory=dict)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class SweepDataset:
    params: ModelParams
    g_c: float
    spec: SweepSpec
    rows: tuple

    def series(self, observable: str, phase: Phase) -> tuple[np.ndarray, np.ndarray]:
        """``(eps, values)`` for the ok rows of one phase."""
        phase = Phase(phase)
        picked = [r for r in self.rows if r.ok and r.phase is phase and observable in r.values]
        eps = np.array([r.eps for r in picked], dtype=float)
        vals = np.array([r.values[observable] for r in picked], dtype=float)
        return eps, vals


def _evaluate(params: ModelParams, g: float, eps: float, phase: Phase, spec: SweepSpec) -> SweepRow:
    try:
        dd = drift_diffusion(params.with_g(g))
        spectrum = eigen_spectrum(dd.a)
        values = {
            "adr": spectrum.adr,
            "im_lambda_plus": abs(spectrum.slowest.imag),
        }
        if spec.needs_covariance:
            cov = solve_lyapunov(dd.a, dd.d)
            obs = spec.observables
            dn1, dn2, dnb = number_fluctuations(cov)
            for name, val in (("dn1", dn1), ("dn2", dn2), ("dnb", dnb)):
                if name in obs:
                    values[name] = val
            if "purity" in obs:
                values["purity"] = purity(cov)
            if "quadratures" in obs:
                values.update(quadrature_moments(cov))
    except NotHurwitz as exc:
        return SweepRow(g, eps, phase, "not_hurwitz", message=str(exc))
    except DegenerateModel as exc:
        return SweepRow(g, eps, phase, "degenerate", message=str(exc))
    except NumericalFailure as exc:
        return SweepRow(g, eps, phase, "numerical_failure", message=str(exc))
    except DomainError as exc:
        return SweepRow(g, eps, phase, "domain_error", message=str(exc))
    return SweepRow(g, eps, phase, "ok", values)


def sweep(params_base: ModelParams, spec: SweepSpec, workers: int = 1) -> SweepDataset:
    """Evaluate observables on ``g = g_c (1 -/+ eps)`` for log-spaced eps.

    Rows come back sorted by eps, normal before superradiant at equal eps.
    Failures never abort the sweep; they are recorded in ``row.status``.
    ``workers > 1`` evaluates points on a thread pool without changing the
    result.
    """
    g_c = critical_coupling(params_base)
    tasks = []
    for eps in spec.eps_grid():
        for phase in spec.side.phases():
            sign = -1.0 if phase is Phase.NORMAL else 1.0
            tasks.append((g_c * (1.0 + sign * eps), float(eps), phase))

    def run(task):
        g, eps, phase = task
        return _evaluate(params_base, g, eps, phase, spec)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(run, tasks))
    else:
        rows = tuple(map(run, tasks))
    return SweepDataset(params=params_base, g_c=g_c, spec=spec, rows=rows)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_amplitude: float
    r_squared: float
    n_points: int
    window: tuple[float, float]


def fit_power_law(eps, values) -> PowerLawFit:
    """Least-squares line through ``(log eps, log value)``.

    The slope is the exponent ``nu`` in ``value ~ exp(log_amplitude) * eps**nu``.
    """
    eps = np.asarray(eps, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if eps.shape != values.shape:
        raise DomainError("eps and values must have the same length")
    bad = [i for i, (e, v) in enumerate(zip(eps, values)) if not (e > 0 and v > 0)]
    if bad:
        raise NonPositiveValue(bad)
    if eps.size < MIN_FIT_POINTS:
        raise InsufficientData(f"need at least {MIN_FIT_POINTS} points, got {eps.size}")
    x, y = np.log(eps), np.log(values)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    # constant data: the variance is pure rounding noise
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y**2))):
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return PowerLawFit(
        exponent=float(slope),
        log_amplitude=float(intercept),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        n_points=int(eps.size),
        window=(float(eps.min()), float(eps.max())),
    )


@dataclass(frozen=True)
class ExponentCell:
    """One entry of the exponent table.

    ``status`` is ``"fit"``, ``"flat"`` (slope and dynamic range both
    negligible; ``fit`` still holds the slope), ``"zero"`` (identically
    vanishing observable) or ``"error"``.
    """

    observable: str
    phase: Phase
    status: str
    fit: PowerLawFit | None = None
    sign: int = 1
    message: str = ""

    @property
    def exponent(self) -> float | None:
        return None if self.fit is None else self.fit.exponent


@dataclass(frozen=True)
class ExponentReport:
    dataset: SweepDataset
    cells: dict

    def __getitem__(self, key) -> ExponentCell:
        observable, phase = key
        return self.cells[(observable, Phase(phase))]


def _report_columns(observables) -> list[str]:
    cols = []
    for name in OBSERVABLES:
        if name not in observables:
            continue
        if name == "quadratures":
            cols.extend(QUADRATURE_LABELS)
        elif name == "im_lambda":
            cols.append("im_lambda_plus")
        else:
            cols.append(name)
    return cols


def _zero_scale(dataset: SweepDataset, column: str, phase: Phase) -> np.ndarray | None:
    if column == "im_lambda_plus":
        return None
    if column in QUADRATURE_LABELS:
        rows = [r for r in dataset.rows if r.ok and r.phase is phase and column in r.values]
        return np.array([max(abs(r.values[q]) for q in QUADRATURE_LABELS) for r in rows])
    return None


def _classify(dataset: SweepDataset, column: str, phase: Phase) -> ExponentCell:
    eps, vals = dataset.series(column, phase)
    if vals.size == 0:
        return ExponentCell(column, phase, "error", message="no usable rows")
    if column == "im_lambda_plus" and np.max(np.abs(vals)) <= IM_ZERO_ATOL:
        return ExponentCell(column, phase, "zero")
    scale = _zero_scale(dataset, column, phase)
    if scale is not None and np.all(np.abs(vals) <= QUADRATURE_ZERO_RTOL * scale):
        return ExponentCell(column, phase, "zero")
    sign = 1
    if np.all(vals < 0):
        sign, vals = -1, -vals
    try:
        fit = fit_power_law(eps, vals)
    except (NonPositiveValue, InsufficientData) as exc:
        return ExponentCell(column, phase, "error", message=str(exc))
    decades = math.log10(vals.max() / vals.min())
    if decades < FLAT_DECADES and abs(fit.exponent) < FLAT_SLOPE:
        return ExponentCell(column, phase, "flat", fit=fit, sign=sign)
    return ExponentCell(column, phase, "fit", fit=fit, sign=sign)


def exponent_report(params: ModelParams, spec: SweepSpec | None = None, workers: int = 1) -> ExponentReport:
    """Sweep, then fit every requested observable on each side of g_c."""
    spec = spec or SweepSpec()
    dataset = sweep(params, spec, workers=workers)
    cells = {}
    for column in _report_columns(spec.observables):
        for phase in spec.side.phases():
            cells[(column, phase)] = _classify(dataset, column, phase)
    return ExponentReport(dataset=dataset, cells=cells)
