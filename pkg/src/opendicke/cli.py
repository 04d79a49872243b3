"""Command-line front end.

Subcommands: ``report``, ``sweep``, ``spectrum``, ``noise``, ``ep-check``
and ``fit``.  Parameters come from ``--config FILE`` (flat ``key = value``
lines) overridden by flags.  Output is CSV (with ``#`` metadata lines) or
JSON (with a ``meta`` object); floats are written with 17 significant
digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .errors import DomainError, OpenDickeError
from .model import ModelParams, critical_coupling, drift_diffusion, ep_detuning, validate_params
from .scaling import OBSERVABLES, VALUE_COLUMNS, Side, SweepSpec, exponent_report, fit_power_law, sweep
from .spectral import DEFAULT_RANK_TOL, ep_defect, eigen_spectrum
from .steady import noise_spectrum

SWEEP_HEADER = ("g", "eps", "phase", "status", *VALUE_COLUMNS)
REPORT_HEADER = ("observable", "phase", "status", "exponent", "log_amplitude", "r_squared",
                 "n_points", "eps_min", "eps_max", "sign")


class ConfigError(ValueError):
    """Bad configuration file or option value (usage error)."""


@dataclass(frozen=True)
class RunConfig:
    omega: float = 1.0
    kappa: float = 1.0
    delta_kappa: float = 0.5
    delta: float | str = "ep"
    g: float | str = "critical"
    branch: int = 1
    side: str = "both"
    eps_min: float = 1e-4
    eps_max: float = 1e-2
    points_per_decade: int = 20
    observables: str = ",".join(OBSERVABLES)
    freq_min: float = 1e-4
    freq_max: float = 1e-2
    freq_points_per_decade: int = 20
    slow_tol: float | None = None
    rank_tol: float = DEFAULT_RANK_TOL
    input: str | None = None
    column: str | None = None
    phase: str | None = None
    workers: int = 1
    format: str = "csv"
    out: str | None = None

    def serialize(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {_format_config_value(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        updates = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            updates[key.replace("-", "_")] = value
        return cls().updated(updates)

    def updated(self, raw: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        parsed = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            parsed[key] = _coerce(key, value)
        return replace(self, **parsed)

    def model_params(self, g: float = 0.0) -> ModelParams:
        return validate_params(self.omega, self.kappa, self.delta_kappa, self.resolved_delta(), g)

    def resolved_delta(self) -> float:
        if self.delta == "ep":
            return ep_detuning(self.kappa, self.delta_kappa)
        return self.delta

    def sweep_spec(self) -> SweepSpec:
        observables = frozenset(s.strip() for s in self.observables.split(",") if s.strip())
        return SweepSpec(Side(self.side), self.eps_min, self.eps_max, self.points_per_decade, observables)


_FLOAT_KEYS = {"omega", "kappa", "delta_kappa", "eps_min", "eps_max", "freq_min", "freq_max",
               "slow_tol", "rank_tol"}
_INT_KEYS = {"branch", "points_per_decade", "freq_points_per_decade", "workers"}
_CHOICES = {"side": {s.value for s in Side}, "format": {"csv", "json"},
            "phase": {"normal", "superradiant"}}


def _format_config_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key == "delta":
            return "ep" if value == "ep" else float(value)
        if key == "g":
            return "critical" if value == "critical" else float(value)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(f"invalid value for {key}: {value!r} (choose from {sorted(_CHOICES[key])})")
    return value


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def _json_num(x):
    if x is None or isinstance(x, (str, bool)):
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.16e}")


class _Table:
    def __init__(self, meta: dict, columns, rows):
        self.meta = meta
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def render(self, fmt: str) -> str:
        if fmt == "json":
            payload = {
                "meta": {k: _json_num(v) for k, v in self.meta.items()},
                "columns": self.columns,
                "rows": [
                    {c: _json_num(v) for c, v in zip(self.columns, row)} for row in self.rows
                ],
            }
            return json.dumps(payload, indent=2) + "\n"
        buf = io.StringIO()
        for key, value in self.meta.items():
            buf.write(f"# {key} = {value if isinstance(value, str) else _num(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([v if isinstance(v, str) else _num(v) for v in row])
        return buf.getvalue()


def _meta(cfg: RunConfig, command: str, params: ModelParams | None = None) -> dict:
    meta = {"tool": "opendicke", "version": __version__, "command": command}
    if params is not None:
        meta.update(
            omega=params.omega,
            kappa=params.kappa,
            delta_kappa=params.delta_kappa,
            delta=params.delta,
            delta_mode="ep" if cfg.delta == "ep" else "explicit",
            g_c=critical_coupling(params),
        )
    return meta


def _resolve_g(cfg: RunConfig, params: ModelParams) -> float:
    return critical_coupling(params) if cfg.g == "critical" else float(cfg.g)


def cmd_sweep(cfg: RunConfig) -> _Table:
    params = cfg.model_params()
    data = sweep(params, cfg.sweep_spec(), workers=cfg.workers)
    rows = []
    for r in data.rows:
        vals = [r.values.get(c) if r.ok else None for c in VALUE_COLUMNS]
        rows.append([r.g, r.eps, r.phase.value, r.status, *vals])
    return _Table(_meta(cfg, "sweep", params), SWEEP_HEADER, rows)


def cmd_report(cfg: RunConfig) -> _Table:
    params = cfg.model_params()
    report = exponent_report(params, cfg.sweep_spec(), workers=cfg.workers)
    rows = []
    for cell in report.cells.values():
        fit = cell.fit
        rows.append([
            cell.observable, cell.phase.value, cell.status,
            None if fit is None else fit.exponent,
            None if fit is None else fit.log_amplitude,
            None if fit is None else fit.r_squared,
            None if fit is None else fit.n_points,
            None if fit is None else fit.window[0],
            None if fit is None else fit.window[1],
            cell.sign,
        ])
    meta = _meta(cfg, "report", params)
    meta.update(eps_min=cfg.eps_min, eps_max=cfg.eps_max, points_per_decade=cfg.points_per_decade)
    return _Table(meta, REPORT_HEADER, rows)


def cmd_spectrum(cfg: RunConfig) -> _Table:
    params = cfg.model_params()
    spec = cfg.sweep_spec()
    g_c = critical_coupling(params)
    columns = ["g", "eps", "phase", "status", "adr"]
    for k in range(1, 7):
        columns += [f"re{k}", f"im{k}"]
    rows = []
    for eps in spec.eps_grid():
        for phase in spec.side.phases():
            sign = -1.0 if phase.value == "normal" else 1.0
            g = g_c * (1.0 + sign * eps)
            try:
                s = eigen_spectrum(drift_diffusion(params.with_g(g), cfg.branch).a)
            except OpenDickeError:
                rows.append([g, eps, phase.value, "error", None] + [None] * 12)
                continue
            pairs = [x for lam in s.eigenvalues for x in (lam.real, lam.imag)]
            rows.append([g, eps, phase.value, "ok", s.adr, *pairs])
    return _Table(_meta(cfg, "spectrum", params), columns, rows)


def cmd_noise(cfg: RunConfig) -> _Table:
    params = cfg.model_params()
    g = _resolve_g(cfg, params)
    dd = drift_diffusion(params.with_g(g), cfg.branch)
    if not 0 < cfg.freq_min < cfg.freq_max:
        raise DomainError(f"need 0 < freq_min < freq_max, got {cfg.freq_min}, {cfg.freq_max}")
    grid = SweepSpec(Side.NORMAL, cfg.freq_min, cfg.freq_max, cfg.freq_points_per_decade).eps_grid()
    spec = noise_spectrum(dd.a, dd.d, grid)
    columns = ["omega"] + [f"s{k}{k}" for k in range(1, 7)]
    rows = [[w, *np.real(np.diag(m))] for w, m in zip(spec.omegas, spec.matrices)]
    meta = _meta(cfg, "noise", params)
    meta["g"] = g
    return _Table(meta, columns, rows)


def cmd_ep_check(cfg: RunConfig) -> _Table:
    params = cfg.model_params()
    g = _resolve_g(cfg, params)
    report = ep_defect(drift_diffusion(params.with_g(g), cfg.branch).a, cfg.slow_tol, cfg.rank_tol)
    meta = _meta(cfg, "ep-check", params)
    meta["g"] = g
    columns = ["n_slow", "numerical_rank", "geometric_multiplicity", "defective", "sigma_min"]
    row = [report.n_slow, report.numerical_rank, report.geometric_multiplicity,
           report.defective, float(report.singular_values[-1])]
    return _Table(meta, columns, [row])


def _read_csv(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            lines = [line for line in fh if not line.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read input {path!r}: {exc}") from None
    return list(csv.DictReader(lines))


def cmd_fit(cfg: RunConfig) -> _Table:
    if not cfg.input or not cfg.column:
        raise ConfigError("fit requires --input and --column")
    records = _read_csv(cfg.input)
    if records and cfg.column not in records[0]:
        raise ConfigError(f"column {cfg.column!r} not found in {cfg.input!r}")
    if records and "eps" not in records[0]:
        raise ConfigError(f"column 'eps' not found in {cfg.input!r}")
    eps, vals = [], []
    for rec in records:
        if rec.get("status", "ok") != "ok":
            continue
        if cfg.phase and rec.get("phase", cfg.phase) != cfg.phase:
            continue
        if rec[cfg.column] == "":
            continue
        eps.append(float(rec["eps"]))
        vals.append(float(rec[cfg.column]))
    fit = fit_power_law(eps, vals)
    meta = {"tool": "opendicke", "version": __version__, "command": "fit",
            "input": cfg.input, "column": cfg.column, "phase": cfg.phase or "any"}
    columns = ["exponent", "log_amplitude", "r_squared", "n_points", "eps_min", "eps_max"]
    row = [fit.exponent, fit.log_amplitude, fit.r_squared, fit.n_points, *fit.window]
    return _Table(meta, columns, [row])


COMMANDS = {
    "report": cmd_report,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "noise": cmd_noise,
    "ep-check": cmd_ep_check,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opendicke", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"opendicke {__version__}")
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat 'key = value' file; flags override it")
    common.add_argument("--omega")
    common.add_argument("--kappa")
    common.add_argument("--delta-kappa", dest="delta_kappa")
    common.add_argument("--delta", help="number, or 'ep' to tune to the exceptional point")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", help="output path (default: stdout)")

    grid = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    grid.add_argument("--side", choices=[s.value for s in Side])
    grid.add_argument("--eps-min", dest="eps_min")
    grid.add_argument("--eps-max", dest="eps_max")
    grid.add_argument("--points-per-decade", dest="points_per_decade")
    grid.add_argument("--observables", help=f"comma list from {','.join(OBSERVABLES)}")
    grid.add_argument("--workers")

    at_g = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    at_g.add_argument("--g", help="coupling, or 'critical'")
    at_g.add_argument("--branch", choices=["1", "-1"])

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("report", parents=[common, grid], help="critical-exponent table")
    sub.add_parser("sweep", parents=[common, grid], help="observables vs g (CSV/JSON)")
    sp = sub.add_parser("spectrum", parents=[common, grid], help="drift eigenvalues vs g")
    sp.add_argument("--branch", choices=["1", "-1"], default=argparse.SUPPRESS)
    noise = sub.add_parser("noise", parents=[common, at_g], help="noise spectrum diagonal at fixed g")
    noise.add_argument("--freq-min", dest="freq_min", default=argparse.SUPPRESS)
    noise.add_argument("--freq-max", dest="freq_max", default=argparse.SUPPRESS)
    noise.add_argument("--freq-points-per-decade", dest="freq_points_per_decade",
                       default=argparse.SUPPRESS)
    ep = sub.add_parser("ep-check", parents=[common, at_g], help="Jordan-block defect at g")
    ep.add_argument("--slow-tol", dest="slow_tol", default=argparse.SUPPRESS)
    ep.add_argument("--rank-tol", dest="rank_tol", default=argparse.SUPPRESS)
    fit = sub.add_parser("fit", parents=[common], help="re-fit a column of a stored CSV")
    fit.add_argument("--input", default=argparse.SUPPRESS)
    fit.add_argument("--column", default=argparse.SUPPRESS)
    fit.add_argument("--phase", choices=["normal", "superradiant"], default=argparse.SUPPRESS)
    return parser


def load_config(ns: argparse.Namespace) -> RunConfig:
    opts = vars(ns).copy()
    opts.pop("command", None)
    path = opts.pop("config", None)
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                cfg = RunConfig.parse(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return cfg.updated(opts)


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(ns)
        table = COMMANDS[ns.command](cfg)
        text = table.render(cfg.format)
    except ConfigError as exc:
        print(f"opendicke: usage error: {exc}", file=stderr)
        return 2
    except OpenDickeError as exc:
        print(f"opendicke: error: {exc}", file=stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run_cli())
