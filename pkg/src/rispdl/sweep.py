"""Parameter sweeps, configuration files and result tables."""
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import analytic
from .channel import (ArrayGeometry, CorrelationSpec, LinkGains, Scenario,
                      default_tau_bar, link_gains_from_geometry, linear_to_db,
                      scenario_matrices)
from .errors import ConfigError, RisPdlError
from .montecarlo import estimate_mean_snr
from .pdl import LossParams

AXES = ("N", "alpha", "l_min", "rho_ru", "theta")
OUTPUTS = ("analytic", "simulated", "mu1_approx", "penalty")
OUTPUT_ORDER = {name: i for i, name in enumerate(OUTPUTS)}
COLUMNS = ("series", "axis", "value", "output", "linear", "db", "std_error",
           "trials", "seed", "route")
SIGMA_POLICY = 3.0


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    axis: str
    values: tuple
    trials: int = 100_000
    seed: int = 2024
    outputs: tuple = ("analytic", "simulated")
    label: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"sweep.axis: expected one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep.values: must not be empty")
        if not self.outputs:
            raise ConfigError("sweep.outputs: must not be empty")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"sweep.outputs: unknown kinds {bad}; expected {OUTPUTS}")
        if self.axis == "N":
            if any(int(v) != v or v < 1 for v in self.values):
                raise ConfigError("sweep.values: N values must be positive integers")
        if "simulated" in self.outputs and self.trials < 2:
            raise ConfigError("sweep.trials: need at least 2 trials")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))


def ris_shape(N):
    """(n_y, n_z) with n_z the largest divisor of N not above sqrt(N)."""
    N = int(N)
    n_z = max(d for d in range(1, math.isqrt(N) + 1) if N % d == 0)
    return N // n_z, n_z


def apply_axis(s, axis, value):
    if axis == "N":
        n_y, n_z = ris_shape(value)
        return replace(s, geometry=replace(s.geometry, n_y=n_y, n_z=n_z))
    if axis == "rho_ru":
        return replace(s, correlation=replace(s.correlation, rho_ru=float(value)))
    return s.with_loss(**{axis: float(value)})


def _to_db(x):
    return float(linear_to_db(x)) if x > 0 else -math.inf


def _evaluate_point(spec, value):
    s = apply_axis(spec.base, spec.axis, value)
    mats = scenario_matrices(s)
    rows = []
    route = ""
    if {"analytic", "penalty"} & set(spec.outputs):
        br = analytic.mean_snr(s, mats)
        route = br.route
    for kind in spec.outputs:
        row = {"series": spec.label, "axis": spec.axis, "value": value,
               "output": kind, "std_error": "", "trials": "", "seed": "",
               "route": route}
        if kind == "analytic":
            row.update(linear=br.total, db=_to_db(br.total))
        elif kind == "penalty":
            pen = analytic.pdl_penalty(s, mats)
            row.update(linear=pen, db="")
        elif kind == "mu1_approx":
            approx = analytic.mu1_scaling_approximation(s, mats)
            row.update(linear=approx, db=_to_db(approx))
        else:
            est = estimate_mean_snr(s, spec.trials, spec.seed, matrices=mats)
            row.update(linear=est.mean, db=_to_db(est.mean),
                       std_error=est.std_error, trials=est.trials, seed=est.seed)
        rows.append(row)
    return rows


def run_sweep(spec, workers=None):
    """Evaluate every sweep point; rows ordered by (value, output kind)."""
    values = sorted(spec.values)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(lambda v: _evaluate_point(spec, v), values))
    else:
        per_point = [_evaluate_point(spec, v) for v in values]
    rows = [r for point in per_point for r in point]
    rows.sort(key=lambda r: (r["value"], OUTPUT_ORDER[r["output"]]))
    return rows


def run_sweeps(specs, workers=None):
    return [row for spec in specs for row in run_sweep(spec, workers)]


def verify_rows(rows, policy=SIGMA_POLICY):
    """Pair analytic and simulated rows and score them against the policy."""
    analytic_rows, sim_rows = {}, {}
    for r in rows:
        key = (r["series"], r["value"])
        if r["output"] == "analytic":
            analytic_rows[key] = r
        elif r["output"] == "simulated":
            sim_rows[key] = r
    points = []
    for key in sorted(set(analytic_rows) & set(sim_rows), key=lambda k: (k[0], k[1])):
        a, m = analytic_rows[key], sim_rows[key]
        se = float(m["std_error"])
        z = (float(m["linear"]) - float(a["linear"])) / se if se > 0 else math.inf
        points.append({"series": key[0], "axis": a["axis"], "value": key[1],
                       "analytic": float(a["linear"]), "simulated": float(m["linear"]),
                       "std_error": se, "z": z, "route": a["route"],
                       "pass": abs(z) <= policy})
    return {"policy_sigma": policy, "points": points,
            "passed": bool(points) and all(p["pass"] for p in points)}


def verify_report(specs, workers=None, policy=SIGMA_POLICY):
    """Run the sweeps and score analytic against simulated at ``policy`` sigma."""
    if isinstance(specs, SweepSpec):
        specs = [specs]
    for spec in specs:
        if not {"analytic", "simulated"} <= set(spec.outputs):
            raise ConfigError("verify needs both 'analytic' and 'simulated' outputs")
    return verify_rows(run_sweeps(specs, workers), policy)


def format_report(summary):
    lines = [f"{'series':<24} {'axis':>6} {'value':>8} {'analytic':>14} "
             f"{'simulated':>14} {'z':>7}  result"]
    for p in summary["points"]:
        lines.append(
            f"{p['series']:<24} {p['axis']:>6} {p['value']:>8g} {p['analytic']:>14.6g} "
            f"{p['simulated']:>14.6g} {p['z']:>7.2f}  {'pass' if p['pass'] else 'FAIL'}")
    n_ok = sum(p["pass"] for p in summary["points"])
    lines.append(f"{n_ok}/{len(summary['points'])} points within "
                 f"{summary['policy_sigma']:g} sigma: "
                 f"{'PASS' if summary['passed'] else 'FAIL'}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CSV

def _fmt(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, timestamp=True):
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in COLUMNS])
    return buf.getvalue()


def _parse_cell(col, text):
    if text == "":
        return ""
    if col in ("series", "axis", "output", "route"):
        return text
    if col in ("trials", "seed"):
        return int(text)
    if col == "value":
        v = float(text)
        return int(v) if text.lstrip("-").isdigit() else v
    return float(text)


def csv_to_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [{c: _parse_cell(c, r[c]) for c in COLUMNS} for r in reader]


def plot_series(rows):
    """{(series, output): [(x, y), ...]} for plotting tools."""
    out = {}
    for r in rows:
        out.setdefault((r["series"], r["output"]), []).append((r["value"], r["linear"]))
    return out


# ---------------------------------------------------------------------------
# configuration files

SCENARIO_KEYS = {
    "m_y", "m_z", "n_y", "n_z", "N", "d_b", "theta_A_deg", "omega_A_deg",
    "theta_D_deg", "omega_D_deg", "rho_d", "rho_ru", "l_min", "alpha", "theta",
    "beta_d", "beta_d_db", "beta_ru", "beta_ru_db", "beta_br", "beta_br_db",
    "tau_bar", "tau_bar_db", "es", "noise_dbm",
    "d", "d_v", "d_br", "C0_db", "alpha_ru", "alpha_d",
}
SWEEP_KEYS = {"axis", "values", "trials", "seed", "outputs", "label"}


def _pick(table, name, default=None):
    """Value of ``name`` given either linearly or as ``name_db``."""
    lin, db = table.get(name), table.get(name + "_db")
    if lin is not None and db is not None:
        raise ConfigError(f"scenario: set only one of {name!r} and {name + '_db'!r}")
    if db is not None:
        return 10.0 ** (float(db) / 10.0)
    return default if lin is None else float(lin)


def scenario_from_table(table):
    unknown = set(table) - SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"scenario: unknown keys {sorted(unknown)}")
    try:
        geo = ArrayGeometry()
        geo_kw = {}
        for k in ("m_y", "m_z", "n_y", "n_z"):
            if k in table:
                geo_kw[k] = int(table[k])
        if "N" in table:
            if "n_y" in table or "n_z" in table:
                raise ConfigError("scenario: set either N or n_y/n_z")
            geo_kw["n_y"], geo_kw["n_z"] = ris_shape(int(table["N"]))
        if "d_b" in table:
            geo_kw["d_b"] = float(table["d_b"])
        for k in ("theta_A", "omega_A", "theta_D", "omega_D"):
            if k + "_deg" in table:
                geo_kw[k] = math.radians(float(table[k + "_deg"]))
        geo = replace(geo, **geo_kw)

        corr = CorrelationSpec(rho_d=float(table.get("rho_d", 0.7)),
                               rho_ru=float(table.get("rho_ru", 0.95)))
        loss = LossParams(l_min=float(table.get("l_min", 0.5)),
                          alpha=float(table.get("alpha", 1.2)),
                          theta=float(table.get("theta", 0.2)))

        deploy = {k: float(table[k]) for k in
                  ("d", "d_v", "d_br", "C0_db", "alpha_ru", "alpha_d") if k in table}
        ref = link_gains_from_geometry(**deploy)
        gains = LinkGains(beta_d=_pick(table, "beta_d", ref.beta_d),
                          beta_ru=_pick(table, "beta_ru", ref.beta_ru),
                          beta_br=_pick(table, "beta_br", ref.beta_br))

        tau = _pick(table, "tau_bar")
        if tau is not None and ("es" in table or "noise_dbm" in table):
            raise ConfigError("scenario: set tau_bar or es/noise_dbm, not both")
        if tau is None:
            tau = default_tau_bar(float(table.get("es", 1.0)),
                                  float(table.get("noise_dbm", -65.0)))
        return Scenario(geometry=geo, correlation=corr, gains=gains, loss=loss,
                        tau_bar=tau)
    except ConfigError:
        raise
    except (RisPdlError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def sweep_from_table(base, table):
    unknown = set(table) - SWEEP_KEYS
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")
    for key in ("axis", "values"):
        if key not in table:
            raise ConfigError(f"sweep.{key}: required")
    return SweepSpec(base=base, axis=table["axis"], values=tuple(table["values"]),
                     trials=int(table.get("trials", 100_000)),
                     seed=int(table.get("seed", 2024)),
                     outputs=tuple(table.get("outputs", ("analytic", "simulated"))),
                     label=str(table.get("label", "")))


def load_config(path_or_text, is_text=False):
    """Parse a TOML config into ``(scenario, [SweepSpec, ...])``.

    ``[scenario]`` holds the base scenario; ``[sweep]`` (or an array of
    ``[[sweep]]`` tables) the sweep definitions, which are optional.
    """
    try:
        if is_text:
            doc = tomllib.loads(path_or_text)
        else:
            with open(path_or_text, "rb") as fh:
                doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    extra = set(doc) - {"scenario", "sweep"}
    if extra:
        raise ConfigError(f"unknown top-level tables {sorted(extra)}")
    base = scenario_from_table(doc.get("scenario", {}))
    sweeps = doc.get("sweep", [])
    if isinstance(sweeps, dict):
        sweeps = [sweeps]
    return base, [sweep_from_table(base, t) for t in sweeps]


# ---------------------------------------------------------------------------
# presets reproducing the reference sweeps

FIG3_N = (4, 16, 36, 64, 100)
FIG3_RHO_RU = (0.0, 0.95, 1.0)
FIG4_ALPHA = tuple(round(0.2 * i, 10) for i in range(16))
FIG4_L_MIN = (0.1, 0.5, 0.95)
FIG4_THETA = (0.2, 0.42)
FIG4_N = (16, 64)


def reference_scenario(**loss_kw):
    """Reference deployment: 4x4 BS, rho_d = 0.7, fixed LOS angles."""
    return Scenario(correlation=CorrelationSpec(rho_d=0.7, rho_ru=0.95),
                    loss=LossParams(**{"l_min": 0.5, "alpha": 1.2, "theta": 0.2,
                                       **loss_kw}))


def fig3_specs(trials=100_000, seed=2024,
               outputs=("analytic", "simulated", "mu1_approx")):
    specs = []
    for rho in FIG3_RHO_RU:
        base = replace(reference_scenario(),
                       correlation=CorrelationSpec(rho_d=0.7, rho_ru=rho))
        specs.append(SweepSpec(base=base, axis="N", values=FIG3_N, trials=trials,
                               seed=seed, outputs=outputs, label=f"rho_ru={rho:g}"))
    return specs


def fig4_specs(trials=10_000, seed=2024, outputs=("analytic", "simulated")):
    specs = []
    for N in FIG4_N:
        n_y, n_z = ris_shape(N)
        for l_min in FIG4_L_MIN:
            for theta in FIG4_THETA:
                base = reference_scenario(l_min=l_min, theta=theta)
                base = replace(base,
                               geometry=replace(base.geometry, n_y=n_y, n_z=n_z),
                               correlation=CorrelationSpec(rho_d=0.7, rho_ru=0.7))
                specs.append(SweepSpec(
                    base=base, axis="alpha", values=FIG4_ALPHA, trials=trials,
                    seed=seed, outputs=outputs,
                    label=f"N={N},l_min={l_min:g},theta={theta:g}"))
    return specs


PRESETS = {"fig3": fig3_specs, "fig4": fig4_specs}


def summary_json(summary):
    return json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n"
