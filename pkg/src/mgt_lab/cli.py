"""Command-line entry point: experiment presets with machine-readable output.

Usage::

    mgt-lab <preset> [--config FILE] [--tau X --beta Y --n N --s S --p P
                      --T T --out DIR --jobs J --seed K ...]

Each run writes ``<out>/series.csv`` (first column always t) and
``<out>/summary.json`` (configuration echo, measured quantities, expected
values, pass flag).  Exit codes: 0 pass, 1 configuration error, 2 quantitative
fail.  Runs are deterministic: identical config and seed give byte-identical
CSV.

Config files are flat ``key = value`` text with INI-style sections: ``[common]``
plus one section per preset.  Command-line flags override file values; unknown
keys are rejected.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import experiments, fields, norms, oracle, rates
from .errors import ConfigError, MgtLabError
from .fitting import fit_decay
from .kernels import build_mode_table, char_roots, degenerate_radii, discriminant, kernel_values, mode_propagator
from .params import ModelParams

PRESETS = (
    "roots",
    "kernel-check",
    "rates",
    "linear-decay",
    "profile",
    "approx-relation",
    "singular-limit",
    "solution-limit",
    "semilinear-decay",
    "blowup-scan",
    "fps-check",
)

def _parse_bool(s) -> bool:
    return str(s).lower() in ("1", "true", "yes", "on")


_FIELD_TYPES = {
    "tau": float,
    "beta": float,
    "n": int,
    "s": float,
    "p": float,
    "T": float,
    "grid_n": int,
    "grid_l": float,
    "t_lo": float,
    "t_hi": float,
    "tolerance": float,
    "amplitude": float,
    "width": float,
    "radius": float,
    "center": float,
    "data": str,
    "prepared": _parse_bool,
    "save_field": _parse_bool,
    "out": str,
    "jobs": int,
    "seed": int,
}

_DEFAULTS = {
    "tau": 0.5,
    "beta": 1.0,
    "n": 1,
    "s": 0.0,
    "p": 2.0,
    "T": 10.0,
    "grid_n": 0,      # 0: preset picks
    "grid_l": 0.0,    # 0: preset picks
    "t_lo": 1e2,
    "t_hi": 1e4,
    "tolerance": 0.0,  # 0: preset default
    "amplitude": 1.0,
    "width": 1.0,
    "radius": 1.0,
    "center": 0.0,
    "data": "gaussian",
    "prepared": False,
    "save_field": False,
    "out": "out",
    "jobs": 1,
    "seed": 42,
}

# per-preset defaults so a bare invocation reproduces the headline scenario
_PRESET_DEFAULTS = {
    "singular-limit": {"T": 1.0},
    "solution-limit": {"n": 3, "T": 1.0},
    "semilinear-decay": {"n": 3, "s": 1.0, "p": 3.0, "T": 200.0, "amplitude": 1e-3},
    "blowup-scan": {"n": 1, "p": 2.0, "T": 1e4},
    "fps-check": {"n": 1, "T": 5.0, "grid_l": 32.0, "radius": 1.0},
}


@dataclass
class ExperimentConfig:
    preset: str
    values: dict = dc_field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def normalized(self) -> dict:
        out = {"preset": self.preset}
        out.update({k: self.values[k] for k in sorted(self.values)})
        return out


def _coerce(key: str, raw, where: str):
    typ = _FIELD_TYPES[key]
    try:
        return typ(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: cannot parse {raw!r}") from exc


def parse_config(preset: str, path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults, config file and flag overrides; reject unknown keys."""
    if preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    values = dict(_DEFAULTS)
    values.update(_PRESET_DEFAULTS.get(preset, {}))
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config: no such file {path!r}")
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keys are case-sensitive (T vs t_lo)
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"config: parse failure: {exc}") from exc
        for section in cp.sections():
            if section not in ("common",) + PRESETS:
                raise ConfigError(f"config.[{section}]: unknown section")
            if section not in ("common", preset):
                continue
            for key, raw in cp.items(section):
                if key not in values:
                    raise ConfigError(f"config.[{section}].{key}: unknown key")
                values[key] = _coerce(key, raw, f"[{section}]")
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in values:
            raise ConfigError(f"flags.{key}: unknown key")
        values[key] = _coerce(key, raw, "flags")
    try:
        ModelParams(values["tau"], values["beta"])
    except MgtLabError as exc:
        raise ConfigError(f"params: {exc}") from exc
    return ExperimentConfig(preset=preset, values=values)


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _data_profile(cfg: ExperimentConfig):
    kind = cfg.data
    if kind == "gaussian":
        return fields.gaussian_profile(cfg.center, cfg.width, cfg.amplitude)
    if kind == "bump":
        return fields.bump_profile(cfg.center, cfg.radius, cfg.amplitude)
    if kind == "odd-gaussian":
        return fields.odd_gaussian_profile(cfg.width, cfg.amplitude)
    raise ConfigError(f"data: unknown profile {kind!r} (gaussian, bump, odd-gaussian)")


def _params(cfg) -> ModelParams:
    return ModelParams(cfg.tau, cfg.beta)


# ---------------------------------------------------------------------------
# Preset implementations: each returns (passed, summary, series columns)
# ---------------------------------------------------------------------------

def _run_roots(cfg, outdir):
    params = _params(cfg)
    rs = np.geomspace(1e-3, 1e3, 241)
    worst = 0.0
    cols = {"t": rs, "re1": [], "im1": [], "re2": [], "im2": [], "re3": [], "im3": [], "disc": []}
    for r in rs:
        tr = char_roots(float(r), params)
        lam = tr.roots
        e1, e2, e3 = -1.0 / params.tau, params.beta * r * r / params.tau, -r * r / params.tau
        s1 = lam.sum()
        s2 = lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2]
        s3 = lam.prod()
        worst = max(
            worst,
            abs(s1 - e1) / max(abs(e1), 1.0),
            abs(s2 - e2) / max(abs(e2), 1.0),
            abs(s3 - e3) / max(abs(e3), 1.0),
            float(np.max(np.abs(lam.real))) if np.any(lam.real >= 0) else 0.0,
        )
        for j in range(3):
            cols[f"re{j + 1}"].append(lam[j].real)
            cols[f"im{j + 1}"].append(lam[j].imag)
        cols["disc"].append(discriminant(float(r), params))
    tol = cfg.tolerance or 1e-10
    passed = worst <= tol
    summary = {
        "max_vieta_residual": worst,
        "tolerance": tol,
        "degenerate_radii": degenerate_radii(params),
    }
    _write_csv(outdir / "series.csv", list(cols), [np.asarray(c) for c in cols.values()])
    return passed, summary


def _run_kernel_check(cfg, outdir):
    params = _params(cfg)
    oracle.warm_up()
    radii = [0.0, 1e-3, 1e-1, 1.0, 10.0, 1e3]
    for rstar in degenerate_radii(params):
        if rstar > 0.0:
            delta = 1e-6 * max(1.0 / params.tau, math.sqrt(params.beta / params.tau) * rstar)
            radii.extend([rstar - 10 * delta, rstar, rstar + 10 * delta])
    times = np.array([0.1, 1.0, 10.0])
    worst = 0.0
    rows_r, rows_t, rows_e = [], [], []
    for r in radii:
        num = np.stack([kernel_values(t, r, params).K for t in times])
        ref = oracle.integrate_propagator(params, r, times, tol=1e-11)
        for i, t in enumerate(times):
            scale = max(1.0, float(np.abs(ref[i]).max()))
            err = float(np.abs(num[i] - ref[i]).max()) / scale
            worst = max(worst, err)
            rows_r.append(r)
            rows_t.append(t)
            rows_e.append(err)
    tol = cfg.tolerance or 1e-8
    summary = {"max_rel_error": worst, "tolerance": tol, "radii": radii}
    _write_csv(outdir / "series.csv", ["t", "r", "rel_error"], [np.array(rows_t), np.array(rows_r), np.array(rows_e)])
    return worst <= tol, summary


def _run_rates(cfg, outdir):
    n, s = cfg.n, cfg.s
    times = np.geomspace(1.0 + 1e-9, cfg.t_hi, 49)
    table = {
        "t": times,
        "D": [rates.rate_D(n, t) for t in times],
        "F_m1": [rates.rate_F(1, n, s, t) for t in times],
        "h": [rates.rate_h(s, t) for t in times],
    }
    if n >= 2:
        table["g_tilde"] = [rates.rate_g_tilde(n, s, t) for t in times]
    _write_csv(outdir / "series.csv", list(table), [np.asarray(c) for c in table.values()])
    summary = {"n": n, "s": s, "columns": list(table)}
    return True, summary


def _run_linear_decay(cfg, outdir):
    params = _params(cfg)
    window = (cfg.t_lo, cfg.t_hi)
    res = experiments.linear_decay_experiment(cfg.n, cfg.s, params, window, width=cfg.width)
    expected = _expected_linear_rate(cfg.n, cfg.s)
    tol = cfg.tolerance or (0.05 if expected["model"] == "pure-power" else 0.1)
    if expected["model"] == "log-only":
        passed = res.fit.model == "log-only" and abs(res.fit.exponent_log - expected["exponent"]) <= tol
        measured = {"model": res.fit.model, "exponent_log": res.fit.exponent_log}
    else:
        passed = abs(res.fit.exponent_t - expected["exponent"]) <= tol
        measured = {"model": res.fit.model, "exponent_t": res.fit.exponent_t}
    summary = {"expected": expected, "measured": measured, "tolerance": tol, "rms_residual": res.fit.rms_residual}
    _write_csv(outdir / "series.csv", ["t", "norm"], [res.times, res.values])
    return passed, summary


def _expected_linear_rate(n: int, s: float) -> dict:
    # m = 1 rates for the fit comparison
    if n == 2 and s == 0.0:
        return {"model": "log-only", "exponent": 0.5}
    if n == 1 and s == 0.0:
        return {"model": "pure-power", "exponent": 0.5}
    exp_t = math.log(rates.rate_F(1, n, s, math.e * 1e4) / rates.rate_F(1, n, s, math.e * 1e2)) / math.log(
        (1 + math.e * 1e4) / (1 + math.e * 1e2)
    )
    return {"model": "pure-power", "exponent": exp_t}


def _run_profile(cfg, outdir):
    params = _params(cfg)
    data = norms.radial_gaussian_data(cfg.n, params, width=cfg.width, amplitude=cfg.amplitude, t_max=cfg.t_hi)
    times = experiments.log_times(cfg.t_lo, cfg.t_hi)
    ratios = experiments.profile_experiment(data, params, times)
    band = float(ratios.max() / ratios.min())
    tol = cfg.tolerance or 2.0
    summary = {"band_factor": band, "tolerance_factor": tol, "ratio_min": float(ratios.min()), "ratio_max": float(ratios.max())}
    _write_csv(outdir / "series.csv", ["t", "ratio"], [times, ratios])
    return band < tol, summary


def _run_approx_relation(cfg, outdir):
    params = _params(cfg)
    data = norms.radial_gaussian_data(cfg.n, params, width=cfg.width, amplitude=cfg.amplitude, t_max=cfg.t_hi)
    times = experiments.log_times(cfg.t_lo, cfg.t_hi)
    diff = experiments.approx_relation_experiment(data, params, times)
    fit = fit_decay(times, diff, (cfg.t_lo, cfg.t_hi), model="pure-power")
    if cfg.n == 1:
        tol = cfg.tolerance or 0.05
        passed = abs(fit.exponent_t - 0.25) <= tol
        expected = {"exponent_t": 0.25}
    elif cfg.n == 2:
        tol = cfg.tolerance or 0.05
        passed = fit.exponent_t <= tol
        expected = {"exponent_t_max": tol}
    else:
        tol = cfg.tolerance or 0.0
        passed = True  # gained rate open for n >= 3; measured value reported only
        expected = {"note": "gained decay rate open for n >= 3; reporting measurement"}
    summary = {"measured_exponent_t": fit.exponent_t, "expected": expected, "tolerance": tol, "pass": passed}
    _write_csv(outdir / "series.csv", ["t", "difference_norm"], [times, diff])
    return passed, summary


def _sweep_setup(cfg):
    params = _params(cfg)
    beta = params.beta
    taus = [beta / 4, beta / 8, beta / 16, beta / 32, beta / 64]
    n = cfg.n
    if cfg.grid_n and cfg.grid_l:
        grid = fields.Grid(n, cfg.grid_l, cfg.grid_n)
    elif n == 1:
        grid = fields.Grid(1, 32.0, 512)
    else:
        grid = fields.Grid(n, 32.0, 64)
    g = fields.gaussian_profile(0.0, cfg.width, cfg.amplitude)
    g2 = fields.gaussian_profile(0.0, cfg.width * 0.8, 0.8 * cfg.amplitude)
    initial = fields.make_field(grid, (g, g2, fields.gaussian_profile(0.0, max(0.6, cfg.width * 0.7), 1.2 * cfg.amplitude)))
    if cfg.prepared:
        initial = experiments.make_prepared_third_slot(initial, beta)
    return params, taus, grid, initial


def _run_singular_limit(cfg, outdir):
    params, taus, grid, initial = _sweep_setup(cfg)
    res = experiments.singular_limit_sweep(initial, params.beta, taus, cfg.T, jobs=cfg.jobs)
    expected = 2.0 if cfg.prepared else 1.0
    tol = cfg.tolerance or 0.15
    passed = abs(res.slope - expected) <= tol
    summary = {
        "slope": res.slope,
        "expected": expected,
        "tolerance": tol,
        "prepared": bool(cfg.prepared),
        "taus": list(map(float, res.taus)),
        "values": list(map(float, res.values)),
        "energies_at_T": list(map(float, res.energies)),
    }
    _write_csv(outdir / "series.csv", ["t", "bounded_quantity"], [res.taus, res.values])
    return passed, summary


def _run_solution_limit(cfg, outdir):
    if cfg.n < 3:
        raise ConfigError("n: solution-limit needs n >= 3")
    params, taus, grid, initial = _sweep_setup(cfg)
    res = experiments.solution_limit_sweep(initial, params.beta, taus, cfg.T, jobs=cfg.jobs)
    tol = cfg.tolerance or 0.2
    passed = abs(res.slope - 2.0) <= tol
    summary = {"slope": res.slope, "expected": 2.0, "tolerance": tol, "taus": list(map(float, res.taus))}
    _write_csv(outdir / "series.csv", ["t", "w_norm_sq"], [res.taus, res.values])
    return passed, summary


def sup_drift_ok(times: np.ndarray, ratios: np.ndarray, t_split: float = 10.0, factor: float = 1.2) -> bool:
    """Running-sup drift check: the weighted sup stops growing after t_split.

    sup_{t > t_split} R(t) <= factor * sup_{t <= t_split} R(t); this is the
    boundedness proxy for the time-weighted solution ball.
    """
    before = ratios[times <= t_split]
    after = ratios[times > t_split]
    if before.size == 0 or after.size == 0:
        return True
    return bool(after.max() <= factor * before.max())


def _run_semilinear_decay(cfg, outdir):
    params = _params(cfg)
    n = cfg.n
    grid = fields.Grid(n, cfg.grid_l or 100.0, cfg.grid_n or 64)
    initial = fields.make_field(grid, (None, None, _data_profile(cfg)))
    res = experiments.semilinear_decay_experiment(initial, params, cfg.s, cfg.p, cfg.T)
    drift_ok = sup_drift_ok(res.times, res.ratio_l2) and sup_drift_ok(res.times, res.ratio_hs)
    passed = res.status == "completed" and np.isfinite(res.sup_l2) and np.isfinite(res.sup_hs) and drift_ok
    summary = {
        "status": res.status,
        "sup_l2_ratio": res.sup_l2,
        "sup_hs_ratio": res.sup_hs,
        "drift_ok_after_t10": drift_ok,
    }
    _write_csv(
        outdir / "series.csv",
        ["t", "l2", "hs", "ratio_l2", "ratio_hs"],
        [res.times, res.l2, res.hs, res.ratio_l2, res.ratio_hs],
    )
    return passed, summary


def _run_blowup_scan(cfg, outdir):
    params = _params(cfg)
    grid = fields.Grid(cfg.n, cfg.grid_l or 2048.0, cfg.grid_n or (16384 if cfg.n == 1 else 64))
    initial = fields.make_field(grid, (None, None, _data_profile(cfg)))
    controls = fields.EvolveControls(h_init=min(0.01, cfg.T * 1e-3))
    outcome = fields.evolve_until(initial, params, cfg.p, cfg.T, controls)
    hist = outcome.history
    case = "blowup" if outcome.status == "blowup" else "completed"
    monotone = None
    if case == "completed":
        t_arr, l2 = hist["t"], hist["l2"]
        last_mask = t_arr >= t_arr[-1] / 10.0
        diffs = np.diff(l2[last_mask])
        monotone = bool(np.all(diffs > 0))
        case = "monotone-growth" if monotone else "no-growth"
    passed = case in ("blowup", "monotone-growth") if rates.blowup_admissible(cfg.n, cfg.p) else case == "no-growth"
    summary = {
        "case": case,
        "status": outcome.status,
        "bracket": list(outcome.blowup_bracket) if outcome.blowup_bracket else None,
        "admissible": bool(rates.blowup_admissible(cfg.n, cfg.p)),
    }
    _write_csv(outdir / "series.csv", ["t", "l2", "linf"], [hist["t"], hist["l2"], hist["linf"]])
    if cfg.save_field:
        fields.save_field_bin(outcome.final, outdir / "field.bin")
    return passed, summary


def _run_fps_check(cfg, outdir):
    params = _params(cfg)
    L = cfg.grid_l or 32.0
    grid = fields.Grid(cfg.n, L, cfg.grid_n or 2048)
    bump = fields.bump_profile(cfg.center, cfg.radius, cfg.amplitude)
    initial = fields.make_field(grid, (None, None, bump))
    final = fields.linear_evolve(initial, params, cfg.T)
    R = cfg.radius + params.wave_speed * cfg.T * 1.05
    outside = fields.fps_outside_mass(final, cfg.center, R)
    total = fields.fps_outside_mass(final, cfg.center, 1e-9 * L)
    frac = outside / total if total > 0 else 0.0
    tol = cfg.tolerance or 1e-8
    summary = {"outside_fraction": frac, "tolerance": tol, "radius": R, "speed": params.wave_speed}
    _write_csv(outdir / "series.csv", ["t", "outside_fraction"], [np.array([cfg.T]), np.array([frac])])
    if cfg.save_field:
        fields.save_field_bin(final, outdir / "field.bin")
    return frac < tol, summary


_RUNNERS = {
    "roots": _run_roots,
    "kernel-check": _run_kernel_check,
    "rates": _run_rates,
    "linear-decay": _run_linear_decay,
    "profile": _run_profile,
    "approx-relation": _run_approx_relation,
    "singular-limit": _run_singular_limit,
    "solution-limit": _run_solution_limit,
    "semilinear-decay": _run_semilinear_decay,
    "blowup-scan": _run_blowup_scan,
    "fps-check": _run_fps_check,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute a configured preset; write artifacts; return the exit code."""
    np.random.seed(cfg.seed)  # presets are deterministic; seed pins any sampling
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    passed, summary = _RUNNERS[cfg.preset](cfg, outdir)
    payload = {"config": cfg.normalized(), "pass": bool(passed), **summary}
    with open(outdir / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return 0 if passed else 2


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mgt-lab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("preset", choices=PRESETS)
    ap.add_argument("--config", default=None)
    for key in _DEFAULTS:
        flag = "--" + key.replace("_", "-")
        ap.add_argument(flag, dest=key, default=None)
    args = ap.parse_args(argv)
    overrides = {k: getattr(args, k) for k in _DEFAULTS}
    try:
        cfg = parse_config(args.preset, args.config, overrides)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except MgtLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
