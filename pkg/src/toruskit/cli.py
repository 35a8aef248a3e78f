"""Configuration-driven command line front end.

One JSON config document drives every run; flags are only --config,
--output and --verbose.  Commands:

  check     sampled involution/independence verification
  floquet   monodromy + multiplier multiplicity test on the seed torus
  nondeg    algebraic nondegeneracy criterion for a homotopy class
  continue  torus-family continuation over a (beta, eps) grid
  freq      continuation followed by the frequency/twist analysis

Artifacts are CSV (stable column sets, shortest round-trip float
formatting, byte-identical across reruns of the same config) plus JSON
reports mirroring the record types.  Exit status: 0 pass, 1 principled
failure (a hypothesis or criterion does not hold), 2 numerical or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys as _sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .continuation import (
    ContinuationOptions,
    continue_family,
    frequency_twist,
    sample_torus,
)
from .errors import ConfigError, ToruskitError
from .floquet import check_hypothesis_iii, monodromy
from .flow import find_period_vector
from .hamiltonian import check_hypotheses, sample_neighborhood
from .models import MODEL_NAMES, ModelSpec, make_system
from .numerics import eigenvalues
from .reducible import determinant_criterion

__all__ = ["RunConfig", "parse_config", "execute", "main"]

COMMANDS = ("check", "floquet", "nondeg", "continue", "freq")

_TOL_DEFAULTS = {
    "tol_unit": 1e-6,
    "tol_int": 1e-8,
    "fixed_point": 1e-9,
    "ode_rel": 1e-10,
    "ode_abs": 1e-12,
}
_CHECK_DEFAULTS = {"count": 100, "radius": 0.1, "tol": 1e-9, "seed": 7}
_SYSTEM_KEYS = {
    "action_oscillators": {"name", "n", "s", "omega", "a"},
    "lyapunov": {"name", "omega1", "nu"},
    "isotropic_momentum": {"name", "omega", "nu", "a", "b"},
}


@dataclass
class RunConfig:
    """Validated run configuration with all defaults applied."""

    command: str
    system: dict
    alpha: list | None = None
    beta_grid: dict = field(default_factory=lambda: {"center": None, "step": 0.02, "count": 1})
    eps_grid: list = field(default_factory=lambda: [0.0])
    tolerances: dict = field(default_factory=lambda: dict(_TOL_DEFAULTS))
    outputs: str = "out"
    check: dict = field(default_factory=lambda: dict(_CHECK_DEFAULTS))
    grid_per_cycle: int = 16
    kappa: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _as_number(value, path):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value, path):
    _require(isinstance(value, int) and not isinstance(value, bool),
             path, f"expected an integer, got {value!r}")
    return int(value)


def _validate_system(raw) -> dict:
    _require(isinstance(raw, dict), "system", "expected an object")
    name = raw.get("name")
    _require(name in MODEL_NAMES, "system.name",
             f"expected one of {MODEL_NAMES}, got {name!r}")
    allowed = _SYSTEM_KEYS[name]
    for key in raw:
        _require(key in allowed, f"system.{key}", "unknown key")
    out = {"name": name}
    if name == "action_oscillators":
        _require("n" in raw and "s" in raw, "system", "action_oscillators needs n and s")
        out["n"] = _as_int(raw["n"], "system.n")
        out["s"] = _as_int(raw["s"], "system.s")
        _require("omega" in raw, "system.omega", "required")
        _require(isinstance(raw["omega"], list), "system.omega", "expected a list")
        out["omega"] = [_as_number(v, "system.omega") for v in raw["omega"]]
        if "a" in raw:
            _require(isinstance(raw["a"], list), "system.a", "expected a list")
            out["a"] = [_as_number(v, "system.a") for v in raw["a"]]
    else:
        for key in allowed - {"name"}:
            if key in raw:
                out[key] = _as_number(raw[key], f"system.{key}")
    return out


def _validate_tolerances(raw) -> dict:
    tols = dict(_TOL_DEFAULTS)
    if raw is None:
        return tols
    _require(isinstance(raw, dict), "tolerances", "expected an object")
    for key, value in raw.items():
        _require(key in _TOL_DEFAULTS, f"tolerances.{key}", "unknown key")
        val = _as_number(value, f"tolerances.{key}")
        _require(val > 0, f"tolerances.{key}", f"must be positive, got {val}")
        tols[key] = val
    return tols


def _validate_beta_grid(raw, s) -> dict:
    grid = {"center": None, "step": [0.02] * s, "count": [1] * s}
    if raw is None:
        return grid
    _require(isinstance(raw, dict), "beta_grid", "expected an object")
    for key in raw:
        _require(key in ("center", "step", "count"), f"beta_grid.{key}", "unknown key")
    if raw.get("center") is not None:
        center = raw["center"]
        _require(isinstance(center, list) and len(center) == s, "beta_grid.center",
                 f"expected a list of length s={s}")
        grid["center"] = [_as_number(v, "beta_grid.center") for v in center]
    step = raw.get("step", 0.02)
    if isinstance(step, list):
        _require(len(step) == s, "beta_grid.step", f"expected length s={s}")
        grid["step"] = [_as_number(v, "beta_grid.step") for v in step]
    else:
        grid["step"] = [_as_number(step, "beta_grid.step")] * s
    count = raw.get("count", 1)
    if isinstance(count, list):
        _require(len(count) == s, "beta_grid.count", f"expected length s={s}")
        counts = [_as_int(v, "beta_grid.count") for v in count]
    else:
        counts = [_as_int(count, "beta_grid.count")] * s
    for c in counts:
        _require(c >= 1, "beta_grid.count", f"must be >= 1, got {c}")
    grid["count"] = counts
    return grid


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document, applying defaults.

    Raises ConfigError naming the offending key path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), "config", "top level must be an object")
    known = {"command", "system", "alpha", "beta_grid", "eps_grid", "tolerances",
             "outputs", "check", "grid_per_cycle", "kappa"}
    for key in raw:
        _require(key in known, key, "unknown key")
    command = raw.get("command")
    _require(command in COMMANDS, "command", f"expected one of {COMMANDS}, got {command!r}")
    system = _validate_system(raw.get("system"))
    spec = _spec_from_config(system)  # validates model parameters early
    s = spec.s

    alpha = raw.get("alpha")
    if alpha is not None:
        _require(isinstance(alpha, list) and len(alpha) == s, "alpha",
                 f"expected a list of length s={s}")
        alpha = [_as_int(v, "alpha") for v in alpha]

    eps_grid = raw.get("eps_grid", [0.0])
    _require(isinstance(eps_grid, list), "eps_grid", "expected a list")
    if command in ("continue", "freq"):
        _require(len(eps_grid) > 0, "eps_grid", "must be nonempty")
    eps_grid = [_as_number(v, "eps_grid") for v in eps_grid]

    check_cfg = dict(_CHECK_DEFAULTS)
    if raw.get("check") is not None:
        _require(isinstance(raw["check"], dict), "check", "expected an object")
        for key, value in raw["check"].items():
            _require(key in _CHECK_DEFAULTS, f"check.{key}", "unknown key")
            if key in ("count", "seed"):
                check_cfg[key] = _as_int(value, f"check.{key}")
            else:
                check_cfg[key] = _as_number(value, f"check.{key}")
        _require(check_cfg["count"] >= 1, "check.count", "must be >= 1")

    grid_per_cycle = raw.get("grid_per_cycle", 16)
    grid_per_cycle = _as_int(grid_per_cycle, "grid_per_cycle")
    _require(grid_per_cycle >= 1, "grid_per_cycle", "must be >= 1")

    kappa = raw.get("kappa", 1)
    kappa = _as_int(kappa, "kappa")
    _require(1 <= kappa <= s, "kappa", f"must be in 1..{s}")

    outputs = raw.get("outputs", "out")
    _require(isinstance(outputs, str), "outputs", "expected a path string")

    cfg = RunConfig(
        command=command,
        system=system,
        alpha=alpha,
        beta_grid=_validate_beta_grid(raw.get("beta_grid"), s),
        eps_grid=eps_grid,
        tolerances=_validate_tolerances(raw.get("tolerances")),
        outputs=outputs,
        check=check_cfg,
        grid_per_cycle=grid_per_cycle,
        kappa=kappa,
    )
    if command in ("continue", "freq"):
        total = int(np.prod(cfg.beta_grid["count"])) * len(eps_grid)
        _require(total >= 1, "beta_grid.count", "grid is empty")
    return cfg


def _spec_from_config(system: dict) -> ModelSpec:
    params = {k: v for k, v in system.items() if k not in ("name", "n", "s")}
    return ModelSpec(system["name"], params,
                     n=system.get("n", 0), s=system.get("s", 0))


# ---------------------------------------------------------------------------
# serialization helpers

def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; bare repr for the rest."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [{"re": float(v.real), "im": float(v.imag)} for v in obj.ravel()]
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and np.isnan(obj):
        return None
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# command implementations

def _beta_axes(cfg: RunConfig, seed) -> list:
    center = cfg.beta_grid["center"]
    center = np.asarray(center, dtype=float) if center is not None else seed.beta0
    axes = []
    for k in range(len(center)):
        cnt = cfg.beta_grid["count"][k]
        step = cfg.beta_grid["step"][k]
        axes.append(center[k] + step * (np.arange(cnt) - (cnt - 1) / 2.0))
    return axes


def _beta_nodes(axes) -> list:
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    return [row.copy() for row in flat]


def _options(cfg: RunConfig) -> ContinuationOptions:
    tol = cfg.tolerances
    return ContinuationOptions(
        fixed_point_tol=tol["fixed_point"],
        rtol=tol["ode_rel"],
        atol=tol["ode_abs"],
    )


def _cmd_check(cfg, sys_, seed, fd, out, verbose):
    reports = []
    for eps in cfg.eps_grid:
        pts = sample_neighborhood(seed.base_point, cfg.check["radius"],
                                  cfg.check["count"], seed=cfg.check["seed"])
        rep = check_hypotheses(sys_, pts, eps, cfg.check["tol"])
        reports.append({"eps": eps, "report": rep})
        if verbose:
            print(f"check eps={eps}: max bracket {rep.max_bracket:.3e}, "
                  f"min sv {rep.min_singular_value:.3e}, pass={rep.passed}",
                  file=_sys.stderr)
    passed = all(r["report"].passed for r in reports)
    _write_json(out / "hypothesis_report.json",
                {"passed": passed, "reports": reports})
    return 0 if passed else 1


def _seed_pv(cfg, sys_, seed, eps, opts):
    alpha = np.asarray(cfg.alpha if cfg.alpha is not None else seed.alpha, dtype=int)
    c_guess = seed.lattice_c_guesses @ alpha.astype(float)
    return find_period_vector(sys_, seed.base_point, alpha, c_guess, eps,
                              tol=opts.period_tol, rtol=opts.rtol, atol=opts.atol)


def _cmd_floquet(cfg, sys_, seed, fd, out, verbose):
    opts = _options(cfg)
    eps = cfg.eps_grid[0]
    pv = _seed_pv(cfg, sys_, seed, eps, opts)
    rep = monodromy(sys_, seed.base_point, pv, eps,
                    tol_unit=cfg.tolerances["tol_unit"],
                    rtol=opts.rtol, atol=opts.atol)
    order = np.lexsort((rep.multipliers.imag, rep.multipliers.real))
    rows = []
    for rank, idx in enumerate(order, start=1):
        lam = rep.multipliers[idx]
        rows.append((rank, float(lam.real), float(lam.imag), float(abs(lam - 1.0))))
    _write_csv(out / "multipliers.csv", ["index", "re", "im", "abs_minus_one"], rows)
    verdict = check_hypothesis_iii(rep, sys_.s)
    _write_json(out / "monodromy_report.json",
                {"report": rep, "hypothesis_iii": verdict, "eps": eps,
                 "period_vector": {"c": pv.c, "alpha": pv.alpha, "residual": pv.residual}})
    if verbose:
        print(f"floquet: unit multiplicity {rep.unit_multiplicity} "
              f"(expected {2 * sys_.s}), pass={verdict.passed}", file=_sys.stderr)
    return 0 if verdict.passed else 1


def _cmd_nondeg(cfg, sys_, seed, fd, out, verbose):
    alpha = np.asarray(cfg.alpha if cfg.alpha is not None else seed.alpha, dtype=int)
    res = determinant_criterion(fd, alpha, tol_int=cfg.tolerances["tol_int"])
    _write_json(out / "criterion_result.json", res)
    if verbose:
        print(f"nondeg: Q={res.Q}, margin={res.margin:.6f}, "
              f"verdict={'nondegenerate' if res.nondegenerate else 'degenerate'}",
              file=_sys.stderr)
    return 0 if res.nondegenerate else 1


def _run_family(cfg, sys_, seed):
    axes = _beta_axes(cfg, seed)
    nodes = _beta_nodes(axes)
    opts = _options(cfg)
    return continue_family(sys_, seed, nodes, cfg.eps_grid, options=opts), opts


def _family_rows(cfg, sys_, family):
    s = sys_.s
    tol_unit = cfg.tolerances["tol_unit"]
    rows = []
    for rec in family.records:
        beta = [float(b) for b in rec.beta]
        if rec.converged:
            unit = 2 * s
            if rec.return_jacobian is not None and rec.return_jacobian.size:
                ev = eigenvalues(rec.return_jacobian)
                unit += int(np.count_nonzero(np.abs(ev - 1.0) < tol_unit))
            freqs = [float(f) for f in rec.frequencies]
            rows.append(beta + [rec.epsilon,
                                float(np.max(np.abs(rec.y_star))) if rec.y_star.size else 0.0,
                                rec.residual] + freqs + [1, unit])
        else:
            rows.append(beta + [rec.epsilon, float("nan"), float("nan")]
                        + [float("nan")] * s + [0, 0])
    return rows


def _cmd_continue(cfg, sys_, seed, fd, out, verbose):
    family, opts = _run_family(cfg, sys_, seed)
    s = sys_.s
    header = ([f"beta_{k + 1}" for k in range(s)] + ["eps", "y_norm", "residual"]
              + [f"freq_{k + 1}" for k in range(s)] + ["converged", "unit_multiplicity"])
    _write_csv(out / "family.csv", header, _family_rows(cfg, sys_, family))

    sample_header = (["record_id"] + [f"theta_{k + 1}" for k in range(s)]
                     + [f"x_{k + 1}" for k in range(sys_.dim)] + ["F_dev_max"])
    sample_rows = []
    for idx, rec in enumerate(family.records):
        if not rec.converged:
            continue
        grid, thetas, _ = sample_torus(sys_, rec, rec.lattice_pvs, cfg.grid_per_cycle,
                                       rec.epsilon, rtol=opts.rtol, atol=opts.atol)
        flat = grid.reshape(-1, sys_.dim)
        th = thetas.reshape(-1, s)
        devs = np.zeros(flat.shape[0])
        for i in range(1, s + 1):
            vals = np.asarray(sys_.F(i, flat, rec.epsilon), dtype=float)
            devs = np.maximum(devs, np.abs(vals - rec.beta[i - 1]))
        for r in range(flat.shape[0]):
            sample_rows.append([idx] + [float(v) for v in th[r]]
                               + [float(v) for v in flat[r]] + [float(devs[r])])
        if verbose:
            print(f"node {idx}: sampled {flat.shape[0]} points, "
                  f"max F dev {devs.max():.3e}", file=_sys.stderr)
    _write_csv(out / "torus_samples.csv", sample_header, sample_rows)
    all_ok = all(rec.converged for rec in family.records)
    return (0 if all_ok else 1), family


def _cmd_freq(cfg, sys_, seed, fd, out, verbose):
    family, _ = _run_family(cfg, sys_, seed)
    s = sys_.s
    header = ([f"beta_{k + 1}" for k in range(s)] + ["eps", "y_norm", "residual"]
              + [f"freq_{k + 1}" for k in range(s)] + ["converged", "unit_multiplicity"])
    _write_csv(out / "family.csv", header, _family_rows(cfg, sys_, family))
    report = frequency_twist(sys_, family, kappa=cfg.kappa)
    _write_json(out / "twist_report.json", report)
    twist_header = [f"beta_{k + 1}" for k in range(s)] + ["eps", "twist_det", "degenerate"]
    rows = [[float(b) for b in ent.beta] + [ent.eps, ent.twist_det, int(ent.degenerate)]
            for ent in report.entries]
    _write_csv(out / "twist.csv", twist_header, rows)
    if verbose:
        print(f"freq: {len(report.entries)} interior nodes, "
              f"sign_stable={report.sign_stable}, all_degenerate={report.all_degenerate}",
              file=_sys.stderr)
    return 1 if report.all_degenerate else 0


def execute(cfg: RunConfig, verbose: bool = False) -> int:
    """Run the configured command; returns the process exit status."""
    print("config: " + json.dumps(cfg.to_dict(), sort_keys=True))
    spec = _spec_from_config(cfg.system)
    sys_, seed, fd = make_system(spec)
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.command == "check":
        return _cmd_check(cfg, sys_, seed, fd, out, verbose)
    if cfg.command == "floquet":
        return _cmd_floquet(cfg, sys_, seed, fd, out, verbose)
    if cfg.command == "nondeg":
        return _cmd_nondeg(cfg, sys_, seed, fd, out, verbose)
    if cfg.command == "continue":
        status, _ = _cmd_continue(cfg, sys_, seed, fd, out, verbose)
        return status
    return _cmd_freq(cfg, sys_, seed, fd, out, verbose)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="toruskit",
        description="Invariant-torus persistence checks and continuation",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--output", default=None, help="override the outputs directory")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.output is not None:
            cfg.outputs = args.output
        return execute(cfg, verbose=args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except ToruskitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
