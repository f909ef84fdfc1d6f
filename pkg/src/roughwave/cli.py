"""Command-line entry point: config parsing, experiment orchestration, persistence.

Subcommands: kernels (decay-kernel CSV sweeps), verify (certification
suites), solve (one fixed-point run), scale (large-data pipeline), report
(aggregate persisted outputs into summary tables and plot data).

Exit codes: 0 success, 1 suite failure, 2 bad configuration or usage,
3 smallness violation.  Diagnostics go to stderr; data and summaries go to
stdout or files under the output directory.  Every run writes a
manifest.json with the config hash, the seed, and tool versions; equal
manifests reproduce equal outputs.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    GridOverflowError,
    PreconditionError,
    RoughwaveError,
    SmallnessError,
    SupportError,
)
from .kernels import (
    ModelParams,
    default_decay_c,
    derived_exponents,
    kernel_eval,
    pointwise_bound_ratio,
    r_lambda,
)
from .propagator import (
    PicardConfig,
    default_T_final,
    fit_data_to_budget,
    picard_solve,
    regularity_norms,
    save_record,
)
from .scaling import build_scaling_plan, descale_solution, data_pair_norm
from .spectral import (
    GridSpec,
    SpectralField,
    gaussian_cube_field,
    load_field_binary,
    load_field_csv,
    save_field_binary,
    zero_field,
)
from .verify import SUITES, fit_pipeline_constants, run_suites, _suite_rng

ENV_PREFIX = "ROUGHWAVE_"

DEFAULT_CONFIG = {
    "model": {"sigma": "1.0", "delta": "0.0", "p": "2", "n": "1"},
    "grid": {"M": "4", "K": "64"},
    "norm": {"alpha": "-1.0", "s": "auto"},
    "solver": {
        "T_final": "auto",
        "steps": "2048",
        "max_iter": "25",
        "contraction_tol": "1e-7",
        "residual_tol": "1e-6",
        "nu_fraction": "1.0",
        "time_grid": "uniform",
        "shell_tol": "1e-8",
        "budget_fraction": "0.5",
    },
    "data": {"generator": "single_cube", "cubes": "1,2", "amplitude": "1.0", "u0_file": "", "u1_file": ""},
    "scaling": {"eps0": "0.25", "oversize": "10.0", "budget_safety": "4096"},
    "io": {"out_dir": "roughwave-out", "format": "csv"},
    "run": {"seed": "0", "workers": "4"},
}


@dataclass
class RunConfig:
    """Validated run configuration assembled from defaults, file, environment."""

    params: ModelParams
    grid: GridSpec
    alpha: float
    s: float | None
    solver: dict
    data: dict
    scaling: dict
    out_dir: str
    fmt: str
    seed: int
    workers: int
    raw: dict


def _load_sections(path: str | None) -> dict:
    merged = {sec: dict(vals) for sec, vals in DEFAULT_CONFIG.items()}
    if path:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}")
        for sec in parser.sections():
            if sec not in merged:
                raise ConfigError(f"unknown config section [{sec}]")
            # configparser lowercases option names; match canonical keys
            # case-insensitively
            canon = {k.lower(): k for k in merged[sec]}
            for key, val in parser.items(sec):
                if key.lower() not in canon:
                    raise ConfigError(f"unknown key {key!r} in section [{sec}]")
                merged[sec][canon[key.lower()]] = val
    for name, val in os.environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        try:
            _, sec, key = name.split("_", 2)
        except ValueError:
            continue
        sec, key = sec.lower(), key.lower()
        for section, keys in merged.items():
            if section == sec:
                matched = [k for k in keys if k.lower() == key]
                if matched:
                    keys[matched[0]] = val
    return merged


def _f(section: dict, key: str, where: str) -> float:
    try:
        return float(section[key])
    except ValueError:
        raise ConfigError(f"[{where}] {key} = {section[key]!r} is not a number")


def _i(section: dict, key: str, where: str) -> int:
    try:
        return int(section[key])
    except ValueError:
        raise ConfigError(f"[{where}] {key} = {section[key]!r} is not an integer")


def load_config(path: str | None) -> RunConfig:
    raw = _load_sections(path)
    try:
        params = ModelParams(
            sigma=_f(raw["model"], "sigma", "model"),
            delta=_f(raw["model"], "delta", "model"),
            p=_i(raw["model"], "p", "model"),
            n=_i(raw["model"], "n", "model"),
        )
        grid = GridSpec(params.n, _i(raw["grid"], "M", "grid"), _i(raw["grid"], "K", "grid"))
    except ValueError as exc:
        raise ConfigError(str(exc))
    alpha = _f(raw["norm"], "alpha", "norm")
    s_raw = raw["norm"]["s"]
    s = None if s_raw.strip().lower() == "auto" else float(s_raw)
    solver = dict(raw["solver"])
    return RunConfig(
        params=params,
        grid=grid,
        alpha=alpha,
        s=s,
        solver=solver,
        data=dict(raw["data"]),
        scaling=dict(raw["scaling"]),
        out_dir=raw["io"]["out_dir"],
        fmt=raw["io"]["format"],
        seed=_i(raw["run"], "seed", "run"),
        workers=_i(raw["run"], "workers", "run"),
        raw=raw,
    )


def _config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def write_manifest(out_dir: str, command: str, cfg: RunConfig, seed: int):
    os.makedirs(out_dir, exist_ok=True)
    import scipy

    manifest = {
        "command": command,
        "config_hash": _config_hash(cfg.raw),
        "seed": seed,
        "versions": {
            "roughwave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)


def _picard_config(cfg: RunConfig, lam: float = 1.0, eps0: float = 0.25) -> PicardConfig:
    sv = cfg.solver
    t_raw = sv["T_final"].strip().lower()
    if t_raw == "auto":
        T = min(default_T_final(cfg.params, lam, default_decay_c(cfg.params), eps0=eps0), 160.0)
    else:
        T = float(t_raw)
    return PicardConfig(
        T_final=T,
        steps=int(sv["steps"]),
        max_iter=int(sv["max_iter"]),
        contraction_tol=float(sv["contraction_tol"]),
        residual_tol=float(sv["residual_tol"]),
        nu_fraction=float(sv["nu_fraction"]),
        grid=sv["time_grid"],
        alpha=cfg.alpha,
        s=cfg.s,
        shell_tol=float(sv["shell_tol"]),
        constants_seed=cfg.seed,
    )


def _parse_cubes(text: str, n: int) -> list[tuple[int, ...]]:
    cubes = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) == 1 and n > 1:
            parts = parts * n
        if len(parts) != n:
            raise ConfigError(f"cube {chunk!r} has {len(parts)} components, expected {n}")
        cubes.append(tuple(int(p) for p in parts))
    if not cubes:
        raise ConfigError("no cubes given for the data generator")
    return cubes


def build_data(cfg: RunConfig, lam: float, eps0: float) -> tuple[SpectralField, SpectralField]:
    """Construct (u0, u1) per the configured generator; supports are admissible."""
    amp = float(cfg.data.get("amplitude", "1.0"))
    u0, u1 = _generate_data(cfg, lam, eps0)
    if amp != 1.0:
        u0, u1 = u0 * amp, u1 * amp
    return u0, u1


def _generate_data(cfg: RunConfig, lam: float, eps0: float) -> tuple[SpectralField, SpectralField]:
    gen = cfg.data["generator"].strip().lower()
    dx = derived_exponents(cfg.params, eps0)
    floor = r_lambda(dx, lam)
    rng = _suite_rng(f"cli-data-{gen}", cfg.seed)
    if gen == "zero":
        return zero_field(cfg.grid), zero_field(cfg.grid)
    if gen == "single_cube":
        cubes = _parse_cubes(cfg.data["cubes"], cfg.params.n)
        u0 = gaussian_cube_field(cfg.grid, cubes, rng, octant_floor=floor)
        u1 = gaussian_cube_field(cfg.grid, cubes, rng, octant_floor=floor)
        return u0, u1
    if gen == "random_octant":
        lo, hi = cfg.grid.cube_range()
        k_lo = max(0, math.ceil(floor - 1e-9))
        cubes = [tuple([k] * cfg.params.n) for k in range(k_lo, min(k_lo + 3, hi - 1))]
        u0 = gaussian_cube_field(cfg.grid, cubes, rng, octant_floor=floor)
        u1 = gaussian_cube_field(cfg.grid, cubes, rng, octant_floor=floor)
        return u0, u1
    if gen == "thin_shell":
        # the two lowest admissible lattice radii above the support floor;
        # keeps lam * xi_top small enough for the scaling pipeline's lattice
        N = cfg.grid.points_per_axis
        m_lo = max(1, math.ceil(floor * cfg.grid.M - 1e-9))
        out = []
        for _ in range(2):
            c = np.zeros(cfg.grid.shape, dtype=np.complex128)
            for m in (m_lo, m_lo + 1):
                pos = (m + N // 2,) + (0,) * (cfg.params.n - 1)
                c[pos] = rng.standard_normal() + 1j * rng.standard_normal()
            out.append(SpectralField(cfg.grid, c, octant_floor=floor))
        return out[0], out[1]
    if gen == "file":
        loaders = {".rwf": load_field_binary, ".csv": load_field_csv}
        fields = []
        for key in ("u0_file", "u1_file"):
            path = cfg.data[key].strip()
            if not path:
                raise ConfigError(f"data generator 'file' needs {key}")
            ext = os.path.splitext(path)[1]
            if ext not in loaders:
                raise ConfigError(f"unsupported field format {ext!r} for {key}")
            fields.append(loaders[ext](path))
        return fields[0], fields[1]
    raise ConfigError(f"unknown data generator {gen!r}")


# -- subcommands --------------------------------------------------------------


def cmd_kernels(cfg: RunConfig, args) -> int:
    pairs = {
        "effective": (1.0, 0.0),
        "scale_invariant": (2.0, 1.0),
        "non_effective": (1.0, 1.0),
    }
    if args.regime:
        if args.regime not in pairs:
            print(f"unknown regime {args.regime!r}; known: {sorted(pairs)}", file=sys.stderr)
            return 2
        pairs = {args.regime: pairs[args.regime]}
    eps0 = float(cfg.scaling["eps0"])
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "kernels.csv")
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma", "delta", "lambda", "r", "t", "which", "value_re", "value_im", "ratio"])
        for regime, (sig, dlt) in sorted(pairs.items()):
            par = ModelParams(sig, dlt, cfg.params.p, 1)
            dx = derived_exponents(par, eps0)
            for lam in (1.0, 2.0, 4.0, 8.0):
                floor = r_lambda(dx, lam)
                for x in (1.0, 2.0, 4.0, 8.0):
                    r = x * floor
                    for t in (0.0, 0.1, 1.0, 10.0):
                        kv = kernel_eval(par, lam, r, t)
                        for which in ("K0", "K1", "dtK0", "dtK1"):
                            val = kv.get(which)
                            ratio = pointwise_bound_ratio(par, lam, r, t, which, eps0=eps0)
                            writer.writerow(
                                [sig, dlt, lam, f"{r!r}", f"{t!r}", which, f"{val.real!r}", f"{val.imag!r}", f"{ratio!r}"]
                            )
                            rows += 1
    write_manifest(out_dir, "kernels", cfg, cfg.seed)
    print(f"wrote {rows} sweep rows to {path}")
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    names = list(SUITES) if args.suite in (None, "all") else [args.suite]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        print(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else cfg.seed
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    reports = run_suites(names, seed=seed, workers=cfg.workers)
    all_pass = True
    for rep in reports:
        with open(os.path.join(out_dir, f"suite_{rep.suite_name}.json"), "w") as fh:
            fh.write(rep.to_json())
        n_pass = sum(1 for c in rep.cases if c["pass"])
        print(f"{rep.suite_name:20s} {rep.verdict:4s}  {n_pass}/{len(rep.cases)} cases")
        for c in rep.cases:
            if not c["pass"]:
                print(f"  FAIL {c['name']}", file=sys.stderr)
        all_pass &= rep.verdict == "pass"
    write_manifest(out_dir, "verify", cfg, seed)
    return 0 if all_pass else 1


def cmd_solve(cfg: RunConfig, args) -> int:
    eps0 = float(cfg.scaling["eps0"])
    run_cfg = _picard_config(cfg, 1.0, eps0)
    u0, u1 = build_data(cfg, 1.0, eps0)
    frac = float(cfg.solver["budget_fraction"])
    if not args.no_budget_fit and not (u0.is_zero() and u1.is_zero()):
        u0, u1, C0, C1 = fit_data_to_budget(cfg.params, 1.0, u0, u1, run_cfg, eps0, fraction=frac)
        run_cfg = replace(run_cfg, c0=C0, c1=C1)
    try:
        rec = picard_solve(cfg.params, 1.0, u0, u1, run_cfg, eps0)
    except SmallnessError as exc:
        print(
            f"smallness violated: linear weighted norm {exc.measured:.6e} "
            f"exceeds nu/2 = {exc.budget:.6e}; rescale the data or run `scale`",
            file=sys.stderr,
        )
        return 3
    out_dir = args.out or cfg.out_dir
    run_dir = os.path.join(out_dir, "run")
    save_record(run_dir, rec)
    write_manifest(out_dir, "solve", cfg, cfg.seed)
    reg = regularity_norms(rec, cfg.params, 1.0, run_cfg.alpha, rec.s)
    print(
        f"converged={rec.converged} iterations={rec.iterations} "
        f"residual={rec.residual:.3e} X_norm={rec.X_norm:.6g} nu={rec.nu:.6g}"
    )
    print(f"norms: l1={reg['l1_norm']:.6g} linf={reg['linf_norm']:.6g} dt_linf={reg['dt_linf_norm']:.6g}")
    print(f"record: {run_dir}")
    return 0


def cmd_scale(cfg: RunConfig, args) -> int:
    eps0 = float(cfg.scaling["eps0"])
    if cfg.alpha >= 0:
        print("scaling pipeline needs alpha < 0 (alpha = 0 is the small-data regime)", file=sys.stderr)
        return 2
    params = cfg.params
    dx = derived_exponents(params, eps0)
    s = cfg.s if cfg.s is not None else dx.s_min
    rng = _suite_rng("cli-scale", cfg.seed)
    fit_grid = GridSpec(params.n, cfg.grid.M, min(cfg.grid.K, 64))
    consts = fit_pipeline_constants(params, fit_grid, rng, cfg.alpha, s, eps0)
    safety = float(cfg.scaling["budget_safety"])
    consts["C0"] *= safety
    consts["C1"] *= safety

    if cfg.data["generator"].strip().lower() != "file":
        cfg = replace(cfg, data={**cfg.data, "generator": "thin_shell"})
    u0, u1 = build_data(cfg, 1.0, eps0)
    # normalize to the requested oversize relative to the lam=2 admissible norm
    from .scaling import selection_margin

    norm0 = data_pair_norm(u0, u1, cfg.alpha, s, dx.kappa_bar)
    if norm0 == 0.0:
        print("zero data cannot drive the scaling pipeline", file=sys.stderr)
        return 2
    d2 = norm0 * selection_margin(2, norm0, params, cfg.alpha, s, consts, eps0)
    target = float(cfg.scaling["oversize"]) * d2
    u0 = u0 * (target / norm0)
    u1 = u1 * (target / norm0)

    try:
        plan = build_scaling_plan(u0, u1, params, cfg.alpha, s, consts, eps0, lam_override=args.lam)
    except (PreconditionError, GridOverflowError, SupportError) as exc:
        print(f"scaling plan failed: {exc}", file=sys.stderr)
        return 2
    print(
        f"lambda={plan.lam} nu={plan.nu:.6g} epsilon={plan.epsilon:.6g} "
        f"margin={plan.margin:.4f} original_norm={plan.original_norm:.6g}"
    )
    run_cfg = _picard_config(cfg, plan.lam, eps0)
    run_cfg = replace(run_cfg, c0=consts["C0"], c1=consts["C1"], nu_fraction=1.0)
    try:
        rec = picard_solve(params, plan.lam, plan.scaled_u0, plan.scaled_u1, run_cfg, eps0)
    except SmallnessError as exc:
        print(
            f"rescaled data still violate smallness: {exc.measured:.3e} > {exc.budget:.3e}",
            file=sys.stderr,
        )
        return 3
    desc = descale_solution(rec, plan.lam, params, cfg.alpha, eps0)
    out_dir = args.out or cfg.out_dir
    run_dir = os.path.join(out_dir, "scaled-run")
    save_record(run_dir, rec)
    plan_meta = {
        "lambda": plan.lam,
        "nu": plan.nu,
        "epsilon": plan.epsilon,
        "R_lambda": plan.R_lambda,
        "original_norm": plan.original_norm,
        "margin": plan.margin,
        "constants": plan.constants,
        "alpha0": desc["alpha0"],
        "descaled_residual": desc["residual"],
        "descaled_l1_norm": desc["l1_norm"],
        "descaled_linf_norm": desc["linf_norm"],
    }
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "scaling_plan.json"), "w") as fh:
        json.dump(plan_meta, fh, sort_keys=True, indent=1)
    save_field_binary(os.path.join(out_dir, "scaled_u0.rwf"), plan.scaled_u0)
    save_field_binary(os.path.join(out_dir, "scaled_u1.rwf"), plan.scaled_u1)
    write_manifest(out_dir, "scale", cfg, cfg.seed)
    print(
        f"solved: iterations={rec.iterations} residual={rec.residual:.3e}; "
        f"descaled residual={desc['residual']:.3e} at radius alpha0={desc['alpha0']:g}"
    )
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    target = args.dir or cfg.out_dir
    if not os.path.isdir(target):
        print(f"no such directory: {target}", file=sys.stderr)
        return 2
    rows = []
    plots = 0
    for entry in sorted(os.listdir(target)):
        path = os.path.join(target, entry)
        meta_path = os.path.join(path, "metadata.json")
        if os.path.isdir(path) and os.path.exists(meta_path):
            with open(meta_path) as fh:
                meta = json.load(fh)
            rows.append(
                (
                    entry,
                    f"run sigma={meta['params']['sigma']:g} delta={meta['params']['delta']:g} "
                    f"lam={meta['lambda']:g} iters={meta['iterations']} residual={meta['residual']:.2e}",
                )
            )
            dat = os.path.join(target, f"norm_vs_time_{entry}.dat")
            with open(dat, "w") as fh:
                for t, v in zip(meta["times"], meta["norm_trace"]):
                    fh.write(f"{t!r} {v!r}\n")
            plots += 1
        elif entry.startswith("suite_") and entry.endswith(".json"):
            with open(path) as fh:
                rep = json.load(fh)
            rows.append((entry, f"suite {rep['suite_name']}: {rep['verdict']}"))
            per_lam_rows = []
            for case in rep.get("cases", []):
                if "per_lam" in case:
                    for lam, val in sorted(case["per_lam"].items(), key=lambda kv: float(kv[0])):
                        per_lam_rows.append((case["name"], float(lam), val))
            if per_lam_rows:
                dat = os.path.join(target, f"ratio_vs_lambda_{rep['suite_name']}.dat")
                with open(dat, "w") as fh:
                    current = None
                    for name, lam, val in per_lam_rows:
                        if name != current:
                            fh.write(f"# {name}\n")
                            current = name
                        fh.write(f"{lam!r} {val!r}\n")
                plots += 1
        elif entry == "kernels.csv":
            env: dict[tuple, dict[float, float]] = {}
            with open(path) as fh:
                for row in csv.DictReader(fh):
                    if row["which"] != "K0":
                        continue
                    key = (row["sigma"], row["delta"], row["lambda"])
                    t = float(row["t"])
                    mag = abs(complex(float(row["value_re"]), float(row["value_im"])))
                    env.setdefault(key, {})
                    env[key][t] = max(env[key].get(t, 0.0), mag)
            dat = os.path.join(target, "decay_envelope.dat")
            with open(dat, "w") as fh:
                for key in sorted(env):
                    fh.write(f"# sigma={key[0]} delta={key[1]} lambda={key[2]}\n")
                    running = None
                    for t in sorted(env[key]):
                        # monotone envelope: cumulative max of later times
                        tail_max = max(v for tt, v in env[key].items() if tt >= t)
                        running = tail_max if running is None else min(running, tail_max)
                        fh.write(f"{t!r} {running!r}\n")
            rows.append((entry, f"kernel sweep with {sum(len(v) for v in env.values())} envelope points"))
            plots += 1
    if not rows:
        print(f"nothing to report in {target}", file=sys.stderr)
        return 2
    print(f"{'artifact':40s} summary")
    for name, summary in rows:
        print(f"{name:40s} {summary}")
    print(f"({plots} plot-data files written)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="roughwave", description=__doc__)
    parser.add_argument("--config", help="INI config file; env vars ROUGHWAVE_SECTION_KEY override")
    sub = parser.add_subparsers(dest="command", required=True)

    p_k = sub.add_parser("kernels", help="emit kernel decay sweep CSV")
    p_k.add_argument("--regime", help="restrict to one damping regime")
    p_k.add_argument("--out", help="output directory")

    p_v = sub.add_parser("verify", help="run certification suites")
    p_v.add_argument("--suite", default="all", help="suite name or 'all'")
    p_v.add_argument("--seed", type=int, help="suite seed")
    p_v.add_argument("--out", help="output directory")

    p_s = sub.add_parser("solve", help="run the fixed-point solver")
    p_s.add_argument("--out", help="output directory")
    p_s.add_argument(
        "--no-budget-fit",
        action="store_true",
        help="use the data amplitude as given instead of fitting it to the budget",
    )

    p_c = sub.add_parser("scale", help="large-data pipeline: select scale, solve, descale")
    p_c.add_argument("--lambda", dest="lam", type=int, help="override the selected integer scale")
    p_c.add_argument("--out", help="output directory")

    p_r = sub.add_parser("report", help="aggregate persisted outputs")
    p_r.add_argument("dir", nargs="?", help="directory to scan (default: configured out_dir)")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "kernels":
            return cmd_kernels(cfg, args)
        if args.command == "verify":
            return cmd_verify(cfg, args)
        if args.command == "solve":
            return cmd_solve(cfg, args)
        if args.command == "scale":
            return cmd_scale(cfg, args)
        if args.command == "report":
            return cmd_report(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RoughwaveError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
