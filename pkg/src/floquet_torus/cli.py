"""Command-line entry point: experiment orchestration and artifact emission.

Every subcommand reads a JSON config, writes CSV/JSON artifacts plus a
manifest (config hash, version, seed, timestamps) into the output directory,
and exits 0 only if all pass-expected checks pass (2 for config errors).
Identical config and seed give byte-identical CSV outputs; wall-clock
timestamps live only in the manifest.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .artifacts import utc_now, write_csv, write_json, write_manifest
from .config import ConfigError, build_experiment, config_hash, validate_config
from .estimates import (
    carleman_min_modulus,
    cluster_constant_sweep,
    injectivity_estimate,
    resolvent_lp_bounds,
    split_potential,
)
from .gelfand import (
    SupercellFunction,
    band_structure,
    bloch_isometry_defect,
    direct_integral_check,
    gelfand_forward,
    gelfand_inverse,
    thomas_scan,
)
from .grids import GridFunction, TorusGrid
from .operators import conformal_potential, verify_conformal_identity
from .resolvent import EigenvalueList, series_S
from .transverse import flat_lattice_eigenvalues

SUBCOMMANDS = (
    "transverse-spec",
    "carleman",
    "series-s",
    "sogge",
    "resolvent-lp",
    "conformal",
    "split-q",
    "injectivity",
    "bands",
    "thomas",
    "gelfand-check",
    "validate-config",
)


def _parser():
    p = argparse.ArgumentParser(
        prog="floquet-torus",
        description="Floquet-Bloch spectral checks for periodic operators on tori",
    )
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="path to the JSON experiment config")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--format", default=None, choices=("csv", "json"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tau", default=None, help="comma-separated tau override")
    p.add_argument("--epsilon", type=float, default=None, help="split target for split-q")
    p.add_argument("--m-max", type=int, default=None, help="cluster range override")
    return p


def _load_config(args):
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"config file: {exc}"])
    cfg = validate_config(doc)
    if args.out:
        cfg["output"]["directory"] = args.out
    if args.format:
        cfg["output"]["format"] = args.format
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.tau:
        cfg["tau_sweep"] = [float(t) for t in args.tau.split(",")]
    return cfg


def _emit(cfg, name, header, rows, report):
    outdir = cfg["output"]["directory"]
    os.makedirs(outdir, exist_ok=True)
    write_csv(os.path.join(outdir, f"{name}.csv"), header, rows)
    write_json(os.path.join(outdir, f"{name}.json"), report)


def _spectrum_for(exp, reach):
    """Eigenvalue list with a completeness bound adequate for resonances near tau^2."""
    basis = exp.space.basis
    if type(basis).__name__ == "FlatTransverseBasis":
        limit = exp.cfg["series"]["lambda_limit"] or float(reach)
        return EigenvalueList(flat_lattice_eigenvalues(limit), limit)
    return EigenvalueList(np.asarray(basis.eigenvalues), float(basis.complete_below))


def cmd_validate_config(cfg, args):
    sys.stdout.write(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    return 0, None


def cmd_transverse_spec(cfg, args):
    exp = build_experiment(cfg)
    basis = exp.space.basis
    k = min(cfg["truncation"]["k_count"], basis.count)
    order = np.argsort(np.asarray(basis.eigenvalues))[:k]
    lams = np.asarray(basis.eigenvalues)[order]
    rows = [(int(i), float(l)) for i, l in enumerate(lams)]
    report = {
        "eigenvalues": [float(l) for l in lams],
        "count": int(k),
        "complete_below": float(basis.complete_below),
        "note": exp.basis_note,
    }
    if hasattr(basis, "to_artifact"):
        outdir = cfg["output"]["directory"]
        os.makedirs(outdir, exist_ok=True)
        write_json(os.path.join(outdir, "transverse-basis.json"), basis.to_artifact())
    _emit(cfg, "transverse-spec", ["k", "lambda"], rows, report)
    return 0, report


def cmd_carleman(cfg, args, threads=1):
    exp = build_experiment(cfg)
    taus = cfg["tau_sweep"]
    reach = (2.0 * max(abs(t) for t in taus) + 4.0) ** 2
    spectrum = _spectrum_for(exp, reach)
    j_cut = cfg["truncation"]["j_cut"]

    def one(tau):
        res = carleman_min_modulus(tau, spectrum, j_cut=max(j_cut, int(2 * abs(tau)) + 4))
        ok = res.min_modulus_squared >= tau * tau
        return (tau, res.min_modulus, res.witness_j, res.witness_lambda, res.tail_certified, ok)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = sorted(pool.map(one, taus))
    all_pass = all(r[-1] for r in rows)
    report = {
        "rows": [dict(zip(("tau", "min_modulus", "witness_j", "witness_lambda", "tail_certified", "pass"), r)) for r in rows],
        "verdict": "pass" if all_pass else "fail",
    }
    _emit(cfg, "carleman", ["tau", "min_modulus", "witness_j", "witness_lambda", "tail_certified", "pass"], rows, report)
    return (0 if all_pass else 1), report


def cmd_series_s(cfg, args, threads=1):
    exp = build_experiment(cfg)
    taus = [t for t in cfg["tau_sweep"] if abs(t) >= 1]
    factor = cfg["series"]["m_max_factor"]

    def one(tau):
        reach = (2.0 * abs(tau) + 4.0) ** 2
        spectrum = _spectrum_for(exp, reach)
        rep = series_S(tau, spectrum, int(np.ceil(factor * abs(tau))))
        return (tau, rep.m_max, rep.truncated_sum, rep.tail_bound, rep.truncated_sum * abs(tau))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = sorted(pool.map(one, taus))
    scaled = [r[4] for r in rows]
    variation = max(scaled) / min(scaled) if min(scaled) > 0 else float("inf")
    ok = variation < cfg["tolerances"]["variation_factor"]
    report = {
        "rows": [dict(zip(("tau", "m", "value", "tail_bound", "value_times_tau"), r)) for r in rows],
        "variation": variation,
        "verdict": "pass" if ok else "fail",
    }
    _emit(cfg, "series-s", ["tau", "m", "value", "tail_bound", "value_times_tau"], rows, report)
    return (0 if ok else 1), report


def cmd_sogge(cfg, args):
    exp = build_experiment(cfg)
    m_top = args.m_max if args.m_max is not None else cfg["clusters"]["m_max"]
    reach = int(np.floor(np.sqrt(exp.space.r_squared().max())))
    m_top = min(m_top, reach - 1)
    rows_data, report_obj = cluster_constant_sweep(
        exp.space,
        list(range(m_top + 1)),
        restarts=min(cfg["restarts"], 8),
        seed=cfg["seed"],
        ratio_bound=cfg["tolerances"]["cluster_ratio"],
        dual_tol=cfg["tolerances"]["duality_gap"],
    )
    rows = [(r["m"], r["constant"], r["dual_constant"], r["duality_gap"]) for r in rows_data]
    report = report_obj.to_dict()
    _emit(cfg, "sogge", ["m", "constant", "dual_constant", "duality_gap"], rows, report)
    return (0 if report_obj.verdict == "pass" else 1), report


def cmd_resolvent_lp(cfg, args):
    exp = build_experiment(cfg)
    taus = [t for t in cfg["tau_sweep"] if abs(t) >= 1]
    spaces = [(tau, exp.space) for tau in taus]
    reports = resolvent_lp_bounds(
        spaces,
        restarts=cfg["restarts"],
        seed=cfg["seed"],
        iters=cfg["optimizer_iterations"],
        variation_factor=cfg["tolerances"]["variation_factor"],
    )
    rows = []
    for rep in reports:
        for tau, value in zip(rep.parameters["tau"], rep.parameters["values"]):
            rows.append((rep.name, tau, value))
    ok = all(r.verdict == "pass" for r in reports)
    report = {"reports": [r.to_dict() for r in reports], "verdict": "pass" if ok else "fail"}
    _emit(cfg, "resolvent-lp", ["name", "tau", "value"], rows, report)
    return (0 if ok else 1), report


def cmd_conformal(cfg, args):
    exp = build_experiment(cfg)
    grid = exp.grid
    c = GridFunction(grid, exp.metric.conformal_factor.astype(complex))
    tol = cfg["tolerances"].get("conformal", 1e-6)
    tests = [
        np.ones(grid.shape, dtype=complex),
        np.exp(1j * grid.coordinate(0)),
        np.exp(1j * (grid.coordinate(0) + grid.coordinate(1))),
    ]
    rows = []
    for i, values in enumerate(tests):
        u = GridFunction(grid, values)
        res = verify_conformal_identity(c, exp.potential, exp.metric, u)
        rows.append((i, res, res < tol))
    ok = all(r[-1] for r in rows)
    qc = conformal_potential(c, exp.potential, exp.metric)
    report = {
        "residuals": [r[1] for r in rows],
        "tolerance": tol,
        "qc_sup": float(np.max(np.abs(qc.values))),
        "verdict": "pass" if ok else "fail",
    }
    _emit(cfg, "conformal", ["test_index", "residual", "pass"], rows, report)
    return (0 if ok else 1), report


def cmd_split_q(cfg, args):
    exp = build_experiment(cfg)
    if exp.potential is None:
        raise ConfigError(["split-q: config must declare a potential"])
    eps = args.epsilon if args.epsilon is not None else cfg.get("split", {}).get("epsilon", 0.1)
    split = split_potential(exp.potential, eps)
    rows = [(split.cutoff_level, split.remainder_norm, split.epsilon)]
    report = {
        "cutoff_level": split.cutoff_level,
        "remainder_norm": split.remainder_norm,
        "epsilon": split.epsilon,
        "verdict": "pass" if split.remainder_norm <= eps else "fail",
    }
    _emit(cfg, "split-q", ["cutoff_level", "remainder_norm", "epsilon"], rows, report)
    return (0 if split.remainder_norm <= eps else 1), report


def cmd_injectivity(cfg, args):
    exp = build_experiment(cfg)
    tau = max(cfg["tau_sweep"], key=abs)
    kwargs = {"j_cut": cfg["truncation"]["j_cut"], "seed": cfg["seed"]}
    if exp.potential_spec is not None and type(exp.potential_spec).__name__ == "TrigPolynomial":
        q = exp.potential_spec
    else:
        q = exp.potential
        inj = cfg.get("injectivity", {})
        c_zero = inj.get("c_zero")
        if c_zero is None:
            reports = resolvent_lp_bounds(
                [(tau, exp.space)], restarts=4, seed=cfg["seed"], iters=12
            )
            c_zero = max(reports[1].parameters["values"])
        kwargs["c_zero"] = float(c_zero)
        kwargs["candidates"] = cfg.get("injectivity", {}).get("candidates", 100)
    report_obj = injectivity_estimate(exp.space, q, tau, **kwargs)
    rows = [(report_obj.name, tau, report_obj.measured_constant, report_obj.bound_claimed, report_obj.verdict)]
    report = report_obj.to_dict()
    _emit(cfg, "injectivity", ["name", "tau", "measured", "bound", "verdict"], rows, report)
    return (0 if report_obj.verdict != "fail" else 1), report


def cmd_bands(cfg, args):
    exp = build_experiment(cfg)
    path_cfg = cfg["theta_path"]
    n = cfg["dimension"]
    if "points" in path_cfg:
        path = [tuple(p) for p in path_cfg["points"]]
    else:
        axis, count = path_cfg["axis"], path_cfg["count"]
        path = []
        for t in np.linspace(0.0, 1.0, count):
            theta = [0.0] * n
            theta[axis] = float(t)
            path.append(tuple(theta))
    truncation = min(4, (exp.grid.points_per_axis - 1 - exp.metric.total_bandwidth()) // 2)
    rows_out = []
    data = band_structure(exp.metric, exp.potential, path, bands=cfg["bands"], truncation=truncation)
    for theta, eigs in data:
        for b, lam in enumerate(eigs):
            rows_out.append(tuple(theta) + (b, lam.real, lam.imag))
    header = [f"theta_{a+1}" for a in range(n)] + ["band_index", "re_lambda", "im_lambda"]
    report = {"bands": cfg["bands"], "points": len(path), "truncation": truncation}
    _emit(cfg, "bands", header, rows_out, report)
    return 0, report


def cmd_thomas(cfg, args):
    exp = build_experiment(cfg)
    bw = exp.potential_spec.bandwidth if hasattr(exp.potential_spec, "bandwidth") else 0
    scan = thomas_scan(
        exp.space,
        exp.potential,
        cfg["tau_sweep"],
        j_cut=cfg["truncation"]["j_cut"],
        x1_bandwidth=bw,
    )
    rows = [(tau, sigma, scan.j_cut, scan.k_count) for tau, sigma in scan.rows]
    report = {
        "rows": [{"tau": t, "sigma_min": s} for t, s in scan.rows],
        "onset_tau": scan.onset_tau,
        "inconclusive": scan.inconclusive,
        "note": "sigma_min is a truncation witness, never a kernel certificate",
    }
    _emit(cfg, "thomas", ["tau", "sigma_min", "truncation_J", "truncation_K"], rows, report)
    return 0, report


def cmd_gelfand_check(cfg, args):
    exp = build_experiment(cfg)
    p = cfg["supercells"]
    n_cell = min(cfg["grid_points"], 8)
    cell_grid = TorusGrid(cfg["dimension"], n_cell)
    rng = np.random.default_rng(cfg["seed"])
    tol = cfg["tolerances"]["identity"]
    worst_iso, worst_round = 0.0, 0.0
    for _ in range(50):
        total = p * n_cell
        vals = rng.standard_normal((total,) * cfg["dimension"]) + 1j * rng.standard_normal(
            (total,) * cfg["dimension"]
        )
        u = SupercellFunction(p, n_cell, vals)
        worst_iso = max(worst_iso, bloch_isometry_defect(u))
        back = gelfand_inverse(gelfand_forward(u))
        worst_round = max(
            worst_round, float(np.max(np.abs(back.values - u.values)) / np.max(np.abs(u.values)))
        )
    from .operators import flat_full_metric
    from .potentials import TrigPolynomial

    metric = flat_full_metric(cell_grid)
    q = TrigPolynomial(terms=[(1.0, (1,) + (0,) * (cfg["dimension"] - 1), 0.0)]).as_gridfunction(cell_grid)
    spec = np.zeros((p * n_cell,) * cfg["dimension"], dtype=complex)
    for _ in range(6):
        mode = rng.integers(-3, 4, size=cfg["dimension"])
        spec[tuple(m % (p * n_cell) for m in mode)] = rng.standard_normal() + 1j * rng.standard_normal()
    u = SupercellFunction(p, n_cell, np.fft.ifftn(spec) * (p * n_cell) ** cfg["dimension"])
    di = direct_integral_check(u, metric, q)
    rows = [
        ("isometry_defect", worst_iso, tol, worst_iso < tol),
        ("roundtrip_error", worst_round, tol, worst_round < tol),
        ("direct_integral_residual", di, 1e-8, di < 1e-8),
    ]
    ok = all(r[-1] for r in rows)
    report = {"rows": [dict(zip(("check", "value", "tolerance", "pass"), r)) for r in rows],
              "verdict": "pass" if ok else "fail"}
    _emit(cfg, "gelfand-check", ["check", "value", "tolerance", "pass"], rows, report)
    return (0 if ok else 1), report


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        for e in exc.errors:
            sys.stderr.write(f"config error: {e}\n")
        return 2
    started = utc_now()
    handlers = {
        "validate-config": lambda: cmd_validate_config(cfg, args),
        "transverse-spec": lambda: cmd_transverse_spec(cfg, args),
        "carleman": lambda: cmd_carleman(cfg, args, threads=args.threads),
        "series-s": lambda: cmd_series_s(cfg, args, threads=args.threads),
        "sogge": lambda: cmd_sogge(cfg, args),
        "resolvent-lp": lambda: cmd_resolvent_lp(cfg, args),
        "conformal": lambda: cmd_conformal(cfg, args),
        "split-q": lambda: cmd_split_q(cfg, args),
        "injectivity": lambda: cmd_injectivity(cfg, args),
        "bands": lambda: cmd_bands(cfg, args),
        "thomas": lambda: cmd_thomas(cfg, args),
        "gelfand-check": lambda: cmd_gelfand_check(cfg, args),
    }
    try:
        code, _ = handlers[args.subcommand]()
    except ConfigError as exc:
        for e in exc.errors:
            sys.stderr.write(f"config error: {e}\n")
        return 2
    if args.subcommand != "validate-config":
        outdir = cfg["output"]["directory"]
        os.makedirs(outdir, exist_ok=True)
        write_manifest(outdir, config_hash(cfg), __version__, cfg["seed"], started)
    return code


if __name__ == "__main__":
    sys.exit(main())
