"""Experiment configuration: JSON schema, validation, and object builders.

Validation accumulates every violation instead of stopping at the first, and
normalization is idempotent: validating an echoed config reproduces it.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .grids import TorusGrid
from .modes import TensorModeSpace
from .operators import FullMetric
from .potentials import PeriodizedPowerSingularity, TrigPolynomial, half_cell_offset_center
from .transverse import (
    FlatTransverseBasis,
    TransverseMetric,
    assemble_forms,
    conformal_metric,
    eigendecompose,
    flat_metric,
    metric_from_components,
    refinement_deltas,
    separable_conformal_basis,
)

DEFAULTS = {
    "dimension": 3,
    "grid_points": 16,
    "truncation": {"j_cut": 16, "k_count": 64, "k_max": 8},
    "metric": {"kind": "flat"},
    "potential": {"kind": "zero"},
    "tau_sweep": [1.0, 2.0, 5.0, 10.0],
    "theta_path": {"axis": 0, "count": 17},
    "bands": 5,
    "supercells": 2,
    "seed": 1234,
    "restarts": 20,
    "optimizer_iterations": 25,
    "tolerances": {
        "identity": 1e-10,
        "variation_factor": 4.0,
        "cluster_ratio": 10.0,
        "duality_gap": 0.05,
        "sigma_margin": 1e-6,
    },
    "series": {"m_max_factor": 4, "lambda_limit": None},
    "clusters": {"m_max": 20},
    "output": {"directory": "out", "format": "csv"},
}


class ConfigError(Exception):
    """Carries every schema violation found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _check_trig(doc, where, dim, errors):
    if not isinstance(doc, dict):
        errors.append(f"{where}: expected an object with 'const'/'terms'")
        return
    for t in doc.get("terms", []):
        mode = t.get("mode")
        if mode is None or len(mode) != dim:
            errors.append(f"{where}: term mode {mode} must have {dim} entries")
        if "amp" not in t:
            errors.append(f"{where}: term missing 'amp'")


def _as_trig(doc) -> TrigPolynomial:
    terms = [(float(t["amp"]), tuple(int(m) for m in t["mode"]), float(t.get("phase", 0.0))) for t in doc.get("terms", [])]
    return TrigPolynomial(const=float(doc.get("const", 0.0)), terms=terms)


def validate_config(doc: dict) -> dict:
    """Fill defaults and normalize; raise ConfigError listing every violation."""
    if not isinstance(doc, dict):
        raise ConfigError(["config root must be a JSON object"])
    cfg = copy.deepcopy(DEFAULTS)

    def merge(dst, src, path=""):
        for key, value in src.items():
            if key not in dst:
                dst[key] = value
            elif isinstance(dst[key], dict) and isinstance(value, dict):
                merge(dst[key], value, f"{path}{key}.")
            else:
                dst[key] = value

    merge(cfg, doc)
    errors = []

    n = cfg["dimension"]
    if not isinstance(n, int) or n < 2:
        errors.append(f"dimension: must be an integer >= 2, got {n!r}")
    npts = cfg["grid_points"]
    if not isinstance(npts, int) or npts < 8 or npts % 2:
        errors.append(f"grid_points: must be an even integer >= 8, got {npts!r}")

    tr = cfg["truncation"]
    for key in ("j_cut", "k_count", "k_max"):
        if not isinstance(tr.get(key), int) or tr[key] < 1:
            errors.append(f"truncation.{key}: must be a positive integer, got {tr.get(key)!r}")

    metric = cfg["metric"]
    kind = metric.get("kind")
    if kind not in ("flat", "transversal"):
        errors.append(f"metric.kind: unknown kind {kind!r}")
    elif kind == "transversal":
        if "conformal_factor" in metric:
            _check_trig(metric["conformal_factor"], "metric.conformal_factor", n, errors)
        tv = metric.get("transverse", {"kind": "flat"})
        metric["transverse"] = tv
        tkind = tv.get("kind")
        if tkind == "conformal":
            _check_trig(tv.get("rho", {}), "metric.transverse.rho", n - 1, errors)
        elif tkind == "components":
            if "bandwidth" not in tv:
                errors.append("metric.transverse.bandwidth: required for component metrics")
            for key, entry in tv.get("entries", {}).items():
                parts = key.split(",")
                if len(parts) != 2:
                    errors.append(f"metric.transverse.entries[{key!r}]: key must be 'a,b'")
                _check_trig(entry, f"metric.transverse.entries[{key}]", n - 1, errors)
        elif tkind != "flat":
            errors.append(f"metric.transverse.kind: unknown kind {tkind!r}")

    pot = cfg["potential"]
    pkind = pot.get("kind")
    if pkind == "trig":
        _check_trig(pot, "potential", n, errors)
    elif pkind == "singular_power":
        alpha = pot.get("alpha")
        if not isinstance(alpha, (int, float)) or not (0 < alpha < 2):
            errors.append(
                f"potential.alpha: {alpha!r} not admissible; need 0 < alpha < 2 to keep "
                "the potential in L^(n/2)"
            )
        center = pot.get("center", "half-cell")
        if center != "half-cell" and (not isinstance(center, list) or len(center) != n):
            errors.append(f"potential.center: must be 'half-cell' or {n} coordinates")
        pot.setdefault("center", "half-cell")
        pot.setdefault("amplitude", 1.0)
    elif pkind == "samples":
        if not isinstance(pot.get("path"), str):
            errors.append("potential.path: required for sampled potentials")
    elif pkind != "zero":
        errors.append(f"potential.kind: unknown kind {pkind!r}")

    sweep = cfg["tau_sweep"]
    if isinstance(sweep, dict):
        try:
            start, stop = float(sweep["start"]), float(sweep["stop"])
            factor = float(sweep.get("factor", 2.0))
            if factor <= 1 or start <= 0 or stop < start:
                raise ValueError
            taus = []
            t = start
            while t <= stop * (1 + 1e-12):
                taus.append(t)
                t *= factor
            cfg["tau_sweep"] = taus
        except (KeyError, ValueError, TypeError):
            errors.append("tau_sweep: range form needs 0 < start <= stop and factor > 1")
    elif isinstance(sweep, list):
        if not sweep or not all(isinstance(t, (int, float)) for t in sweep):
            errors.append("tau_sweep: must be a nonempty list of numbers")
        else:
            cfg["tau_sweep"] = [float(t) for t in sweep]
    else:
        errors.append("tau_sweep: must be a list or a range object")

    path = cfg["theta_path"]
    if isinstance(path, dict) and "points" in path:
        pts = path["points"]
        if not all(isinstance(p, list) and len(p) == n for p in pts):
            errors.append(f"theta_path.points: each point needs {n} coordinates")
    elif isinstance(path, dict):
        axis, count = path.get("axis", 0), path.get("count", 17)
        if not (isinstance(axis, int) and 0 <= axis < n):
            errors.append(f"theta_path.axis: must be in [0, {n})")
        if not (isinstance(count, int) and count >= 2):
            errors.append("theta_path.count: must be an integer >= 2")
        path.setdefault("axis", 0)
        path.setdefault("count", 17)
    else:
        errors.append("theta_path: must be an object")

    tol = cfg["tolerances"]
    for key, value in tol.items():
        if not isinstance(value, (int, float)) or value <= 0:
            errors.append(f"tolerances.{key}: must be positive, got {value!r}")

    for key in ("seed", "restarts", "bands", "supercells", "optimizer_iterations"):
        if not isinstance(cfg[key], int) or cfg[key] < 0:
            errors.append(f"{key}: must be a nonnegative integer, got {cfg[key]!r}")

    out = cfg["output"]
    if out.get("format") not in ("csv", "json"):
        errors.append(f"output.format: must be 'csv' or 'json', got {out.get('format')!r}")

    if errors:
        raise ConfigError(errors)
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


@dataclass
class Experiment:
    """Validated config materialized into grid, metric, basis, and potential."""

    cfg: dict
    grid: TorusGrid
    metric: FullMetric
    space: TensorModeSpace
    potential: object  # GridFunction or None
    potential_spec: object  # TrigPolynomial | PeriodizedPowerSingularity | None
    basis_note: str = ""


def build_transverse_metric(cfg: dict, tgrid: TorusGrid) -> TransverseMetric:
    m = cfg["metric"]
    if m["kind"] == "flat":
        return flat_metric(tgrid)
    tv = m.get("transverse", {"kind": "flat"})
    if tv["kind"] == "flat":
        return flat_metric(tgrid)
    if tv["kind"] == "conformal":
        trig = _as_trig(tv["rho"])
        return conformal_metric(tgrid, trig.sample(tgrid), bandwidth=trig.bandwidth)
    entries = {}
    bw = int(tv["bandwidth"])
    for key, entry in tv["entries"].items():
        a, b = (int(x) for x in key.split(","))
        entries[(a, b)] = _as_trig(entry).sample(tgrid)
    return metric_from_components(tgrid, entries, bandwidth=bw)


def build_experiment(cfg: dict) -> Experiment:
    n, npts = cfg["dimension"], cfg["grid_points"]
    grid = TorusGrid(n, npts)
    tgrid = grid.transverse()
    tmetric = build_transverse_metric(cfg, tgrid)

    m = cfg["metric"]
    if m["kind"] == "flat":
        cvals = np.ones(grid.shape)
        cbw = 0
    else:
        ctrig = _as_trig(m.get("conformal_factor", {"const": 1.0}))
        cvals = ctrig.sample(grid)
        cbw = ctrig.bandwidth
    metric = FullMetric(grid, cvals, tmetric, bandwidth=cbw)

    note = ""
    tv = m.get("transverse", {"kind": "flat"}) if m["kind"] == "transversal" else {"kind": "flat"}
    if tv["kind"] == "flat":
        basis = FlatTransverseBasis(tgrid)
    elif tv["kind"] == "conformal" and all(
        mode[1:] == (0,) * (n - 2) for _, mode, _ in _as_trig(tv["rho"]).terms
    ) and n == 3:
        trig = _as_trig(tv["rho"])
        rho_line = trig.sample(tgrid)[:, 0]
        basis = separable_conformal_basis(tgrid, rho_line, bandwidth=trig.bandwidth)
        note = "separable conformal transverse basis (x2-only factor)"
    else:
        k_max = cfg["truncation"]["k_max"]
        forms = assemble_forms(tmetric, k_max)
        basis = eigendecompose(forms)
        deltas = refinement_deltas(tmetric, k_max, count=min(8, basis.count))
        basis.accuracy_note = (
            f"K_max refinement deltas (first {len(deltas)} modes): max {float(np.max(deltas)):.3e}"
        )
        note = basis.accuracy_note
    space = TensorModeSpace(grid, basis)

    pot = cfg["potential"]
    pspec = None
    pfield = None
    if pot["kind"] == "trig":
        pspec = _as_trig(pot)
        pfield = pspec.as_gridfunction(grid, metric.density)
    elif pot["kind"] == "singular_power":
        center = pot["center"]
        if center == "half-cell":
            center = half_cell_offset_center(grid)
        pspec = PeriodizedPowerSingularity(float(pot["alpha"]), tuple(center), float(pot["amplitude"]))
        pfield = pspec.as_gridfunction(grid, metric.density)
    elif pot["kind"] == "samples":
        from .grids import GridFunction, gridfunction_from_rows
        import csv as _csv

        with open(pot["path"], newline="") as fh:
            rows = [row for row in _csv.reader(fh)][1:]
        pfield = gridfunction_from_rows(rows, grid, metric.density)
    return Experiment(cfg=cfg, grid=grid, metric=metric, space=space, potential=pfield, potential_spec=pspec, basis_note=note)
