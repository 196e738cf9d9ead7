"""Sequence experiments: build a family, measure every diagnostic, emit reports.

A sequence run constructs one rotationally symmetric member per parameter,
audits class membership, and records Hawking mass, uniform and L2 distances
to the flat annulus, the leaf-integral gap ledger, and the excision-bound
totals over the collar schedule.  Runs are deterministic: identical config
and seed give byte-identical reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .estimators import (embedding_constant, hls_bounds, swif_excision_bound,
                         uniform_distance, volume_bound_check)
from .diagnostics import curvature_from_profile, gotozero_report
from .fields import ClassBounds, build_delta, hawking_mass, l2_metric_gap
from .geodesics import DistanceSample, distance_sample
from .grids import SphereGrid, TimeGrid, sample_points
from .rotsym import (FamilyParams, make_profile, reparam_to_imcf_time,
                     validate_class_membership)

GAP_COLUMNS = ["gap_grad_H", "gap_shear", "gap_R", "gap_Rc_nn", "gap_K12",
               "gap_H2", "gap_A2", "gap_lam_product", "gap_chi"]
COLUMNS = (["param", "hawking_T", "unif_dist_delta", "l2_gap_delta"]
           + GAP_COLUMNS + ["swif_excision_total", "class_ok", "envelope_ok"])


@dataclass
class MemberResult:
    index: int
    param_name: str
    param_value: float
    constructed: bool
    error: str = ""
    columns: dict = dc_field(default_factory=dict)
    collar_totals: list = dc_field(default_factory=list)

    def to_dict(self):
        return {"index": self.index, "param_name": self.param_name,
                "param_value": self.param_value, "constructed": self.constructed,
                "error": self.error, "columns": self.columns,
                "collar_totals": self.collar_totals}

    @staticmethod
    def from_dict(d):
        return MemberResult(index=d["index"], param_name=d["param_name"],
                            param_value=d["param_value"],
                            constructed=d["constructed"], error=d["error"],
                            columns=d["columns"],
                            collar_totals=d["collar_totals"])


@dataclass
class ConvergenceReport:
    seed: int
    config_echo: str
    collar_schedule: list
    members: list                    # constructed members, in sequence order
    failures: list                   # MemberResult with constructed=False

    def to_dict(self):
        return {"seed": self.seed, "config_echo": self.config_echo,
                "collar_schedule": [list(c) for c in self.collar_schedule],
                "members": [m.to_dict() for m in self.members],
                "failures": [m.to_dict() for m in self.failures]}

    @staticmethod
    def from_dict(d):
        return ConvergenceReport(
            seed=d["seed"], config_echo=d["config_echo"],
            collar_schedule=[tuple(c) for c in d["collar_schedule"]],
            members=[MemberResult.from_dict(m) for m in d["members"]],
            failures=[MemberResult.from_dict(m) for m in d["failures"]])

    def __eq__(self, other):
        return isinstance(other, ConvergenceReport) and self.to_dict() == other.to_dict()

    def column(self, name):
        return np.array([m.columns[name] for m in self.members])

    @property
    def all_hypotheses_pass(self) -> bool:
        return all(m.columns["class_ok"] == 1.0 and m.columns["envelope_ok"] == 1.0
                   for m in self.members)


@dataclass
class _Context:
    """Member-independent reference data shared by the workers.

    Collar quantities use one fixed point ladder (sampled on the innermost
    collar of the schedule, hence inside every later collar) so the per-k
    ledgers stay comparable, and k-independent mass/volume bounds.
    """

    values: dict
    collars: list
    pts_full: np.ndarray
    ds_delta_full: DistanceSample
    pts_collar: np.ndarray
    ref_embed: list                  # per-k flat EmbeddingReport
    ds_delta_sub: list
    flat_V0: float
    flat_A0: float
    flat_excess: list


def _grids(values):
    return (SphereGrid(values["grids.n_theta"], values["grids.n_phi"]),
            TimeGrid(values["grids.T"], values["grids.n_t"]))


def _family_params(values, name, value) -> FamilyParams:
    kw = {"kind": values["family.kind"], "r0": values["family.r0"],
          "m": values["family.m"], "well_depth": values["family.well_depth"],
          "well_width": values["family.well_width"],
          "well_center": values["family.well_center"]}
    kw[name] = value
    return FamilyParams(**kw)


def _profile_span(params: FamilyParams, T: float):
    f_target = params.r0 * np.exp(0.5 * T)
    if params.kind == "schwarzschild":
        floor = np.sqrt(max(1.0 - 2.0 * params.m / params.r0, 1e-6))
    elif params.kind == "gravity_well" and params.m == 0.0:
        floor = 1.0 - params.well_depth
    else:
        floor = np.sqrt(max(1.0 - 2.0 * params.m / params.r0, 0.25))
    return 1.05 * (f_target - params.r0) / floor + 0.5 * params.well_width + 0.05


def _build_member_field(values, name, value):
    params = _family_params(values, name, value)
    sphere, times = _grids(values)
    s_max = _profile_span(params, times.T)
    prof = make_profile(params, (0.0, s_max), n=4097)
    rep = reparam_to_imcf_time(prof, sphere, times)
    return params, prof, rep


def _compute_member(ctx: _Context, index: int, name: str, value: float) -> MemberResult:
    values = ctx.values
    try:
        params, prof, rep = _build_member_field(values, name, value)
    except ValueError as exc:
        return MemberResult(index=index, param_name=name, param_value=value,
                            constructed=False, error=str(exc))
    field = rep.field
    sphere, times = field.sphere, field.times
    r0, T = field.r0, times.T

    bounds = ClassBounds(r0=values["family.r0"], H0=values["bounds.H0"],
                         H1=values["bounds.H1"], A1=values["bounds.A1"],
                         T=T, I0=values["bounds.I0"])
    class_ok = validate_class_membership(field, bounds).passed

    # valid envelope by construction: 1/H = (r0 e^{t/2}/2) / f'(s(t))
    fp_min = float(np.min(prof.f_prime))
    h_env = lambda t: (r0 / 2.0) * np.exp(0.5 * np.asarray(t, float)) / fp_min
    volrep = volume_bound_check(field, h_env)

    delta = build_delta(r0, sphere, times)
    ds_member = distance_sample(field, ctx.pts_full, method="shooting")
    unif = uniform_distance(ds_member, ctx.ds_delta_full).value
    l2 = l2_metric_gap(field, delta)
    mh_T = hawking_mass(field, times.n_t - 1)

    curv = curvature_from_profile(prof, rep.s_of_t, times.t_nodes)
    stride = max(1, values["samples.leaf_stride"])
    leaves = list(range(0, times.n_t, stride)) + [times.n_t - 1]
    gz = gotozero_report(field, curv, t_indices=sorted(set(leaves)))
    gaps = gz.max_gaps()

    A_unif = 8.0 * np.pi * r0**2 * np.exp(T)
    # class-level Lipschitz constant: path speeds satisfy d_ghat/d_delta
    # in [1, 1/min f'], valid on every subdomain
    lam = 1.0 / fp_min + 1e-9
    totals = []
    ds_member_full = distance_sample(field, ctx.pts_collar, method="shooting")
    for k, (t1, t2) in enumerate(ctx.collars):
        ds_sub = distance_sample(field, ctx.pts_collar, method="shooting",
                                 t_lo=t1, t_hi=t2)
        emb = embedding_constant(ds_sub, ds_member_full)
        col = volume_bound_check(field, h_env, collar=(t1, t2))
        hls = hls_bounds(ds_sub, ctx.ds_delta_sub[k], lam,
                         mass_term=ctx.flat_V0, n=3)
        bound = swif_excision_bound(
            hls.swif_bound,
            ((ctx.ref_embed[k].S_M, ctx.flat_V0 + ctx.flat_A0),
             (emb.S_M, volrep.vol + A_unif)),
            (ctx.flat_excess[k], col.collar_vol))
        totals.append(bound.total)

    cols = {"param": float(value), "hawking_T": mh_T, "unif_dist_delta": unif,
            "l2_gap_delta": l2}
    for col_name in GAP_COLUMNS:
        cols[col_name] = gaps[col_name[len("gap_"):]]
    cols["swif_excision_total"] = totals[-1] if totals else 0.0
    cols["class_ok"] = 1.0 if class_ok else 0.0
    cols["envelope_ok"] = 1.0 if volrep.envelope_ok else 0.0
    return MemberResult(index=index, param_name=name, param_value=value,
                        constructed=True, columns=cols, collar_totals=totals)


def _build_context(config: ExperimentConfig) -> _Context:
    values = config.values
    sphere, times = _grids(values)
    r0, T = values["family.r0"], values["grids.T"]
    delta = build_delta(r0, sphere, times)
    pts_full = sample_points(times, values["samples.n_sphere"],
                             values["samples.n_levels"])
    ds_delta_full = distance_sample(delta, pts_full, method="shooting")
    collars = config.collar_schedule()
    ref_embed, ds_delta_sub, flat_excess = [], [], []
    vol_shell = lambda a, b: (4.0 * np.pi / 3.0) * r0**3 * (
        np.exp(1.5 * b) - np.exp(1.5 * a))
    # one fixed ladder, sampled on the innermost collar of the schedule
    pts_collar = sample_points(times, 8, 3, t_lo=collars[0][0], t_hi=collars[0][1])
    ds_delta_pts_full = distance_sample(delta, pts_collar, method="shooting")
    for (t1, t2) in collars:
        sub = distance_sample(delta, pts_collar, method="shooting",
                              t_lo=t1, t_hi=t2)
        ds_delta_sub.append(sub)
        ref_embed.append(embedding_constant(sub, ds_delta_pts_full))
        flat_excess.append(vol_shell(0.0, t1) + vol_shell(t2, T))
    return _Context(values=values, collars=collars, pts_full=pts_full,
                    ds_delta_full=ds_delta_full, pts_collar=pts_collar,
                    ref_embed=ref_embed, ds_delta_sub=ds_delta_sub,
                    flat_V0=vol_shell(0.0, T),
                    flat_A0=8.0 * np.pi * r0**2 * np.exp(T),
                    flat_excess=flat_excess)


def _worker(args):
    ctx, index, name, value = args
    return _compute_member(ctx, index, name, value)


def run_sequence(config: ExperimentConfig, jobs: int = 1) -> ConvergenceReport:
    """Run every member, in parallel when asked; assembly is in member order."""
    ctx = _build_context(config)
    tasks = [(ctx, i, name, value)
             for i, (name, value) in enumerate(config.member_params())]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    members = [r for r in results if r.constructed]
    failures = [r for r in results if not r.constructed]
    return ConvergenceReport(seed=config.values["seed"], config_echo=config.echo(),
                             collar_schedule=config.collar_schedule(),
                             members=members, failures=failures)


# -- report emission ---------------------------------------------------------------

def emit_report(report: ConvergenceReport, out_dir, fmt: str = "csv"):
    """Deterministic serialization; identical report => byte-identical files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "json":
        p = out / "report.json"
        with open(p, "w") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=1)
        paths.append(p)
    elif fmt == "csv":
        p = out / "sequence.csv"
        with open(p, "w", newline="") as fh:
            fh.write(f"# seed={report.seed}\n")
            fh.write(f"# config={report.config_echo}\n")
            for f in report.failures:
                fh.write(f"# failed member {f.index} "
                         f"({f.param_name}={f.param_value}): {f.error}\n")
            fh.write("index," + ",".join(COLUMNS) + "\n")
            for m in report.members:
                row = [str(m.index)] + [repr(float(m.columns[c])) for c in COLUMNS]
                fh.write(",".join(row) + "\n")
        paths.append(p)
        p2 = out / "collar.csv"
        with open(p2, "w", newline="") as fh:
            fh.write(f"# seed={report.seed}\n")
            ks = ",".join(f"k{j + 1}" for j in range(len(report.collar_schedule)))
            fh.write(f"index,{ks}\n")
            for m in report.members:
                fh.write(",".join([str(m.index)]
                                  + [repr(float(v)) for v in m.collar_totals]) + "\n")
        paths.append(p2)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return paths


def report_from_json(path) -> ConvergenceReport:
    with open(path) as fh:
        return ConvergenceReport.from_dict(json.load(fh))
