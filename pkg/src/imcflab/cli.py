"""Command-line interface.

Verbs: ``flow`` builds one family member and dumps its field and profile,
``geodesic`` answers one distance query, ``compare`` runs the estimators for
one member against the flat annulus, ``sequence`` runs the full experiment,
``check`` audits class membership and hypotheses.

Exit codes: 0 ok, 1 hypothesis failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .estimators import uniform_distance
from .experiments import (_build_member_field, emit_report, run_sequence)
from .fields import ClassBounds, build_delta, hawking_mass, l2_metric_gap
from .geodesics import distance_sample, graph_distance, shoot_distance
from .grids import sample_points
from .io import save_field
from .rotsym import validate_class_membership, write_profile_csv


def _add_common(p):
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--grid", default=None,
                   help="override grids as n_theta,n_phi,n_t")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.values["seed"] = args.seed
    if args.grid:
        try:
            nth, nph, nt = (int(x) for x in args.grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --grid value {args.grid!r}") from exc
        cfg.values["grids.n_theta"] = nth
        cfg.values["grids.n_phi"] = nph
        cfg.values["grids.n_t"] = nt
    return cfg


def _member(cfg: ExperimentConfig, index: int):
    params = cfg.member_params()
    if not 0 <= index < len(params):
        raise ConfigError(f"member index {index} outside the sequence")
    name, value = params[index]
    return _build_member_field(cfg.values, name, value)


def _parse_point(text):
    try:
        t, th, ph = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}, expected t,theta,phi") from exc
    return np.array([t, th, ph])


def cmd_flow(args) -> int:
    cfg = _load(args)
    params, prof, rep = _member(cfg, args.member)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_field(rep.field, out / "field.annf",
               fmt="binary" if args.format == "csv" else "json")
    write_profile_csv(prof, out / "profile.csv", params)
    print(f"wrote {out / 'field.annf'} and {out / 'profile.csv'}")
    return 0


def cmd_geodesic(args) -> int:
    cfg = _load(args)
    _, _, rep = _member(cfg, args.member)
    p, q = _parse_point(args.src), _parse_point(args.dst)
    if args.method == "shoot":
        res = shoot_distance(rep.field, p, q)
        doc = {"distance": res.distance, "method": res.method,
               "branch": res.branch, "fallback": res.fallback}
    else:
        res = graph_distance(rep.field, p, q, refinement=args.refinement)
        doc = {"distance": res.distance, "method": "graph", "h": res.h}
    print(json.dumps(doc, sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    from .estimators import embedding_constant, write_report_json

    cfg = _load(args)
    _, prof, rep = _member(cfg, args.member)
    field = rep.field
    T = field.times.T
    delta = build_delta(field.r0, field.sphere, field.times)
    pts = sample_points(field.times, cfg.values["samples.n_sphere"],
                        cfg.values["samples.n_levels"])
    ds_f = distance_sample(field, pts, method="shooting")
    ds_d = distance_sample(delta, pts, method="shooting")
    unif = uniform_distance(ds_f, ds_d)
    t1, t2 = cfg.collar_schedule()[0]
    pts_c = sample_points(field.times, 8, 3, t_lo=t1, t_hi=t2)
    emb = embedding_constant(
        distance_sample(field, pts_c, method="shooting", t_lo=t1, t_hi=t2),
        distance_sample(field, pts_c, method="shooting"))
    doc = {
        "label": field.label,
        "hawking_mass_T": hawking_mass(field, field.times.n_t - 1),
        "uniform_distance_delta": unif.value,
        "uniform_distance_argmax": list(unif.argmax),
        "l2_gap_delta": l2_metric_gap(field, delta),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(out / "compare.json", summary=doc,
                      collar_embedding=emb, collar=(t1, t2))
    print(json.dumps(doc, sort_keys=True))
    return 0


def cmd_sequence(args) -> int:
    cfg = _load(args)
    report = run_sequence(cfg, jobs=args.jobs)
    emit_report(report, args.out, fmt=args.format)
    print(f"{len(report.members)} members computed, "
          f"{len(report.failures)} construction failures")
    return 0 if report.all_hypotheses_pass else 1


def cmd_check(args) -> int:
    cfg = _load(args)
    _, prof, rep = _member(cfg, args.member)
    field = rep.field
    bounds = ClassBounds(r0=cfg.values["family.r0"], H0=cfg.values["bounds.H0"],
                         H1=cfg.values["bounds.H1"], A1=cfg.values["bounds.A1"],
                         T=field.times.T, I0=cfg.values["bounds.I0"])
    rep_cls = validate_class_membership(field, bounds)
    doc = {c.name: {"passed": c.passed, "worst_value": c.worst_value,
                    "worst_node": list(c.worst_node), "margin": c.margin}
           for c in rep_cls.conditions}
    print(json.dumps(doc, sort_keys=True, indent=1))
    return 0 if rep_cls.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="imcflab")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("flow", help="build one member, dump field and profile")
    _add_common(p)
    p.add_argument("--member", type=int, default=0)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("geodesic", help="one distance query")
    _add_common(p)
    p.add_argument("--member", type=int, default=0)
    p.add_argument("--src", required=True, help="t,theta,phi")
    p.add_argument("--dst", required=True, help="t,theta,phi")
    p.add_argument("--method", choices=("shoot", "graph"), default="shoot")
    p.add_argument("--refinement", type=int, default=1)
    p.set_defaults(fn=cmd_geodesic)

    p = sub.add_parser("compare", help="one member against the flat annulus")
    _add_common(p)
    p.add_argument("--member", type=int, default=0)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sequence", help="full sequence experiment")
    _add_common(p)
    p.set_defaults(fn=cmd_sequence)

    p = sub.add_parser("check", help="class membership and hypothesis audit")
    _add_common(p)
    p.add_argument("--member", type=int, default=0)
    p.set_defaults(fn=cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        # covers config errors and member-construction failures alike
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
