"""Command-line front end.

Every command writes its reports into ``--out``.  Stochastic commands
require ``--seed``; rerunning a command with the same arguments produces
byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import schemas
from .copula import CopulaFamily, conditional_distribution, outcome_probabilities
from .fit import FitConfig, FitResult, fit_bivariate, fit_univariate
from .league import (
    complete_season,
    describe,
    ecdf_band,
    ingest_csv,
    odds_covariates,
    outcome_table,
    read_fixtures,
    simulate_season,
)
from .regress import Family, Kind, ModelStructure, odds_strength_covariate

log = logging.getLogger("scorediff")

_FAMILY_ALIASES = {
    "skellam": Family.SKELLAM,
    "zi_skellam": Family.ZI_SKELLAM,
    "zi": Family.ZI_SKELLAM,
    "disc_normal": Family.DISC_NORMAL,
    "normal": Family.DISC_NORMAL,
    "disc_laplace": Family.DISC_LAPLACE,
    "laplace": Family.DISC_LAPLACE,
}


class CommandError(Exception):
    """User-facing failure; printed without a traceback."""


def parse_model_spec(text):
    """Parse ``[A|B|C:]family[:copula]`` into a :class:`ModelStructure`.

    Examples: ``skellam``, ``zi_skellam``, ``A:skellam``, ``B:skellam:frank``,
    ``C:disc_normal:gumbel``.
    """
    parts = [p.strip() for p in text.split(":") if p.strip()]
    if not parts:
        raise CommandError(f"empty model spec {text!r}")
    kind = Kind.UNIVARIATE
    if parts[0].upper() in ("A", "B", "C"):
        kind = Kind(parts.pop(0).upper())
    fam = _FAMILY_ALIASES.get(parts[0].lower()) if parts else Family.SKELLAM
    if fam is None:
        raise CommandError(f"unknown family in model spec {text!r}")
    cop = None
    if len(parts) > 1:
        try:
            cop = CopulaFamily(parts[1].lower())
        except ValueError as exc:
            raise CommandError(f"unknown copula in model spec {text!r}") from exc
    if len(parts) > 2:
        raise CommandError(f"too many fields in model spec {text!r}")
    try:
        return ModelStructure(kind, fam, cop)
    except ValueError as exc:
        raise CommandError(f"invalid model spec {text!r}: {exc}") from exc


def _points(text):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("points must look like 2,1,0") from exc
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("points must have three values")
    return vals


# ---------------------------------------------------------------------------
# Output helpers


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(out, name, doc, schema=None):
    doc = _clean(doc)
    if schema is not None:
        schemas.validate(doc, schema)
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def _write_csv(out, name, rows, columns):
    path = os.path.join(out, name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return path


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise CommandError(f"output directory {path} is not writable")
    return path


def _load_records(args):
    if not os.path.exists(args.input):
        raise CommandError(f"input file {args.input} not found")
    recs = ingest_csv(args.input)
    if getattr(args, "season", None):
        wanted = set(args.season)
        recs = [r for r in recs if r.season in wanted]
    if not recs:
        raise CommandError("no matches left after filtering")
    return recs


def _load_model(path):
    if not os.path.exists(path):
        raise CommandError(f"model file {path} not found")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    schemas.validate(doc, schemas.FIT_RESULT)
    return FitResult.from_dict(doc)


def _config(args):
    return FitConfig(max_iter=args.max_iter, gtol=args.gtol)


def _fit_one(structure, recs, config, baseline, zi_odds):
    if structure.bivariate:
        if not all(r.has_halves for r in recs):
            raise CommandError(f"{structure.label} needs half-time scores for every match")
        rows = [(r.home, r.away, r.half1_diff, r.half2_diff) for r in recs]
        return fit_bivariate(rows, structure, config, baseline=baseline)
    rows = [(r.home, r.away, r.diff) for r in recs]
    cov = None
    if structure.family is Family.ZI_SKELLAM and zi_odds:
        if not all(r.has_odds for r in recs):
            raise CommandError("odds covariate needs odds for every match")
        cov = np.array([[odds_strength_covariate(r.odds_1, r.odds_x, r.odds_2)] for r in recs])
        structure = ModelStructure(structure.kind, structure.family, None, 1)
    return fit_univariate(rows, structure, config, covariates=cov, baseline=baseline)


def _model_filename(label):
    return f"model_{label}.json"


# ---------------------------------------------------------------------------
# Commands


def cmd_describe(args):
    recs = _load_records(args)
    rows = describe(recs)
    out = _prepare_out(args.out)
    _write_json(out, "describe.json", {"seasons": rows}, schemas.DESCRIBE)
    _write_csv(out, "describe.csv", rows, list(rows[0].keys()))
    return 0


def cmd_fit(args):
    recs = _load_records(args)
    out = _prepare_out(args.out)
    config = _config(args)
    structures = [parse_model_spec(s) for s in args.models]
    labels = [s.label for s in structures]
    if len(set(labels)) != len(labels):
        raise CommandError("duplicate model specs")
    entries = []
    for st in structures:
        log.info("fitting %s", st.label)
        res = _fit_one(st, recs, config, args.baseline, args.zi_odds_covariate)
        fname = _model_filename(st.label)
        _write_json(out, fname, res.to_dict(), schemas.FIT_RESULT)
        entries.append({
            "label": st.label, "loglik": res.loglik, "n_params": res.n_params,
            "aic": res.aic, "bic": res.bic, "converged": res.converged,
            "gradient_norm": res.gradient_norm, "n_iter": res.n_iter,
            "diagnostics": list(res.diagnostics), "file": fname,
        })
    entries.sort(key=lambda e: (e["aic"], e["label"]))
    best = entries[0]["label"]
    for e in entries:
        e["best"] = e["label"] == best
    _write_json(out, "fit_comparison.json", {"models": entries, "best": best}, schemas.FIT_COMPARISON)
    _write_csv(out, "fit_comparison.csv", entries,
               ["label", "loglik", "n_params", "aic", "bic", "converged", "best", "gradient_norm"])
    failed = [e["label"] for e in entries if not e["converged"]]
    if failed:
        for e in entries:
            if not e["converged"]:
                print(f"not converged: {e['label']} (gradient norm {e['gradient_norm']:.3g}; "
                      f"{'; '.join(e['diagnostics']) or 'no diagnostics'})", file=sys.stderr)
        return 2
    return 0


def _write_summary(out, summary):
    doc = summary.to_dict()
    _write_json(out, "simulation.json", doc, schemas.SIMULATION)
    rows = [dict(rank=i + 1, **r) for i, r in enumerate(doc["teams"])]
    _write_csv(out, "standings.csv", rows,
               ["rank", "team", "current_points", "expected_points", "ci_low", "ci_high",
                "champion_prob", "relegation_prob", "expected_goal_diff"])


def cmd_simulate(args):
    model = _load_model(args.model)
    cov = None
    if args.fixtures:
        fixtures = read_fixtures(args.fixtures)
        if model.structure.n_inflation_covariates:
            raise CommandError("this model needs match odds; pass --input with odds instead of --fixtures")
    elif args.input:
        recs = _load_records(args)
        fixtures = [(r.home, r.away) for r in recs]
        cov = odds_covariates(recs, model)
    else:
        raise CommandError("simulate needs --fixtures or --input")
    out = _prepare_out(args.out)
    summary = simulate_season(fixtures, model, args.n_sims, args.seed, args.points,
                              args.relegated, args.jobs, cov)
    _write_summary(out, summary)
    return 0


def cmd_complete(args):
    recs = _load_records(args)
    remaining = read_fixtures(args.fixtures)
    out = _prepare_out(args.out)
    if args.model:
        model = _load_model(args.model)
        if model.structure.n_inflation_covariates:
            raise CommandError("remaining fixtures carry no odds; use a model without inflation covariates")
    else:
        st = parse_model_spec(args.model_spec)
        if st.bivariate:
            raise CommandError("season completion refits a univariate model; pass --model for others")
        model = _fit_one(st, recs, _config(args), args.baseline, False)
        _write_json(out, _model_filename(st.label), model.to_dict(), schemas.FIT_RESULT)
    try:
        summary = complete_season(recs, remaining, model, args.n_sims, args.seed, args.points,
                                  args.relegated, args.jobs, args.legs)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    _write_summary(out, summary)
    return 0


def cmd_conditional(args):
    model = _load_model(args.model)
    if not model.structure.bivariate:
        raise CommandError("conditional prediction needs a per-half (A/B/C) model")
    for t in (args.home, args.away):
        if t not in model.index:
            raise CommandError(f"unknown team {t!r}")
    b = model.bivariate(args.home, args.away)
    x = args.half_diff
    ys, probs = conditional_distribution(x, b)
    win, draw, loss = outcome_probabilities(x, b)
    out = _prepare_out(args.out)
    doc = {
        "model": model.structure.label, "home": args.home, "away": args.away, "half_diff": x,
        "final_diff": [int(x + y) for y in ys], "pmf": [float(p) for p in probs],
        "win": win, "draw": draw, "loss": loss,
    }
    _write_json(out, "conditional.json", doc, schemas.CONDITIONAL)
    return 0


def cmd_ecdf_band(args):
    recs = _load_records(args)
    model = _load_model(args.model)
    out = _prepare_out(args.out)
    obs = [r.diff for r in recs]
    fixtures = [(r.home, r.away) for r in recs]
    band = ecdf_band(obs, fixtures, model, args.n_reps, args.seed, args.level, args.jobs,
                     odds_covariates(recs, model))
    doc = band.to_dict()
    _write_json(out, "ecdf_band.json", doc, schemas.ECDF_BAND)
    _write_csv(out, "ecdf_band.csv", doc["points"], ["z", "lower", "upper", "observed"])
    return 0


def cmd_expected_outcomes(args):
    recs = _load_records(args)
    models = {}
    for path in args.model:
        m = _load_model(path)
        models[m.structure.label] = m
    out = _prepare_out(args.out)
    rows = outcome_table(recs, models)
    _write_json(out, "expected_outcomes.json", {"n_matches": len(recs), "rows": rows},
                schemas.EXPECTED_OUTCOMES)
    _write_csv(out, "expected_outcomes.csv", rows, ["source", "home_wins", "draws", "away_wins"])
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser():
    p = argparse.ArgumentParser(prog="scorediff", description="Score-difference models for league data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp, required=True):
        sp.add_argument("--input", required=required, help="match CSV")
        sp.add_argument("--season", action="append", help="keep only this season (repeatable)")

    def out_arg(sp):
        sp.add_argument("--out", required=True, help="output directory")

    def fit_args(sp):
        sp.add_argument("--baseline", help="baseline team (default: first alphabetically)")
        sp.add_argument("--gtol", type=float, default=1e-6)
        sp.add_argument("--max-iter", type=int, default=500)

    def sim_args(sp):
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--n-sims", type=int, default=10_000)
        sp.add_argument("--points", type=_points, default=(2, 1, 0), help="win,draw,loss points")
        sp.add_argument("--relegated", type=int, default=2, help="number of relegation places")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("describe", help="per-season descriptive statistics")
    data_args(sp)
    out_arg(sp)
    sp.set_defaults(func=cmd_describe)

    sp = sub.add_parser("fit", help="fit models and compare AIC")
    data_args(sp)
    out_arg(sp)
    fit_args(sp)
    sp.add_argument("--models", nargs="+", default=["skellam"],
                    help="model specs such as skellam, zi_skellam, A:skellam, B:skellam:frank")
    sp.add_argument("--zi-odds-covariate", action="store_true",
                    help="use the odds-based strength gap as a zero-inflation covariate")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="simulate a full season")
    data_args(sp, required=False)
    out_arg(sp)
    sim_args(sp)
    sp.add_argument("--model", required=True, help="fitted model JSON")
    sp.add_argument("--fixtures", help="home,away fixture CSV (default: fixtures of --input)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("complete", help="simulate the rest of an interrupted season")
    data_args(sp)
    out_arg(sp)
    sim_args(sp)
    fit_args(sp)
    sp.add_argument("--fixtures", required=True, help="remaining home,away fixtures")
    sp.add_argument("--model", help="fitted model JSON (default: refit on the played matches)")
    sp.add_argument("--model-spec", default="skellam", help="model refitted when --model is absent")
    sp.add_argument("--legs", type=int, default=1, help="times each home/away pairing is scheduled")
    sp.set_defaults(func=cmd_complete)

    sp = sub.add_parser("conditional", help="final-score distribution given the half-time difference")
    out_arg(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--home", required=True)
    sp.add_argument("--away", required=True)
    sp.add_argument("--half-diff", type=int, required=True)
    sp.set_defaults(func=cmd_conditional)

    sp = sub.add_parser("ecdf-band", help="bootstrap band for the ECDF of differences")
    data_args(sp)
    out_arg(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--n-reps", type=int, default=10_000)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_ecdf_band)

    sp = sub.add_parser("expected-outcomes", help="observed vs expected win/draw/loss counts")
    data_args(sp)
    out_arg(sp)
    sp.add_argument("--model", action="append", required=True, help="fitted model JSON (repeatable)")
    sp.set_defaults(func=cmd_expected_outcomes)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, ValueError, KeyError, OSError) as exc:
        print(f"scorediff {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
