"""Command-line harness: ``gapgp {sample,design,fit,predict,eval,verify}``.

Exit codes: 0 success, 2 configuration / input error, 3 numerical failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import dataio, verify
from .design import LhdConfig, maximin_lhd, to_box
from .gp import (
    FitError,
    FitOptions,
    Hyperparameters,
    Model,
    NumericalError,
    condition,
    default_nuggets,
    fit,
    log_marginal_likelihood,
    sample_joint,
)
from .metrics import MetricError, summary
from .mrna import KernelOverflowError
from .params import TOY_KERNEL, GreensConfig, KernelParams, ParameterError, preset
from .types import Channel, DomainError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("gapgp")

EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="TOML file of option defaults (keys as long flags, '-' or '_')")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=["mrna", "protein"], default="protein")
    p.add_argument("--n-terms", type=int, default=20, help="Green's-function modes (GP-mRNA)")
    p.add_argument("--preset", default="toy", help="mechanistic parameters: toy, becker-kr, becker-kni, becker-gt")
    p.add_argument("--domain-len", type=float, default=None, help="spatial domain length l (default 1, or 100 for percent data)")
    p.add_argument("--sigma2", type=float, default=TOY_KERNEL.sigma2)
    p.add_argument("--theta-x", type=float, default=TOY_KERNEL.theta_x)
    p.add_argument("--theta-t", type=float, default=TOY_KERNEL.theta_t)
    p.add_argument("--s-rate", type=float, default=None, help="override S of the preset")
    p.add_argument("--lam", type=float, default=None, help="override lambda of the preset")
    p.add_argument("--diff", type=float, default=None, help="override D of the preset")


def _data_args(p):
    p.add_argument("--data", required=True, help="CSV with columns gene,channel,x,t,value")
    p.add_argument("--gene", default=None, help="keep only this gene")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)


def _fit_args(p):
    p.add_argument("--freeze", action="append", default=[],
                   help="hold a field fixed (mech, kernel, s_rate, lam, diff, sigma2, theta_x, theta_t); repeatable")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--maxiter", type=int, default=None, help="early-stopping cap on optimiser iterations")
    p.add_argument("--method", choices=["nelder-mead", "l-bfgs-b"], default="nelder-mead")
    p.add_argument("--nugget-rel", type=float, default=1e-6, help="per-channel nugget as a fraction of data variance")


def build_parser():
    parser = argparse.ArgumentParser(prog="gapgp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a synthetic data set from the joint prior")
    _common(p)
    p.add_argument("--grid", type=int, default=41, help="truth grid is grid x grid on [0, l] x [0, 1]")
    p.add_argument("--n-train", type=int, default=40, help="maximin-LHD observation points (0: observe the grid)")
    p.add_argument("--sa-iterations", type=int, default=10_000)
    p.add_argument("--gene", default="synthetic")
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-truth", required=True)
    p.set_defaults(n_terms=10)

    p = sub.add_parser("design", help="maximin Latin hypercube design")
    p.add_argument("--config")
    p.add_argument("--n-points", type=int, default=40)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--decay", type=float, default=0.995)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", type=float, nargs=4, metavar=("X0", "X1", "T0", "T1"), default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="maximum-likelihood hyperparameters")
    _common(p)
    _data_args(p)
    _fit_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="posterior mean / variance from a fit")
    p.add_argument("--config")
    p.add_argument("--fit", required=True, help="JSON written by 'gapgp fit'")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--query", help="design CSV (x,t)")
    group.add_argument("--grid", type=int, help="regular grid over the training bounding box")
    p.add_argument("--channels", default="U,Y")
    p.add_argument("--truth", help="expression CSV at the query points, for metrics")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="Q2 / CA over random train/test splits and data regimes")
    _common(p)
    _data_args(p)
    _fit_args(p)
    p.add_argument("--regime", choices=["u-only", "y-only", "both", "all"], default="all")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--train-frac", type=float, default=0.30)
    p.add_argument("--no-fit", action="store_true", help="keep the given hyperparameters")
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="run the oracle consistency suite")
    p.add_argument("--config")
    p.add_argument("--profile", choices=["quick", "full"], default="full")
    p.add_argument("--out", default=None)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults from ``--config`` so explicit flags still win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, "rb") as fh:
            conf = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    conf = {k.replace("-", "_"): v for k, v in conf.items()}
    known = vars(args)
    unknown = sorted(set(conf) - set(known))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**conf)
    return parser.parse_args(argv)


def _hyper(args, nuggets=None, frozen=()):
    mech = preset(args.preset)
    over = {k: getattr(args, k) for k in ("s_rate", "lam", "diff") if getattr(args, k, None) is not None}
    if over:
        mech = type(mech)(**{**mech.to_dict(), **over})
    kp = KernelParams(args.sigma2, args.theta_x, args.theta_t)
    return Hyperparameters(mech, kp, nuggets or {}, frozenset(frozen))


def _domain_len(args, records=()):
    if args.domain_len is not None:
        return args.domain_len
    return 100.0 if any(r.x > 1.0 for r in records) else 1.0


def _load(args):
    report = dataio.load_csv(args.data, t_min=args.t_min, t_max=args.t_max,
                             genes=None if args.gene is None else [args.gene])
    if not report.records:
        raise ConfigError(f"no usable records in {args.data}")
    log.info("loaded %d records (%d filtered)", len(report.records), len(report.filtered))
    return report.records


def _posterior_dict(post):
    return {
        ch.value: {
            "x": pf.design[:, 0],
            "t": pf.design[:, 1],
            "mean": pf.mean,
            "variance": pf.variance,
            "n_clamped": pf.n_clamped,
        }
        for ch, pf in post.items()
    }


def _model_dict(model):
    return {"variant": model.variant, "n_terms": model.greens.n_terms, "domain_len": model.greens.domain_len}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args):
    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    l = args.domain_len or 1.0
    model = Model(args.model, _hyper(args), GreensConfig(l, args.n_terms))
    xs = np.linspace(0.0, l, args.grid)
    ts = np.linspace(0.0, 1.0, args.grid)
    xx, tt = np.meshgrid(xs, ts)
    grid = np.column_stack([xx.ravel(), tt.ravel()])
    if args.n_train > 0:
        cfg = LhdConfig(args.n_train, 2, sa_iterations=args.sa_iterations, seed=args.seed)
        train = to_box(maximin_lhd(cfg), [0.0, 0.0], [l, 1.0])
        pts = np.vstack([grid, train])
    else:
        pts = grid
    u, y = sample_joint(model, pts, pts, seed=args.seed)

    def records(P, uv, yv):
        out = [dataio.ExpressionRecord(args.gene, Channel.U, float(x), float(t), float(v)) for (x, t), v in zip(P, uv)]
        out += [dataio.ExpressionRecord(args.gene, Channel.Y, float(x), float(t), float(v)) for (x, t), v in zip(P, yv)]
        return out

    n = len(grid)
    dataio.save_csv(records(grid, u[:n], y[:n]), args.out_truth)
    if args.n_train > 0:
        dataio.save_csv(records(pts[n:], u[n:], y[n:]), args.out_data)
    else:
        dataio.save_csv(records(grid, u, y), args.out_data)
    return 0


def cmd_design(args):
    cfg = LhdConfig(args.n_points, args.dims, sa_iterations=args.iterations, decay=args.decay, seed=args.seed)
    design = maximin_lhd(cfg)
    if args.box is not None:
        if args.dims != 2:
            raise ConfigError("--box applies to 2-D (x, t) designs only")
        x0, x1, t0, t1 = args.box
        design = to_box(design, [x0, t0], [x1, t1])
    if args.dims == 2:
        dataio.save_design(design, args.out)
    else:
        np.savetxt(args.out, design, delimiter=",", header=",".join(f"z{i}" for i in range(args.dims)), comments="")
    return 0


def _fit_model(args, records, l):
    obs0 = dataio.to_observations(records)
    nug = default_nuggets(obs0, args.nugget_rel) if args.nugget_rel > 0 else {}
    obs = dataio.to_observations(records, nug)
    model = Model(args.model, _hyper(args, nug, args.freeze), GreensConfig(l, args.n_terms))
    opts = FitOptions(method=args.method, n_restarts=args.restarts, maxiter=args.maxiter, seed=args.seed)
    return model, obs, fit(model, obs, opts)


def cmd_fit(args):
    records = _load(args)
    l = _domain_len(args, records)
    model, obs, res = _fit_model(args, records, l)
    fitted = model.with_hyper(res.hyper)
    post = condition(fitted, obs, {o.channel: o.design for o in obs})
    metrics = {o.channel.value: summary(o.values, post[o.channel].mean, post[o.channel].variance) for o in obs
               if np.var(o.values) > 0}
    report = {
        "model": _model_dict(fitted),
        "hyperparameters": res.hyper.to_dict(),
        "loglik": res.loglik,
        "initial_loglik": res.initial_loglik,
        "n_evals": res.n_evals,
        "trace": res.trace,
        "metrics": metrics,
        "metrics_scope": "in-sample (training points)",
        "posterior": _posterior_dict(post),
        "training": [
            {"gene": r.gene, "channel": r.channel.value, "x": r.x, "t": r.t, "value": r.value} for r in records
        ],
    }
    dataio.write_json(report, args.out)
    return 0


def _model_from_fit(doc):
    m = doc["model"]
    hyper = Hyperparameters.from_dict(doc["hyperparameters"])
    return Model(m["variant"], hyper, GreensConfig(m["domain_len"], m["n_terms"]))


def cmd_predict(args):
    doc = dataio.read_json(args.fit)
    model = _model_from_fit(doc)
    records = [dataio.ExpressionRecord(r["gene"], Channel.parse(r["channel"]), r["x"], r["t"], r["value"])
               for r in doc["training"]]
    obs = dataio.to_observations(records)
    if args.query:
        Q = dataio.load_design(args.query)
    else:
        xs = [r.x for r in records]
        ts = [r.t for r in records]
        gx = np.linspace(min(xs), max(xs), args.grid)
        gt = np.linspace(min(ts), max(ts), args.grid)
        xx, tt = np.meshgrid(gx, gt)
        Q = np.column_stack([xx.ravel(), tt.ravel()])
    channels = [Channel.parse(c) for c in args.channels.split(",") if c.strip()]
    post = condition(model, obs, {ch: Q for ch in channels})
    report = {"model": _model_dict(model), "hyperparameters": doc["hyperparameters"], "loglik": doc.get("loglik"),
              "posterior": _posterior_dict(post), "metrics": {}}
    if args.truth:
        truth = dataio.load_csv(args.truth).records
        for ch in channels:
            lookup = {(round(r.x, 9), round(r.t, 9)): r.value for r in truth if r.channel is ch}
            pf = post[ch]
            keys = [(round(x, 9), round(t, 9)) for x, t in pf.design]
            have = np.array([k in lookup for k in keys])
            if have.sum() > 1:
                tv = np.array([lookup[k] for k, h in zip(keys, have) if h])
                report["metrics"][ch.value] = summary(tv, pf.mean[have], pf.variance[have])
    dataio.write_json(report, args.out)
    return 0


def cmd_eval(args):
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    records = _load(args)
    l = _domain_len(args, records)
    regimes = ["u-only", "y-only", "both"] if args.regime == "all" else [args.regime]
    wanted = {"u-only": {Channel.U}, "y-only": {Channel.Y}, "both": {Channel.U, Channel.Y}}
    by_ch = {ch: [r for r in records if r.channel is ch] for ch in (Channel.U, Channel.Y)}
    per_seed = {reg: [] for reg in regimes}
    for seed in range(args.seed, args.seed + args.seeds):
        train, test = {}, {}
        for k, ch in enumerate((Channel.U, Channel.Y)):
            rs = by_ch[ch]
            if len(rs) < 2:
                continue
            tr, te = dataio.train_test_split(len(rs), args.train_frac, seed=seed * 2 + k)
            train[ch] = [rs[i] for i in tr]
            test[ch] = [rs[i] for i in te]
        for reg in regimes:
            recs = [r for ch in wanted[reg] for r in train.get(ch, [])]
            if not recs:
                raise ConfigError(f"regime {reg} has no training data")
            if args.no_fit:
                model = Model(args.model, _hyper(args, frozen=args.freeze), GreensConfig(l, args.n_terms))
                obs = dataio.to_observations(recs)
                loglik = log_marginal_likelihood(model, obs)
            else:
                model, obs, res = _fit_model(args, recs, l)
                model = model.with_hyper(res.hyper)
                loglik = res.loglik
            query = {ch: np.array([[r.x, r.t] for r in test[ch]]) for ch in test}
            post = condition(model, obs, query)
            scores = {}
            for ch, pf in post.items():
                truth = np.array([r.value for r in test[ch]])
                scores[ch.value] = summary(truth, pf.mean, pf.variance)
            per_seed[reg].append({"seed": seed, "loglik": loglik, "metrics": scores,
                                  "hyperparameters": model.hyper.to_dict()})
    aggregate = {}
    for reg, runs in per_seed.items():
        aggregate[reg] = {}
        for ch in ("U", "Y"):
            vals = [r["metrics"][ch] for r in runs if ch in r["metrics"]]
            if vals:
                aggregate[reg][ch] = {
                    m: {"mean": float(np.mean([v[m] for v in vals])), "std": float(np.std([v[m] for v in vals])),
                        "median": float(np.median([v[m] for v in vals]))}
                    for m in ("q2", "smse", "ca")
                }
    dataio.write_json({"model": {"variant": args.model, "n_terms": args.n_terms, "domain_len": l},
                       "train_frac": args.train_frac, "per_seed": per_seed, "aggregate": aggregate}, args.out)
    return 0


def cmd_verify(args):
    checks = verify.run_all(args.profile)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    if args.out:
        dataio.write_json({"passed": ok, "profile": args.profile, "checks": [c.to_dict() for c in checks]}, args.out)
    return 0 if ok else EXIT_VERIFY


COMMANDS = {
    "sample": cmd_sample,
    "design": cmd_design,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except ConfigError as exc:
        print(f"gapgp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (NumericalError, KernelOverflowError, FitError, FloatingPointError) as exc:
        print(f"gapgp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ParameterError, DomainError, MetricError, dataio.DataFormatError, ValueError, OSError) as exc:
        print(f"gapgp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
