"""Command-line interface.

Commands: fit, simulate, mc-table, bootstrap, pit, predict-eval.
Dataset CSVs are headered; response columns are those named y, y1,
y2, ... and every other column is a covariate, in file order, behind
an always-prepended intercept. Exit codes: 0 success, 1 user error,
2 internal error.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import io as io_mod
from ._kernels import ACTIVE_BACKEND
from .amle import AmleConfig, amle_fit
from .core import cmp_param_names, tg_param_names
from .estimators import fit_gsm, fit_sm
from .experiments import (bootstrap_ci, pit_pairs, run_mc, simulate_dataset,
                          train_test_mse)
from .inference import sandwich, wald_table
from .sampling import STREAM_PIT, RngStream

_RESPONSE_RE = re.compile(r"^y\d*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    estimator: str | None = None
    input: str | None = None
    out: str | None = None
    seed: int | None = None
    n: int | None = None
    replicates: int | None = None
    level: float | None = None
    bootstrap_samples: int | None = None
    z_mode: str | None = None
    train_frac: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown configuration keys: {', '.join(unknown)}")
        if "command" not in d:
            raise ValueError("configuration requires a command")
        return cls(**d)

    def echo(self) -> dict:
        return {k: v for k, v in vars(self).items() if v is not None}


def build_parser() -> _Parser:
    p = _Parser(prog="scorematch",
                description="Regression estimators that bypass intractable "
                            "normalizing constants, with a likelihood baseline.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, *flag_specs):
        sp = sub.add_parser(name, help=help_)
        for spec in flag_specs:
            sp.add_argument(spec.pop("flag"), **spec)
        return sp

    model = lambda: {"flag": "--model", "choices": ["tg", "cmp"], "required": True}
    est = lambda **kw: dict({"flag": "--estimator",
                             "choices": ["sm", "gsm", "amle"]}, **kw)
    inp = lambda: {"flag": "--input", "required": True, "help": "dataset CSV"}
    out = lambda: {"flag": "--out", "required": True, "help": "output directory"}
    seed = lambda **kw: dict({"flag": "--seed", "type": int}, **kw)
    level = lambda: {"flag": "--level", "type": float, "default": 0.95}
    zmode = lambda: {"flag": "--z-mode", "dest": "z_mode", "default": "HYBRID",
                     "choices": ["TRUNCATED", "ASYMPTOTIC", "HYBRID"]}

    add("fit", "fit one model to a dataset",
        model(), est(required=True), inp(), out(), level(), zmode(), seed())
    add("simulate", "draw one dataset at the built-in truth",
        model(), {"flag": "--n", "type": int, "required": True},
        seed(default=0), out())
    add("mc-table", "replicated simulation study",
        model(), est(), {"flag": "--n", "type": int, "default": 1000},
        {"flag": "--replicates", "type": int, "default": 200},
        seed(default=0), zmode(), out())
    add("bootstrap", "parametric percentile bootstrap of a fit",
        model(), est(required=True), inp(), out(),
        {"flag": "--bootstrap-samples", "dest": "bootstrap_samples",
         "type": int, "default": 1000},
        level(), seed(default=0), zmode())
    add("pit", "probability integral transform of a count fit",
        inp(), out(), est(default="gsm"), seed(), zmode())
    add("predict-eval", "train/test mean squared error of count predictions",
        inp(), out(), est(default="gsm"),
        {"flag": "--train-frac", "dest": "train_frac", "type": float,
         "default": 0.7},
        seed(default=0), zmode())
    return p


def _check_pair(model, estimator):
    ok = {"tg": ("sm",), "cmp": ("gsm", "amle")}
    if estimator not in ok[model]:
        raise UsageError(f"estimator {estimator!r} does not apply to model "
                         f"{model!r} (expected one of {ok[model]})")


def _load_for_model(path, model):
    header = io_mod.sniff_header(path)
    responses = [c for c in header if _RESPONSE_RE.match(c)]
    if model == "tg":
        if not responses:
            raise ValueError(f"{path}: no response columns named y1, y2, ...")
        return io_mod.load_csv(path, responses, intercept=True, count=False)
    if len(responses) != 1:
        raise ValueError(f"{path}: count data needs exactly one response "
                         f"column named y, found {responses or 'none'}")
    return io_mod.load_csv(path, responses, intercept=True, count=True)


def _fit_table(cfg: RunConfig, ds):
    if cfg.estimator == "sm":
        res = fit_sm(ds)
        cov = sandwich(res.fit.theta_hat, ds, "sm")
        names = tg_param_names(res.params.d, ds.p_cov)
        table = wald_table(res.fit.theta_hat, cov, cfg.level, names)
        extra = {"lam_definite": res.lam_definite}
        fit = res.fit
    elif cfg.estimator == "gsm":
        res = fit_gsm(ds)
        cov = sandwich(res.fit.theta_hat, ds, "gsm")
        table = wald_table(res.fit.theta_hat, cov, cfg.level,
                           cmp_param_names(ds.p_cov))
        extra = {}
        fit = res.fit
    else:
        res = amle_fit(ds, AmleConfig(z_mode=cfg.z_mode))
        table = wald_table(res.fit.theta_hat, res.se, cfg.level,
                           cmp_param_names(ds.p_cov))
        extra = {"loglik": res.loglik}
        if res.z_mode_used is not None:
            modes, counts = np.unique(res.z_mode_used, return_counts=True)
            extra["z_mode_used"] = {str(m): int(c)
                                    for m, c in zip(modes, counts)}
        fit = res.fit
    convergence = {"converged": bool(fit.converged),
                   "iterations": int(fit.iterations),
                   "function_evals": int(fit.function_evals),
                   "objective": float(fit.objective)}
    convergence.update(extra)
    return table, convergence


def _meta(cfg: RunConfig, runtime, convergence=None) -> dict:
    meta = {"seed": cfg.seed, "config": cfg.echo(),
            "runtime_seconds": runtime, "backend": ACTIVE_BACKEND}
    if convergence is not None:
        meta["convergence"] = convergence
    return meta


def _cmd_fit(cfg: RunConfig) -> None:
    ds = _load_for_model(cfg.input, cfg.model)
    t0 = time.perf_counter()
    table, convergence = _fit_table(cfg, ds)
    io_mod.write_results(table, cfg.out,
                         _meta(cfg, time.perf_counter() - t0, convergence))


def _cmd_simulate(cfg: RunConfig) -> None:
    setting = "TG" if cfg.model == "tg" else "CMP"
    ds, cov_names, resp_names = simulate_dataset(setting, cfg.n, cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    io_mod.write_dataset_csv(os.path.join(cfg.out, "data.csv"),
                             ds, cov_names, resp_names)


def _cmd_mc(cfg: RunConfig) -> None:
    setting = "TG" if cfg.model == "tg" else "CMP"
    estimators = (cfg.estimator.upper(),) if cfg.estimator else None
    report = run_mc(setting, estimators, (cfg.n,), cfg.replicates,
                    cfg.seed, amle_z_mode=cfg.z_mode)
    # no meta.json here: rerunning with one seed must be byte-identical
    io_mod.write_results(report, cfg.out)


def _cmd_bootstrap(cfg: RunConfig) -> None:
    ds = _load_for_model(cfg.input, cfg.model)
    t0 = time.perf_counter()
    table = bootstrap_ci(ds, cfg.model, cfg.estimator,
                         b=cfg.bootstrap_samples, level=cfg.level,
                         seed=cfg.seed, amle_cfg=AmleConfig(z_mode=cfg.z_mode))
    io_mod.write_results(table, cfg.out, _meta(cfg, time.perf_counter() - t0))


def _cmd_pit(cfg: RunConfig) -> None:
    ds = _load_for_model(cfg.input, "cmp")
    t0 = time.perf_counter()
    if cfg.estimator == "gsm":
        params = fit_gsm(ds).params
    else:
        params = amle_fit(ds, AmleConfig(z_mode=cfg.z_mode)).params
    rng = None if cfg.seed is None else RngStream(cfg.seed, STREAM_PIT)
    pairs = pit_pairs(ds, params, rng)
    io_mod.write_results(pairs, cfg.out, _meta(cfg, time.perf_counter() - t0))


def _cmd_predict(cfg: RunConfig) -> None:
    ds = _load_for_model(cfg.input, "cmp")
    t0 = time.perf_counter()
    mse = train_test_mse(ds, split_seed=cfg.seed, train_frac=cfg.train_frac,
                         estimator=cfg.estimator,
                         amle_cfg=AmleConfig(z_mode=cfg.z_mode))
    n_train = int(round(cfg.train_frac * ds.n))
    os.makedirs(cfg.out, exist_ok=True)
    io_mod._write_csv(os.path.join(cfg.out, "predict_eval.csv"),
                      ["estimator", "train_frac", "n_train", "n_test", "mse"],
                      [[cfg.estimator, io_mod._g17(cfg.train_frac),
                        str(n_train), str(ds.n - n_train), io_mod._g17(mse)]])
    io_mod.write_meta(os.path.join(cfg.out, "meta.json"),
                      _meta(cfg, time.perf_counter() - t0))


_COMMANDS = {
    "fit": _cmd_fit,
    "simulate": _cmd_simulate,
    "mc-table": _cmd_mc,
    "bootstrap": _cmd_bootstrap,
    "pit": _cmd_pit,
    "predict-eval": _cmd_predict,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        d = {k: v for k, v in vars(args).items()}
        cfg = RunConfig.from_dict(d)
        if cfg.model is not None and cfg.estimator is not None:
            _check_pair(cfg.model, cfg.estimator)
        _COMMANDS[cfg.command](cfg)
    except (UsageError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
