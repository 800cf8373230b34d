"""Experiment runner: one subcommand per experiment family.

Every subcommand reads a JSON config (defaults apply for missing keys),
runs deterministically given the seeds therein, and writes its outputs
under --out: a trajectory CSV, a labels CSV, and a metrics JSON document
of the shape {"experiment", "config", "turnpike", "train", ...}.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failure.  The NODE_THREADS environment variable caps worker parallelism;
the current engine is single-threaded, so any positive cap is honored.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import data as dio
from .activations import activation_from_name
from .controllability import RankDeficiencyError, steer_linear_arc, weight_lower_bound
from .dynamics import (
    BOTTLENECK,
    DivergenceError,
    GronwallViolation,
    integrate_forward,
    random_control,
)
from .greedy import greedy_pretrain, resample_uniform
from .scaling import rescale_control
from .spacetime import KernelPath, SpaceGrid, dirac_fixed_grid_equivalence, integrate_nonlocal
from .training import (
    ConstraintViolation,
    FunctionalSpec,
    Projector,
    adam_train,
    reg_norm,
)
from .turnpike import bangbang_profile, final_time_gap, turnpike_fit


def _check_node_threads() -> None:
    raw = os.environ.get("NODE_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        raise dio.ConfigError(f"NODE_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise dio.ConfigError("NODE_THREADS must be at least 1")


def _load(args) -> dio.Config:
    if args.config is None:
        return dio.default_config()
    return dio.load_config(args.config)


def _apply_overrides(cfg: dio.Config, args) -> None:
    if getattr(args, "seed", None) is not None:
        cfg["optimizer"]["seed"] = args.seed
        cfg["data"]["seed"] = args.seed
    if getattr(args, "l1", None) is not None:
        cfg["functional"]["l1_bound"] = args.l1
        cfg["functional"]["include_final_cost"] = False
    if getattr(args, "no_final_cost", False):
        cfg["functional"]["include_final_cost"] = False


def _build_dataset(cfg: dio.Config):
    d = cfg["data"]
    inputs, labels = dio.gen_concentric_spheres(
        dim=d["dim"], n=d["n"], r1=d["r1"], r2=d["r2"], r3=d["r3"], seed=d["seed"]
    )
    if d["augment_to"] is not None:
        inputs = dio.augment_zeros(inputs, int(d["augment_to"]))
    return inputs, labels


def _build_projector(cfg: dio.Config, d: int) -> Projector:
    p = cfg["projector"]
    rng = np.random.default_rng(cfg["optimizer"]["seed"] + 1)
    if p["kind"] == "linear" and d == 1:
        theta1, theta2 = np.ones((1, d)), np.zeros(1)
    else:
        theta1 = 0.1 * rng.standard_normal((1, d))
        theta2 = np.zeros(1)
    return Projector(p["kind"], theta1, theta2, trainable=bool(p["trainable"]))


def _target_rows(cfg: dio.Config, labels: np.ndarray, d: int) -> np.ndarray:
    scale = float(cfg["functional"]["target_scale"])
    base_dim = cfg["data"]["dim"]
    x_d = np.zeros((labels.size, d))
    x_d[:, :base_dim] = scale * labels[:, None]
    return x_d


def _build_spec(cfg: dio.Config, labels: np.ndarray, d: int, with_tracking: bool) -> FunctionalSpec:
    fn = cfg["functional"]
    l1_bound = fn["l1_bound"]
    x_d = _target_rows(cfg, labels, d) if (with_tracking and fn["beta"] > 0) else None
    return FunctionalSpec(
        loss_kind=fn["loss"],
        projector=_build_projector(cfg, d),
        alpha=float(fn["alpha"]),
        beta=float(fn["beta"]) if with_tracking else 0.0,
        sobolev_order=int(fn["k"]),
        x_d=x_d,
        l1_mode=l1_bound is not None,
        l1_bound=None if l1_bound is None else float(l1_bound),
        include_final_cost=bool(fn["include_final_cost"]),
        min_phi=float(fn["min_phi"]),
    )


def _train_once(cfg: dio.Config, spec: FunctionalSpec, x0, labels2d, act, tag, n_layers, horizon):
    opt = cfg["optimizer"]
    hidden = cfg["dynamics"]["hidden"]
    u0 = random_control(
        x0.shape[1],
        n_layers,
        horizon,
        seed=int(opt["seed"]),
        scale=float(opt["init_scale"]),
        hidden=None if tag != BOTTLENECK else int(hidden or x0.shape[1]),
    )
    return adam_train(
        u0, x0, labels2d, spec, tag, act, lr=float(opt["lr"]), iters=int(opt["iters"]), seed=int(opt["seed"])
    )


def _emit(out_dir: str, name: str, cfg: dio.Config, traj, labels, train_report, extra: dict):
    os.makedirs(out_dir, exist_ok=True)
    if traj is not None:
        dio.write_trajectory(os.path.join(out_dir, "trajectory.csv"), traj)
    if labels is not None:
        dio.write_labels(os.path.join(out_dir, "labels.csv"), labels)
    document = {
        "experiment": name,
        "config": cfg.to_json_dict(),
        "turnpike": extra.pop("turnpike", None),
        "train": None if train_report is None else train_report.to_json_dict(),
    }
    document.update(extra)
    dio.write_metrics(os.path.join(out_dir, "metrics.json"), document)


def _cmd_train(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    tag = cfg["dynamics"]["tag"]
    inputs, labels = _build_dataset(cfg)
    labels2d = labels[:, None]
    spec = _build_spec(cfg, labels, inputs.shape[1], with_tracking=True)
    horizon, n_layers = float(cfg["horizon"]["T"]), int(cfg["horizon"]["n_layers"])
    u, report = _train_once(cfg, spec, inputs, labels2d, act, tag, n_layers, horizon)
    traj = integrate_forward(inputs, u, tag, act, scheme=args.scheme)
    _emit(args.out, cfg["experiment"], cfg, traj, labels, report, {})
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    tag = cfg["dynamics"]["tag"]
    inputs, labels = _build_dataset(cfg)
    labels2d = labels[:, None]
    horizons = [float(t) for t in (args.horizons or cfg["sweep"]["horizons"])]
    if any(t <= 0 for t in horizons):
        raise dio.ConfigError("sweep horizons must be positive")
    spec = _build_spec(cfg, labels, inputs.shape[1], with_tracking=False)
    records = []
    warm = bool(cfg["sweep"]["warm_start"])
    opt = cfg["optimizer"]
    u_prev = None
    os.makedirs(args.out, exist_ok=True)
    for horizon in horizons:
        n_layers = max(1, math.floor(horizon**1.5))
        if u_prev is None or not warm:
            u0 = random_control(
                inputs.shape[1], n_layers, horizon, seed=int(opt["seed"]), scale=float(opt["init_scale"])
            )
        else:
            u0 = resample_uniform(rescale_control(u_prev, horizon), n_layers)
        u, report = adam_train(
            u0, inputs, labels2d, spec, tag, act,
            lr=float(opt["lr"]), iters=int(opt["iters"]), seed=int(opt["seed"]),
        )
        u_prev = u
        base = rescale_control(u, 1.0)
        records.append(
            {
                "T": horizon,
                "n_layers": n_layers,
                "final_training_error": report.final_training_error,
                "rescaled_l2_norm_sq": reg_norm(base, 0),
            }
        )
        traj = integrate_forward(inputs, u, tag, act, scheme=args.scheme)
        dio.write_trajectory(os.path.join(args.out, f"trajectory_T{horizon:g}.csv"), traj)
    dio.write_labels(os.path.join(args.out, "labels.csv"), labels)
    _emit(args.out, cfg["experiment"], cfg, None, None, None, {"records": records})
    return 0


def _cmd_turnpike(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    fn = cfg["functional"]
    if fn["l1_bound"] is None and fn["beta"] <= 0:
        raise dio.ConfigError("the tracking run needs functional.beta > 0 (or --l1)")
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    tag = cfg["dynamics"]["tag"]
    inputs, labels = _build_dataset(cfg)
    labels2d = labels[:, None]
    spec = _build_spec(cfg, labels, inputs.shape[1], with_tracking=True)
    horizon, n_layers = float(cfg["horizon"]["T"]), int(cfg["horizon"]["n_layers"])
    u, report = _train_once(cfg, spec, inputs, labels2d, act, tag, n_layers, horizon)
    traj = integrate_forward(inputs, u, tag, act, scheme=args.scheme)
    x_d = _target_rows(cfg, labels, inputs.shape[1])
    tp = turnpike_fit(traj, x_d)
    if spec.l1_mode:
        tp.fractions, tp.t_prime = bangbang_profile(u, spec.l1_bound, tol_rel=0.05)
    extra: dict = {"turnpike": tp.to_json_dict()}
    if not spec.include_final_cost:
        gap, best, attained = final_time_gap(traj, x_d)
        extra["stabilization"] = {"final_gap": gap, "min_gap": best, "final_attains_min": attained}
    _emit(args.out, cfg["experiment"], cfg, traj, labels, report, extra)
    return 0


def _cmd_greedy(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    tag = cfg["dynamics"]["tag"]
    inputs, labels = _build_dataset(cfg)
    labels2d = labels[:, None]
    spec = _build_spec(cfg, labels, inputs.shape[1], with_tracking=False)
    g = cfg["greedy"]
    opt = cfg["optimizer"]
    dt = float(cfg["horizon"]["T"]) / int(cfg["horizon"]["n_layers"])
    result = greedy_pretrain(
        inputs,
        labels2d,
        spec,
        tag,
        act,
        dt=dt,
        n0=int(g["n0"]),
        schedule=[int(v) for v in g["schedule"]],
        tol=float(g["tol"]),
        lr=float(opt["lr"]),
        iters_per_stage=int(opt["iters"]),
        seed=int(opt["seed"]),
        init_scale=float(opt["init_scale"]),
    )
    traj = integrate_forward(inputs, result.control, tag, act, scheme=args.scheme)
    extra = {
        "greedy": {
            "trained_depths": result.trained_depths,
            "converged": result.converged,
            "stage_errors": [r.final_training_error for r in result.reports],
        }
    }
    _emit(args.out, cfg["experiment"], cfg, traj, labels, result.reports[-1], extra)
    return 0


def _cmd_steer(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    s = cfg["steer"]
    result = steer_linear_arc(
        np.asarray(s["x0"], dtype=float),
        np.asarray(s["x1"], dtype=float),
        float(cfg["horizon"]["T"]),
        act,
        int(s["n_steps"]),
    )
    extra = {
        "steer": {
            "steering_error": result.steering_error,
            "sup_norm": result.sup_norm,
            "solve_norm_bound": result.solve_norm_bound,
        }
    }
    _emit(args.out, cfg["experiment"], cfg, None, None, None, extra)
    return 0


def _cmd_bounds(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    b = cfg["bounds"]
    bound = weight_lower_bound(
        np.asarray(b["x0"], dtype=float),
        np.asarray(b["x1"], dtype=float),
        float(b["lipschitz"]),
        horizon=float(cfg["horizon"]["T"]),
        norm=b["norm"],
    )
    extra = {"bounds": {"value": bound.value, "reason": bound.reason}}
    _emit(args.out, cfg["experiment"], cfg, None, None, None, extra)
    return 0


def _cmd_nonlocal(args) -> int:
    cfg = _load(args)
    _apply_overrides(cfg, args)
    act = activation_from_name(cfg["dynamics"]["activation"], cfg["dynamics"]["leak"])
    nl = cfg["nonlocal"]
    widths = [int(w) for w in nl["widths"]]
    grid = SpaceGrid.from_widths(widths)
    rng = np.random.default_rng(int(nl["seed"]))
    scale = float(nl["kernel_scale"])
    kernels = KernelPath(
        ws=tuple(scale * rng.standard_normal((widths[k + 1], widths[k])) for k in range(len(widths) - 1)),
        bs=tuple(scale * rng.standard_normal(widths[k + 1]) for k in range(len(widths) - 1)),
    )
    z0 = np.sin(np.pi * grid.grids[0])
    states = integrate_nonlocal(z0, grid, kernels, "sigma_outside", act)
    check = random_control(4, 10, 10.0, seed=int(nl["seed"]), scale=0.3)
    deviation = dirac_fixed_grid_equivalence(
        check, rng.standard_normal((3, 4)), activation_from_name("tanh"), "sigma_inside"
    )
    extra = {
        "nonlocal": {
            "widths": widths,
            "final_profile": [float(v) for v in states[-1]],
            "dirac_equivalence_deviation": deviation,
        }
    }
    _emit(args.out, cfg["experiment"], cfg, None, None, None, extra)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odelearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, training: bool = True) -> None:
        p.add_argument("--config", default=None, help="JSON config; defaults apply when omitted")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override data and optimizer seeds")
        p.add_argument("--scheme", choices=("euler", "rk4"), default="euler",
                       help="integration scheme for the emitted trajectory")
        if training:
            p.add_argument("--no-final-cost", action="store_true",
                           help="drop the terminal training error from the functional")
            p.add_argument("--l1", type=float, metavar="M", default=None,
                           help="norm-constrained L1 functional with node bound M")

    p = sub.add_parser("train", help="single training run")
    common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep-horizon", help="train over several horizons")
    common(p)
    p.add_argument("--horizons", type=float, nargs="+", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("turnpike", help="tracking run with structure diagnostics")
    common(p)
    p.set_defaults(func=_cmd_turnpike)

    p = sub.add_parser("greedy", help="depth-growing pretraining")
    common(p)
    p.set_defaults(func=_cmd_greedy)

    p = sub.add_parser("steer", help="constructive steering along a linear arc")
    common(p, training=False)
    p.set_defaults(func=_cmd_steer)

    p = sub.add_parser("bounds", help="interpolation weight lower bound")
    common(p, training=False)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("nonlocal-demo", help="variable-width network demo")
    common(p, training=False)
    p.set_defaults(func=_cmd_nonlocal)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_node_threads()
        return args.func(args)
    except (dio.ConfigError, dio.ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, GronwallViolation, ConstraintViolation, RankDeficiencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
