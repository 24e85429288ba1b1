"""Command-line entry point.

Subcommands: gen-demos, train, eval, export-latent, serve.  Every
subcommand accepts --config (YAML) plus flag overrides; runs write their
resolved config beside their outputs.  Exit codes: 0 success, 2 usage or
validation error, 1 runtime failure.
"""

import argparse
import glob
import json
import os
import sys

from . import demos as demos_mod
from .config import RunConfig, dump_resolved, load_config
from .demos import DatasetSpec, strategy_counts
from .evaluate import (aggregate_seeds, eval_interpolation, eval_replay,
                       export_latent)
from .train import load_bundle, train


def _parse_dist(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("--dist needs 4 comma-separated values")
    total = sum(parts)
    if abs(total - 100.0) < 1e-6:
        parts = [p / 100.0 for p in parts]
    elif abs(total - 1.0) > 1e-6:
        raise ValueError("--dist must sum to 100 (percent) or 1 (fractions)")
    return tuple(parts)


def _load_run_config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _apply(obj, args, names):
    """Copy any explicitly passed flags onto a config section."""
    for flag, attr in names.items():
        v = getattr(args, flag, None)
        if v is not None:
            setattr(obj, attr, v)


def _write_resolved(cfg: RunConfig, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    dump_resolved(cfg, os.path.join(out_dir, "config.resolved.yaml"))


# --------------------------------------------------------------- gen-demos

def cmd_gen_demos(args) -> int:
    cfg = _load_run_config(args)
    spec = cfg.dataset
    if args.dist is not None:
        spec.proportions = _parse_dist(args.dist)
    _apply(spec, args, {"n": "n", "seed": "seed",
                        "split_fraction": "split_fraction"})
    spec.validate()
    if args.out is not None:
        cfg.out_dir = os.path.dirname(args.out) or "."
    out = args.out or os.path.join(cfg.out_dir, "demos.json")
    _write_resolved(cfg, os.path.dirname(out) or ".")

    dataset = demos_mod.generate_dataset(spec, cfg.layout,
                                         noise=args.noise)
    demos_mod.save(dataset, out)
    counts = strategy_counts(spec.n, spec.proportions)
    for k, c in enumerate(counts, start=1):
        print("strategy %d: %d demos" % (k, c))
    print("wrote %d demos to %s" % (len(dataset), out))
    if args.split:
        train_ds, test_ds = demos_mod.split(dataset, spec.split_fraction,
                                            spec.seed)
        stem, ext = os.path.splitext(out)
        demos_mod.save(train_ds, stem + ".train" + ext)
        demos_mod.save(test_ds, stem + ".test" + ext)
        print("split %d train / %d test" % (len(train_ds), len(test_ds)))
    return 0


# ------------------------------------------------------------------ train

def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    _apply(cfg.train, args, {
        "mode": "mode", "seed": "seed", "episodes": "episodes",
        "steps_per_episode": "steps_per_episode", "lam1": "lam1",
        "lam2": "lam2", "disc_mode": "disc_mode",
        "checkpoint_interval": "checkpoint_interval",
        "inner_steps": "inner_steps", "inner_batch": "inner_batch",
        "workers": "workers", "log_std_init": "log_std_init",
        "bc_lr": "bc_lr", "bc_epochs": "bc_epochs"})
    _apply(cfg.ppo, args, {"lr": "lr"})
    if args.out is not None:
        cfg.out_dir = args.out
    cfg.train.validate()
    cfg.ppo.validate()

    dataset = demos_mod.load(args.demos)
    _write_resolved(cfg, cfg.out_dir)
    bundle = train(cfg.train, cfg.ppo, dataset, cfg.out_dir)
    last = bundle.metrics[-1]
    print("trained %s for %d episodes; %d checkpoints in %s"
          % (cfg.train.mode, cfg.train.episodes,
             len(bundle.checkpoint_paths), cfg.out_dir))
    print("final: disc_loss=%.4f L_z=%.4f L_a=%.4f mean_reward=%.4f"
          % (last["disc_loss"], last["L_z"], last["L_a"],
             last["mean_reward"]))
    return 0


# ------------------------------------------------------------------- eval

def _run_checkpoints(run_dir: str, all_checkpoints: bool):
    paths = sorted(glob.glob(os.path.join(run_dir, "checkpoint_*.ckpt")))
    if not paths:
        raise ValueError("no checkpoints under %s" % (run_dir,))
    return paths if all_checkpoints else paths[-1:]


def _eval_one(protocol: str, checkpoint, args, test_demos):
    if protocol == "interp":
        return eval_interpolation(checkpoint, n_codes=args.codes,
                                  seed=args.seed if args.seed is not None
                                  else 0)
    return eval_replay(checkpoint, test_demos)


def cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    protocol = args.protocol
    test_demos = None
    if protocol == "replay":
        demos_path = args.demos or cfg.eval.demos
        if not demos_path:
            raise ValueError("replay evaluation needs --demos")
        test_demos = demos_mod.load(demos_path).demos

    if args.runs:
        run_dirs = args.runs.split(",")
        series = []
        for run_dir in run_dirs:
            reports = []
            for path in _run_checkpoints(run_dir, args.all_checkpoints):
                rep = _eval_one(protocol, path, args, test_demos)
                stem = os.path.splitext(os.path.basename(path))[0]
                rep.checkpoint = stem.split("_")[-1]
                reports.append(rep)
            series.append(reports)
        summary = aggregate_seeds(series)
        out = args.out or os.path.join(cfg.out_dir,
                                       "aggregate_%s.json" % protocol)
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with open(out, "w") as f:
            json.dump(summary, f, sort_keys=True, indent=2)
        for tag, m, s in zip(summary["checkpoints"], summary["mean"],
                             summary["std"]):
            print("checkpoint %s: %.3f +/- %.3f" % (tag, m, s))
        print("best: checkpoint %s mean %.3f +/- %.3f (wrote %s)"
              % (summary["best_checkpoint"], summary["best_mean"],
                 summary["best_std"], out))
        return 0

    if not args.checkpoint:
        raise ValueError("eval needs --checkpoint or --runs")
    rep = _eval_one(protocol, args.checkpoint, args, test_demos)
    out = args.out or os.path.join(cfg.out_dir, "report_%s.jsonl" % protocol)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    rep.save(out)
    props = ", ".join("%.2f" % p for p in rep.strategy_proportions())
    print("%s: success %d/%d (%.3f)" % (protocol, rep.successes,
                                        rep.n_trials, rep.success_rate))
    print("strategy shares over successes: [%s]" % props)
    print("wrote %s" % out)
    return 0


# ---------------------------------------------------------- export-latent

def cmd_export_latent(args) -> int:
    cfg = _load_run_config(args)
    dataset = demos_mod.load(args.demos)
    exp = export_latent(args.checkpoint, dataset.demos)
    out = args.out or os.path.join(cfg.out_dir, "latent.tsv")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    exp.save(out)
    print("wrote %d rows to %s" % (len(exp.rows), out))
    try:
        d = exp.dispersion()
        print("within %.4f between %.4f ratio %.4f"
              % (d["within"], d["between"], d["ratio"]))
    except ValueError:
        pass
    return 0


# ------------------------------------------------------------------ serve

def cmd_serve(args) -> int:
    cfg = _load_run_config(args)
    _apply(cfg.serve, args, {"mode": "mode", "rounds": "rounds",
                             "host": "host", "port": "port",
                             "tick_hz": "tick_hz", "seed": "seed"})
    if args.checkpoint is not None:
        cfg.serve.checkpoints = tuple(args.checkpoint.split(","))
    if args.out is not None:
        cfg.serve.out_dir = args.out
    if not cfg.serve.out_dir:
        cfg.serve.out_dir = os.path.join(cfg.out_dir, "sessions")
    cfg.serve.validate_for_launch()
    _write_resolved(cfg, cfg.serve.out_dir)

    from .service import build_app
    import uvicorn
    app = build_app(cfg.serve, layout=cfg.layout, frontend_dir=args.frontend)
    print("serving %s on %s:%d" % (cfg.serve.mode, cfg.serve.host,
                                   cfg.serve.port))
    uvicorn.run(app, host=cfg.serve.host, port=cfg.serve.port,
                log_level="warning")
    return 0


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cogail",
        description="Collaborative imitation learning on the fetch-quest game")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-demos", help="generate scripted demonstrations")
    g.add_argument("--config")
    g.add_argument("--n", type=int)
    g.add_argument("--dist", help="per-strategy mix, e.g. 17,17,33,33")
    g.add_argument("--seed", type=int)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--out")
    g.add_argument("--split", action="store_true",
                   help="also write stratified train/test files")
    g.add_argument("--split-fraction", dest="split_fraction", type=float)
    g.set_defaults(func=cmd_gen_demos)

    t = sub.add_parser("train", help="train a policy")
    t.add_argument("--config")
    t.add_argument("--demos", required=True)
    t.add_argument("--mode")
    t.add_argument("--seed", type=int)
    t.add_argument("--episodes", type=int)
    t.add_argument("--steps-per-episode", dest="steps_per_episode", type=int)
    t.add_argument("--lam1", type=float)
    t.add_argument("--lam2", type=float)
    t.add_argument("--disc-mode", dest="disc_mode")
    t.add_argument("--checkpoint-interval", dest="checkpoint_interval",
                   type=int)
    t.add_argument("--inner-steps", dest="inner_steps", type=int)
    t.add_argument("--inner-batch", dest="inner_batch", type=int)
    t.add_argument("--workers", type=int)
    t.add_argument("--log-std-init", dest="log_std_init", type=float)
    t.add_argument("--bc-lr", dest="bc_lr", type=float)
    t.add_argument("--bc-epochs", dest="bc_epochs", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--out")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate checkpoints")
    e.add_argument("protocol", choices=("replay", "interp"))
    e.add_argument("--config")
    e.add_argument("--checkpoint")
    e.add_argument("--runs", help="comma-separated run dirs, one per seed")
    e.add_argument("--all-checkpoints", action="store_true")
    e.add_argument("--demos")
    e.add_argument("--codes", type=int, default=100)
    e.add_argument("--seed", type=int)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("export-latent", help="mean recognized code per demo")
    x.add_argument("--config")
    x.add_argument("--checkpoint", required=True)
    x.add_argument("--demos", required=True)
    x.add_argument("--out")
    x.set_defaults(func=cmd_export_latent)

    s = sub.add_parser("serve", help="run the interactive game service")
    s.add_argument("--config")
    s.add_argument("--mode")
    s.add_argument("--checkpoint", help="comma-separated checkpoint playlist")
    s.add_argument("--rounds", type=int)
    s.add_argument("--host")
    s.add_argument("--port", type=int)
    s.add_argument("--tick-hz", dest="tick_hz", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--frontend", help="directory of built web-ui assets")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        print("error: %s" % (e,), file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as e:
        print("failure: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
