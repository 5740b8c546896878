"""Command-line entry point: ``cliprm {train,landscape,epic,rollout,ingest-labels}``.

Exit codes: 0 success, 1 validation/configuration problem, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from cliprm.errors import (
    CliprmError,
    ConfigurationError,
    DegenerateDistributionError,
    RegistryError,
    SchemaError,
    ValidationError,
)

log = logging.getLogger("cliprm")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
_VALIDATION_ERRORS = (ValidationError, ConfigurationError, RegistryError, SchemaError, DegenerateDistributionError)


def _add_config_args(p):
    p.add_argument("config", nargs="?", help="YAML run config (may name a bundled profile)")
    p.add_argument("--profile", help="start from a bundled profile (cartpole-dqn, mountaincar-sac, humanoid-sac)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted override, e.g. rl.total_steps=20000 (repeatable)")
    p.add_argument("--output-dir", help="overrides output_dir from the config")


def _resolve(args):
    from cliprm.config import load_config

    if args.config is None and not args.profile:
        raise ConfigurationError("give a config file or --profile")
    overrides = list(args.overrides)
    if getattr(args, "output_dir", None):
        overrides.append(f"output_dir={args.output_dir}")
    return load_config(args.config, overrides, args.profile)


def _write_provenance(cfg, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    cfg.dump(out / "config.yaml")
    (out / "config_hash.txt").write_text(cfg.digest() + "\n")


def _encoder_and_model(cfg):
    from cliprm.encoders import load_encoder
    from cliprm.reward import build_reward_model

    enc = load_encoder(cfg.model_id, cfg.device_spec, **cfg.encoder_options)
    return enc, build_reward_model(cfg.task, enc)


def cmd_train(args):
    from cliprm.envs import make_env
    from cliprm.rl import select_best, train

    cfg = _resolve(args)
    out = Path(cfg.output_dir)
    _write_provenance(cfg, out)
    print(json.dumps(cfg.to_dict(), indent=2, default=str))
    env = make_env(cfg.env_id, **cfg.env_options)
    enc, model = _encoder_and_model(cfg)
    cks = train(env, model, enc, cfg.rl, out, config_hash=cfg.digest(),
                extra_meta={"env_options": cfg.env_options, "run_config": cfg.to_dict()})
    best = select_best(cks)
    print(f"config_hash {cfg.digest()}")
    print(f"wrote {len(cks)} checkpoints to {out / 'checkpoints'}")
    print(f"best checkpoint: step {best.step} (mean reward {best.mean_reward:.4f}) {best.path}")
    return EXIT_OK


def cmd_landscape(args):
    from cliprm.envs import make_env, sweep_states
    from cliprm.evaluation import reward_landscape

    cfg = _resolve(args)
    ev = cfg.evaluation
    sweep = ev.get("sweep")
    if not sweep:
        raise ConfigurationError("evaluation.sweep: required for landscape (parameter, range, count)")
    env = make_env(cfg.env_id, **cfg.env_options)
    states = sweep_states(env, sweep["parameter"], sweep["range"], sweep.get("count", 101))
    enc, _ = _encoder_and_model(cfg)
    table = reward_landscape(states, cfg.task, enc, ev["alphas"], env_id=cfg.env_id)
    out = Path(cfg.output_dir)
    _write_provenance(cfg, out)
    path = table.to_csv(out / "landscape.csv")
    print(f"wrote {path}")
    if args.plot:
        print(f"wrote {table.plot(out / 'landscape.png')}")
    for a in table.alphas:
        print(f"argmax alpha={a:g}: {table.parameter_name}={table.argmax(a):.4f}")
    return EXIT_OK


def _read_reward_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "reward" not in rows[0]:
        raise ValidationError(f"{path}: expected a CSV with 'frame_ref' and 'reward' columns")
    return {r["frame_ref"]: float(r["reward"]) for r in rows}


def _score_frames(refs, root, args):
    from PIL import Image

    from cliprm.reward import batch_rewards

    cfg = _resolve(args)
    enc, model = _encoder_and_model(cfg)
    frames = []
    for ref in refs:
        p = Path(root) / ref
        if not p.is_file():
            raise ValidationError(f"unknown frame reference {ref!r} under {root}")
        frames.append(np.asarray(Image.open(p).convert("RGB")))
    return batch_rewards(frames, model, enc)


def cmd_epic(args):
    from cliprm.evaluation import epic_distance, epic_distance_goal_form, ingest_labels

    labels = ingest_labels(args.labels, mu_source=args.mu_source)
    frames = labels.frames
    if not frames:
        raise ValidationError("label file has no frame records")
    refs = [r.ref for r in frames]
    if args.rewards:
        table = _read_reward_csv(args.rewards)
        missing = [r for r in refs if r not in table]
        if missing:
            raise ValidationError(f"no reward for frame {missing[0]!r} in {args.rewards}")
        rewards = np.array([table[r] for r in refs])
    elif args.frames_root:
        rewards = _score_frames(refs, args.frames_root, args)
    elif labels.rewards() is not None:
        rewards = labels.rewards()
    else:
        raise ValidationError("need --rewards CSV, --frames-root with a config, or rewards inside the label file")
    y = labels.binary_labels()
    results = {}
    if args.mode in ("direct", "both"):
        results["direct"] = epic_distance(rewards, y, mu_source=labels.mu_source)
    if args.mode in ("goal-form", "both"):
        results["goal-form"] = epic_distance_goal_form(rewards, y, mu_source=labels.mu_source)
    report = {k: v.to_dict() for k, v in results.items()}
    if len(results) == 2:
        report["discrepancy"] = abs(results["direct"].distance - results["goal-form"].distance)
    for k, v in results.items():
        print(f"{k}: distance={v.distance:.6f} rho={v.pearson_rho:.6f} n={v.n_samples} p_hat={v.p_hat}")
    if "discrepancy" in report:
        print(f"discrepancy: {report['discrepancy']:.3e}")
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_rollout(args):
    from cliprm.envs import make_env
    from cliprm.evaluation import success_rate
    from cliprm.rl import Checkpoint, rollout
    from cliprm.rl.harness import save_rollouts

    ck = Checkpoint.load(args.checkpoint)
    opts = dict(ck.meta.get("env_options") or {})
    env = make_env(ck.meta["env_id"], **opts)
    trajs = rollout(env, ck, args.episodes, seed=args.seed, render=not args.no_frames)
    out = Path(args.output_dir or Path(args.checkpoint).with_suffix("").as_posix() + "_rollouts")
    manifest = save_rollouts(trajs, out, ck)
    print(f"wrote {len(trajs)} trajectories to {out}")
    if env.has_ground_truth:
        rate = success_rate([t.goal_fraction for t in trajs])
        mean_frac = float(np.mean([t.goal_fraction for t in trajs]))
        print(f"success_rate {rate:.4f}  mean goal fraction {mean_frac:.4f}")
        manifest["success_rate"] = rate
        (out / "summary.json").write_text(json.dumps({"success_rate": rate, "mean_goal_fraction": mean_frac}, indent=2))
    return EXIT_OK


def cmd_ingest(args):
    from cliprm.evaluation import ingest_labels, success_rate

    s = ingest_labels(args.labels, frame_root=args.frame_root, mu_source=args.mu_source)
    summary = {"records": len(s.records), "frames": len(s.frames), "trajectories": len(s.trajectories),
               "mu_source": s.mu_source}
    if s.frames:
        summary["p_hat"] = s.p_hat
    if s.trajectories:
        summary["success_rate"] = success_rate(s.goal_fractions())
    print(json.dumps(summary, indent=2))
    if args.output:
        Path(args.output).write_text(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="cliprm", description="Vision-language rewards for RL.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy against the configured reward")
    _add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("landscape", help="reward vs a swept state parameter, per alpha")
    _add_config_args(p)
    p.add_argument("--plot", action="store_true", help="also write landscape.png (needs matplotlib)")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("epic", help="EPIC distance between model rewards and binary labels")
    p.add_argument("--labels", required=True, help="label file (JSON lines)")
    p.add_argument("--rewards", help="CSV with frame_ref,reward columns")
    p.add_argument("--frames-root", help="score the labelled frames under this directory with the configured encoder")
    p.add_argument("--mode", choices=("direct", "goal-form", "both"), default="both")
    p.add_argument("--mu-source", choices=("uniform-sweep", "rollout-induced"), default="rollout-induced")
    p.add_argument("--output", help="write the report as JSON")
    _add_config_args(p)
    p.set_defaults(func=cmd_epic)

    p = sub.add_parser("rollout", help="roll out a checkpoint's deterministic policy")
    p.add_argument("checkpoint")
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir")
    p.add_argument("--no-frames", action="store_true", help="skip rendering (ground-truth envs only)")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("ingest-labels", help="validate a label file and summarise it")
    p.add_argument("labels")
    p.add_argument("--frame-root", help="check that frame references exist under this directory")
    p.add_argument("--mu-source", choices=("uniform-sweep", "rollout-induced"), default="rollout-induced")
    p.add_argument("--output")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (CliprmError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
