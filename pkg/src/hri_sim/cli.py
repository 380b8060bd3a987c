"""Command-line entry points.

Subcommands: train, eval, run-scenario, grad-check, serve.  Exit codes:
0 success, 1 runtime failure, 2 usage errors.  HRI_SEED overrides the
default seed everywhere.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from hri_sim.executor import parse_executor_config
from hri_sim.gestures import ACTIVITY_KINDS, build_dataset
from hri_sim.loop import LoopConfig, run_scenario, serialize_log
from hri_sim.recognizer import (
    TrainConfig,
    evaluate,
    gradient_check_battery,
    load_weights,
    save_weights,
    train,
)

DEFAULT_EVAL_SEED_OFFSET = 1000  # eval corpora never overlap training ones


def _default_seed() -> int:
    return int(os.environ.get("HRI_SEED", "0"))


def _parse_hidden(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise argparse.ArgumentTypeError("hidden sizes must be three positive ints, e.g. 64,64,64")
    return tuple(parts)  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hri-sim",
        description="Desk-scale human-robot interaction simulator.",
    )
    sub = parser.add_subparsers(dest="command")

    p_train = sub.add_parser("train", help="train the activity recognizer on synthetic gestures")
    p_train.add_argument("--out", required=True, help="weight file to write")
    p_train.add_argument("--per-class", type=int, default=50)
    p_train.add_argument("--noise", type=float, default=0.01, help="jitter stddev in meters")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--batch-size", type=int, default=None)
    p_train.add_argument("--learning-rate", type=float, default=None)
    p_train.add_argument("--hidden", type=_parse_hidden, default=None)
    p_train.add_argument("--stride", type=int, default=3)
    p_train.add_argument("--quiet", action="store_true")

    p_eval = sub.add_parser("eval", help="accuracy and confusion matrix on a fresh corpus")
    p_eval.add_argument("--weights", required=True)
    p_eval.add_argument("--per-class", type=int, default=20)
    p_eval.add_argument("--noise", type=float, default=0.01)
    p_eval.add_argument("--seed", type=int, default=None,
                        help="corpus seed (defaults to HRI_SEED + 1000)")
    p_eval.add_argument("--stride", type=int, default=3)

    p_run = sub.add_parser("run-scenario", help="tick through a scenario script offline")
    p_run.add_argument("--script", required=True)
    p_run.add_argument("--weights", required=True)
    p_run.add_argument("--log", default=None, help="write the event log here (default stdout)")
    p_run.add_argument("--noise", type=float, default=0.0)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--config", default=None, help="executor priority/config file")

    p_grad = sub.add_parser("grad-check", help="verify backpropagation against finite differences")
    p_grad.add_argument("--instances", type=int, default=20)
    p_grad.add_argument("--epsilon", type=float, default=1e-5)
    p_grad.add_argument("--seed", type=int, default=None)

    p_serve = sub.add_parser("serve", help="live WebSocket endpoint for the console")
    p_serve.add_argument("--weights", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--speed", type=float, default=1.0,
                         help="real-time pacing multiplier")
    p_serve.add_argument("--static", default=None,
                         help="directory of console assets to serve over HTTP")
    p_serve.add_argument("--config", default=None, help="executor priority/config file")

    return parser


def _loop_config(config_path: str | None) -> LoopConfig:
    cfg = LoopConfig()
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fp:
            parsed = parse_executor_config(fp)
        cfg.priorities = parsed["priorities"]
        cfg.auto_resume_suspended = parsed["auto_resume_suspended"]
        cfg.circling_angular_speed = parsed["circling_angular_speed"]
    return cfg


def cmd_train(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = TrainConfig(seed=seed)
    if args.epochs is not None:
        config.epochs = args.epochs
    if args.batch_size is not None:
        config.batch_size = args.batch_size
    if args.learning_rate is not None:
        config.learning_rate = args.learning_rate
    if args.hidden is not None:
        config.hidden = args.hidden
    dataset = build_dataset(list(ACTIVITY_KINDS), per_class=args.per_class,
                            noise_stddev=args.noise, seed=seed, stride=args.stride)

    def report(epoch, loss, _net):
        if not args.quiet and (epoch % 10 == 0 or epoch == config.epochs - 1):
            print(f"epoch {epoch:4d}  loss {loss:.4f}")

    started = time.time()
    net = train(dataset, config, on_epoch=report)
    acc, _ = evaluate(net, dataset)
    save_weights(net, args.out)
    print(f"trained {len(dataset)} samples in {time.time() - started:.0f}s, "
          f"train accuracy {acc:.3f}, weights -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed() + DEFAULT_EVAL_SEED_OFFSET
    net = load_weights(args.weights)
    dataset = build_dataset(list(ACTIVITY_KINDS), per_class=args.per_class,
                            noise_stddev=args.noise, seed=seed, stride=args.stride)
    acc, confusion = evaluate(net, dataset)
    print(f"accuracy {acc:.3f} on {len(dataset)} fresh samples (seed {seed})")
    names = [k.value for k in ACTIVITY_KINDS]
    width = max(len(n) for n in names)
    print(f"{'':{width}s}  " + " ".join(f"{i:4d}" for i in range(len(names))))
    for i, row in enumerate(confusion):
        print(f"{names[i]:{width}s}  " + " ".join(f"{v:4d}" for v in row))
    return 0


def cmd_run_scenario(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = _loop_config(args.config)
    events, state = run_scenario(args.script, args.weights, config,
                                 noise_stddev=args.noise, seed=seed)
    log_text = serialize_log(events)
    if args.log:
        Path(args.log).write_text(log_text, encoding="utf-8")
    else:
        sys.stdout.write(log_text)
    pose = state.executor.pose
    print(f"# {len(events)} events, final mode {state.executor.mode.value}, "
          f"pose ({pose.x:.3f}, {pose.y:.3f}, {pose.heading:.3f})", file=sys.stderr)
    return 0


def cmd_grad_check(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    worst = gradient_check_battery(instances=args.instances, epsilon=args.epsilon,
                                   seed=seed)
    print(f"max relative gradient error over {args.instances} instances: {worst:.3e}")
    return 0 if worst < 1e-4 else 1


def cmd_serve(args) -> int:
    from hri_sim.service import serve_loop  # imported lazily: pulls in websockets

    net = load_weights(args.weights)
    config = _loop_config(args.config)
    static_dir = Path(args.static).resolve() if args.static else None
    serve_loop(net, config, host=args.host, port=args.port, speed=args.speed,
               static_dir=static_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    handlers = {
        "train": cmd_train,
        "eval": cmd_eval,
        "run-scenario": cmd_run_scenario,
        "grad-check": cmd_grad_check,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
