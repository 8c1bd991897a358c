"""Experiment orchestration: payload sweeps x policies x seeds, CSV output, CLI.

Each (policy, payload, seed) cell trains (for learning policies) and then
evaluates a fixed number of replicate episodes with greedy actions.  Common
random numbers: evaluation environment draws derive from (seed, run) only, so
every policy and every payload point faces identical scenarios and channel
realizations.  Output files are written atomically and are byte-reproducible.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .baselines import (
    PolicyKind,
    SarlEvalPolicy,
    make_greedy_policy,
    make_random_policy,
    sarl_train,
)
from .channel import build_band_catalog
from .config import ConfigError, ExperimentConfig, load_config, serialize_config
from .episode import EpisodeStreams, run_episode
from .marl import greedy_policy_from_net, train
from .qnet import QNetwork, load_checkpoint, save_checkpoint
from .streams import StreamFamily, substream
from .topology import spawn_scenario

RESULTS_HEADER = "policy,seed,payload_bytes,run,v2i_sum_mbps,v2v_success,reward"
SUMMARY_HEADER = "policy,payload_bytes,v2i_sum_mbps_mean,v2i_sum_mbps_std,success_mean,success_std,n"

_SEED_SPACE = 2**62


@dataclass(frozen=True)
class ResultRow:
    policy: PolicyKind
    seed: int
    payload_bytes: int
    run: int
    v2i_sum_mbps: float
    v2v_success: float
    reward: float


def fmt6(x: float) -> str:
    """Fixed 6-significant-digit formatting for byte-stable CSV output."""
    return f"{float(x):.6g}"


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _bands(cfg: ExperimentConfig):
    return build_band_catalog(
        num_cellular=cfg.scenario.num_v2i,
        num_wifi_aps=cfg.scenario.num_wifi_aps,
        rat_params=cfg.rat_params,
        tvws_occupancy=cfg.tvws_occupancy,
        include_dsrc=cfg.include_dsrc,
        include_tvws=cfg.include_tvws,
    )


def _scenario_seeds(seed: int, tag: str, count: int) -> list[int]:
    return [int(s) for s in substream(seed, tag).integers(_SEED_SPACE, size=count)]


def train_cell(
    cfg: ExperimentConfig, policy: PolicyKind, payload: int, seed: int
) -> tuple[list[QNetwork], object]:
    """Train one learning-policy cell; returns per-agent networks and the trace."""
    if policy not in (PolicyKind.MARL, PolicyKind.SARL):
        raise ValueError(f"policy {policy.value} does not train")
    bands = _bands(cfg)
    ecfg = replace(cfg.episode, payload_bytes=payload)
    scn_seeds = _scenario_seeds(seed, "train-scn", max(cfg.train.episodes, 1))
    gen = lambda ep: spawn_scenario(cfg.scenario, scn_seeds[min(ep, len(scn_seeds) - 1)])
    root = StreamFamily(seed, "train")
    if policy is PolicyKind.MARL:
        nets, trace = train(gen, cfg.train, bands, ecfg, root)
    else:
        shared, trace = sarl_train(gen, cfg.train, bands, ecfg, root)
        nets = [shared]
    return nets, trace


def _eval_policies(
    cfg: ExperimentConfig, policy: PolicyKind, nets: list[QNetwork], seed: int, run: int
):
    k = cfg.scenario.num_v2v
    if policy is PolicyKind.MARL:
        return [greedy_policy_from_net(nets[i]) for i in range(k)]
    if policy is PolicyKind.SARL:
        shared = SarlEvalPolicy(nets[0])
        return [shared] * k
    if policy is PolicyKind.RANDOM:
        rng = substream(seed, "random-actions", run)
        return [make_random_policy(rng) for _ in range(k)]
    return [make_greedy_policy() for _ in range(k)]


def eval_cell(
    cfg: ExperimentConfig,
    policy: PolicyKind,
    payload: int,
    seed: int,
    nets: list[QNetwork] | None,
) -> list[ResultRow]:
    """Evaluate `replicates` episodes with greedy actions and common env draws."""
    bands = _bands(cfg)
    ecfg = replace(cfg.episode, payload_bytes=payload)
    scn_seeds = _scenario_seeds(seed, "eval-scn", cfg.replicates)
    rows = []
    for run in range(cfg.replicates):
        scenario = spawn_scenario(cfg.scenario, scn_seeds[run])
        streams = EpisodeStreams.derive(StreamFamily(seed, "eval-env", run))
        policies = _eval_policies(cfg, policy, nets or [], seed, run)
        metrics = run_episode(policies, scenario, bands, ecfg, streams)
        rows.append(
            ResultRow(
                policy=policy,
                seed=seed,
                payload_bytes=payload,
                run=run,
                # quantize to the CSV's 6-significant-digit grid so summary
                # statistics recompute exactly from the emitted rows
                v2i_sum_mbps=float(fmt6(metrics.v2i_sum_capacity_bps / 1e6)),
                v2v_success=float(fmt6(np.mean(metrics.success_flags))),
                reward=float(fmt6(metrics.cumulative_reward)),
            )
        )
    return rows


def checkpoint_paths(out_dir: str, policy: PolicyKind, payload: int, seed: int, k: int) -> list[str]:
    base = os.path.join(out_dir, "checkpoints")
    if policy is PolicyKind.SARL:
        return [os.path.join(base, f"sarl_payload{payload}_seed{seed}_shared.qnet")]
    return [
        os.path.join(base, f"marl_payload{payload}_seed{seed}_agent{i}.qnet") for i in range(k)
    ]


def _run_cell(args) -> tuple[int, list[ResultRow], list[tuple[str, QNetwork]]]:
    index, cfg, policy, payload, seed, out_dir = args
    nets = None
    saved = []
    if policy in (PolicyKind.MARL, PolicyKind.SARL):
        nets, _ = train_cell(cfg, policy, payload, seed)
        paths = checkpoint_paths(out_dir, policy, payload, seed, cfg.scenario.num_v2v)
        saved = list(zip(paths, nets))
    rows = eval_cell(cfg, policy, payload, seed, nets)
    return index, rows, saved


def _cell_workers(n_cells: int) -> int:
    env = os.environ.get("HETVNET_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"HETVNET_THREADS must be an integer, got {env!r}") from None
    else:
        cap = min(n_cells, os.cpu_count() or 1)
    return max(1, min(n_cells, cap))


def results_csv_text(rows: list[ResultRow]) -> str:
    out = io.StringIO()
    out.write(RESULTS_HEADER + "\n")
    for r in rows:
        out.write(
            f"{r.policy.value},{r.seed},{r.payload_bytes},{r.run},"
            f"{fmt6(r.v2i_sum_mbps)},{fmt6(r.v2v_success)},{fmt6(r.reward)}\n"
        )
    return out.getvalue()


def summary_csv_text(rows: list[ResultRow], cfg: ExperimentConfig) -> str:
    out = io.StringIO()
    out.write(SUMMARY_HEADER + "\n")
    for policy in cfg.policies:
        for payload in cfg.payloads:
            cell = [r for r in rows if r.policy is policy and r.payload_bytes == payload]
            if not cell:
                continue
            v2i = np.array([r.v2i_sum_mbps for r in cell])
            succ = np.array([r.v2v_success for r in cell])
            out.write(
                f"{policy.value},{payload},{fmt6(v2i.mean())},{fmt6(v2i.std())},"
                f"{fmt6(succ.mean())},{fmt6(succ.std())},{len(cell)}\n"
            )
    return out.getvalue()


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> tuple[str, str]:
    """Full sweep: train where needed, evaluate every cell, write CSVs and
    checkpoints.  Returns (results.csv path, summary.csv path)."""
    out = out_dir or cfg.out_dir
    cells = [
        (policy, payload, seed)
        for policy in cfg.policies
        for payload in cfg.payloads
        for seed in cfg.seeds
    ]
    tasks = [
        (i, cfg, policy, payload, seed, out) for i, (policy, payload, seed) in enumerate(cells)
    ]
    workers = _cell_workers(len(cells))
    results: list[list[ResultRow]] = [[] for _ in cells]
    checkpoints: list[tuple[str, QNetwork]] = []
    if workers > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(workers) as pool:
            for index, rows, saved in pool.imap_unordered(_run_cell, tasks):
                results[index] = rows
                checkpoints.extend(saved)
    else:
        for task in tasks:
            index, rows, saved = _run_cell(task)
            results[index] = rows
            checkpoints.extend(saved)

    for path, net in sorted(checkpoints, key=lambda t: t[0]):
        os.makedirs(os.path.dirname(path), exist_ok=True)
        save_checkpoint(net, path)

    flat = [row for rows in results for row in rows]
    results_path = os.path.join(out, "results.csv")
    summary_path = os.path.join(out, "summary.csv")
    _atomic_write(results_path, results_csv_text(flat))
    _atomic_write(summary_path, summary_csv_text(flat, cfg))
    return results_path, summary_path


def run_training_only(cfg: ExperimentConfig, out_dir: str | None = None) -> list[str]:
    """`train` subcommand: fit learning policies, write checkpoints + trace.csv."""
    out = out_dir or cfg.out_dir
    learners = [p for p in cfg.policies if p in (PolicyKind.MARL, PolicyKind.SARL)]
    if not learners:
        raise ValueError("no learning policy (marl/sarl) in the policy list")
    trace_lines = ["policy,seed,payload_bytes,episode,reward,successes,slots"]
    written = []
    for policy in learners:
        for payload in cfg.payloads:
            for seed in cfg.seeds:
                nets, trace = train_cell(cfg, policy, payload, seed)
                paths = checkpoint_paths(out, policy, payload, seed, cfg.scenario.num_v2v)
                for path, net in zip(paths, nets):
                    os.makedirs(os.path.dirname(path), exist_ok=True)
                    save_checkpoint(net, path)
                    written.append(path)
                for ep, (r, s, n) in enumerate(
                    zip(trace.episode_rewards, trace.episode_successes, trace.episode_slots)
                ):
                    trace_lines.append(
                        f"{policy.value},{seed},{payload},{ep},{fmt6(r)},{s},{n}"
                    )
    _atomic_write(os.path.join(out, "trace.csv"), "\n".join(trace_lines) + "\n")
    return written


def run_eval_only(cfg: ExperimentConfig, out_dir: str | None = None) -> tuple[str, str]:
    """`eval` subcommand: evaluate policies, loading checkpoints for learners."""
    out = out_dir or cfg.out_dir
    flat: list[ResultRow] = []
    for policy in cfg.policies:
        for payload in cfg.payloads:
            for seed in cfg.seeds:
                nets = None
                if policy in (PolicyKind.MARL, PolicyKind.SARL):
                    paths = checkpoint_paths(out, policy, payload, seed, cfg.scenario.num_v2v)
                    missing = [p for p in paths if not os.path.exists(p)]
                    if missing:
                        raise FileNotFoundError(
                            f"missing checkpoint(s) for {policy.value} payload={payload} "
                            f"seed={seed}: {missing[0]} (run `train` or `sweep` first)"
                        )
                    nets = [load_checkpoint(p) for p in paths]
                flat.extend(eval_cell(cfg, policy, payload, seed, nets))
    results_path = os.path.join(out, "results.csv")
    summary_path = os.path.join(out, "summary.csv")
    _atomic_write(results_path, results_csv_text(flat))
    _atomic_write(summary_path, summary_csv_text(flat, cfg))
    return results_path, summary_path


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage errors to 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hetvnet", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command")
    for name, help_text in (
        ("train", "train learning policies; write checkpoints and trace.csv"),
        ("eval", "evaluate policies (loads checkpoints for marl/sarl); write CSVs"),
        ("sweep", "full experiment: train + evaluate every cell; write CSVs"),
        ("validate-config", "parse and validate a config file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override sweep.seeds with one seed")
        p.add_argument("--out", default=None, help="override sweep.out_dir")
        p.add_argument(
            "--policy", choices=[p.value for p in PolicyKind], default=None,
            help="restrict to one policy",
        )
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    if args.policy is not None:
        cfg = replace(cfg, policies=(PolicyKind(args.policy),))
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "validate-config":
            print("OK")
            return 0
        if args.command == "train":
            paths = run_training_only(cfg)
            print(f"wrote {len(paths)} checkpoint(s) under {cfg.out_dir}")
            return 0
        if args.command == "eval":
            results, summary = run_eval_only(cfg)
            print(f"wrote {results} and {summary}")
            return 0
        if args.command == "sweep":
            results, summary = run_experiment(cfg)
            print(f"wrote {results} and {summary}")
            return 0
    except (ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(f"error: unknown command {args.command}", file=sys.stderr)
    return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


# Round-trip helper re-exported for convenience in scripts/tests.
__all__ = [
    "ResultRow",
    "RESULTS_HEADER",
    "SUMMARY_HEADER",
    "run_experiment",
    "run_training_only",
    "run_eval_only",
    "train_cell",
    "eval_cell",
    "cli",
    "main",
    "fmt6",
    "serialize_config",
]
