"""Experiment harness: config files, single runs, beta sweeps, Q-surface export.

Configuration is INI-style text with [network], [learning] and [experiment]
sections; every key has a default matching the reference two-cell scenario,
so an empty file is a valid experiment. Results are UTF-8 CSV files with a
header row, written with full-precision floats so identical runs produce
byte-identical output. Plotting is left to external tools.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import oracle, radio, runtime
from .learner import LearningParams

__all__ = [
    "ConfigError",
    "ConfigParseError",
    "ConfigValueError",
    "ExperimentConfig",
    "load_config",
    "parse_beta_range",
    "run_sweep",
    "export_q_surface",
    "main",
]

SWEEP_COLUMNS = [
    "beta",
    "qcopa_p1_mw",
    "qcopa_p2_mw",
    "qcopa_throughput",
    "optimal_throughput",
    "greedy_throughput",
    "simultaneous_throughput",
]


class ConfigError(Exception):
    """Base class for configuration problems."""


class ConfigParseError(ConfigError):
    """The file is not well-formed key = value sections, or a value
    does not parse as its expected type."""


class ConfigValueError(ConfigError):
    """A parsed value violates a model invariant (range, size, ...)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment description with reference-scenario defaults."""

    gains: tuple[float, ...] = (2.5, 1.5)
    p_max_dbm: tuple[float, ...] = (10.0, 13.0)
    noise_dbm: float = 0.0
    beta: float = 0.3
    n_power: int = 21
    alpha: float = 0.5
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_episodes: int | None = None  # default: decay over all episodes
    episodes: int | None = None  # default: 50 * size of the largest Q-table
    seed: int = 1
    betas: tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(21))
    out_dir: str = "."

    def network(self, beta: float | None = None) -> radio.NetworkConfig:
        """Build the network at this config's beta (or an override)."""
        b = self.beta if beta is None else beta
        n = len(self.gains)
        mat = np.full((n, n), b)
        np.fill_diagonal(mat, 0.0)
        return radio.NetworkConfig(
            gain=np.array(self.gains),
            beta=mat,
            noise_mw=radio.dbm_to_mw(self.noise_dbm),
            p_max_dbm=np.array(self.p_max_dbm),
            n_power=self.n_power,
        )

    def resolve_episodes(self, cfg: radio.NetworkConfig) -> int:
        """Explicit episode count, or 50x the largest local Q-table."""
        if self.episodes is not None:
            return self.episodes
        largest = max(
            self.n_power ** (1 + len(cfg.interferers[j])) for j in range(cfg.n_agents)
        )
        return 50 * largest

    def learning(self, episodes: int) -> LearningParams:
        decay = self.epsilon_decay_episodes
        if decay is None:
            decay = episodes
        return LearningParams(
            alpha=self.alpha,
            gamma=self.gamma,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_decay_episodes=decay,
        )


_SCHEMA = {
    "network": {
        "gains": "float_list",
        "p_max_dbm": "float_list",
        "noise_dbm": "float",
        "beta": "float",
        "n_power": "int",
    },
    "learning": {
        "alpha": "float",
        "gamma": "float",
        "epsilon_start": "float",
        "epsilon_end": "float",
        "epsilon_decay_episodes": "int",
    },
    "experiment": {
        "episodes": "int",
        "seed": "int",
        "betas": "beta_range",
        "out_dir": "str",
    },
}


def parse_beta_range(spec: str) -> tuple[float, ...]:
    """Parse "start:stop:step" into an inclusive tuple of beta values.

    A bare comma-separated list of values is also accepted.
    """
    spec = spec.strip()
    try:
        if ":" in spec:
            start_s, stop_s, step_s = spec.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0 or stop < start:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + k * step, 12) for k in range(count))
        return tuple(float(v) for v in spec.split(","))
    except ValueError:
        raise ConfigParseError(
            f"cannot parse beta range {spec!r}; expected start:stop:step or a comma list"
        ) from None


def _parse_value(kind: str, raw: str, where: str):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "float_list":
            return tuple(float(v) for v in raw.split(","))
        if kind == "beta_range":
            return parse_beta_range(raw)
        return raw
    except ValueError:
        raise ConfigParseError(f"{where}: cannot parse {raw!r} as {kind}") from None


def _validate(config: ExperimentConfig) -> ExperimentConfig:
    if len(config.gains) != len(config.p_max_dbm):
        raise ConfigValueError(
            f"[network] gains has {len(config.gains)} entries but "
            f"p_max_dbm has {len(config.p_max_dbm)}"
        )
    if any(g <= 0 for g in config.gains):
        raise ConfigValueError("[network] gains: channel gains must be positive")
    if not 0 <= config.beta <= 1:
        raise ConfigValueError(f"[network] beta must be in [0, 1], got {config.beta}")
    if config.n_power < 2:
        raise ConfigValueError(
            f"[network] n_power must be at least 2, got {config.n_power}"
        )
    if not 0 < config.alpha <= 1:
        raise ConfigValueError(f"[learning] alpha must be in (0, 1], got {config.alpha}")
    if not 0 <= config.gamma < 1:
        raise ConfigValueError(f"[learning] gamma must be in [0, 1), got {config.gamma}")
    for key in ("epsilon_start", "epsilon_end"):
        v = getattr(config, key)
        if not 0 <= v <= 1:
            raise ConfigValueError(f"[learning] {key} must be in [0, 1], got {v}")
    if config.epsilon_start < config.epsilon_end:
        raise ConfigValueError("[learning] epsilon_start must be >= epsilon_end")
    if config.episodes is not None and config.episodes < 1:
        raise ConfigValueError(
            f"[experiment] episodes must be at least 1, got {config.episodes}"
        )
    if any(not 0 <= b <= 1 for b in config.betas):
        raise ConfigValueError("[experiment] betas must all lie in [0, 1]")
    return config


def load_config(path) -> ExperimentConfig:
    """Read and validate an experiment config file.

    Raises FileNotFoundError for a missing file, ConfigParseError for
    malformed text or unparseable values, ConfigValueError for values
    violating model invariants. Omitted keys take reference-scenario
    defaults.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigParseError(f"{path}: {exc}") from None

    overrides = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigValueError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigValueError(f"{path}: unknown key {key!r} in [{section}]")
            overrides[key] = _parse_value(
                _SCHEMA[section][key], raw, f"{path}: [{section}] {key}"
            )
    return _validate(ExperimentConfig(**overrides))


def _sweep_point(task) -> list:
    """Train at one beta and produce its result row. Top level for pickling."""
    config, beta, index = task
    net = config.network(beta)
    episodes = config.resolve_episodes(net)
    params = config.learning(episodes)
    agents, _ = runtime.train(net, params, episodes, seed=[config.seed, index])
    grid = radio.build_action_grid(net)
    order = tuple(range(net.n_agents - 1, -1, -1))
    action, _ = runtime.greedy_joint_action(agents, order)
    powers = grid.powers(tuple(action[j] for j in range(net.n_agents)))
    return [
        beta,
        float(powers[0]),
        float(powers[1]),
        radio.sum_throughput(powers, net),
        oracle.optimal_two_user(net).sum_throughput,
        oracle.greedy_allocation(net).sum_throughput,
        oracle.simultaneous_allocation(net).sum_throughput,
    ]


def sweep_workers(n_points: int) -> int:
    """Sweep parallelism: up to one process per point, capped by COOPA_THREADS."""
    workers = min(n_points, os.cpu_count() or 1)
    cap = os.environ.get("COOPA_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigValueError(f"COOPA_THREADS must be an integer, got {cap!r}")
    return workers


def run_sweep(config: ExperimentConfig, path=None) -> str:
    """Train at every beta and write one comparison row per value.

    Rows are ordered by beta regardless of completion order; points train
    on derived per-beta seeds, so output is deterministic for a given
    config and seed. Returns the CSV path.
    """
    if len(config.gains) != 2:
        raise ConfigValueError("sweep compares against the two-user closed form")
    betas = sorted(config.betas)
    if path is None:
        path = os.path.join(config.out_dir, "sweep.csv")
    tasks = [(config, beta, k) for k, beta in enumerate(betas)]
    workers = sweep_workers(len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]

    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    return path


def export_q_surface(agents, path, state=0) -> str:
    """Write the learned global Q over the two-dimensional power grid.

    One row per joint power pair: p1_mw, p2_mw, and the sum of both local
    tables at that joint action. The argmax row is the learned policy.
    """
    agents = sorted(agents, key=lambda a: a.id)
    if len(agents) != 2:
        raise ValueError(f"Q-surface is defined for 2 agents, got {len(agents)}")
    first, second = agents
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p1_mw", "p2_mw", "global_q"])
        for i in range(first.n_actions):
            for j in range(second.n_actions):
                joint = {first.id: i, second.id: j}
                q = sum(
                    float(a.local_q.table(state)[a.local_q.slice_joint(joint)])
                    for a in agents
                )
                writer.writerow(
                    [repr(float(first.levels[i])), repr(float(second.levels[j])), repr(q)]
                )
    return path


def _train_from_config(config: ExperimentConfig, beta: float | None = None):
    net = config.network(beta)
    episodes = config.resolve_episodes(net)
    params = config.learning(episodes)
    agents, traces = runtime.train(net, params, episodes, seed=config.seed)
    return net, agents, traces


def _cmd_run(args) -> int:
    config = _load_with_overrides(args)
    net, agents, traces = _train_from_config(config)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    trace_path = os.path.join(out_dir, "trace.csv")
    runtime.write_trace_csv(traces, trace_path)
    print(f"wrote {trace_path}")

    grid = radio.build_action_grid(net)
    order = tuple(range(net.n_agents - 1, -1, -1))
    action, _ = runtime.greedy_joint_action(agents, order)
    powers = grid.powers(tuple(action[j] for j in range(net.n_agents)))
    achieved = radio.sum_throughput(powers, net)
    print(f"learned allocation (mW): {tuple(float(p) for p in powers)}")
    print(f"learned sum throughput:  {achieved:.4f} bits/s/Hz")
    if net.n_agents == 2:
        best = oracle.optimal_two_user(net)
        print(f"closed-form optimum:     {best.sum_throughput:.4f} bits/s/Hz "
              f"at {best.powers_mw}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_with_overrides(args)
    if args.betas is not None:
        config = replace(config, betas=parse_beta_range(args.betas))
        _validate(config)
    path = run_sweep(config)
    print(f"wrote {path}")
    return 0


def _cmd_surface(args) -> int:
    config = _load_with_overrides(args)
    beta = config.beta if args.beta is None else args.beta
    if not 0 <= beta <= 1:
        raise ConfigValueError(f"beta must be in [0, 1], got {beta}")
    _, agents, _ = _train_from_config(config, beta=beta)
    path = export_q_surface(agents, args.out)
    print(f"wrote {path}")
    return 0


def _load_with_overrides(args) -> ExperimentConfig:
    config = load_config(args.config)
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "out", None) is not None and args.command != "surface":
        updates["out_dir"] = args.out
    return replace(config, **updates) if updates else config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coopa",
        description="Coordinated Q-learning power allocation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train once and write the episode trace")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="train across beta values, compare oracles")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--betas", help="start:stop:step, e.g. 0:1:0.05")
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_surface = sub.add_parser("surface", help="export the learned global Q-table")
    p_surface.add_argument("--config", required=True)
    p_surface.add_argument("--beta", type=float)
    p_surface.add_argument("--out", required=True, help="output CSV file")
    p_surface.add_argument("--seed", type=int)
    p_surface.set_defaults(func=_cmd_surface)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
