"""Experiment configuration: defaults, tuning ranges, validation, parsing.

Defaults are the tuned operating point used throughout; the RANGES table
records the region each knob was searched over, and validation rejects
values outside it unless the config opts out (so deliberately extreme
controls remain expressible).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, asdict

PRESETS = (
    "stumbler-only",
    "stumbler-strategist",
    "perfect-strategist",
    "heuristic-ablation",
    "value-regression",
    "board-transfer",
    "rule-transfer",
    "dqn",
    "grid-search",
)

HEURISTIC_MODES = ("hot-and-cold", "hot-only", "cold-only", "value-regression")

# searched intervals per hyperparameter (inclusive ends)
RANGES = {
    "epsilon0": (0.1, 1.0),
    "alpha_s": (0.01, 1.0),
    "gamma": (0.1, 1.0),
    "alpha_r": (0.001, 0.1),
    "n_s": (100, 1000),
    "n_r": (100, 1000),
    "v_cold": (-1.0, 0.0),
    "v_hot": (0.0, 1.0),
    "alpha_i": (0.01, 1.0),
    "hidden1": (15, 500),
    "hidden2": (0, 50),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; message lists offending fields."""


@dataclass
class ExperimentConfig:
    preset: str = "stumbler-strategist"
    rules: str = "wythoff"
    board_size: int = 15
    strategist_board: int = 50

    # tuned operating point
    alpha_s: float = 0.4
    alpha_r: float = 0.025
    alpha_i: float = 0.2
    epsilon0: float = 0.4
    gamma: float = 0.5
    n_s: int = 500
    n_r: int = 500
    v_hot: float = 0.5
    v_cold: float = -0.5
    influence0: float = 0.0
    hidden: tuple[int, ...] = (64, 16)

    heuristic_mode: str = "hot-and-cold"
    opponent: str = "self"  # "self" or "independent"
    episodes: int = 75_000
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    eval_states_cap: int = 256
    out_dir: str = "runs"

    # transfer / matchup presets
    transfer_sizes: tuple[int, ...] = (15, 50, 100, 150, 200, 250)
    games: int = 200
    states_sample: int = 1000
    strategist_checkpoint: str = ""
    qtable_checkpoint: str = ""

    # dqn preset
    dqn_arch: str = "optuna"
    dqn_alpha: float = 0.05
    dqn_replay_capacity: int = 10_000
    dqn_batch: int = 64
    dqn_target_sync: int = 500

    allow_out_of_range: bool = False

    def validate(self) -> None:
        problems = []
        if self.preset not in PRESETS:
            problems.append(f"preset={self.preset!r} not in {PRESETS}")
        if self.rules not in ("wythoff", "nim", "euclid"):
            problems.append(f"rules={self.rules!r}")
        if self.heuristic_mode not in HEURISTIC_MODES:
            problems.append(f"heuristic_mode={self.heuristic_mode!r}")
        if self.opponent not in ("self", "independent"):
            problems.append(f"opponent={self.opponent!r}")
        if self.board_size < 2:
            problems.append(f"board_size={self.board_size}")
        if self.episodes < 1:
            problems.append(f"episodes={self.episodes}")
        if not self.seeds:
            problems.append("seeds is empty")
        if not self.v_cold < 0 < self.v_hot:
            problems.append(f"thresholds must satisfy v_cold < 0 < v_hot, got {self.v_cold}, {self.v_hot}")
        if not self.allow_out_of_range:
            named = {
                "epsilon0": self.epsilon0,
                "alpha_s": self.alpha_s,
                "gamma": self.gamma,
                "alpha_r": self.alpha_r,
                "n_s": self.n_s,
                "n_r": self.n_r,
                "v_cold": self.v_cold,
                "v_hot": self.v_hot,
                "alpha_i": self.alpha_i,
                "hidden1": self.hidden[0] if self.hidden else 0,
                "hidden2": self.hidden[1] if len(self.hidden) > 1 else 0,
            }
            for name, value in named.items():
                lo, hi = RANGES[name]
                if not lo <= value <= hi:
                    problems.append(f"{name}={value} outside searched range [{lo}, {hi}]")
        if problems:
            raise ConfigError("invalid config: " + "; ".join(problems))

    def to_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        return raw
    # tuple fields: comma-separated ints
    return tuple(int(v) for v in raw.split(",") if v.strip())


def config_from_pairs(pairs: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from key=value strings, coercing by field type."""
    cfg = base if base is not None else ExperimentConfig()
    by_name = {f.name: f for f in fields(ExperimentConfig)}
    values = cfg.to_dict()
    for key, raw in pairs.items():
        if key not in by_name:
            raise ConfigError(f"unknown config key {key!r}")
        current = values[key]
        kind = type(current) if not isinstance(current, tuple) else tuple
        values[key] = _coerce(key, raw, kind)
    # asdict leaves tuples as tuples for our fields; rebuild dataclass
    values = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    return ExperimentConfig(**values)


def config_from_file(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse a key=value text file (# comments and blank lines allowed)."""
    pairs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            pairs[key.strip()] = raw
    return config_from_pairs(pairs, base)
