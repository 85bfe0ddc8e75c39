"""High-level layer that learns a hot/cold map of the board from a
tabular learner's values and feeds it back as an action bias.

The pipeline per outer iteration: the tabular layer plays a block of
episodes; its state values V(s) = max_a Q(s, a) are thresholded into
confident hot (bad move target, -1) and cold (good move target, +1)
examples; a small network regresses those labels from normalized
coordinates; the network's predictions over the board become the bias
field; and a head-to-head game on a larger board adjusts how much that
bias weighs on action selection (the influence scalar).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .games import GameSpec, Position, legal_moves, random_start
from .mlp import Mlp
from .oracle import HotColdTable, score_policy, solve_retrograde
from .stumbler import (
    BiasField,
    QLearnerOpponent,
    QTable,
    StumblerConfig,
    play_episode,
    select_action,
)

log = logging.getLogger(__name__)


def extract_dataset(
    q: QTable, v_hot: float, v_cold: float, mode: str = "hot-and-cold"
) -> list[tuple[Position, float]]:
    """Threshold state values into labeled move-target examples.

    V(s) > v_hot means s is good for its mover, hence a bad square to
    move onto: target -1. V(s) < v_cold maps to +1. The middle band is
    dropped. "hot-only"/"cold-only" keep one side; "value-regression"
    emits (coord, V(s)) for every stored state, unthresholded.
    """
    if mode not in ("hot-and-cold", "hot-only", "cold-only", "value-regression"):
        raise ValueError(f"unknown heuristic mode {mode!r}")
    if mode != "value-regression" and not v_cold < 0 < v_hot:
        raise ValueError("thresholds must satisfy v_cold < 0 < v_hot")
    data: list[tuple[Position, float]] = []
    for s in q.states():
        v = q.value(s)
        if v is None:
            continue
        if mode == "value-regression":
            data.append((s, v))
        elif v > v_hot and mode in ("hot-and-cold", "hot-only"):
            data.append((s, -1.0))
        elif v < v_cold and mode in ("hot-and-cold", "cold-only"):
            data.append((s, 1.0))
    return data


class Strategist:
    """Trained hot/cold network plus its influence scalar.

    Coordinates are encoded by dividing by ``board`` (the imagination
    board size), so the net is queried beyond its training region simply
    by feeding inputs past 1.0; tanh saturation keeps outputs in [-1, 1].
    """

    def __init__(
        self,
        board: int = 50,
        hidden: tuple[int, ...] = (64, 16),
        mode: str = "hot-and-cold",
        influence: float = 0.0,
        v_hot: float = 0.5,
        v_cold: float = -0.5,
        rng: np.random.Generator | None = None,
        net: Mlp | None = None,
    ):
        dims = [2] + [h for h in hidden if h > 0] + [1]
        self.net = net if net is not None else Mlp(dims, output="tanh", rng=rng)
        self.board = board
        self.mode = mode
        self.influence = influence
        self.v_hot = v_hot
        self.v_cold = v_cold

    def encode(self, positions) -> np.ndarray:
        return np.asarray(positions, dtype=float) / self.board

    def predict(self, positions) -> np.ndarray:
        return self.net.forward(self.encode(positions))[:, 0]

    def bias_field(self, spec: GameSpec) -> BiasField:
        n = spec.size
        coords = [(x, y) for x in range(n) for y in range(n)]
        scores = self.predict(coords)
        return BiasField(dict(zip(coords, scores.tolist())), self.influence)

    def save(self, prefix: str) -> None:
        """Weight file plus a one-line sidecar with the scalar state."""
        self.net.save(f"{prefix}.mlp.txt")
        with open(f"{prefix}.meta.txt", "w", newline="\n") as fh:
            fh.write(
                "strategist-v1 influence=%r board=%d mode=%s v_hot=%r v_cold=%r\n"
                % (self.influence, self.board, self.mode, self.v_hot, self.v_cold)
            )

    @classmethod
    def load(cls, prefix: str) -> "Strategist":
        from .artifacts import ArtifactFormatError

        net = Mlp.load(f"{prefix}.mlp.txt")
        with open(f"{prefix}.meta.txt") as fh:
            line = fh.readline().strip()
        toks = line.split()
        if not toks or toks[0] != "strategist-v1":
            raise ArtifactFormatError(f"{prefix}.meta.txt: line 1: expected strategist-v1")
        fieldsd = dict(tok.split("=") for tok in toks[1:])
        return cls(
            board=int(fieldsd["board"]),
            mode=fieldsd["mode"],
            influence=float(fieldsd["influence"]),
            v_hot=float(fieldsd["v_hot"]),
            v_cold=float(fieldsd["v_cold"]),
            net=net,
        )


class OracleStrategist:
    """Reference agent: the exact solver's labels as a hard-coded field."""

    def __init__(self, influence: float = 0.0):
        self.influence = influence
        self._cache: dict[GameSpec, dict[Position, float]] = {}

    def bias_field(self, spec: GameSpec) -> BiasField:
        values = self._cache.get(spec)
        if values is None:
            table = solve_retrograde(spec)
            n = spec.size
            values = {
                (x, y): 1.0 if table.cold[x, y] else -1.0
                for x in range(n)
                for y in range(n)
            }
            self._cache[spec] = values
        return BiasField(values, self.influence)


def oracle_bias(spec: GameSpec, influence: float = 1.0) -> BiasField:
    """+1 on cold squares, -1 on hot, from the exact solver."""
    return OracleStrategist(influence).bias_field(spec)


def train_strategist(
    strat: Strategist,
    data: list[tuple[Position, float]],
    alpha_r: float,
    n_r: int,
    rng: np.random.Generator,
) -> float:
    """n_r SGD steps on half-dataset batches sampled with replacement.

    Returns the last pre-step loss; an empty dataset is a logged no-op
    (loss nan) so early iterations cannot crash the outer loop.
    """
    if not data:
        log.info("empty strategist dataset; skipping training")
        return float("nan")
    coords = strat.encode([p for p, _ in data])
    targets = np.array([[t] for _, t in data])
    batch = max(1, math.ceil(len(data) / 2))
    loss = float("nan")
    for _ in range(n_r):
        idx = rng.integers(0, len(data), size=batch)
        loss = strat.net.sgd_step(coords[idx], targets[idx], alpha_r)
    return loss


def greedy_by_field(field_values: dict[Position, float], legal, rng) -> Position:
    """Argmax of a bias field over the legal moves, random ties."""
    best = -math.inf
    ties: list[Position] = []
    for a in legal:
        v = field_values.get(a, 0.0)
        if v > best:
            best = v
            ties = [a]
        elif v == best:
            ties.append(a)
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def update_influence(
    q: QTable,
    strat,
    large_spec: GameSpec,
    alpha_i: float,
    rng: np.random.Generator,
) -> float:
    """One arbitration game on a board larger than the tabular layer's.

    The tabular layer moves first, greedy on its (mostly empty) table;
    the strategist answers greedy on its own field. Whoever makes the
    terminal move wins; a strategist win raises its influence by
    alpha_i, a loss lowers it, clipped to [-1, 1]. No learning happens
    and the table is left untouched.
    """
    if large_spec.size <= q.spec.size:
        raise ValueError("influence game board must exceed the training board")
    field_values = strat.bias_field(large_spec).values
    s = random_start(large_spec, rng)
    seat = 0  # 0 = tabular layer, 1 = strategist
    while True:
        legal = legal_moves(large_spec, s)
        if seat == 0:
            a = select_action(q, s, legal, 0.0, None, rng)
        else:
            a = greedy_by_field(field_values, legal, rng)
        if a == (0, 0):
            winner = seat
            break
        s = a
        seat ^= 1
    delta = alpha_i if winner == 1 else -alpha_i
    strat.influence = float(np.clip(strat.influence + delta, -1.0, 1.0))
    return strat.influence


@dataclass
class IterationMetrics:
    iteration: int
    episodes: int
    optimal_fraction: float
    influence: float
    loss: float
    wins_player: int
    wins_opponent: int


@dataclass
class RunResult:
    records: list[IterationMetrics]
    q: QTable
    strategist: Strategist | OracleStrategist | None
    episode_optimal: np.ndarray  # per-episode optimal moves by the first seat
    episode_scored: np.ndarray   # per-episode moves made from hot states

    def final_window_optimal(self, window: int = 100) -> float:
        """Mean per-move optimality over the last ``window`` episodes."""
        scored = int(self.episode_scored[-window:].sum())
        if scored == 0:
            return 0.0
        return int(self.episode_optimal[-window:].sum()) / scored


def evaluate_policy(
    q: QTable,
    spec: GameSpec,
    table: HotColdTable,
    bias: BiasField | None,
    rng: np.random.Generator,
    cap: int = 256,
) -> float:
    """Greedy optimal fraction on visited hot states (sampled above cap)."""
    cold = table.cold
    states = [s for s in q.states() if s != (0, 0) and not cold[s]]
    if not states:
        return 0.0
    if len(states) > cap:
        idx = rng.choice(len(states), size=cap, replace=False)
        states = [states[i] for i in idx]

    def choose(s: Position) -> Position:
        return select_action(q, s, legal_moves(spec, s), 0.0, bias, rng)

    return score_policy(table, choose, states).optimal_fraction


def run_stumbler_strategist(
    cfg: ExperimentConfig,
    seed: int,
    strategist_init: Strategist | None = None,
) -> RunResult:
    """Full nested training run for one seed.

    The preset decides the high layer: none ("stumbler-only"), a learned
    network (default and ablation presets), or the exact-solver field
    ("perfect-strategist"). Every outer iteration consumes up to n_s
    episodes, refreshes the dataset/network/bias, plays one influence
    game, and logs one metrics record; iteration episode counts always
    sum exactly to the configured budget.
    """
    cfg.validate()
    spec = GameSpec(cfg.rules, cfg.board_size)
    large = GameSpec(cfg.rules, cfg.strategist_board)
    table = solve_retrograde(spec)
    train_ss, eval_ss, init_ss = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(train_ss)
    eval_rng = np.random.default_rng(eval_ss)

    mode = cfg.heuristic_mode
    if cfg.preset == "value-regression":
        mode = "value-regression"
    if cfg.preset == "stumbler-only":
        strat = None
    elif cfg.preset == "perfect-strategist":
        strat = OracleStrategist(influence=cfg.influence0)
    elif strategist_init is not None:
        strat = strategist_init
    else:
        strat = Strategist(
            board=cfg.strategist_board,
            hidden=cfg.hidden,
            mode=mode,
            influence=cfg.influence0,
            v_hot=cfg.v_hot,
            v_cold=cfg.v_cold,
            rng=np.random.default_rng(init_ss),
        )

    q = QTable(spec)
    scfg = StumblerConfig(cfg.alpha_s, cfg.epsilon0, cfg.gamma)
    opponent = None
    if cfg.opponent == "independent":
        opponent = QLearnerOpponent(QTable(spec), scfg)

    cold = table.cold
    bias: BiasField | None = None
    records: list[IterationMetrics] = []
    ep_opt: list[int] = []
    ep_scored: list[int] = []
    episodes = 0
    iteration = 0
    while episodes < cfg.episodes:
        iteration += 1
        take = min(cfg.n_s, cfg.episodes - episodes)
        wins_player = 0
        for _ in range(take):
            episodes += 1
            rec = play_episode(q, spec, scfg, bias, episodes, rng, opponent=opponent)
            if rec.winner == "player":
                wins_player += 1
            opt = scored = 0
            for i in range(0, len(rec.moves), 2):
                s, a = rec.moves[i]
                if not cold[s]:
                    scored += 1
                    if cold[a]:
                        opt += 1
            ep_opt.append(opt)
            ep_scored.append(scored)
        loss = float("nan")
        if isinstance(strat, OracleStrategist):
            update_influence(q, strat, large, cfg.alpha_i, rng)
            bias = strat.bias_field(spec)
        elif strat is not None:
            data = extract_dataset(q, cfg.v_hot, cfg.v_cold, mode)
            if data:
                loss = train_strategist(strat, data, cfg.alpha_r, cfg.n_r, rng)
                update_influence(q, strat, large, cfg.alpha_i, rng)
            bias = strat.bias_field(spec)
        frac = evaluate_policy(q, spec, table, bias, eval_rng, cfg.eval_states_cap)
        records.append(
            IterationMetrics(
                iteration,
                episodes,
                frac,
                strat.influence if strat is not None else 0.0,
                loss,
                wins_player,
                take - wins_player,
            )
        )
    return RunResult(records, q, strat, np.array(ep_opt), np.array(ep_scored))
