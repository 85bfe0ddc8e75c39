"""Tabular Q-learning agent for the impartial games.

The agent plays full episodes against an opponent (shared-table
self-play by default) and learns joint-action values: the bootstrap for
a move is taken from the state after the opponent's reply, so stored
values always reflect the same player's next turn. Action selection is
epsilon-greedy over Q(s, a) plus an optional additive bias field scaled
by a scalar influence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .games import GameSpec, Position, is_terminal, legal_moves, random_start


class TerminalPositionError(ValueError):
    """Action requested at a position with no legal moves."""


@dataclass
class StumblerConfig:
    alpha: float = 0.4      # learning rate
    epsilon0: float = 0.4   # max exploration, annealed per episode
    gamma: float = 0.5      # value bias

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError("epsilon0 must be in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")


class QTable:
    """Sparse map from (state, action) to value for one training board.

    Values stay in [-1, 1] under the update rule here (terminal-only
    unit rewards, alpha and gamma at most 1). Unseen pairs read as 0,
    which is what lets a table trained on a small board act (randomly)
    on a larger one.
    """

    def __init__(self, spec: GameSpec):
        self.spec = spec
        self.episodes = 0
        self._q: dict[Position, dict[Position, float]] = {}

    def get(self, s: Position, a: Position) -> float:
        row = self._q.get(s)
        if row is None:
            return 0.0
        return row.get(a, 0.0)

    def set(self, s: Position, a: Position, value: float) -> None:
        row = self._q.get(s)
        if row is None:
            row = {}
            self._q[s] = row
        row[a] = value

    def row(self, s: Position) -> dict[Position, float] | None:
        return self._q.get(s)

    def value(self, s: Position) -> float | None:
        """max_a Q(s, a) over stored actions; None if the state is unseen."""
        row = self._q.get(s)
        if not row:
            return None
        return max(row.values())

    def states(self) -> list[Position]:
        return list(self._q.keys())

    def items(self):
        for s, row in self._q.items():
            for a, v in row.items():
                yield s, a, v

    def __len__(self) -> int:
        return sum(len(row) for row in self._q.values())

    def copy(self) -> "QTable":
        out = QTable(self.spec)
        out.episodes = self.episodes
        out._q = {s: dict(row) for s, row in self._q.items()}
        return out


class BiasField:
    """Per-position desirability of moving onto a square, plus its weight.

    The score added to an action is influence * value(target). A missing
    position reads 0, so an empty field is a no-op.
    """

    __slots__ = ("values", "influence")

    def __init__(self, values: dict[Position, float] | None = None, influence: float = 0.0):
        self.values = values or {}
        self.influence = influence

    def value(self, pos: Position) -> float:
        return self.values.get(pos, 0.0)

    def with_influence(self, influence: float) -> "BiasField":
        return BiasField(self.values, influence)


def anneal_epsilon(epsilon0: float, n: int) -> float:
    """Exploration rate for episode n (1-based): epsilon0 / (ln n + e)."""
    if n <= 0:
        raise ValueError("episode index must be >= 1")
    return epsilon0 / (math.log(n) + math.e)


def select_action(
    q: QTable,
    s: Position,
    legal: tuple[Position, ...],
    eps: float,
    bias: BiasField | None,
    rng: np.random.Generator,
) -> Position:
    """Epsilon-greedy over Q(s, a) + influence * bias(a), random ties."""
    if not legal:
        raise TerminalPositionError(f"no legal moves from {s}")
    if eps > 0.0 and rng.random() < eps:
        return legal[int(rng.integers(len(legal)))]
    row = q._q.get(s)
    influence = bias.influence if bias is not None else 0.0
    best = -math.inf
    ties: list[Position] = []
    for a in legal:
        score = row.get(a, 0.0) if row is not None else 0.0
        if influence != 0.0:
            score += influence * bias.values.get(a, 0.0)
        if score > best:
            best = score
            ties = [a]
        elif score == best:
            ties.append(a)
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def q_update(
    q: QTable,
    s: Position,
    a: Position,
    reward: float,
    s_next: Position | None,
    alpha: float,
    gamma: float,
) -> QTable:
    """One Q-learning increment; s_next is the state after the opponent's
    reply, or None when the episode has ended (bootstrap 0)."""
    if s_next is None:
        bootstrap = 0.0
    else:
        row = q._q.get(s_next)
        if row is None:
            bootstrap = 0.0
        else:
            bootstrap = 0.0
            for m in legal_moves(q.spec, s_next):
                v = row.get(m, 0.0)
                if v > bootstrap:
                    bootstrap = v
    old = q.get(s, a)
    q.set(s, a, old + alpha * (reward + gamma * bootstrap - old))
    return q


@dataclass
class EpisodeRecord:
    start: Position
    moves: list[tuple[Position, Position]] = field(default_factory=list)
    winner: str = ""  # "player" or "opponent"

    def __len__(self) -> int:
        return len(self.moves)


class QLearnerOpponent:
    """Independent Q-learner for the second seat (no bias field)."""

    def __init__(self, q: QTable, cfg: StumblerConfig, learning: bool = True):
        self.q = q
        self.cfg = cfg
        self.learning = learning

    def select(self, s, legal, eps, rng):
        return select_action(self.q, s, legal, eps, None, rng)

    def update(self, s, a, reward, s_next):
        if self.learning:
            q_update(self.q, s, a, reward, s_next, self.cfg.alpha, self.cfg.gamma)


class PolicyOpponent:
    """Frozen policy seat: any callable (spec, s, legal, rng) -> move."""

    def __init__(self, fn):
        self.fn = fn

    def select(self, s, legal, eps, rng):
        return self.fn(s, legal, rng)

    def update(self, s, a, reward, s_next):
        pass


def play_episode(
    q: QTable,
    spec: GameSpec,
    cfg: StumblerConfig,
    bias: BiasField | None,
    n: int,
    rng: np.random.Generator,
    opponent=None,
    learning: bool = True,
    start: Position | None = None,
) -> EpisodeRecord:
    """Play one episode from a random (or given) start and learn from it.

    With opponent=None both seats share ``q``, the same annealed epsilon
    and the same bias (self-play), and every move gets a joint-action
    update: reward +1 for the winning move, -1 for the move answered by
    the opponent's win, 0 otherwise, bootstrapped from the state two
    plies later. An explicit opponent occupies the second seat instead;
    only seats that learn touch a table. ``learning=False`` freezes
    everything.
    """
    eps = anneal_epsilon(cfg.epsilon0, n)
    s = start if start is not None else random_start(spec, rng)
    rec = EpisodeRecord(start=s)
    prev: tuple[int, Position, Position] | None = None  # (seat, state, action)
    seat = 0
    while True:
        legal = legal_moves(spec, s)
        if seat == 0 or opponent is None:
            a = select_action(q, s, legal, eps, bias, rng)
        else:
            a = opponent.select(s, legal, eps, rng)
        rec.moves.append((s, a))
        terminal = a == (0, 0)
        if learning:
            if prev is not None:
                pseat, ps, pa = prev
                r = -1.0 if terminal else 0.0
                nxt = None if terminal else a
                if pseat == 0 or opponent is None:
                    q_update(q, ps, pa, r, nxt, cfg.alpha, cfg.gamma)
                else:
                    opponent.update(ps, pa, r, nxt)
            if terminal:
                if seat == 0 or opponent is None:
                    q_update(q, s, a, 1.0, None, cfg.alpha, cfg.gamma)
                else:
                    opponent.update(s, a, 1.0, None)
        if terminal:
            rec.winner = "player" if seat == 0 else "opponent"
            break
        prev = (seat, s, a)
        s = a
        seat ^= 1
    if learning:
        q.episodes += 1
    return rec
