"""Board geometry and move rules for three impartial games.

Positions are (x, y) pairs of non-negative integers measured from the
top-left corner of the board; (0, 0) is the unique terminal square.
Every legal move strictly decreases x + y, so play always terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Position = tuple[int, int]

RULE_SETS = ("wythoff", "nim", "euclid")


class OutOfBoardError(ValueError):
    """A position lies outside the board of its GameSpec."""


class IllegalMoveError(ValueError):
    """A move target is not in the legal move set of its origin."""

    def __init__(self, spec: "GameSpec", frm: Position, to: Position):
        super().__init__(f"illegal {spec.rules} move {frm} -> {to}")
        self.frm = frm
        self.to = to


@dataclass(frozen=True)
class GameSpec:
    """Rule set plus board size. Boards are size x size squares."""

    rules: str
    size: int

    def __post_init__(self):
        if self.rules not in RULE_SETS:
            raise ValueError(f"unknown rule set {self.rules!r}, expected one of {RULE_SETS}")
        if self.size < 2:
            raise ValueError("board size must be >= 2")

    def contains(self, pos: Position) -> bool:
        x, y = pos
        return 0 <= x < self.size and 0 <= y < self.size


def is_terminal(pos: Position) -> bool:
    return pos == (0, 0)


@lru_cache(maxsize=1 << 18)
def _moves(rules: str, x: int, y: int) -> tuple[Position, ...]:
    moves: list[Position]
    if rules == "wythoff" or rules == "nim":
        moves = [(i, y) for i in range(x)]
        moves += [(x, j) for j in range(y)]
        if rules == "wythoff":
            moves += [(x - k, y - k) for k in range(1, min(x, y) + 1)]
    else:  # euclid
        m = min(x, y)
        if m == 0:
            # Degenerate axis case: any decrement along the nonzero axis,
            # so the game can always reach (0, 0).
            moves = [(i, y) for i in range(x)] + [(x, j) for j in range(y)]
        else:
            moves = [(x - k * m, y) for k in range(1, x // m + 1)]
            moves += [(x, y - k * m) for k in range(1, y // m + 1)]
    moves.sort()
    return tuple(moves)


def legal_moves(spec: GameSpec, pos: Position) -> tuple[Position, ...]:
    """All positions reachable in one move, sorted ascending.

    Wythoff allows any leftward, upward, or diagonal (equal-step) slide;
    Nim drops the diagonal family; Euclid subtracts a positive multiple
    of min(x, y) from one coordinate. Empty iff ``pos`` is terminal.
    The returned tuple is cached and must not be mutated.
    """
    if not spec.contains(pos):
        raise OutOfBoardError(f"{pos} outside {spec.size}x{spec.size} board")
    return _moves(spec.rules, pos[0], pos[1])


def apply_move(spec: GameSpec, frm: Position, to: Position) -> Position:
    """Validate ``frm -> to`` against the rule set and return ``to``."""
    if to not in legal_moves(spec, frm):
        raise IllegalMoveError(spec, frm, to)
    return to


def random_start(spec: GameSpec, rng: np.random.Generator) -> Position:
    """Uniform draw over all board positions except the terminal (0, 0)."""
    n = spec.size
    i = 1 + int(rng.integers(n * n - 1))
    return (i // n, i % n)
