"""Exact hot/cold labels for impartial-game boards.

A position is *cold* when the player to move loses under optimal play
and *hot* when it has at least one winning move. Labels are computed by
retrograde induction from (0, 0); for Wythoff's game a golden-ratio
closed form provides an independent check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .games import GameSpec, OutOfBoardError, Position, legal_moves

log = logging.getLogger(__name__)

_PHI = (1 + math.sqrt(5)) / 2


@dataclass
class PolicyScore:
    optimal_fraction: float
    states_scored: int


class HotColdTable:
    """Per-position hot/cold labels for one GameSpec.

    ``cold`` is a boolean (size, size) array indexed [x, y]; immutable
    by convention once built, so tables can be shared across workers.
    """

    def __init__(self, spec: GameSpec, cold: np.ndarray):
        self.spec = spec
        self.cold = cold

    def is_cold(self, pos: Position) -> bool:
        return bool(self.cold[pos[0], pos[1]])

    def cold_set(self) -> set[Position]:
        xs, ys = np.nonzero(self.cold)
        return {(int(x), int(y)) for x, y in zip(xs, ys)}

    def hot_positions(self) -> list[Position]:
        xs, ys = np.nonzero(~self.cold)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]


def solve_retrograde(spec: GameSpec) -> HotColdTable:
    """Label every board position by sweeping anti-diagonals outward.

    A cell is hot iff some legal move from it reaches a cold cell; all
    move targets lie on strictly smaller x + y, so one pass in
    increasing-sum order settles the whole board. Wythoff and Nim use
    running any-cold flags per row/column/diagonal (moves reach every
    earlier cell of the line), which keeps the sweep O(size^2).
    """
    n = spec.size
    cold = np.zeros((n, n), dtype=bool)
    row_cold = [False] * n            # any cold (i, y) seen so far, per y
    col_cold = [False] * n            # any cold (x, j) seen so far, per x
    diag_cold = [False] * (2 * n - 1)  # per x - y offset, wythoff only
    rules = spec.rules

    for s in range(0, 2 * n - 1):
        for x in range(max(0, s - n + 1), min(s, n - 1) + 1):
            y = s - x
            if rules == "wythoff":
                hot = row_cold[y] or col_cold[x] or diag_cold[x - y + n - 1]
            elif rules == "nim":
                hot = row_cold[y] or col_cold[x]
            else:  # euclid: targets are multiples of min(x, y) down one axis
                m = min(x, y)
                if m == 0:
                    hot = row_cold[y] if y == 0 and x > 0 else (col_cold[x] if x == 0 and y > 0 else False)
                else:
                    hot = False
                    for k in range(1, x // m + 1):
                        if cold[x - k * m, y]:
                            hot = True
                            break
                    if not hot:
                        for k in range(1, y // m + 1):
                            if cold[x, y - k * m]:
                                hot = True
                                break
            if not hot:
                cold[x, y] = True
                row_cold[y] = True
                col_cold[x] = True
                diag_cold[x - y + n - 1] = True
    return HotColdTable(spec, cold)


def wythoff_cold_closed_form(pos: Position) -> bool:
    """True iff {x, y} is a golden-ratio Beatty pair (floor(k*phi), floor(k*phi^2)).

    Uses the identity floor(d*phi) = (d + isqrt(5*d*d)) // 2, exact in
    integer arithmetic for any board size, so no float rounding can
    misclassify cells near the ray boundaries.
    """
    m, n = sorted(pos)
    d = n - m
    return m == (d + math.isqrt(5 * d * d)) // 2


def optimal_targets(table: HotColdTable, pos: Position) -> list[Position]:
    """Legal moves from ``pos`` that land on cold cells; empty iff pos is cold."""
    if not table.spec.contains(pos):
        raise OutOfBoardError(f"{pos} outside {table.spec.size}x{table.spec.size} board")
    cold = table.cold
    return [mv for mv in legal_moves(table.spec, pos) if cold[mv[0], mv[1]]]


def score_policy(
    table: HotColdTable,
    choose: Callable[[Position], Position],
    states: Sequence[Position],
) -> PolicyScore:
    """Fraction of ``states`` where ``choose`` picks a cold move.

    Illegal choices are logged and scored as non-optimal rather than
    raised, so a buggy frozen agent yields a score instead of a crash.
    An empty state list scores 0 over 0 by convention.
    """
    if len(states) == 0:
        return PolicyScore(0.0, 0)
    cold = table.cold
    optimal = 0
    for s in states:
        mv = choose(s)
        if mv not in legal_moves(table.spec, s):
            log.warning("policy returned illegal move %s -> %s; scored non-optimal", s, mv)
            continue
        if cold[mv[0], mv[1]]:
            optimal += 1
    return PolicyScore(optimal / len(states), len(states))


def random_policy_baseline(table: HotColdTable) -> float:
    """Exact expected optimal fraction of a uniform-random mover.

    Mean over all hot positions of (#cold moves / #legal moves), by full
    enumeration (prefix counts for Wythoff/Nim, direct loops otherwise).
    """
    spec = table.spec
    n = spec.size
    cold = table.cold
    coldf = cold.astype(np.int64)
    if spec.rules in ("wythoff", "nim"):
        # exclusive prefix counts of cold cells below/left of each cell
        col_pre = np.cumsum(coldf, axis=0) - coldf   # cold (i, y), i < x
        row_pre = np.cumsum(coldf, axis=1) - coldf   # cold (x, j), j < y
        xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        legal = xs + ys
        good = col_pre + row_pre
        if spec.rules == "wythoff":
            legal = legal + np.minimum(xs, ys)
            diag_pre = np.zeros((n, n), dtype=np.int64)
            for off in range(-(n - 1), n):
                d = np.diagonal(coldf, offset=off)
                pre = np.cumsum(d) - d
                if off >= 0:
                    idx = np.arange(d.size)
                    diag_pre[idx, idx + off] = pre
                else:
                    idx = np.arange(d.size)
                    diag_pre[idx - off, idx] = pre
            good = good + diag_pre
        hot = ~cold
        fractions = good[hot] / legal[hot]
        return float(fractions.mean())
    total = 0.0
    count = 0
    for pos in table.hot_positions():
        moves = legal_moves(spec, pos)
        total += sum(cold[m[0], m[1]] for m in moves) / len(moves)
        count += 1
    return total / count if count else 0.0


def table_to_csv(table: HotColdTable, path) -> None:
    """Write rows x,y,label with a schema comment line."""
    with open(path, "w", newline="\n") as fh:
        fh.write("# hotcold-table-v1 rules=%s size=%d\n" % (table.spec.rules, table.spec.size))
        fh.write("x,y,label\n")
        n = table.spec.size
        for x in range(n):
            for y in range(n):
                fh.write(f"{x},{y},{'cold' if table.cold[x, y] else 'hot'}\n")


def table_from_csv(path) -> HotColdTable:
    from .artifacts import ArtifactFormatError  # local import: avoid cycle

    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# hotcold-table-v1"):
            raise ArtifactFormatError(f"{path}: line 1: not a hotcold-table-v1 file")
        fields = dict(tok.split("=") for tok in header.split()[2:])
        spec = GameSpec(fields["rules"], int(fields["size"]))
        fh.readline()  # column header
        cold = np.zeros((spec.size, spec.size), dtype=bool)
        seen = 0
        for lineno, line in enumerate(fh, start=3):
            line = line.strip()
            if not line:
                continue
            try:
                xs, ys, label = line.split(",")
                cold[int(xs), int(ys)] = label == "cold"
            except (ValueError, IndexError) as exc:
                raise ArtifactFormatError(f"{path}: line {lineno}: bad row {line!r}") from exc
            seen += 1
        if seen != spec.size * spec.size:
            raise ArtifactFormatError(
                f"{path}: line {seen + 2}: expected {spec.size ** 2} rows, found {seen}"
            )
    return HotColdTable(spec, cold)
