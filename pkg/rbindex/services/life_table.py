"""Life table of the bundle events and the persistent row sweep over it.

Rows are the red segments in topological order; each bundle event is a
column spanning a contiguous range of rows. Sweeping the rows bottom to top
with a partially persistent tree of columns gives, for every red segment, a
version holding exactly the columns that cross it.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

from rbindex.services.bundle_sweep import SweepResult
from rbindex.services.geometry import Point, Segment
from rbindex.services.persistence import PersistentTree, VersionId
from rbindex.utils.common import format_coord

logger = logging.getLogger(__name__)

EventKey = tuple[int, int]


@dataclass(frozen=True)
class LifeRow:
    index: int
    red: Segment

    @property
    def lo_x(self):
        return self.red.lo_x

    @property
    def hi_x(self):
        return self.red.hi_x


@dataclass(frozen=True)
class LifeColumn:
    """One bundle event: a blue snapshot crossing rows ``lo..hi``."""

    event_key: EventKey
    lo: int
    hi: int
    blue_snapshot: VersionId
    size: int
    bottom: Segment
    top: Segment
    witness: Point

    @property
    def red_rows(self) -> tuple[int, int]:
        return self.lo, self.hi

    def spans(self, row: int) -> bool:
        return self.lo <= row <= self.hi


@dataclass(frozen=True)
class LifeTable:
    rows: tuple[LifeRow, ...]
    columns: tuple[LifeColumn, ...]
    blue_store: PersistentTree = field(repr=False)
    sweep: SweepResult = field(repr=False)
    dropped: int = 0


@dataclass(frozen=True)
class RBIndex:
    table: LifeTable = field(repr=False)
    outer: PersistentTree = field(repr=False)
    row_versions: dict[int, VersionId]
    row_of: dict[int, int]
    updates: int

    @property
    def red_order(self) -> tuple[int, ...]:
        return self.table.sweep.red_order

    @property
    def blue_store(self) -> PersistentTree:
        return self.table.blue_store

    def red(self, red_id: int) -> Segment:
        return self.table.rows[self.row_of[red_id] - 1].red

    def columns_at(self, red_id: int) -> list[LifeColumn]:
        """Columns of a red segment's row version, in event-key order."""
        return [payload for _, payload in self.outer.in_order(self.row_versions[red_id])]


def build_life_table(sr: SweepResult) -> LifeTable:
    rows = tuple(LifeRow(i, red) for i, red in enumerate(sr.reds, 1))
    columns = []
    dropped = 0
    for event in sr.events:
        members = sr.blue_members(event)
        lo, hi = event.red_rows
        witness_x = event.witness.x
        # every spanned row must still be live at the witness
        if any(not (rows[i - 1].lo_x <= witness_x <= rows[i - 1].hi_x) for i in range(lo, hi + 1)):
            logger.warning("dropping column %s: witness outside rows %d..%d", event.event_key, lo, hi)
            dropped += 1
            continue
        columns.append(
            LifeColumn(
                event_key=event.event_key,
                lo=lo,
                hi=hi,
                blue_snapshot=event.blue_snapshot,
                size=len(members),
                bottom=members[0],
                top=members[-1],
                witness=event.witness,
            )
        )
    logger.info("life table built: %d rows, %d columns", len(rows), len(columns))
    return LifeTable(rows, tuple(columns), sr.blue_store, sr, dropped)


def build_index(lt: LifeTable) -> RBIndex:
    """Sweep the rows upward, keeping every version of the set of live columns."""
    opening: dict[int, list[LifeColumn]] = defaultdict(list)
    closing: dict[int, list[LifeColumn]] = defaultdict(list)
    for column in lt.columns:
        opening[column.lo].append(column)
        closing[column.hi].append(column)

    outer = PersistentTree()
    v = PersistentTree.EMPTY
    updates = 0
    row_versions: dict[int, VersionId] = {}
    for row in lt.rows:
        for column in closing.get(row.index - 1, ()):
            v = outer.delete(v, column.event_key)
            updates += 1
        for column in opening.get(row.index, ()):
            v = outer.insert(v, column.event_key, column)
            updates += 1
        row_versions[row.red.id] = v
    for column in closing.get(len(lt.rows), ()):
        v = outer.delete(v, column.event_key)
        updates += 1

    logger.info(
        "index built: %d row versions, %d updates, %d nodes", len(row_versions), updates, outer.nodes_allocated
    )
    return RBIndex(
        table=lt,
        outer=outer,
        row_versions=row_versions,
        row_of={row.red.id: row.index for row in lt.rows},
        updates=updates,
    )


def stabbing_columns(lt: LifeTable, row: int) -> list[LifeColumn]:
    """Columns whose span contains ``row``, by direct scan."""
    return sorted((c for c in lt.columns if c.spans(row)), key=lambda c: c.event_key)


def dump_life_table(lt: LifeTable) -> str:
    lines = [
        f"row {row.index} red={row.red.id} x=[{format_coord(row.lo_x)},{format_coord(row.hi_x)}]"
        for row in lt.rows
    ]
    for c in lt.columns:
        index, tie = c.event_key
        lines.append(f"col {index}.{tie} rows=[{c.lo},{c.hi}] size={c.size} witness={c.witness}")
    return "\n".join(lines) + ("\n" if lines else "")
