from fractions import Fraction
from typing import Optional

from pydantic import BaseModel

from rbindex.utils.common import format_coord


class PointOut(BaseModel):
    x: str
    y: str

    @classmethod
    def of(cls, point) -> "PointOut":
        return cls(x=format_coord(point.x), y=format_coord(point.y))


class CrossingOut(BaseModel):
    red: int
    blue: int
    point: PointOut

    @classmethod
    def of(cls, red: int, blue: int, point) -> "CrossingOut":
        return cls(red=red, blue=blue, point=PointOut.of(point))


class SweepStatsOut(BaseModel):
    endpoints: int
    segments: int
    events: int
    swaps: int
    crossing_count: int
    bundle_splits: int
    bundle_merges: int
    max_bundles: int
    events_per_segment: str  # exact ratio

    @classmethod
    def of(cls, stats) -> "SweepStatsOut":
        return cls(
            endpoints=stats.endpoints,
            segments=stats.segments,
            events=stats.events,
            swaps=stats.swaps,
            crossing_count=stats.crossing_count,
            bundle_splits=stats.bundle_splits,
            bundle_merges=stats.bundle_merges,
            max_bundles=stats.max_bundles,
            events_per_segment=format_coord(Fraction(stats.events, stats.segments) if stats.segments else 0),
        )


class CountOut(BaseModel):
    count: int
    stats: Optional[SweepStatsOut] = None


class ReportOut(BaseModel):
    crossings: list[CrossingOut]
    stats: Optional[SweepStatsOut] = None


class RowOut(BaseModel):
    row: int
    red: int
    lo_x: str
    hi_x: str


class ColumnOut(BaseModel):
    event_index: int
    tie_rank: int
    lo: int
    hi: int
    size: int
    witness: PointOut


class IndexOut(BaseModel):
    row_count: int
    column_count: int
    updates: int
    nodes: int
    rows: Optional[list[RowOut]] = None
    columns: Optional[list[ColumnOut]] = None


class BatchedOut(BaseModel):
    found: list[CrossingOut]
    oracle_calls: Optional[int] = None
    calls_per_edge: Optional[dict[int, int]] = None


class DistanceOut(BaseModel):
    mode: str
    value: str
    witness: PointOut
    case: str


class ValidationOut(BaseModel):
    ok: bool
    violations: list[str] = []
    naive_agrees: Optional[bool] = None
