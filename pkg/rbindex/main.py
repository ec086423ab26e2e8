"""Command-line entry point: ``python -m rbindex.main <command> ...``."""
import argparse
import logging
import sys
from pathlib import Path
from typing import TextIO

from dotenv import load_dotenv
from pydantic import BaseModel

from rbindex.core.config import RunConfig, Settings, settings
from rbindex.core.errors import GenerationFailure, InconsistentOracle, InputFormatError, InvalidInput
from rbindex.core.logging import setup_logging
from rbindex.schemas.outputs import (
    BatchedOut,
    ColumnOut,
    CountOut,
    CrossingOut,
    DistanceOut,
    IndexOut,
    PointOut,
    ReportOut,
    RowOut,
    SweepStatsOut,
    ValidationOut,
)
from rbindex.services.bruteforce import naive_crossings
from rbindex.services.bundle_sweep import report_crossings, sweep
from rbindex.services.generator import gen_random, gen_terrain
from rbindex.services.geometry import validate_input
from rbindex.services.life_table import build_index, build_life_table, dump_life_table
from rbindex.services.parsers import (
    format_planes,
    format_segments,
    format_terrain,
    load_planes,
    load_segments,
    load_terrain,
)
from rbindex.services.rb_search import CountingOracle, TargetOracle, batched_search
from rbindex.services.terrain import vertical_distance
from rbindex.utils.common import format_coord, parse_coord

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")
    common.add_argument("--log-level", default=None, help="overrides RBINDEX_LOG_LEVEL")

    parser = _Parser(prog="rbindex", description="Red-blue segment preprocessing and batched search")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (
        ("count", "count red-blue crossings"),
        ("report", "list red-blue crossings"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("input", type=Path)
        p.add_argument("--stats", action="store_true")

    p = sub.add_parser("index", parents=[common], help="build the index and summarize or dump the life table")
    p.add_argument("input", type=Path)
    p.add_argument("--dump", action="store_true")

    p = sub.add_parser("batched", parents=[common], help="oracle-guided search on every red edge")
    p.add_argument("input", type=Path)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--target-x")
    target.add_argument("--target-blue", type=int, nargs="+")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--stats", action="store_true")

    p = sub.add_parser("terrain-dist", parents=[common], help="vertical distance between two terrains")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--max", dest="distance", action="store_const", const="max")
    which.add_argument("--min", dest="distance", action="store_const", const="min")
    p.add_argument("terrain", type=Path)
    p.add_argument("planes", type=Path)

    p = sub.add_parser("gen", parents=[common], help="generate a random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reds", type=int, default=10)
    p.add_argument("--blues", type=int, default=10)
    p.add_argument("--mode", choices=["general", "grid-like", "bundle-heavy"], default="general")
    p.add_argument("--terrain", action="store_true", help="generate a terrain pair instead of segments")
    p.add_argument("--vertices", type=int, default=12)
    p.add_argument("--planes", type=int, default=5)
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("validate", parents=[common], help="check general position")
    p.add_argument("input", type=Path)
    p.add_argument("--against-naive", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace, env: Settings | None = None) -> RunConfig:
    env = env or settings
    values = {k: v for k, v in vars(args).items() if v is not None and k in RunConfig.model_fields}
    inputs = [getattr(args, name) for name in ("input", "terrain", "planes") if isinstance(getattr(args, name, None), Path)]
    values["inputs"] = inputs
    if args.command == "gen":
        values["terrain"] = args.terrain
        values["planes"] = args.planes
        if env.seed is not None:
            values["seed"] = env.seed
    else:
        values.pop("terrain", None)
        values.pop("planes", None)
    return RunConfig(**values)


def _emit(config: RunConfig, out: TextIO, text: str, model: BaseModel) -> None:
    if config.output_format == "json":
        out.write(model.model_dump_json(indent=2) + "\n")
    elif text:
        out.write(text if text.endswith("\n") else text + "\n")


def _stats_lines(stats) -> str:
    out = SweepStatsOut.of(stats)
    return "\n".join(f"{name} {value}" for name, value in out.model_dump().items())


# ---------------------------
# Commands
# ---------------------------

def _count(config: RunConfig, out: TextIO) -> int:
    result = sweep(load_segments(config.inputs[0]))
    stats = SweepStatsOut.of(result.stats) if config.stats else None
    text = str(result.crossing_count)
    if config.stats:
        text += "\n" + _stats_lines(result.stats)
    _emit(config, out, text, CountOut(count=result.crossing_count, stats=stats))
    return EXIT_OK


def _report(config: RunConfig, out: TextIO) -> int:
    result = sweep(load_segments(config.inputs[0]))
    crossings = report_crossings(result)
    lines = [f"{r} {b} {format_coord(p.x)} {format_coord(p.y)}" for r, b, p in crossings]
    stats = None
    if config.stats:
        stats = SweepStatsOut.of(result.stats)
        lines.append(_stats_lines(result.stats))
    model = ReportOut(crossings=[CrossingOut.of(r, b, p) for r, b, p in crossings], stats=stats)
    _emit(config, out, "\n".join(lines), model)
    return EXIT_OK


def _index(config: RunConfig, out: TextIO) -> int:
    table = build_life_table(sweep(load_segments(config.inputs[0])))
    ix = build_index(table)
    model = IndexOut(
        row_count=len(table.rows),
        column_count=len(table.columns),
        updates=ix.updates,
        nodes=ix.outer.nodes_allocated,
    )
    if config.dump:
        model.rows = [
            RowOut(row=r.index, red=r.red.id, lo_x=format_coord(r.lo_x), hi_x=format_coord(r.hi_x))
            for r in table.rows
        ]
        model.columns = [
            ColumnOut(
                event_index=c.event_key[0],
                tie_rank=c.event_key[1],
                lo=c.lo,
                hi=c.hi,
                size=c.size,
                witness=PointOut.of(c.witness),
            )
            for c in table.columns
        ]
        text = dump_life_table(table)
    else:
        text = f"rows {model.row_count}\ncolumns {model.column_count}\nupdates {model.updates}\nnodes {model.nodes}"
    _emit(config, out, text, model)
    return EXIT_OK


def _batched(config: RunConfig, out: TextIO) -> int:
    ix = build_index(build_life_table(sweep(load_segments(config.inputs[0]))))
    if config.target_x is not None:
        try:
            target_x = parse_coord(config.target_x)
        except ValueError as e:
            raise InputFormatError(f"--target-x: {e}") from e
        oracle = CountingOracle(TargetOracle(ix, target_x=target_x))
    else:
        oracle = CountingOracle(TargetOracle(ix, target_blues=config.target_blue))

    found = batched_search(ix, oracle, strict=config.strict)
    lines = [f"{ref.red_id} {ref.blue_id} {format_coord(ref.point.x)} {format_coord(ref.point.y)}" for ref in found]
    model = BatchedOut(found=[CrossingOut.of(ref.red_id, ref.blue_id, ref.point) for ref in found])
    if config.stats:
        lines.append(f"oracle_calls {oracle.calls}")
        model.oracle_calls = oracle.calls
        model.calls_per_edge = dict(sorted(oracle.per_edge.items()))
    _emit(config, out, "\n".join(lines), model)
    return EXIT_OK


def _terrain_dist(config: RunConfig, out: TextIO) -> int:
    red, blue = load_terrain(config.inputs[0]), load_planes(config.inputs[1])
    result = vertical_distance(red, blue, config.distance)
    text = f"{format_coord(result.value)} {format_coord(result.witness_xy.x)} {format_coord(result.witness_xy.y)} {result.case.value}"
    model = DistanceOut(
        mode=config.distance,
        value=format_coord(result.value),
        witness=PointOut.of(result.witness_xy),
        case=result.case.value,
    )
    _emit(config, out, text, model)
    return EXIT_OK


def _gen(config: RunConfig, out: TextIO) -> int:
    if config.terrain:
        if config.output is None:
            raise InputFormatError("gen --terrain needs -o PREFIX (writes PREFIX.terrain and PREFIX.planes)")
        red, blue = gen_terrain(config.seed, config.vertices, config.planes)
        config.output.with_suffix(".terrain").write_text(format_terrain(red), encoding="utf-8")
        config.output.with_suffix(".planes").write_text(format_planes(blue), encoding="utf-8")
        return EXIT_OK

    text = format_segments(gen_random(config.seed, config.reds, config.blues, config.mode))
    if config.output is not None:
        config.output.write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def _validate(config: RunConfig, out: TextIO) -> int:
    pair = load_segments(config.inputs[0])
    report = validate_input(pair)
    model = ValidationOut(ok=report.ok, violations=report.lines())
    status = EXIT_OK if report.ok else EXIT_INVALID

    if report.ok and config.against_naive:
        if len(pair) > settings.naive_limit:
            raise InputFormatError(f"--against-naive accepts at most {settings.naive_limit} segments")
        naive = {(ref.red_id, ref.blue_id, ref.point) for refs in naive_crossings(pair).values() for ref in refs}
        swept = set(report_crossings(pair))
        model.naive_agrees = naive == swept
        if not model.naive_agrees:
            model.ok = False
            model.violations.append(f"sweep and pairwise tests disagree on {len(naive ^ swept)} crossings")
            status = EXIT_INVALID

    text = "ok" if model.ok else "\n".join(model.violations)
    _emit(config, out, text, model)
    return status


COMMANDS = {
    "count": _count,
    "report": _report,
    "index": _index,
    "batched": _batched,
    "terrain-dist": _terrain_dist,
    "gen": _gen,
    "validate": _validate,
}


def run(config: RunConfig, out: TextIO | None = None) -> int:
    """Execute one command; returns the process exit status."""
    out = out or sys.stdout
    try:
        return COMMANDS[config.command](config, out)
    except InvalidInput as e:
        logger.error("invalid input: %s", e)
        lines = [str(e)] + (e.report.lines() if e.report is not None else [])
        _emit(config, out, "\n".join(lines), ValidationOut(ok=False, violations=lines))
        return EXIT_INVALID
    except InconsistentOracle as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except (InputFormatError, GenerationFailure, OSError) as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    env = Settings()
    setup_logging(level=args.log_level or env.log_level, log_dir=env.log_dir, to_file=env.log_to_file)
    return run(config_from_args(args, env))


if __name__ == "__main__":
    sys.exit(main())
