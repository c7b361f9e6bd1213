import argparse
from typing import List, Optional

from core.errors import InvalidArgumentError
from core.evolution import flow_trace
from core.models import SolverConfig
from infrastructure.storage import storage_manager
from utils.logger import get_logger

logger = get_logger("cli_evolve")

CSV_HELP = "Write the trace to FILE with columns t, then one column per vertex in declared order"


def parse_times(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgumentError(f"grid must be comma-separated numbers, got {text!r}") from None


def register(subparsers) -> None:
    parser = subparsers.add_parser("evolve", help="Integrate the nonlinear flow (or the heat flow)")
    parser.add_argument("--graph", required=True, help="Graph file")
    parser.add_argument("--u0", required=True, help="Initial vertex function file")
    parser.add_argument("--t", type=float, help="Final time")
    parser.add_argument("--grid", help="Snapshot times t1,t2,...; 0 is prepended when missing")
    parser.add_argument("--rel-tol", type=float, help="Solver relative tolerance")
    parser.add_argument("--linear", action="store_true", help="Heat semigroup instead of the nonlinear flow")
    parser.add_argument("--csv", help=CSV_HELP)
    parser.add_argument("-o", "--output", help="JSON-lines output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    graph = storage_manager.load_graph(args.graph)
    u0 = storage_manager.load_vertex_function(args.u0, graph)

    grid = parse_times(args.grid)
    if grid is None:
        if args.t is None:
            raise InvalidArgumentError("either --t or --grid is required")
        grid = [0.0, args.t] if args.t > 0 else [0.0]
    else:
        if args.t is not None:
            grid = [t for t in grid if t <= args.t] + ([args.t] if args.t not in grid else [])
        if not grid or grid[0] != 0.0:
            grid = [0.0] + grid

    cfg = SolverConfig.from_settings(rel_tol=args.rel_tol)
    trace = flow_trace(graph, u0, grid, cfg, linear=args.linear)
    if not trace.status.completed:
        logger.warning("Flow stopped early", status=trace.status.kind.value, t=trace.status.t)

    records = [{"t": t, "u": state} for t, state in zip(trace.times, trace.states)]
    records.append({"status": trace.status.kind, "t": trace.status.t if trace.status.t is not None else trace.times[-1]})
    storage_manager.write_jsonl(records, args.output)
    if args.csv:
        rows = [[t] + [state.values[v] for v in graph.vertices] for t, state in zip(trace.times, trace.states)]
        storage_manager.write_csv(["t", *graph.vertices], rows, args.csv)
    return 0
