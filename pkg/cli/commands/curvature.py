import argparse

from core.curvature import curvature_at, curvature_function, minimal_dimension
from core.models import Dimension
from infrastructure.storage import storage_manager
from utils.logger import get_logger

logger = get_logger("cli_curvature")

CSV_HELP = "Write per-vertex rows to FILE with columns vertex, n, optimal_k, status"


def register(subparsers) -> None:
    parser = subparsers.add_parser("curvature", help="Optimal CD(K, n) curvature per vertex")
    parser.add_argument("--graph", required=True, help="Graph file")
    parser.add_argument("--n", default="inf", help="Dimension: positive real, 'inf', or 'auto' (minimal n with CD(0, n))")
    parser.add_argument("--vertex", help="Only this vertex")
    parser.add_argument("--csv", help=CSV_HELP)
    parser.add_argument("-o", "--output", help="Output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    graph = storage_manager.load_graph(args.graph)
    report = {}
    if args.n.strip().lower() == "auto":
        value = minimal_dimension(graph)
        logger.info("Minimal dimension with CD(0, n)", n=value)
        report["minimal_dimension"] = value
        n = Dimension(value=value)
    else:
        n = Dimension.parse(args.n)

    if args.vertex is not None:
        results = [curvature_at(graph, args.vertex, n)]
    else:
        curvature = curvature_function(graph, n)
        results = curvature.results
        report["global_k"] = curvature.global_k

    report["n"] = n
    report["results"] = [
        {"vertex": r.vertex, "n": r.dimension, "optimal_k": r.optimal_k, "status": r.status, "witness": r.witness}
        for r in results
    ]
    storage_manager.write_json(report, args.output)
    if args.csv:
        rows = [(r.vertex, r.dimension.value, r.optimal_k, r.status) for r in results]
        storage_manager.write_csv(("vertex", "n", "optimal_k", "status"), rows, args.csv)
    return 0
