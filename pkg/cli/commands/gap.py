import argparse

from core.theorems import spectral_gap
from infrastructure.storage import storage_manager


def register(subparsers) -> None:
    parser = subparsers.add_parser("gap", help="Spectral gap of -Delta on l^2(m)")
    parser.add_argument("--graph", required=True, help="Graph file")
    parser.add_argument("-o", "--output", help="Output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    graph = storage_manager.load_graph(args.graph)
    storage_manager.write_json({"spectral_gap": spectral_gap(graph)}, args.output)
    return 0
