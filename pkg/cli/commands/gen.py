import argparse

from cli.generators import FAMILIES, generate
from infrastructure.storage import storage_manager
from utils.logger import get_logger

logger = get_logger("cli_gen")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", help="Generate a fixture graph")
    parser.add_argument("family", choices=FAMILIES)
    parser.add_argument("--size", type=int, help="Number of vertices (path, cycle, complete, birth-death)")
    parser.add_argument("--rate", type=float, default=1.0, help="Symmetric jump rate")
    parser.add_argument("--eps", type=float, default=1.0, help="q(1,2) of the g-eps graph")
    parser.add_argument("--dim", type=int, help="Hypercube dimension")
    parser.add_argument("--up", type=float, default=1.0, help="Birth rate q(i, i+1)")
    parser.add_argument("--down", type=float, default=1.0, help="Death rate q(i+1, i)")
    parser.add_argument("-o", "--output", help="Output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    graph = generate(
        args.family,
        size=args.size,
        rate=args.rate,
        eps=args.eps,
        dim=args.dim,
        up=args.up,
        down=args.down,
    )
    logger.info("Generated graph", family=args.family, vertices=graph.size)
    storage_manager.save_graph(graph, args.output)
    return 0
