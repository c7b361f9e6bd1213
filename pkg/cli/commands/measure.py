import argparse

from core.graph_core import connected_components, constants, diameter, reversible_measure
from core.models import NotReversible
from infrastructure.storage import storage_manager


def register(subparsers) -> None:
    parser = subparsers.add_parser("measure", help="Reversible measure and graph constants")
    parser.add_argument("--graph", required=True, help="Graph file")
    parser.add_argument("-o", "--output", help="Output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    graph = storage_manager.load_graph(args.graph)
    measure = reversible_measure(graph)
    # q_min and D are undefined without edges
    consts = constants(graph) if graph.rates else None
    report = {
        "reversible": not isinstance(measure, NotReversible),
        "measure": None if isinstance(measure, NotReversible) else measure.values,
        "not_reversible": measure if isinstance(measure, NotReversible) else None,
        "q_min": consts.q_min if consts else None,
        "max_degree": consts.max_degree if consts else None,
        "components": connected_components(graph),
        "diameter": diameter(graph),
    }
    storage_manager.write_json(report, args.output)
    return 0
