import argparse

import numpy as np

from core import theorems
from core.curvature import minimal_dimension
from core.errors import InvalidArgumentError
from core.evolution import validate_grid
from core.models import Dimension, SolverConfig, VertexFunction, VerdictStatus
from cli.commands.evolve import parse_times
from infrastructure.storage import storage_manager
from utils.config import settings
from utils.logger import get_logger

logger = get_logger("cli_verify")

THEOREMS = (
    "gradient",
    "monotone",
    "semigroup",
    "l1",
    "li-yau",
    "harnack",
    "hamilton",
    "hamilton-harnack",
    "lin-gradient",
    "doubling",
    "reverse-poincare",
)
NEEDS_DIMENSION = {"li-yau", "harnack", "lin-gradient", "doubling"}
NONPOSITIVE = {"hamilton", "hamilton-harnack"}

EXIT_CODES = {
    VerdictStatus.YES: 0,
    VerdictStatus.NO: 1,
    VerdictStatus.HYPOTHESES_NOT_MET: 2,
    VerdictStatus.VACUOUS: 2,
}

CSV_HELP = "Write the verdict summary row to FILE with columns theorem, holds, worst_margin, tolerance, instances"


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Check a theorem's inequality along the flow")
    parser.add_argument("--theorem", required=True, choices=THEOREMS)
    parser.add_argument("--graph", required=True, help="Graph file")
    parser.add_argument("--u0", help="Initial vertex function; a seeded admissible one is generated when omitted")
    parser.add_argument("--h", help="Upper function for the monotonicity check (default: u0 plus a random bump)")
    parser.add_argument("--n", help="Dimension: positive real or 'auto'")
    parser.add_argument("--K", type=float, help="Curvature bound (default: best verified K >= 0)")
    parser.add_argument("--alpha", type=float, help="Exponent of the decreasing branch")
    parser.add_argument("--alpha-lo", type=float, dest="alpha_lo", help="Exponent of the increasing branch")
    parser.add_argument("--grid", help="Time grid t1,t2,...; 0 is prepended when missing")
    parser.add_argument("--rel-tol", type=float, help="Solver relative tolerance")
    parser.add_argument("--seed", type=int, default=None, help="Seed for generated initial data")
    parser.add_argument("--no-curvature-gate", action="store_true", help="Treat K as a claim under test (gradient only)")
    parser.add_argument("--csv", help=CSV_HELP)
    parser.add_argument("-o", "--output", help="Output file (stdout when omitted)")
    parser.set_defaults(handler=handle)


def _dimension(graph, raw) -> Dimension:
    if raw is None:
        raise InvalidArgumentError("--n is required for this theorem")
    if raw.strip().lower() == "auto":
        return Dimension(value=minimal_dimension(graph))
    return Dimension.parse(raw)


def handle(args: argparse.Namespace) -> int:
    graph = storage_manager.load_graph(args.graph)
    cfg = SolverConfig.from_settings(rel_tol=args.rel_tol)
    seed = settings.default_seed if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    log = logger.bind(theorem=args.theorem, graph=args.graph)

    grid = parse_times(args.grid)
    if grid is not None:
        grid = validate_grid(grid if grid and grid[0] == 0.0 else [0.0] + grid)

    generated = args.u0 is None and args.theorem != "doubling"
    if args.u0 is not None:
        u0 = storage_manager.load_vertex_function(args.u0, graph)
    elif generated:
        u0 = theorems.admissible_initial(graph, rng, nonpositive=args.theorem in NONPOSITIVE)
        log.info("Generated admissible initial data", seed=seed)
    n = _dimension(graph, args.n) if args.theorem in NEEDS_DIMENSION else None

    theorem = args.theorem
    if theorem == "gradient":
        verdict = theorems.verify_gradient_decay(graph, u0, args.K, grid, cfg, gate_curvature=not args.no_curvature_gate)
    elif theorem == "monotone":
        if args.h is not None:
            h = storage_manager.load_vertex_function(args.h, graph)
        else:
            bump = rng.uniform(0.0, 0.5, graph.size)
            h = VertexFunction.from_array(graph, u0.to_array(graph) + bump)
        verdict = theorems.verify_monotonicity(graph, u0, h, grid, cfg)
    elif theorem == "semigroup":
        verdict = theorems.verify_semigroup_comparison(graph, u0, args.alpha, args.alpha_lo, grid, cfg)
    elif theorem == "l1":
        verdict = theorems.verify_l1_comparison(graph, u0, args.alpha, args.alpha_lo, grid, cfg)
    elif theorem == "li-yau":
        verdict = theorems.verify_li_yau(graph, u0, n, grid, cfg)
    elif theorem == "harnack":
        verdict = theorems.verify_harnack(graph, u0, n, cfg=cfg)
    elif theorem == "hamilton":
        verdict = theorems.verify_hamilton(graph, u0, args.K, grid, cfg)
    elif theorem == "hamilton-harnack":
        verdict = theorems.verify_hamilton_harnack(graph, u0, grid, cfg)
    elif theorem == "lin-gradient":
        verdict = theorems.verify_linear_gradient_bound(graph, u0, n, grid, cfg)
    elif theorem == "reverse-poincare":
        verdict = theorems.verify_reverse_poincare(graph, u0, args.K or 0.0, grid, cfg)
    else:
        verdict = theorems.verify_volume_doubling(graph, n, cfg)

    if generated:
        verdict = verdict.model_copy(update={"details": {**verdict.details, "seed": seed}})
    log.info("Verdict", holds=verdict.holds.value, instances=verdict.instances)
    storage_manager.write_json(verdict, args.output)
    if args.csv:
        row = (verdict.theorem, verdict.holds, verdict.worst_margin, verdict.tolerance, verdict.instances)
        storage_manager.write_csv(("theorem", "holds", "worst_margin", "tolerance", "instances"), [row], args.csv)
    return EXIT_CODES[verdict.holds]
