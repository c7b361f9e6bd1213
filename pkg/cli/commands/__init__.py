from cli.commands import curvature, evolve, gap, gen, measure, verify

COMMANDS = (gen, measure, curvature, evolve, verify, gap)
