import logging

from calculus.convergence import approximation_convergence, refine_sequence
from geometry.complexes import load_complex
from handlers.common import add_config_flag, command, function_option, require
from handlers.converge import write_table

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("approx", help="sup distance of piecewise-linear samples per level")
    parser.add_argument("--input", help="complex JSON file")
    parser.add_argument("--function", help="expression in x, y, z")
    parser.add_argument("--levels", type=int, help="number of subdivisions")
    parser.add_argument("--out", help="output CSV (stdout when omitted)")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    K, G = load_complex(require(options, "input"))
    require(options, "function")
    f = function_option(options)
    system = refine_sequence(K, G, int(options.get("levels") or 4))
    table = approximation_convergence(f, system)
    write_table(table, options)
    return 0
