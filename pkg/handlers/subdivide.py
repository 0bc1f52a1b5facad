import json
import logging

from calculus.convergence import refine_sequence
from geometry.complexes import complex_to_dict, dump_complex, load_complex
from handlers.common import add_config_flag, command, require

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("subdivide", help="barycentric refinement of a complex")
    parser.add_argument("--input", help="complex JSON file")
    parser.add_argument("--levels", type=int, help="number of subdivisions")
    parser.add_argument("--out", help="output complex JSON (stdout when omitted)")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    K, G = load_complex(require(options, "input"))
    system = refine_sequence(K, G, int(options.get("levels") or 1))
    fine, fine_G = system.complexes[-1], system.realizations[-1]
    logger.info(f"📊 Meshes: {', '.join(f'{h:.6g}' for h in system.meshes())}")
    if options.get("out"):
        dump_complex(fine, fine_G, options["out"])
        logger.info(f"📁 Wrote {options['out']}")
    else:
        print(json.dumps(complex_to_dict(fine, fine_G)))
    return 0
