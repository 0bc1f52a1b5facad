import json
import logging

from calculus.convergence import refine_sequence
from geometry.complexes import load_complex
from geometry.posets import poset_to_dict
from handlers.common import add_config_flag, command, require
from utils.helpers import write_json

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("poset", help="export the face poset as a Hasse diagram")
    parser.add_argument("--input", help="complex JSON file")
    parser.add_argument("--levels", type=int, help="subdivide this many times first")
    parser.add_argument("--out", help="output JSON (stdout when omitted)")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    K, G = load_complex(require(options, "input"))
    system = refine_sequence(K, G, int(options.get("levels") or 0))
    data = poset_to_dict(system.levels[-1])
    logger.info(f"📊 Poset with {len(data['elements'])} elements, {len(data['covers'])} covers")
    if options.get("out"):
        write_json(options["out"], data)
    else:
        print(json.dumps(data, sort_keys=True))
    return 0
