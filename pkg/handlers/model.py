import logging

from calculus.models import LatticeSpec, dirac_entries, metric_weighted_dirac
from handlers.common import add_config_flag, command, emit, require
from utils.errors import UsageError
from utils.helpers import read_json

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("model", help="assemble a lattice Dirac operator")
    parser.add_argument("--spec", help="lattice JSON file")
    parser.add_argument("--out", help="output CSV (stdout when omitted)")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    spec_data = require(options, "spec")
    if isinstance(spec_data, str):
        spec_data = read_json(spec_data)
    if not isinstance(spec_data, dict):
        raise UsageError("Lattice spec must be a JSON object")
    spec = LatticeSpec.from_dict(spec_data)
    triple = metric_weighted_dirac(spec)
    logger.info(
        f"📊 Dirac of dimension {triple.total_dim}: "
        f"hermitian={triple.is_hermitian()}, odd={triple.is_odd()}"
    )
    rows = [(r, c, v.real, v.imag) for r, c, v in dirac_entries(triple)]
    emit(options, ("row", "col", "re", "im"), rows)
    return 0
