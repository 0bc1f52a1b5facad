import logging

from calculus.spectral import laplacian
from handlers.common import add_triple_flags, build_element, build_triple, command, emit
from utils.helpers import complex_rows

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("laplacian", help="Laplacian p[D,[D,a]] at every vertex")
    add_triple_flags(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    triple = build_triple(options)
    a = build_element(triple, options)
    result = laplacian(a, triple)
    emit(options, ("vertex_id", "re", "im"), complex_rows(triple.poset.vertices, result.values))
    return 0
