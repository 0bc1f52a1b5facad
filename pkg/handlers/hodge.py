import logging

import numpy as np

from calculus.spectral import harmonic_basis, hodge_decompose
from handlers.common import add_triple_flags, build_element, build_triple, command, emit

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("hodge", help="split a into exact and harmonic parts")
    add_triple_flags(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    triple = build_triple(options)
    a = build_element(triple, options)
    exact, harmonic = hodge_decompose(a, triple)
    residual = float(np.linalg.norm(a.values - exact.values - harmonic.values))
    logger.info(
        f"📊 dim ker Delta = {harmonic_basis(triple).shape[1]}, "
        f"decomposition residual {residual:.3e}"
    )
    rows = [
        (v, e.real, e.imag, g.real, g.imag)
        for v, e, g in zip(triple.poset.vertices, exact.values, harmonic.values)
    ]
    emit(options, ("vertex_id", "exact_re", "exact_im", "harmonic_re", "harmonic_im"), rows)
    return 0
