import logging

from calculus.spectral import graded_d, represent, spectral_values
from handlers.common import add_triple_flags, build_element, build_triple, command, emit

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("spectrum", help="signed singular values of da")
    add_triple_flags(parser)
    parser.set_defaults(handler=handle)


@command
def handle(options: dict) -> int:
    triple = build_triple(options)
    a = build_element(triple, options)
    values = spectral_values(graded_d(represent(a), triple))
    logger.info(f"📊 Spectrum of da on {triple.m} vertices: max {values.max():.6g}")
    emit(options, ("index", "value"), enumerate(values.tolist()))
    return 0
