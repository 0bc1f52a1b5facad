import functools
import logging
from argparse import Namespace
from typing import Callable, Optional, Tuple

from calculus.algebra import AlgebraElement, vertex_coordinates
from calculus.models import circle_triple, line_lattice_triple
from calculus.spectral import SpectralTriple
from geometry.complexes import load_complex, mesh
from geometry.posets import face_poset_op
from utils.errors import ComputationError, UsageError, ValidationError
from utils.expression import Expression, parse_expression
from utils.helpers import merge_config, parse_values, print_rows, read_json, write_csv

logger = logging.getLogger(__name__)

# Keys a --config file may set; flags given on the command line win
OPTION_KEYS = ("input", "model", "m", "h", "values", "function", "levels", "out", "kind", "spec", "base")


def command(fn: Callable[[dict], int]) -> Callable[[Namespace], int]:
    """Resolve options, run the subcommand and turn errors into exit codes"""
    @functools.wraps(fn)
    def handle(args: Namespace) -> int:
        try:
            return fn(resolve_options(args))
        except ValidationError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return 1
        except ComputationError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return 2
    return handle


def resolve_options(args: Namespace) -> dict:
    file_values = None
    if getattr(args, "config", None):
        file_values = read_json(args.config)
        if not isinstance(file_values, dict):
            raise UsageError("Config file must hold a JSON object")
        unknown = sorted(set(file_values) - set(OPTION_KEYS))
        if unknown:
            raise UsageError(f"Unknown config key(s): {', '.join(unknown)}")
    flags = {k: getattr(args, k, None) for k in OPTION_KEYS}
    return merge_config(file_values, flags)


def add_config_flag(parser):
    parser.add_argument("--config", help="JSON file with default option values")


def add_triple_flags(parser):
    parser.add_argument("--input", help="complex JSON file")
    parser.add_argument("--model", choices=("line", "circle"), help="closed-form model instead of --input")
    parser.add_argument("--m", type=int, help="number of vertices of the model")
    parser.add_argument("--h", type=float, help="mesh length")
    parser.add_argument("--values", help="comma separated vertex values")
    parser.add_argument("--function", help="expression in x, y, z sampled at the vertices")
    parser.add_argument("--out", help="output CSV (stdout when omitted)")
    add_config_flag(parser)


def require(options: dict, key: str):
    value = options.get(key)
    if value is None:
        raise UsageError(f"--{key} is required")
    return value


def build_triple(options: dict) -> SpectralTriple:
    """Triple from --input or from --model/--m/--h"""
    h = options.get("h")
    if options.get("input"):
        K, G = load_complex(options["input"])
        P = face_poset_op(K)
        return SpectralTriple.from_poset(P, float(h or mesh(K, G)), chart=vertex_coordinates(P, G))

    model = options.get("model")
    m = int(require(options, "m"))
    if model == "line":
        return line_lattice_triple(m, float(1.0 if h is None else h))
    if model == "circle":
        return circle_triple(m, None if h is None else float(h))
    raise UsageError("Give either --input or --model line|circle")


def function_option(options: dict) -> Optional[Expression]:
    text = options.get("function")
    return parse_expression(str(text)) if text is not None else None


def build_element(triple: SpectralTriple, options: dict) -> AlgebraElement:
    if options.get("values") is not None:
        values = options["values"]
        if isinstance(values, (list, tuple)):
            values = ",".join(str(v) for v in values)
        return triple.element(parse_values(str(values)))
    f = function_option(options)
    if f is None:
        raise UsageError("Give --values or --function")
    return triple.sample(f)


def emit(options: dict, header: Tuple[str, ...], rows) -> None:
    """CSV to --out, or to stdout"""
    rows = list(rows)
    if options.get("out"):
        write_csv(options["out"], header, rows)
    else:
        print_rows(header, rows)
