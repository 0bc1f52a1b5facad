import logging

from calculus.convergence import (
    LATTICE_MODELS,
    MODELS,
    ErrorTable,
    central_difference_convergence,
    derivative_convergence,
    laplacian_convergence,
    lattice_convergence,
)
from handlers.common import add_config_flag, command, function_option, require
from utils.errors import UsageError
from utils.helpers import print_rows, write_csv, write_json

logger = logging.getLogger(__name__)

KINDS = ("derivative", "laplacian", "stencil")


def register(subparsers):
    parser = subparsers.add_parser("converge", help="error table of a refinement experiment")
    parser.add_argument("--model", choices=MODELS + LATTICE_MODELS)
    parser.add_argument("--function", help="expression in x (and y for 2-d models)")
    parser.add_argument("--levels", type=int, help="refinements k = 0..levels")
    parser.add_argument("--kind", choices=KINDS, help="quantity compared at each level")
    parser.add_argument("--base", type=int, help="vertex count of the coarsest level")
    parser.add_argument("--out", help="output CSV (stdout when omitted)")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def write_table(table: ErrorTable, options: dict):
    """Table CSV plus <out>.json summary and <out>.plot.csv, or CSV on stdout"""
    summary = table.summary()
    rate = summary["rate"]
    logger.info(
        f"📊 {table.kind} on {table.model}: rate {'n/a' if rate is None else f'{rate:.4f}'}, "
        f"{'✅ passed' if summary['passed'] else '❌ outside window'}"
    )
    out = options.get("out")
    if not out:
        print_rows(("level", "h", "error", "rate_cum"), table.csv_rows())
        return
    table.to_csv(out)
    write_json(f"{out}.json", {"rate": rate, "passed": summary["passed"]})
    write_csv(f"{out}.plot.csv", ("h", "error"), table.plot_rows())


@command
def handle(options: dict) -> int:
    model = require(options, "model")
    require(options, "function")
    f = function_option(options)
    kind = options.get("kind") or "derivative"
    levels = int(options.get("levels") if options.get("levels") is not None else 5)
    if levels < 0:
        raise UsageError("--levels must be nonnegative")
    base = options.get("base")
    base = int(base) if base is not None else None

    if model in LATTICE_MODELS:
        if kind != "derivative":
            raise UsageError(f"{model} supports --kind derivative only")
        table = lattice_convergence(f, model=model, levels=levels, base=base)
    elif model not in MODELS:
        raise UsageError(f"Unknown model {model!r}")
    elif kind == "derivative":
        table = derivative_convergence(f, model=model, levels=levels, base=base)
    elif kind == "laplacian":
        table = laplacian_convergence(f, model=model, levels=levels, base=base)
    elif kind == "stencil":
        if model != "circle":
            raise UsageError("Stencil synthesis runs on the circle model")
        table = central_difference_convergence(f, levels=levels, base=base)
    else:
        raise UsageError(f"Unknown kind {kind!r}")

    write_table(table, options)
    return 0
