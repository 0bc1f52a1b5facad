from handlers import approx, converge, hodge, laplacian, model, poset, spectrum, subdivide

COMMANDS = (subdivide, poset, spectrum, laplacian, hodge, approx, converge, model)


def register_all(subparsers):
    for module in COMMANDS:
        module.register(subparsers)
