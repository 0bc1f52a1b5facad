import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Logging
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")

    # Geometry tolerances
    SUPPORT_THRESHOLD = float(os.environ.get("SUPPORT_THRESHOLD", 1e-9))
    AFFINE_TOLERANCE = float(os.environ.get("AFFINE_TOLERANCE", 1e-10))

    # Operator tolerances
    PARITY_TOLERANCE = float(os.environ.get("PARITY_TOLERANCE", 1e-12))
    SUBSPACE_TOLERANCE = float(os.environ.get("SUBSPACE_TOLERANCE", 1e-10))
    RATE_FLOOR = 1e-14  # errors below this are treated as exact

    # Capacity limits
    OPEN_SET_CAP = int(os.environ.get("OPEN_SET_CAP", 64))
    FORM_CAP = int(os.environ.get("FORM_CAP", 16))
    TENSOR_CAP = int(os.environ.get("TENSOR_CAP", 4096))
    FACE_CAP = int(os.environ.get("FACE_CAP", 10**6))

    # Sampling
    SAMPLES_PER_FACE = int(os.environ.get("SAMPLES_PER_FACE", 100))
    STAR_SAMPLES = int(os.environ.get("STAR_SAMPLES", 1000))
    RANDOM_SEED = int(os.environ.get("RANDOM_SEED", 0))

    # Convergence runs
    LEVEL_WORKERS = int(os.environ.get("LEVEL_WORKERS", 4))
    BASE_POINTS = int(os.environ.get("BASE_POINTS", 8))

    # Expected rate windows per experiment kind (center, half width)
    RATE_WINDOWS = {
        "derivative": (1.0, 0.15),
        "laplacian": (2.0, 0.2),
        "stencil": (2.0, 0.2),
        "approximation": (1.0, 0.1),
    }

    # CSV output
    FLOAT_FORMAT = "{:.17g}"
