import csv
import json
import logging
import os
import sys
from typing import Iterable, List, Optional, Sequence

import numpy as np

from config import Config
from utils.errors import UsageError

logger = logging.getLogger(__name__)


def format_number(value) -> str:
    """Full-precision text for CSV cells"""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return Config.FLOAT_FORMAT.format(float(value))


def ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Write rows with every number at 17 significant digits"""
    ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else format_number(cell) for cell in row])
    logger.info(f"📁 Wrote {path}")
    return path


def write_json(path: str, data) -> str:
    ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"📁 Wrote {path}")
    return path


def read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"Cannot read JSON from {path}: {e}")


def parse_values(text: str) -> np.ndarray:
    """'0,1,3' -> array([0., 1., 3.]); complex entries like 1+2j are allowed"""
    try:
        items = [complex(item.strip().replace(" ", "")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"Cannot parse values {text!r}")
    if not items:
        raise UsageError("No values given")
    values = np.array(items, dtype=complex)
    return values.real if not np.any(values.imag) else values


def complex_rows(ids: Sequence, values: Sequence[complex]) -> List[tuple]:
    """(id, re, im) rows for vertex tables"""
    return [(i, complex(v).real, complex(v).imag) for i, v in zip(ids, values)]


def print_rows(header: Sequence[str], rows: Iterable[Sequence], out=None):
    """CSV text on stdout when no output file was asked for"""
    out = out or sys.stdout
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else format_number(cell) for cell in row])


def merge_config(file_values: Optional[dict], flag_values: dict) -> dict:
    """Flags that were given override the JSON config file"""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged
