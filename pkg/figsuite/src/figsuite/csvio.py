"""Reader for the versioned acspin CSV schema.

The figure suite never recomputes physics: it consumes the CSV files the
acspin command line writes, whose first header line pins the schema
version and whose second carries the generating configuration as JSON.
This module is intentionally independent of the acspin package.
"""
from __future__ import annotations

import json

SUPPORTED_VERSION = 1


class SchemaError(ValueError):
    """The file is not a usable acspin CSV for the requested rendering."""


def _coerce(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def read_csv(path):
    """Parse an acspin CSV; returns (columns, rows, config).

    Rejects files without the version header, with an unsupported
    version, or without any data rows.
    """
    columns = None
    config = {}
    rows = []
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# acspin-csv v"):
            raise SchemaError(f"{path}: missing 'acspin-csv' version header")
        try:
            version = int(first[len("# acspin-csv v"):])
        except ValueError:
            raise SchemaError(f"{path}: malformed version header {first!r}")
        if version != SUPPORTED_VERSION:
            raise SchemaError(
                f"{path}: schema v{version} not supported (expected v{SUPPORTED_VERSION})"
            )
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# config: "):
                config = json.loads(line[len("# config: "):])
                continue
            if line.startswith("#") or not line:
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append({c: _coerce(v) for c, v in zip(columns, line.split(","))})
    if columns is None or not rows:
        raise SchemaError(f"{path}: no data rows")
    return columns, rows, config


def require_columns(columns, expected, path="input"):
    """Raise SchemaError with an explicit column diff on mismatch."""
    got, want = set(columns), set(expected)
    if got == want:
        return
    missing = sorted(want - got)
    unexpected = sorted(got - want)
    parts = []
    if missing:
        parts.append(f"missing columns {missing}")
    if unexpected:
        parts.append(f"unexpected columns {unexpected}")
    raise SchemaError(f"{path}: " + "; ".join(parts))
