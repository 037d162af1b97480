"""
    anisofield.io
    -------------

    Artifact writers. Numbers are written with 17 significant digits so
    reruns with the same configuration produce identical files.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import json
import logging
import os

import numpy as np


__all__ = [
    "ArtifactWriter",
    "format_number",
    "read_field",
    "write_csv",
    "write_field",
    "write_json",
]

logger = logging.getLogger(__name__)


def format_number(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "as_dict"):
        return value.as_dict()
    if hasattr(value, "value"):
        return value.value
    raise TypeError("cannot serialize '%s'" % type(value).__name__)


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=_default)
        f.write("\n")


def write_csv(path, rows, columns=None):
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(format_number(row[c]) for c in columns) + "\n")


def write_field(path, field):
    """Little-endian row-major doubles plus a ``.json`` sidecar."""

    values = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as f:
        f.write(values.tobytes(order="C"))
    write_json(os.path.splitext(path)[0] + ".json", field.metadata())


def read_field(path):
    with open(os.path.splitext(path)[0] + ".json", "r", encoding="utf-8") as f:
        metadata = json.load(f)
    values = np.fromfile(path, dtype="<f8").reshape(metadata["n1"], metadata["n2"])
    return values, metadata


class ArtifactWriter:
    """Writes artifacts of one run into ``root`` and remembers them."""

    def __init__(self, root):
        self.root = root
        self.written = []
        os.makedirs(root, exist_ok=True)

    def path(self, name):
        return os.path.join(self.root, name)

    def _record(self, name):
        self.written.append(name)
        logger.info("wrote '%s'", self.path(name))
        return self.path(name)

    def csv(self, name, rows, columns=None):
        write_csv(self.path(name), rows, columns)
        return self._record(name)

    def json(self, name, data):
        write_json(self.path(name), data)
        return self._record(name)

    def field(self, name, field):
        write_field(self.path(name), field)
        self._record(os.path.splitext(name)[0] + ".json")
        return self._record(name)
