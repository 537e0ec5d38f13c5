"""Column tables with metadata, serialized as deterministic CSV."""

import csv
import io
import json

import numpy as np

from .errors import ParameterError

__version__ = "0.1.0"


class ResultTable:
    """Named, equal-length float columns plus a metadata dictionary.

    The CSV form starts with ``# key: value`` lines (sorted by key, values as
    JSON), followed by a header row and one row per record.  Floats are
    written with ``repr`` so that identical inputs give identical bytes.
    """

    def __init__(self, columns, metadata=None):
        cols = {}
        length = None
        for name, values in columns.items():
            arr = np.asarray(values, dtype=float).ravel()
            if length is None:
                length = arr.size
            elif arr.size != length:
                raise ParameterError(f"column {name!r} has length {arr.size}, expected {length}")
            arr.setflags(write=False)
            cols[name] = arr
        self.columns = cols
        self.metadata = dict(metadata or {})
        self.metadata.setdefault("version", __version__)

    def __len__(self):
        return 0 if not self.columns else next(iter(self.columns.values())).size

    def __getitem__(self, name):
        return self.columns[name]

    @property
    def names(self):
        return list(self.columns)

    def to_csv(self):
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {json.dumps(self.metadata[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in zip(*self.columns.values()):
            w.writerow([repr(float(v) + 0.0) for v in row])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text):
        meta = {}
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = json.loads(val)
            else:
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        rows = [list(map(float, r)) for r in reader if r]
        data = np.array(rows).reshape(len(rows), len(header))
        return cls({h: data[:, i] for i, h in enumerate(header)}, meta)

    def pivot(self, row, col, value):
        """Reshape long-format data into ``(row values, col values, 2-D array)``."""
        rv = np.unique(self[row])
        cv = np.unique(self[col])
        grid = np.full((rv.size, cv.size), np.nan)
        ri = np.searchsorted(rv, self[row])
        ci = np.searchsorted(cv, self[col])
        grid[ri, ci] = self[value]
        return rv, cv, grid
