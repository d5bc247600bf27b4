"""densify.output.file_sink
=========================
Writes experiment results under one output directory, each file carrying
enough metadata to rerun the experiment exactly.

Usage (inside a command):
-------------------------
```python
sink = ResultSink(
    base_dir="results",      # --out
    fmt="csv",               # or "parquet"
    command="throughput",
    seed=cfg["run"]["seed"],
    config=cfg,
)
sink.write_table("throughput_bpm", rows, notes=["R_C = 1 m"])
```

Formats
-------
* **CSV** – ``#`` metadata lines, header, rows; floats printed with 9
  significant digits.  Tables are assembled with *polars*.
* **Parquet** – same table through *pyarrow* (Zstandard), metadata kept in
  the schema.
* **Matrix CSV** – a bare grid of numbers under the metadata lines.
* **PGM** – 16-bit binary greyscale (P5, maxval 65535, big-endian), linear
  in [min, max]; the top image row is the largest y.
* **JSON** – sorted keys, indent 2, metadata under ``"metadata"``.

Thread count and output directory never enter the metadata, so files are
byte-identical at every ``--threads`` setting.
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Union

import numpy as np
import polars as pl

try:
    import pyarrow as pa
    import pyarrow.parquet as pq
except ImportError:  # allow CSV-only usage without pyarrow
    pa = None  # type: ignore
    pq = None  # type: ignore

from densify import __version__
from densify.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = ["ResultSink", "format_float", "portable_config"]

PGM_MAXVAL = 65535
# run-time knobs that must not change output bytes
_VOLATILE_RUN_KEYS = ("threads", "out", "format")

Rows = Union[pl.DataFrame, Sequence[Mapping[str, Any]]]


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".9g")


def portable_config(config: Mapping[str, Any]) -> Dict[str, Any]:
    """Resolved config minus the keys that only affect how a run executes."""
    out = {k: v for k, v in config.items()}
    run = dict(out.get("run", {}))
    for key in _VOLATILE_RUN_KEYS:
        run.pop(key, None)
    out["run"] = run
    return out


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else format_float(value)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


class ResultSink:
    """Synchronous writer for one command run."""

    def __init__(
        self,
        base_dir: str | Path = "results",
        *,
        fmt: str = "csv",
        command: str,
        seed: int,
        config: Mapping[str, Any],
        compression: str = "zstd",
    ):
        self.base_dir = Path(base_dir)
        self.fmt = fmt.lower()
        if self.fmt not in {"parquet", "csv"}:
            raise InvalidArgumentError("fmt must be 'parquet' or 'csv'")
        if self.fmt == "parquet" and pa is None:
            raise InvalidArgumentError("pyarrow not installed - cannot write Parquet")
        self.command = command
        self.seed = seed
        self.config = portable_config(config)
        self.compression = compression
        self.written: List[Path] = []

    # ------------------------------------------------------------------ #
    def metadata(self, notes: Iterable[str] = ()) -> Dict[str, Any]:
        return {
            "tool": f"densify {__version__}",
            "numpy": np.__version__,
            "command": self.command,
            "seed": self.seed,
            "config": _json_safe(self.config),
            "notes": list(notes),
        }

    def _header_lines(self, notes: Iterable[str] = ()) -> List[str]:
        meta = self.metadata(notes)
        lines = [
            f"# {meta['tool']} (numpy {meta['numpy']})",
            f"# command: {self.command}",
            f"# seed: {self.seed}",
            "# config: " + json.dumps(meta["config"], sort_keys=True, separators=(",", ":")),
        ]
        lines += [f"# note: {n}" for n in meta["notes"]]
        return lines

    def _path(self, name: str, suffix: str) -> Path:
        self.base_dir.mkdir(parents=True, exist_ok=True)
        return self.base_dir / f"{name}.{suffix}"

    def _done(self, path: Path) -> Path:
        self.written.append(path)
        logger.info("wrote %s", path)
        return path

    # ------------------------------------------------------------------ #
    def write_table(self, name: str, rows: Rows, *, notes: Iterable[str] = ()) -> Path:
        """Write a table as CSV or Parquet depending on ``fmt``."""
        df = rows if isinstance(rows, pl.DataFrame) else pl.DataFrame(list(rows))
        notes = list(notes)
        if self.fmt == "parquet":
            out_file = self._path(name, "parquet")
            table = df.to_arrow()
            meta = json.dumps(self.metadata(notes), sort_keys=True, separators=(",", ":"))
            table = table.replace_schema_metadata({b"densify": meta.encode("utf-8")})
            pq.write_table(table, out_file, compression=self.compression)
            return self._done(out_file)

        floats = [c for c, t in zip(df.columns, df.dtypes) if t in (pl.Float32, pl.Float64)]
        if floats:
            df = df.with_columns(
                pl.col(c).map_elements(format_float, return_dtype=pl.Utf8) for c in floats
            )
        out_file = self._path(name, "csv")
        body = df.write_csv()
        with open(out_file, "w", newline="", encoding="utf-8") as fh:
            fh.write("\n".join(self._header_lines(notes)) + "\n")
            fh.write(body)
        return self._done(out_file)

    def write_matrix(self, name: str, values: np.ndarray, *, notes: Iterable[str] = ()) -> Path:
        """Row-major numeric grid as CSV under the metadata lines."""
        grid = np.atleast_2d(np.asarray(values, dtype=float))
        out_file = self._path(name, "csv")
        with open(out_file, "w", newline="", encoding="utf-8") as fh:
            fh.write("\n".join(self._header_lines(notes)) + "\n")
            for row in grid:
                fh.write(",".join(format_float(float(v)) for v in row) + "\n")
        return self._done(out_file)

    def write_pgm(self, name: str, values: np.ndarray, *, notes: Iterable[str] = ()) -> Path:
        """16-bit greyscale image, linear between the grid's min and max."""
        grid = np.asarray(values, dtype=float)
        if grid.ndim != 2 or not np.all(np.isfinite(grid)):
            raise InvalidArgumentError("PGM output needs a finite 2-D grid")
        lo, hi = float(grid.min()), float(grid.max())
        if hi > lo:
            scaled = np.rint((grid - lo) / (hi - lo) * PGM_MAXVAL)
        else:
            scaled = np.zeros_like(grid)
        pixels = np.flipud(scaled).astype(">u2")
        height, width = grid.shape

        comments = self._header_lines(list(notes) + [f"scale: {format_float(lo)} .. {format_float(hi)} dBm"])
        header = "P5\n" + "\n".join(comments) + f"\n{width} {height}\n{PGM_MAXVAL}\n"
        out_file = self._path(name, "pgm")
        with open(out_file, "wb") as fh:
            fh.write(header.encode("utf-8"))
            fh.write(pixels.tobytes())
        return self._done(out_file)

    def write_json(self, name: str, payload: Mapping[str, Any], *, notes: Iterable[str] = ()) -> Path:
        doc = {"metadata": self.metadata(notes), **_json_safe(dict(payload))}
        out_file = self._path(name, "json")
        with open(out_file, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_json_safe(doc), sort_keys=True, indent=2) + "\n")
        return self._done(out_file)
