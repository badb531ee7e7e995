"""Bit-exact persistence: CSV time series, binary snapshots, manifest."""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .spectral import ScalarField, make_grid

__all__ = [
    "records_to_csv",
    "write_csv",
    "read_csv",
    "snapshot_bytes",
    "parse_snapshot",
    "write_snapshot",
    "read_snapshot",
    "write_outputs",
]

CSV_HEADER = ",".join(CSV_COLUMNS)
SNAPSHOT_MAGIC = b"KSMX"
SNAPSHOT_VERSION = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def records_to_csv(records: list[DiagnosticsRecord]) -> str:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.row()))
    return "\n".join(lines) + "\n"


def write_csv(records: list[DiagnosticsRecord], path: str | Path) -> None:
    Path(path).write_bytes(records_to_csv(records).encode("ascii"))


def read_csv(path: str | Path) -> list[DiagnosticsRecord]:
    lines = Path(path).read_bytes().decode("ascii").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: bad or missing CSV header")
    out = []
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        if len(vals) != len(CSV_COLUMNS):
            raise ValueError(f"{path}: row has {len(vals)} columns")
        out.append(DiagnosticsRecord(**dict(zip(CSV_COLUMNS, vals))))
    return out


def snapshot_bytes(f: ScalarField, time: float) -> bytes:
    grid = f.grid
    header = SNAPSHOT_MAGIC + struct.pack(
        "<IIIdd", SNAPSHOT_VERSION, grid.dim, grid.n, time, f.mean()
    )
    return header + f.values.astype("<f8").tobytes(order="C")


def parse_snapshot(blob: bytes) -> tuple[ScalarField, float]:
    if blob[:4] != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot: bad magic bytes")
    version, dim, n, time, mean = struct.unpack_from("<IIIdd", blob, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid = make_grid(dim, n)
    offset = 4 + struct.calcsize("<IIIdd")
    vals = np.frombuffer(blob, dtype="<f8", count=grid.npoints, offset=offset)
    field = ScalarField(grid=grid, values=vals.reshape(grid.shape).copy())
    if not np.isclose(field.mean(), mean, rtol=0, atol=1e-12 * (1 + abs(mean))):
        raise ValueError("snapshot mean does not match payload")
    return field, time


def write_snapshot(f: ScalarField, time: float, path: str | Path) -> None:
    Path(path).write_bytes(snapshot_bytes(f, time))


def read_snapshot(path: str | Path) -> tuple[ScalarField, float]:
    return parse_snapshot(Path(path).read_bytes())


def write_outputs(
    records: list[DiagnosticsRecord],
    snapshots: list[tuple[str, ScalarField, float]],
    out_dir: str | Path,
    extra_texts: dict[str, str] | None = None,
) -> Path:
    """Write the CSV, named snapshots, and optional text reports into
    out_dir, then a manifest listing each file with its sha256. Overwrites
    idempotently: identical inputs give byte-identical trees."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads: dict[str, bytes] = {"series.csv": records_to_csv(records).encode("ascii")}
    for name, f, time in snapshots:
        if not name.endswith(".snap"):
            name += ".snap"
        payloads[name] = snapshot_bytes(f, time)
    for name, text in (extra_texts or {}).items():
        payloads[name] = text.encode("utf-8")
    manifest_lines = []
    for name in sorted(payloads):
        blob = payloads[name]
        try:
            (out / name).write_bytes(blob)
        except OSError as exc:
            raise OSError(f"cannot write {out / name}: {exc}") from exc
        manifest_lines.append(f"{hashlib.sha256(blob).hexdigest()}  {name}")
    (out / "MANIFEST.txt").write_bytes(("\n".join(manifest_lines) + "\n").encode("ascii"))
    return out
