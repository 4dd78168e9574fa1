"""Run manifests and canonical data files.

A run directory holds ``manifest.json`` plus one data file.  Floats in CSV are
written with 17 significant digits and ``\\n`` line endings; JSON is written
with sorted keys and no insignificant whitespace.  Together these make file
digests reproducible across platforms.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from . import __version__
from .errors import IntegrityError, PersistenceError, SchemaVersionError
from .market.dynamics import Trajectory
from .market.experiments import SweepResult
from .stylized_stats import SeriesReport

__all__ = [
    "SCHEMA_VERSION",
    "RunManifest",
    "RunRecord",
    "canonical_json",
    "write_run",
    "read_run",
    "trajectory_csv",
    "sweep_csv",
    "sha256_hex",
]

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"

TRAJECTORY_HEADER = ("t", "price", "log_return", "magnetization", "lambda", "field")
SWEEP_HEADER = ("lambda", "mean_abs_m", "susceptibility", "n_samples")

RunData = Union[Trajectory, SweepResult, SeriesReport, dict]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=True)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRAJECTORY_HEADER) + "\n")
    for row in zip(traj.t, traj.price, traj.log_return, traj.magnetization, traj.lambda_, traj.field):
        buf.write(str(int(row[0])) + "," + ",".join(_fmt(v) for v in row[1:]) + "\n")
    return buf.getvalue()


def sweep_csv(sweep: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(",".join(SWEEP_HEADER) + "\n")
    for lam, a, chi, n in zip(sweep.lambda_, sweep.mean_abs_m, sweep.susceptibility, sweep.n_samples):
        buf.write(f"{_fmt(lam)},{_fmt(a)},{_fmt(chi)},{int(n)}\n")
    return buf.getvalue()


def _parse_csv(text: str, header: tuple[str, ...], path: Path) -> dict[str, list[str]]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or tuple(lines[0].split(",")) != header:
        raise SchemaVersionError(f"{path}: expected CSV header {','.join(header)}")
    cols: dict[str, list[str]] = {h: [] for h in header}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise IntegrityError(f"{path}:{lineno}: expected {len(header)} fields")
        for h, v in zip(header, parts):
            cols[h].append(v)
    return cols


def _trajectory_from_csv(text: str, path: Path) -> Trajectory:
    c = _parse_csv(text, TRAJECTORY_HEADER, path)
    f = lambda k: np.array([float(v) for v in c[k]])  # noqa: E731
    return Trajectory(
        t=np.array([int(v) for v in c["t"]], dtype=np.int64),
        price=f("price"),
        log_return=f("log_return"),
        magnetization=f("magnetization"),
        lambda_=f("lambda"),
        field=f("field"),
    )


def _sweep_from_csv(text: str, path: Path) -> SweepResult:
    c = _parse_csv(text, SWEEP_HEADER, path)
    return SweepResult(
        lambda_=np.array([float(v) for v in c["lambda"]]),
        mean_abs_m=np.array([float(v) for v in c["mean_abs_m"]]),
        susceptibility=np.array([float(v) for v in c["susceptibility"]]),
        n_samples=np.array([int(v) for v in c["n_samples"]], dtype=np.int64),
    )


def _trajectory_json(traj: Trajectory) -> str:
    return canonical_json({
        "t": [int(v) for v in traj.t],
        "price": [float(v) for v in traj.price],
        "log_return": [float(v) for v in traj.log_return],
        "magnetization": [float(v) for v in traj.magnetization],
        "lambda": [float(v) for v in traj.lambda_],
        "field": [float(v) for v in traj.field],
    })


def _sweep_json(sweep: SweepResult) -> str:
    return canonical_json({
        "lambda": [float(v) for v in sweep.lambda_],
        "mean_abs_m": [float(v) for v in sweep.mean_abs_m],
        "susceptibility": [float(v) for v in sweep.susceptibility],
        "n_samples": [int(v) for v in sweep.n_samples],
    })


@dataclass
class RunManifest:
    """What was run, with which parameters, and digests of what it produced.

    ``kind`` names the data type (``trajectory``, ``sweep``, ``report`` or
    ``result``); ``files`` maps file names to SHA-256 digests and is filled in
    by :func:`write_run`.
    """

    kind: str
    config: dict[str, Any]
    seed: int | None = None
    artifact_version: str = __version__
    timestamp: str = ""
    files: dict[str, str] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "artifact_version": self.artifact_version,
            "timestamp": self.timestamp,
            "files": self.files,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunManifest":
        return cls(**d)


@dataclass
class RunRecord:
    manifest: RunManifest
    data: RunData


def _serialize(kind: str, data: RunData, fmt: str) -> tuple[str, str]:
    """Return ``(file name, text)`` for the data payload."""
    if kind == "trajectory":
        return ("trajectory.csv", trajectory_csv(data)) if fmt == "csv" else ("trajectory.json", _trajectory_json(data))
    if kind == "sweep":
        return ("sweep.csv", sweep_csv(data)) if fmt == "csv" else ("sweep.json", _sweep_json(data))
    if kind == "report":
        return "report.json", canonical_json(data.to_dict())
    if kind == "result":
        return "result.json", canonical_json(data)
    raise PersistenceError(f"unknown run kind {kind!r}")


def _infer_kind(data: RunData) -> str:
    if isinstance(data, Trajectory):
        return "trajectory"
    if isinstance(data, SweepResult):
        return "sweep"
    if isinstance(data, SeriesReport):
        return "report"
    if isinstance(data, dict):
        return "result"
    raise PersistenceError(f"cannot serialize {type(data).__name__}")


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_run(manifest: RunManifest, data: RunData, output_dir: str | os.PathLike, *, fmt: str = "csv") -> list[Path]:
    """Write the data file then the manifest; returns both paths.

    Each file goes through a temporary file and an atomic rename.  On failure
    nothing written by this call is left behind.
    """
    if fmt not in ("csv", "json"):
        raise PersistenceError(f"format must be csv or json, got {fmt!r}")
    kind = _infer_kind(data)
    if manifest.kind != kind:
        raise PersistenceError(f"manifest kind {manifest.kind!r} does not match data kind {kind!r}")
    out = Path(output_dir)
    try:
        name, text = _serialize(kind, data, fmt)
    except ValueError as exc:
        raise PersistenceError(f"run data cannot be serialized: {exc}") from exc
    payload = text.encode("ascii")
    manifest.files = {name: sha256_hex(payload)}
    if not manifest.timestamp:
        manifest.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        data_path = out / name
        _atomic_write(data_path, payload)
        written.append(data_path)
        man_path = out / MANIFEST_NAME
        _atomic_write(man_path, canonical_json(manifest.to_dict()).encode("ascii"))
        written.append(man_path)
    except OSError as exc:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        raise PersistenceError(f"cannot write run to {out}: {exc}") from exc
    return written


def read_run(path: str | os.PathLike) -> RunRecord:
    """Load a run directory (or its manifest path) and verify every digest."""
    p = Path(path)
    man_path = p if p.name == MANIFEST_NAME else p / MANIFEST_NAME
    try:
        raw = json.loads(man_path.read_text(encoding="ascii"))
    except OSError as exc:
        raise PersistenceError(f"cannot read {man_path}: {exc}") from exc
    except ValueError as exc:
        raise IntegrityError(f"{man_path}: invalid manifest JSON: {exc}") from exc
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{man_path}: manifest schema version {version} is not supported by this reader (version {SCHEMA_VERSION})"
        )
    manifest = RunManifest.from_dict(raw)
    if len(manifest.files) != 1:
        raise IntegrityError(f"{man_path}: expected exactly one data file, found {sorted(manifest.files)}")
    (name, digest), = manifest.files.items()
    data_path = man_path.parent / name
    try:
        payload = data_path.read_bytes()
    except OSError as exc:
        raise PersistenceError(f"cannot read {data_path}: {exc}") from exc
    if sha256_hex(payload) != digest:
        raise IntegrityError(f"{data_path}: digest mismatch (manifest {digest[:12]}..., file {sha256_hex(payload)[:12]}...)")
    text = payload.decode("ascii")
    if manifest.kind == "trajectory":
        if name.endswith(".csv"):
            data: RunData = _trajectory_from_csv(text, data_path)
        else:
            d = json.loads(text)
            data = Trajectory(
                t=np.array(d["t"], dtype=np.int64), price=np.array(d["price"], dtype=float),
                log_return=np.array(d["log_return"], dtype=float),
                magnetization=np.array(d["magnetization"], dtype=float),
                lambda_=np.array(d["lambda"], dtype=float), field=np.array(d["field"], dtype=float),
            )
    elif manifest.kind == "sweep":
        if name.endswith(".csv"):
            data = _sweep_from_csv(text, data_path)
        else:
            d = json.loads(text)
            data = SweepResult(
                lambda_=np.array(d["lambda"], dtype=float), mean_abs_m=np.array(d["mean_abs_m"], dtype=float),
                susceptibility=np.array(d["susceptibility"], dtype=float),
                n_samples=np.array(d["n_samples"], dtype=np.int64),
            )
    elif manifest.kind == "report":
        data = SeriesReport.from_dict(json.loads(text))
    elif manifest.kind == "result":
        data = json.loads(text)
    else:
        raise SchemaVersionError(f"{man_path}: unknown run kind {manifest.kind!r}")
    return RunRecord(manifest, data)
