"""Experiment configuration, config hashing, and the JSON-lines result log.

Records are fully deterministic: rerunning a command with the same config
reproduces them bit for bit, so the log doubles as a reproducibility ledger.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
from dataclasses import dataclass

from .errors import BadConfig

SCHEMA_VERSION = 1
ARTIFACT_VERSION = "0.1.0"
LOG_DIR_ENV = "PERMLAB_LOG_DIR"
_LOG_BASENAME = "permlab-log"


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one CLI experiment; round-trips losslessly through
    JSON and rejects unknown fields on the way in."""

    command: str
    q: int | None = None
    weights: tuple[float, ...] | None = None
    n: int | None = None
    s: int | None = None
    ell: int | None = None
    n_samples: int | None = None
    seed: int | None = None
    workers: int = 1
    stat: str | None = None
    value: int | None = None
    claims: tuple[str, ...] | None = None
    final_size: int | None = None
    delta: float | None = None
    runs: int | None = None
    s_max: int | None = None
    tol: float | None = None
    ladder: int | None = None

    def to_json(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_json(cls, obj) -> "ExperimentConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise BadConfig(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(obj)
        for key in ("weights", "claims"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def make_record(kind: str, config: ExperimentConfig, results: dict) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "version": ARTIFACT_VERSION,
        "kind": kind,
        "command": config.command,
        "config": config.to_json(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "workers": config.workers,
        "results": results,
    }


def _flatten(prefix: str, obj, out: dict):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, (list, tuple)):
        out[prefix] = json.dumps(obj)
    else:
        out[prefix] = obj


def records_to_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def records_to_csv(records: list[dict]) -> str:
    rows = []
    keys: list[str] = []
    for rec in records:
        flat: dict = {}
        _flatten("", rec, flat)
        rows.append(flat)
        for k in flat:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def default_log_path() -> str | None:
    log_dir = os.environ.get(LOG_DIR_ENV)
    if not log_dir:
        return None
    return os.path.join(log_dir, f"{_LOG_BASENAME}.jsonl")


def write_records(records: list[dict], out_path: str | None, fmt: str = "json") -> str | None:
    """Append records to out_path (or the PERMLAB_LOG_DIR default); returns
    the path written, or None when no sink is configured."""
    path = out_path or default_log_path()
    if path is None:
        return None
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    if fmt == "csv":
        header_needed = not os.path.exists(path) or os.path.getsize(path) == 0
        text = records_to_csv(records)
        if not header_needed:
            text = text.split("\n", 1)[1]
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(text)
    else:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(records_to_jsonl(records))
    return path
