"""Run persistence: JSON documents with an embedded manifest, and scan CSVs."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .errors import ParseError, ValidationError
from .gates import GateSpec, TargetEmbedding
from .inference import TrainRun
from .linalg import matrix_from_json, matrix_to_json, unitarity_defect
from .rnn import SolveResult

FORMAT = "qudit-reservoir-run"
TIMESTAMP_KEYS = ("started_at", "finished_at")
CSV_HEADER = ("m", "seed", "metric", "converged", "wall_time_s")


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def make_manifest(command: str, config: dict, seed: Optional[int], started_at: str, outputs=(), inputs=()) -> dict:
    return {
        "command": command,
        "config": config,
        "version": __version__,
        "seed": seed,
        "started_at": started_at,
        "finished_at": now(),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }


def embedding_to_json(emb: TargetEmbedding) -> dict:
    return {
        "gate": emb.gate.name,
        "gate_matrix": matrix_to_json(emb.gate.matrix),
        "m": emb.m,
        "mode": emb.mode,
        "target": matrix_to_json(emb.target),
        "complement": None if emb.complement is None else matrix_to_json(emb.complement),
    }


def embedding_from_json(obj: dict) -> TargetEmbedding:
    try:
        gate = GateSpec(obj["gate"], matrix_from_json(obj["gate_matrix"], "embedding.gate_matrix"))
        comp = obj.get("complement")
        return TargetEmbedding(
            gate,
            int(obj["m"]),
            obj["mode"],
            matrix_from_json(obj["target"], "embedding.target"),
            None if comp is None else matrix_from_json(comp, "embedding.complement"),
        )
    except KeyError as exc:
        raise ParseError(f"embedding: missing field {exc.args[0]!r}", f"embedding.{exc.args[0]}") from exc


def solve_result_to_json(res: SolveResult) -> dict:
    return {
        "solution": matrix_to_json(res.solution),
        "error_history": [[t, e] for t, e in res.error_history],
        "converged": res.converged,
        "final_error": res.final_error,
        "unitarity_defect": res.unitarity_defect,
        "steps": res.steps,
    }


def solve_result_from_json(obj: dict) -> SolveResult:
    try:
        return SolveResult(
            solution=matrix_from_json(obj["solution"], "result.solution"),
            error_history=[(float(t), float(e)) for t, e in obj["error_history"]],
            converged=bool(obj["converged"]),
            final_error=float(obj["final_error"]),
            unitarity_defect=float(obj["unitarity_defect"]),
            steps=int(obj.get("steps", 0)),
        )
    except KeyError as exc:
        raise ParseError(f"result: missing field {exc.args[0]!r}", f"result.{exc.args[0]}") from exc


def train_run_to_json(run: TrainRun) -> dict:
    return {
        "weights": matrix_to_json(run.weights),
        "epochs_used": run.epochs_used,
        "train_history": list(run.train_history),
        "valid_history": list(run.valid_history),
        "converged": run.converged,
    }


def train_run_from_json(obj: dict) -> TrainRun:
    try:
        return TrainRun(
            weights=matrix_from_json(obj["weights"], "result.weights"),
            epochs_used=int(obj["epochs_used"]),
            train_history=[float(v) for v in obj["train_history"]],
            valid_history=[float(v) for v in obj["valid_history"]],
            converged=bool(obj["converged"]),
        )
    except KeyError as exc:
        raise ParseError(f"result: missing field {exc.args[0]!r}", f"result.{exc.args[0]}") from exc


def save_run(
    path,
    kind: str,
    result: SolveResult | TrainRun,
    reservoir: np.ndarray,
    embedding: TargetEmbedding,
    manifest: dict,
    extra: Optional[dict] = None,
) -> dict:
    """Write a run document and return it."""
    if isinstance(result, SolveResult):
        payload = solve_result_to_json(result)
    else:
        payload = train_run_to_json(result)
    doc = {
        "format": FORMAT,
        "kind": kind,
        "manifest": manifest,
        "reservoir": matrix_to_json(reservoir),
        "embedding": embedding_to_json(embedding),
        "result": payload,
    }
    if extra:
        doc.update(extra)
    write_json(path, doc)
    return doc


def load_run(path) -> dict:
    """Read a run document back into arrays and result objects.

    Raises :class:`ParseError` for malformed content and
    :class:`ValidationError` when the stored reservoir is not unitary.
    """
    doc = read_json(path)
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError(f"{path}: not a {FORMAT} document", "format")
    for key in ("kind", "reservoir", "embedding", "result"):
        if key not in doc:
            raise ParseError(f"{path}: missing field {key!r}", key)
    reservoir = load_reservoir_obj(doc["reservoir"])
    embedding = embedding_from_json(doc["embedding"])
    if doc["kind"] == "solve-rnn":
        result = solve_result_from_json(doc["result"])
    elif doc["kind"] == "train":
        result = train_run_from_json(doc["result"])
    else:
        raise ParseError(f"{path}: unknown run kind {doc['kind']!r}", "kind")
    return {
        "kind": doc["kind"],
        "manifest": doc.get("manifest", {}),
        "reservoir": reservoir,
        "embedding": embedding,
        "result": result,
        "raw": doc,
    }


def load_reservoir_obj(obj, tol: float = 1e-10) -> np.ndarray:
    u = matrix_from_json(obj, "reservoir")
    if u.shape[0] != u.shape[1]:
        raise ValidationError(f"reservoir must be square, got {u.shape}", "reservoir")
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValidationError(f"reservoir is not unitary (defect {defect:.3g} > {tol:g})", "reservoir")
    return u


def load_matrix_file(path, field: str = "matrix") -> np.ndarray:
    return matrix_from_json(read_json(path), field)


def read_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", "path") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", "json") from exc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def write_json(path, doc) -> None:
    text = dumps(doc)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def content_digest(doc: dict) -> str:
    """SHA-256 of a document with manifest timestamps removed."""
    clean = json.loads(json.dumps(doc))
    manifest = clean.get("manifest")
    if isinstance(manifest, dict):
        for key in TIMESTAMP_KEYS:
            manifest.pop(key, None)
    return hashlib.sha256(json.dumps(clean, sort_keys=True).encode()).hexdigest()


def records_to_csv(records, timing: bool = True) -> str:
    """Scan records as CSV; ``timing=False`` blanks the wall-time column."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.m, r.seed, repr(float(r.metric_value)), int(r.converged), repr(r.wall_time) if timing else ""])
    return buf.getvalue()
