"""File formats shared by the CLI and the library surface.

Line-delimited JSON throughout: one task, record, matrix row, or feature
row per line.  Pool and weight files are single JSON documents.  Every
write is canonical (sorted keys where order is not semantic) so reruns
with identical inputs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .domain import AgentProfile, AuctionRecord, DomainError, ScoringWeights, Task, dumps
from .pricing import PriceAnchor, default_anchor, derive_pool_prices
from .scoring import FeatureRow


class FileFormatError(DomainError):
    """An input file failed to parse or failed schema validation."""


def _read_jsonl(path: str | Path, what: str) -> list[dict]:
    rows = []
    try:
        with Path(path).open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise FileFormatError(f"{path}:{lineno}: bad {what} line: {exc}")
    except OSError as exc:
        raise FileFormatError(f"cannot read {what} file {path}: {exc}")
    return rows


def load_tasks(path: str | Path) -> list[Task]:
    tasks = []
    for row in _read_jsonl(path, "task"):
        try:
            tasks.append(Task.from_dict(row))
        except (KeyError, ValueError) as exc:
            raise FileFormatError(f"{path}: bad task record {row.get('id')!r}: {exc}")
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise FileFormatError(f"{path}: duplicate task ids")
    return tasks


def save_tasks(path: str | Path, tasks: list[Task]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for task in tasks:
            fh.write(dumps(task.to_dict()) + "\n")


@dataclass
class PoolFile:
    profiles: list[AgentProfile]
    anchor: PriceAnchor
    synthetic: dict[str, dict]  # agent id -> synthetic law config, when present
    trace_token_law: dict[str, float] | None = None

    def profile(self, agent_id: str) -> AgentProfile:
        for p in self.profiles:
            if p.id == agent_id:
                return p
        raise DomainError(f"agent {agent_id} not in pool")


def load_pool(path: str | Path) -> PoolFile:
    """Pool config: agents with optional explicit prices, plus the anchor.

    Prices omitted in the file are derived from the anchor by linear
    parameter scaling.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read pool file {path}: {exc}")
    if "agents" not in doc:
        raise FileFormatError(f"{path}: pool file needs an 'agents' list")
    anchor = PriceAnchor.from_dict(doc["anchor"]) if "anchor" in doc else default_anchor()
    prices = derive_pool_prices(doc["agents"], anchor)
    profiles = []
    synthetic = {}
    for entry in doc["agents"]:
        try:
            profiles.append(
                AgentProfile(
                    id=entry["id"],
                    params=int(entry["params"]),
                    price_per_mtok=prices[entry["id"]],
                    roles=frozenset(entry.get("roles") or ("bidder", "judge", "executor")),
                    endpoint=entry.get("endpoint"),
                )
            )
        except (KeyError, ValueError) as exc:
            raise FileFormatError(f"{path}: bad agent entry {entry.get('id')!r}: {exc}")
        if "synthetic" in entry:
            synthetic[entry["id"]] = entry["synthetic"]
    trace_law = doc.get("trace_token_law")
    if trace_law is not None:
        trace_law = {k: float(v) for k, v in trace_law.items()}
    return PoolFile(profiles=profiles, anchor=anchor, synthetic=synthetic, trace_token_law=trace_law)


def load_weights(path: str | Path) -> ScoringWeights:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScoringWeights.from_dict(doc)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise FileFormatError(f"cannot read weights file {path}: {exc}")


def save_weights(path: str | Path, weights: ScoringWeights) -> None:
    Path(path).write_text(json.dumps(weights.to_dict(), indent=2, sort_keys=True) + "\n")


def save_transcript(path: str | Path, records: list[AuctionRecord]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps(record.to_dict()) + "\n")


def load_transcript(path: str | Path) -> list[AuctionRecord]:
    records = []
    for row in _read_jsonl(path, "transcript"):
        try:
            records.append(AuctionRecord.from_dict(row))
        except (KeyError, ValueError) as exc:
            raise FileFormatError(f"{path}: bad transcript record: {exc}")
    return records


def save_features(path: str | Path, rows: list[tuple[str, FeatureRow]]) -> None:
    """One record per (task, agent): the features scoring consumes."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for task_id, row in rows:
            doc = {"task_id": task_id}
            doc.update(row.to_dict())
            fh.write(dumps(doc) + "\n")


def load_features(path: str | Path) -> dict[tuple[str, str], FeatureRow]:
    rows: dict[tuple[str, str], FeatureRow] = {}
    for doc in _read_jsonl(path, "feature"):
        try:
            task_id = doc.pop("task_id")
            row = FeatureRow.from_dict(doc)
        except (KeyError, ValueError) as exc:
            raise FileFormatError(f"{path}: bad feature record: {exc}")
        rows[(task_id, row.agent_id)] = row
    return rows


def save_matrix(path: str | Path, matrix: list[dict]) -> None:
    """All-agents evaluation rows: correctness/tokens/spend per agent."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in matrix:
            fh.write(dumps(row) + "\n")


def load_matrix(path: str | Path) -> list[dict]:
    rows = _read_jsonl(path, "matrix")
    for row in rows:
        if "task_id" not in row or "agents" not in row:
            raise FileFormatError(f"{path}: matrix rows need task_id and agents")
    return rows


def correctness_from_matrix(matrix: list[dict]) -> dict[str, dict[str, bool]]:
    return {
        row["task_id"]: {a: bool(v["correct"]) for a, v in row["agents"].items()}
        for row in matrix
    }


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
