"""Situational fuzzy control: knowledge bases, inference, dialog and simulation."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Sequence

from ._core import KnowledgeBase, Policy, SitfuzzError, _Service, possibility
from . import _core

__all__ = [
    "KnowledgeBase",
    "Policy",
    "Service",
    "SitfuzzError",
    "infer",
    "load_kb",
    "parse",
    "possibility",
    "validate",
]

Premise = str | float | Sequence[float]


def _text(source: str | os.PathLike[str]) -> str:
    if isinstance(source, str) and source.lstrip().startswith("{"):
        return source
    return Path(source).read_text(encoding="utf-8")


def load_kb(source: str | os.PathLike[str]) -> KnowledgeBase:
    """Load and validate a KB from a path or a JSON document string."""
    return _core._load_kb_text(_text(source))


def validate(source: str | os.PathLike[str]) -> dict[str, Any]:
    """Validation report without raising on integrity problems."""
    return json.loads(_core._validate_text(_text(source)))


def infer(kb: KnowledgeBase, premises: Mapping[str, Premise], level: str | None = None) -> dict[str, Any]:
    """Premises map a variable to a term label, a crisp value or a membership list."""
    return json.loads(kb._infer(json.dumps(dict(premises)), level))


def parse(kb: KnowledgeBase, utterance: str, language: str = "en") -> dict[str, Any]:
    return json.loads(kb._parse(utterance, language))


def _policy(name: str | None) -> Policy | None:
    return None if name is None else {"wisdom": Policy.WISDOM, "intuition": Policy.INTUITION}[name]


class Service:
    """Dialog sessions over registered knowledge bases."""

    def __init__(self, log_dir: str | os.PathLike[str] | None = None) -> None:
        self._svc = _Service(Path(log_dir) if log_dir is not None else None)

    def load_kb_dir(self, directory: str | os.PathLike[str]) -> list[str]:
        return self._svc.load_kb_dir(Path(directory))

    def put_kb(self, document: str | os.PathLike[str], kb_id: str | None = None) -> str:
        return self._svc.put_kb(_text(document), kb_id)

    def kb_ids(self) -> list[str]:
        return self._svc.kb_ids()

    def create_session(self, kb: str, language: str = "en", policy: str = "wisdom", theta: float = 0.5,
                       seed: int = 0, disturbance: Mapping[str, tuple[float, float]] | None = None) -> str:
        config = {"kb": kb, "language": language, "policy": policy, "theta": theta, "seed": seed,
                  "disturbance": {k: list(v) for k, v in (disturbance or {}).items()}}
        return self._svc.create_session(json.dumps(config))

    def turn(self, session: str, utterance: str) -> dict[str, Any]:
        return json.loads(self._svc.turn(session, utterance))

    def state(self, session: str) -> dict[str, Any]:
        return json.loads(self._svc.state(session))

    def explanation(self, session: str, decision_id: str) -> dict[str, Any]:
        return json.loads(self._svc.explanation(session, decision_id))

    def configure(self, session: str, policy: str | None = None, theta: float | None = None) -> None:
        self._svc.configure(session, _policy(policy), theta)

    def ticks(self, session: str, steps: int) -> list[dict[str, Any]]:
        return [json.loads(r) for r in self._svc.ticks(session, steps)]

    def replay(self, log: str | os.PathLike[str]) -> tuple[str, int, list[int]]:
        return self._svc.replay(Path(log))

    def restore(self) -> list[str]:
        return self._svc.restore()
