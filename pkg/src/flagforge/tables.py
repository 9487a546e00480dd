"""Outcome tables: what to do for each observed flag/syndrome bit pattern."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from flagforge.pauli import PauliOperator

IDENTITY = "identity"
CORRECT = "correct"
REJECT = "reject"


@dataclass(frozen=True)
class Action:
    """Response to one observed pattern: do nothing, apply a Pauli, or reject."""

    kind: str
    pauli: Optional[PauliOperator] = None

    def __post_init__(self):
        if self.kind not in (IDENTITY, CORRECT, REJECT):
            raise ValueError(f"bad action kind {self.kind!r}")
        if (self.pauli is not None) != (self.kind == CORRECT):
            raise ValueError("a Pauli is attached exactly to correct actions")

    @classmethod
    def identity(cls) -> "Action":
        return cls(IDENTITY)

    @classmethod
    def reject(cls) -> "Action":
        return cls(REJECT)

    @classmethod
    def correct(cls, p: PauliOperator) -> "Action":
        if p.is_identity():
            return cls(IDENTITY)
        return cls(CORRECT, p)

    def is_identity(self) -> bool:
        return self.kind == IDENTITY

    def is_reject(self) -> bool:
        return self.kind == REJECT

    def is_correct(self) -> bool:
        return self.kind == CORRECT

    def to_string(self) -> str:
        if self.kind == CORRECT:
            return f"correct:{self.pauli.label()}"
        return self.kind

    @classmethod
    def from_string(cls, s: str) -> "Action":
        if s.startswith("correct:"):
            return cls.correct(PauliOperator.from_label(s[len("correct:"):]))
        if s in (IDENTITY, REJECT):
            return cls(s)
        raise ValueError(f"bad action string {s!r}")


def _as_key(bits, width: int) -> str:
    if isinstance(bits, str):
        key = bits
    else:
        key = "".join(str(int(b) & 1) for b in bits)
    if len(key) != width or set(key) - {"0", "1"}:
        raise ValueError(f"key {key!r} is not a {width}-bit string")
    return key


@dataclass
class CorrectionTable:
    """Map from fixed-width outcome bitstrings to Actions.

    Patterns not listed in entries fall through to the default, which lets
    error-detecting tables be written as a handful of accepts over a Reject
    default, and correcting tables as corrections over an Identity default.
    A table with default None has no fallback: lookup returns None for
    unlisted patterns and the verifier treats that as a missing entry.
    """

    key_width: int
    entries: dict = field(default_factory=dict)
    default: Optional[Action] = field(default_factory=Action.identity)

    def __post_init__(self):
        clean = {}
        for key, action in self.entries.items():
            if not isinstance(action, Action):
                raise ValueError(f"entry for {key!r} is not an Action")
            clean[_as_key(key, self.key_width)] = action
        self.entries = clean

    def lookup(self, bits) -> Optional[Action]:
        return self.entries.get(_as_key(bits, self.key_width), self.default)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json_dict(self) -> dict:
        return {
            "key_width": self.key_width,
            "entries": {k: a.to_string() for k, a in sorted(self.entries.items())},
            "default": None if self.default is None else self.default.to_string(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json_dict(cls, d: dict) -> "CorrectionTable":
        entries = {k: Action.from_string(v) for k, v in d["entries"].items()}
        default = d.get("default")
        return cls(
            d["key_width"],
            entries,
            None if default is None else Action.from_string(default),
        )

    @classmethod
    def from_json(cls, text: str) -> "CorrectionTable":
        return cls.from_json_dict(json.loads(text))
