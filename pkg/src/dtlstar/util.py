"""Shared helpers: bitmask world sets and check verdicts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Verdict:
    """Boolean check result with an optional failure witness.

    Truthiness follows ``ok``; ``reason`` and ``witness`` describe the first
    violation found when the check fails.
    """

    ok: bool
    reason: str = ""
    witness: Any = None

    def __bool__(self) -> bool:
        return self.ok


OK = Verdict(True)


def fail(reason: str, witness: Any = None) -> Verdict:
    return Verdict(False, reason, witness)
