"""Packing containers and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import FormatError

__all__ = ["KttCopy", "KttPacking", "copy_is_valid"]

TAGS = ("K", "K_1", "K_2", "K_3", "blow-up-tile", "L")


@dataclass(frozen=True)
class KttCopy:
    """A K_{t,t}: every vertex of ``side_a`` is adjacent to every vertex of ``side_b``."""

    side_a: tuple[int, ...]
    side_b: tuple[int, ...]
    tag: str = "K"

    def __post_init__(self):
        object.__setattr__(self, "side_a", tuple(sorted(self.side_a)))
        object.__setattr__(self, "side_b", tuple(sorted(self.side_b)))

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.side_a + self.side_b

    def edges(self) -> list[tuple[int, int]]:
        return [(min(a, b), max(a, b)) for a in self.side_a for b in self.side_b]

    def to_json(self) -> dict:
        return {"A": list(self.side_a), "B": list(self.side_b), "tag": self.tag}

    @classmethod
    def from_json(cls, data: dict) -> "KttCopy":
        try:
            return cls(tuple(data["A"]), tuple(data["B"]), data.get("tag", "K"))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad copy record: {exc}") from None


def copy_is_valid(g, copy: KttCopy, t: int) -> bool:
    if len(copy.side_a) != t or len(copy.side_b) != t:
        return False
    if len(set(copy.vertices)) != 2 * t:
        return False
    return all(g.has_edge(a, b) for a, b in copy.edges())


@dataclass
class KttPacking:
    """Vertex-disjoint copies; ``meta`` holds run details such as the leftover set."""

    t: int
    copies: list[KttCopy] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def covered(self) -> set[int]:
        return {v for c in self.copies for v in c.vertices}

    def extend(self, copies: Iterable[KttCopy]) -> None:
        self.copies.extend(copies)

    def is_disjoint(self) -> bool:
        seen = [v for c in self.copies for v in c.vertices]
        return len(seen) == len(set(seen))

    def to_json(self) -> dict:
        return {"t": self.t, "copies": [c.to_json() for c in self.copies]}

    @classmethod
    def from_json(cls, data: dict) -> "KttPacking":
        try:
            return cls(int(data["t"]), [KttCopy.from_json(c) for c in data["copies"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad packing record: {exc}") from None
