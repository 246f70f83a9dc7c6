"""Impact levels for confidentiality, integrity and availability.

The four levels form a total order ANY < LOW < NEUTRAL < HIGH.  A
requirement is satisfied when the provided impact is the same or higher,
aspect by aspect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class CiaLevel(IntEnum):
    ANY = 0
    LOW = 1
    NEUTRAL = 2
    HIGH = 3

    @classmethod
    def from_letter(cls, letter: str) -> "CiaLevel":
        try:
            return _FROM_LETTER[letter]
        except KeyError:
            raise ValueError(f"not an impact level: {letter!r}") from None

    @property
    def letter(self) -> str:
        return _TO_LETTER[self]


_FROM_LETTER = {
    "*": CiaLevel.ANY,
    "L": CiaLevel.LOW,
    "N": CiaLevel.NEUTRAL,
    "H": CiaLevel.HIGH,
}
_TO_LETTER = {v: k for k, v in _FROM_LETTER.items()}


def cia_leq(a: CiaLevel, b: CiaLevel) -> bool:
    """True iff a precedes or equals b in the order ANY < LOW < NEUTRAL < HIGH."""
    return a <= b


@dataclass(frozen=True)
class CiaTriple:
    confidentiality: CiaLevel = CiaLevel.ANY
    integrity: CiaLevel = CiaLevel.ANY
    availability: CiaLevel = CiaLevel.ANY

    @classmethod
    def of(cls, c: str, i: str, a: str) -> "CiaTriple":
        return cls(CiaLevel.from_letter(c), CiaLevel.from_letter(i), CiaLevel.from_letter(a))

    @classmethod
    def parse(cls, text: str) -> "CiaTriple":
        """Parse the textual form "(C,I,A)" with letters *, L, N, H."""
        body = text.strip()
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three impact levels: {text!r}")
        return cls.of(*parts)

    def format(self) -> str:
        return "({},{},{})".format(
            self.confidentiality.letter, self.integrity.letter, self.availability.letter
        )

    def __str__(self) -> str:
        return self.format()


ANY_TRIPLE = CiaTriple()


def cia_satisfies(requirement: CiaTriple, provided: CiaTriple) -> bool:
    """True iff the provided impact meets or exceeds the requirement in all aspects."""
    return (
        cia_leq(requirement.confidentiality, provided.confidentiality)
        and cia_leq(requirement.integrity, provided.integrity)
        and cia_leq(requirement.availability, provided.availability)
    )
