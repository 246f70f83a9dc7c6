"""CPE 2.3 formatted-string names.

A name is eleven fields after the `cpe:2.3` prefix; `*` means any value
and `-` means not applicable.  Parsing honours backslash escapes so that
formatting a parsed name reproduces the input byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnparsableCpe

FIELD_NAMES = (
    "part",
    "vendor",
    "product",
    "version",
    "update",
    "edition",
    "language",
    "sw_edition",
    "target_sw",
    "target_hw",
    "other",
)


@dataclass(frozen=True)
class CpeName:
    part: str = "*"
    vendor: str = "*"
    product: str = "*"
    version: str = "*"
    update: str = "*"
    edition: str = "*"
    language: str = "*"
    sw_edition: str = "*"
    target_sw: str = "*"
    target_hw: str = "*"
    other: str = "*"

    @classmethod
    def parse(cls, text: str) -> "CpeName":
        fields = _split_unescaped(text.strip())
        if len(fields) != 13 or fields[0] != "cpe" or fields[1] != "2.3":
            raise UnparsableCpe(f"not a CPE 2.3 formatted string: {text!r}")
        return cls(*fields[2:])

    def format(self) -> str:
        return "cpe:2.3:" + ":".join(getattr(self, f) for f in FIELD_NAMES)

    def __str__(self) -> str:
        return self.format()


def _split_unescaped(text: str) -> list[str]:
    fields = []
    buf = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            buf.append(ch)
            buf.append(text[i + 1])
            i += 2
            continue
        if ch == ":":
            fields.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    fields.append("".join(buf))
    return fields
