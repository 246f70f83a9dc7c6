"""Reusable attack-pattern fragments and the built-in catalog.

A fragment bridges abstract attack events and concrete attack trees.  It
matches when (a) its context pattern binds against the dataflow and
deployment models, with `$e` fixed to the attack event's referenced
element, and (b) the impact it provides meets the event's requirement.
Its body is a tree template whose labels and references may use pattern
variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..cia import CiaLevel, CiaTriple

_INTERPOLATION = re.compile(r"\$\{\$([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_]+)\}")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ValueSet:
    values: tuple[str, ...]


@dataclass(frozen=True)
class PatternClause:
    predicate: str
    args: tuple


# predicate name -> argument shapes; V variable, C constant/string,
# S constant or value set, ? optional trailing constant
CLAUSE_VOCABULARY = {
    "refKind": "VC",
    "writes": "VV",
    "reads": "VV",
    "channelProperty": "VCS",
    "executesOn": "VV",
    "dependsOn": "VV?",
    "hasType": "VC",
    "hasProperty": "VCC",
    "maps": "VV",
}


@dataclass(frozen=True)
class Fragment:
    name: str
    pattern: tuple[PatternClause, ...]
    provides_cia: CiaTriple
    body: "TreeModel"  # kind FRAGMENT_BODY
    capec_ref: str | None = None

    def pattern_variables(self) -> set[str]:
        out = {"e"}
        for clause in self.pattern:
            for arg in clause.args:
                if isinstance(arg, Var):
                    out.add(arg.name)
        return out

    def body_variables(self) -> set[str]:
        out = set()
        for node in self.body.nodes.values():
            if node.ref_var is not None:
                out.add(node.ref_var)
            for match in _INTERPOLATION.finditer(node.label):
                out.add(match.group(1))
        return out

    def check(self) -> str | None:
        """Returns a description of the first defect, or None when well-formed."""
        for clause in self.pattern:
            shape = CLAUSE_VOCABULARY.get(clause.predicate)
            if shape is None:
                return f"unknown pattern predicate {clause.predicate!r}"
            mandatory = shape.rstrip("?")
            optional = len(shape) - len(mandatory)
            if not len(mandatory) <= len(clause.args) <= len(mandatory) + optional:
                return (
                    f"{clause.predicate} takes {len(mandatory)} arguments, "
                    f"got {len(clause.args)}"
                )
            for position, arg in enumerate(clause.args):
                expected = mandatory[position] if position < len(mandatory) else "C"
                if expected == "V" and not isinstance(arg, Var):
                    return f"{clause.predicate}: argument {position + 1} must be a variable"
                if expected == "C" and not isinstance(arg, str):
                    return f"{clause.predicate}: argument {position + 1} must be a constant"
                if expected == "S" and not isinstance(arg, (str, ValueSet)):
                    return (
                        f"{clause.predicate}: argument {position + 1} must be a "
                        "constant or a value set"
                    )
        unbound = self.body_variables() - self.pattern_variables()
        if unbound:
            names = ", ".join(sorted(unbound))
            return f"body uses variables not bound by the pattern: {names}"
        if CiaLevel.ANY in (
            self.provides_cia.confidentiality,
            self.provides_cia.integrity,
            self.provides_cia.availability,
        ):
            return "provided impact must not contain *"
        return None


# The built-in catalog.  F1 and F2 follow CAPEC-94 (adversary in the middle)
# and the corrupted-sender pattern; F3-F5 cover host compromise, dependency
# compromise and transport flooding.
_BUILTIN_SOURCES = [
    """
fragment "aitm-on-network-channel" {
  capec CAPEC-94
  pattern {
    refKind($e, CHANNEL);
    channelProperty($e, protocol, {"TCP/IP", "UDP"});
  }
  provides cia=(H,L,L)
  body {
    SAND "Adversary in the middle on ${$e.name}" {
      step "Position in communication path"
      step "Intercept and read traffic on ${$e.name}"
    }
  }
}
""",
    """
fragment "corrupted-sender-corrupts-channel" {
  pattern {
    refKind($e, CHANNEL);
    writes($s, $e);
  }
  provides cia=(N,H,N)
  body {
    attack "Sender is corrupted" ref=$s cia=(L,N,N)
  }
}
""",
    """
fragment "compromised-host-corrupts-component" {
  pattern {
    refKind($e, COMPONENT);
    maps($x, $e);
    executesOn($x, $h);
  }
  provides cia=(H,H,H)
  body {
    attack "Host ${$h.name} is compromised" ref=$h
  }
}
""",
    # Availability is LOW here: a quietly tampered dependency keeps the
    # component running, so it cannot stand in for events that demand a
    # denial-of-service effect.
    """
fragment "compromised-dependency-corrupts-component" {
  pattern {
    refKind($e, COMPONENT);
    maps($x, $e);
    dependsOn($x, $d, transitive);
  }
  provides cia=(N,H,L)
  body {
    attack "Dependency ${$d.name} is compromised" ref=$d cia=(*,N,*)
  }
}
""",
    """
fragment "network-flooding-denies-channel" {
  pattern {
    refKind($e, CHANNEL);
    channelProperty($e, protocol, {"TCP/IP", "UDP"});
  }
  provides cia=(N,N,H)
  body {
    step "Flood ${$e.name} transport"
  }
}
""",
]

_builtin_cache: list[Fragment] | None = None


def builtin_catalog() -> list[Fragment]:
    """The five built-in fragments, parsed once from their textual form."""
    global _builtin_cache
    if _builtin_cache is None:
        from ..io.tree_dsl import parse_tree_dsl

        _builtin_cache = [parse_tree_dsl(src) for src in _BUILTIN_SOURCES]
    return list(_builtin_cache)
