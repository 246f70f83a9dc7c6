from .fragments import Fragment, PatternClause, ValueSet, Var, builtin_catalog
from .generate import (
    GenerationOptions,
    GenerationReport,
    apply_fragment,
    attach_attack_trees,
    audit_cia,
    copy_fault_tree,
    fragment_phase,
    generate_aft,
)
from .matching import (
    REJECT_CIA,
    REJECT_CONTEXT,
    Binding,
    BoundElement,
    MatchResult,
    at_context_matches,
    match_fragment,
)

__all__ = [
    "Binding",
    "BoundElement",
    "Fragment",
    "GenerationOptions",
    "GenerationReport",
    "MatchResult",
    "PatternClause",
    "REJECT_CIA",
    "REJECT_CONTEXT",
    "ValueSet",
    "Var",
    "apply_fragment",
    "at_context_matches",
    "attach_attack_trees",
    "audit_cia",
    "builtin_catalog",
    "copy_fault_tree",
    "fragment_phase",
    "generate_aft",
    "match_fragment",
]
