"""Attack-fault tree generation toolchain.

Combines hand-written fault trees with attack trees mined from a local
vulnerability cache, mediated by dataflow and deployment models of the
analyzed system and a catalog of reusable attack-pattern fragments.
"""

from .cia import ANY_TRIPLE, CiaLevel, CiaTriple, cia_leq, cia_satisfies
from .model import (
    DataflowChannel,
    DataflowComponent,
    DataflowModel,
    DeploymentChannel,
    DeploymentElement,
    DeploymentModel,
    ElementRef,
    ElementType,
    RefKind,
    deployment_closure,
    resolve_ref,
)
from .tree import GateType, NodeKind, TreeKind, TreeModel, TreeNode
from .validate import Diagnostic, validate

__version__ = "0.1.0"

__all__ = [
    "ANY_TRIPLE",
    "CiaLevel",
    "CiaTriple",
    "DataflowChannel",
    "DataflowComponent",
    "DataflowModel",
    "DeploymentChannel",
    "DeploymentElement",
    "DeploymentModel",
    "Diagnostic",
    "ElementRef",
    "ElementType",
    "GateType",
    "NodeKind",
    "RefKind",
    "TreeKind",
    "TreeModel",
    "TreeNode",
    "cia_leq",
    "cia_satisfies",
    "deployment_closure",
    "resolve_ref",
    "validate",
]
