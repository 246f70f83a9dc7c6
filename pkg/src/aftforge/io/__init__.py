from .dot import export_dot
from .models_json import dump_dataflow, dump_deployment, parse_dataflow, parse_deployment
from .tree_dsl import parse_tree_dsl, print_fragment_dsl, print_tree_dsl

__all__ = [
    "dump_dataflow",
    "dump_deployment",
    "export_dot",
    "parse_dataflow",
    "parse_deployment",
    "parse_tree_dsl",
    "print_fragment_dsl",
    "print_tree_dsl",
]
