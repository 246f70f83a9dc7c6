from .build import build_deployment
from .snapshot import Inventory, parse_snapshot

__all__ = ["Inventory", "build_deployment", "parse_snapshot"]
