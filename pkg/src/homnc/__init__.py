"""Exact solvers for homogeneous network caching (HomNC)."""

__version__ = "0.1.0"

from homnc.errors import EngineLimitError, InstanceError
from homnc.model import (
    Allocation,
    Cache,
    Instance,
    ScaledInstance,
    User,
    allocation_value,
    check_feasible,
    clear_denominators,
    parse_instance,
    serialize_instance,
)

__all__ = [
    "Allocation",
    "Cache",
    "EngineLimitError",
    "Instance",
    "InstanceError",
    "ScaledInstance",
    "User",
    "allocation_value",
    "check_feasible",
    "clear_denominators",
    "parse_instance",
    "serialize_instance",
]
