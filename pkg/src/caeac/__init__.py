"""Growing CIM-based topological clustering and a class-incremental classifier."""

from .caea import CAEA, Case
from .caeac import CAEAC, NotFittedError
from .cim import CimVariant, cim, cim_clustering, cim_individual, estimate_bandwidth
from .grouping import AttributeGrouping, group_attributes
from .metrics import accuracy, ari, friedman_nemenyi, nmi

__version__ = "0.1.0"

__all__ = [
    "CAEA",
    "CAEAC",
    "AttributeGrouping",
    "Case",
    "CimVariant",
    "NotFittedError",
    "accuracy",
    "ari",
    "cim",
    "cim_clustering",
    "cim_individual",
    "estimate_bandwidth",
    "friedman_nemenyi",
    "group_attributes",
    "nmi",
]
