from .buffer import (
    BufferEntry,
    MemoryBuffer,
    SubjectBalancedRetriever,
    budget_from_fraction,
    random_retrieve,
    reservoir_update,
    subject_balanced_retrieve,
    subject_restricted_update,
)
from .selection import (
    clops_select,
    clops_update,
    fasticarl_select,
    fasticarl_update,
    herding_select,
    herding_update,
)
from .aser import aser_retrieve, knn_shapley

__all__ = [
    "BufferEntry",
    "MemoryBuffer",
    "SubjectBalancedRetriever",
    "aser_retrieve",
    "budget_from_fraction",
    "clops_select",
    "clops_update",
    "fasticarl_select",
    "fasticarl_update",
    "herding_select",
    "herding_update",
    "knn_shapley",
    "random_retrieve",
    "reservoir_update",
    "subject_balanced_retrieve",
    "subject_restricted_update",
]
