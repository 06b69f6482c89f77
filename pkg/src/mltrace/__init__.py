"""mltrace: tabular sequential graphs for multi-bank money-laundering cases.

Accounts become columns ordered by first transaction, banks become rows,
and three grouping scenarios collapse low-signal accounts into meta-nodes.
"""

from .grouping import (
    GroupingConfig,
    GroupingResult,
    MetaNode,
    ReductionReport,
    Scenario,
    expand_metas,
    group_case,
    reduction_report,
)
from .layout import LayoutConfig, LayoutModel, build_layout, layout_to_dict
from .model import (
    Account,
    Bank,
    CaseNetwork,
    NetworkMaxima,
    Role,
    Transaction,
    compute_maxima,
    validate_case,
)
from .svgrender import Theme, render_svg

__version__ = "0.1.0"

__all__ = [
    "Account",
    "Bank",
    "CaseNetwork",
    "GroupingConfig",
    "GroupingResult",
    "LayoutConfig",
    "LayoutModel",
    "MetaNode",
    "NetworkMaxima",
    "ReductionReport",
    "Role",
    "Scenario",
    "Theme",
    "Transaction",
    "build_layout",
    "compute_maxima",
    "expand_metas",
    "group_case",
    "layout_to_dict",
    "reduction_report",
    "render_svg",
    "validate_case",
    "__version__",
]
