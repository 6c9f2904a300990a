"""Bellwether discovery and transfer-learning baselines for software analytics."""

__version__ = "0.1.0"

from .data import (  # noqa: F401
    Community,
    ProjectDataset,
    TaskKind,
    load_csv,
    load_manifest,
    make_community,
    order_versions,
)
from .forest import (  # noqa: F401
    DirectStrategy,
    Forest,
    ForestParams,
    TransferStrategy,
    feature_importance,
    make_strategy,
    rebalance,
    register_strategy,
    train_forest,
)
from .metrics import (  # noqa: F401
    ConfusionMatrix,
    accuracy,
    confusion,
    g_score,
    mar,
    pd_pf,
    precision,
    sa,
)
from .pipeline import (  # noqa: F401
    BellwetherReport,
    MonitorStatus,
    PairEvaluation,
    WTL,
    compare_within_vs_bellwether,
    discover,
    evaluate_pair,
    incremental_sufficiency,
    monitor,
    source_instability_report,
    transfer,
    win_tie_loss,
)
from .stats import (  # noqa: F401
    RankedGroups,
    SampleSet,
    TestConfig,
    a12,
    bootstrap_test,
    expected_delta,
    scott_knott,
)
