"""Python access to the kale C++ core."""

from ._core import (
    ConfigTypeError,
    KaleError,
    MpcaModel,
    NonFiniteError,
    ParseError,
    RngStream,
    SchemaError,
    ShapeError,
    UndefinedMetricError,
    ValueError,
    accuracy,
    cli_main,
    concordance_index,
    default_config,
    lambda_schedule,
    mmd_rbf,
    mpca_fit,
    resolve_config,
    roc_auc,
    run_id,
    run_pipeline,
    select_top_weight,
    select_top_weight_fraction,
    set_seed,
)

__version__ = "0.1.0"
