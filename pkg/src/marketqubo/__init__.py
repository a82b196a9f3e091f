"""Index tracking by K-medoid QUBO selection on a correlation market graph."""

__version__ = "0.1.0"

from .backtest import (
    TrackingReport,
    beta_regression,
    index_returns,
    portfolio_returns,
    run_annual_backtest,
    tracking_error,
)
from .ingest import PricePanel, ReturnsPanel, compute_log_returns, load_prices, slice_year
from .market_graph import (
    MarketGraph,
    build_market_graph,
    distance_from_correlation,
    pearson_correlation,
    robust_delta,
)
from .qubo import (
    QuboProblem,
    Selection,
    build_kmedoid_qubo,
    cardinality_penalty_decomposition,
    delta_energy,
    energy,
)
from .solver import AnnealConfig, SolveResult, repair_cardinality, solve_anneal, solve_exhaustive
