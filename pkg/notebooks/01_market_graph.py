# Market graph from daily log returns.
#
# A synthetic universe of 30 stocks in 3 sectors stands in for index
# constituents. Correlations of daily log returns become distances
# d = sqrt(2 (1 - rho)) and then the bounded dissimilarity
# delta = 1 - exp(-d / 2) that the QUBO consumes.

# %%
import numpy as np

from marketqubo import build_market_graph, compute_log_returns, slice_year
from marketqubo.synthetic import factor_prices

prices, sector = factor_prices(n_assets=30, n_clusters=3, years=(2015, 2016), seed=0)
returns = compute_log_returns(prices, policy="drop-asset")
print(returns.n_assets, "assets,", returns.n_dates, "return days")

# %%
# Fit on one calendar year only.
fit = slice_year(returns, 2015)
graph = build_market_graph(fit)
print("fit window:", *graph.fit_window)

# %%
# Same-sector pairs sit much closer than cross-sector pairs.
same = sector[:, None] == sector[None, :]
off_diag = ~np.eye(graph.n, dtype=bool)
for name in ("rho", "dist", "delta"):
    m = getattr(graph, name)
    print(f"{name:>5}: same sector {m[same & off_diag].mean():.3f}  cross sector {m[~same].mean():.3f}")

# %%
# Ranges: d in [0, 2], delta in [0, 1 - 1/e].
print("max d", graph.dist.max(), " max delta", graph.delta.max(), " bound", 1 - np.exp(-1))
