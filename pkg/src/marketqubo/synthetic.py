"""Synthetic price panels with planted cluster structure."""
from __future__ import annotations

import numpy as np

from .ingest import PricePanel


def business_days(first_year: int, last_year: int) -> np.ndarray:
    start = np.datetime64(f"{first_year}-01-01", "D")
    stop = np.datetime64(f"{last_year + 1}-01-01", "D")
    days = np.arange(start, stop, dtype="datetime64[D]")
    return days[np.is_busday(days)]


def factor_prices(
    n_assets: int = 60,
    n_clusters: int = 6,
    years: tuple[int, int] = (2015, 2016),
    seed: int = 0,
    market_vol: float = 0.008,
    cluster_vol: float = 0.008,
    idio_vol: float = 0.004,
    tickers: list[str] | None = None,
) -> tuple[PricePanel, np.ndarray]:
    """Prices driven by a market factor plus one latent factor per cluster.

    Asset ``i`` belongs to cluster ``i % n_clusters`` and has daily log return
    ``b_i * market + cluster_factor + noise`` with ``b_i`` drawn around 1.

    Returns the panel and the cluster label of each asset.
    """
    rng = np.random.default_rng(seed)
    dates = business_days(*years)
    T = len(dates) - 1
    labels = np.arange(n_assets) % n_clusters
    market = rng.normal(0.0003, market_vol, T)
    factors = rng.normal(0.0, cluster_vol, (n_clusters, T))
    betas = rng.uniform(0.7, 1.3, n_assets)
    noise = rng.normal(0.0, idio_vol, (n_assets, T))
    returns = betas[:, None] * market + factors[labels] + noise
    start = rng.uniform(20, 200, n_assets)
    log_prices = np.log(start)[:, None] + np.concatenate([np.zeros((n_assets, 1)), np.cumsum(returns, axis=1)], axis=1)
    if tickers is None:
        tickers = [f"S{i:03d}" for i in range(n_assets)]
    return PricePanel(tuple(tickers), dates, np.exp(log_prices)), labels


def driver_prices(
    n_drivers: int = 10,
    copies_per_driver: int = 5,
    years: tuple[int, int] = (2015, 2016),
    seed: int = 0,
    driver_vol: float = 0.012,
    copy_noise: float = 0.004,
) -> tuple[PricePanel, np.ndarray]:
    """``n_drivers`` independent assets, each followed by noisy copies of itself.

    Returns the panel and, per asset, the index of the driver it follows.
    """
    rng = np.random.default_rng(seed)
    dates = business_days(*years)
    T = len(dates) - 1
    drivers = rng.normal(0.0002, driver_vol, (n_drivers, T))
    owner = np.repeat(np.arange(n_drivers), copies_per_driver + 1)
    returns = drivers[owner].copy()
    is_copy = np.tile(np.r_[False, np.ones(copies_per_driver, bool)], n_drivers)
    returns[is_copy] += rng.normal(0.0, copy_noise, (int(is_copy.sum()), T))
    log_prices = np.log(100.0) + np.concatenate([np.zeros((len(owner), 1)), np.cumsum(returns, axis=1)], axis=1)
    tickers = [f"D{d:02d}{'' if not c else f'C{c}'}" for d in range(n_drivers) for c in range(copies_per_driver + 1)]
    return PricePanel(tuple(tickers), dates, np.exp(log_prices)), owner


def bundled_prices_path():
    """Path of the shipped 12-asset, three-cluster, 2015-2016 long-format price CSV."""
    from importlib.resources import files

    return files("marketqubo") / "data" / "synthetic_prices.csv"
