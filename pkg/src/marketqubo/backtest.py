"""Tracking portfolios from exemplars, and their out-of-sample evaluation.

Each evaluation year ``y`` is fitted on calendar year ``y - 1``: market graph,
K-medoid QUBO, annealed selection. The chosen exemplars are then held through
year ``y`` and compared with the index by tracking error (sample std of the
daily return difference) and an OLS regression of portfolio on index returns.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    AlignmentError,
    DataError,
    DegenerateSeriesError,
    InsufficientDataError,
    NoDataForYearError,
    ValidationError,
)
from .ingest import ReturnsPanel, slice_year
from .market_graph import MarketGraph, build_market_graph
from .qubo import build_kmedoid_qubo
from .solver import AnnealConfig, resolve_seed, solve_anneal

log = logging.getLogger(__name__)

WEIGHTINGS = ("equal", "cluster-size")
REPORT_HEADER = ["year", "tracking_error", "beta", "intercept", "t_stat", "n_days", "exemplars"]
SERIES_HEADER = ["date", "r_index", "r_port", "diff"]


@dataclass(frozen=True)
class Regression:
    """OLS fit of ``r_port = alpha + beta * r_index``.

    ``t_stat`` tests ``beta = 0`` and ``t_stat_beta_one`` tests ``beta = 1``.
    When the residuals are exactly zero the standard error is 0 and both
    statistics become ``+/-inf`` (``nan`` when the numerator is also 0).
    """

    alpha: float
    beta: float
    se_beta: float
    t_stat: float
    t_stat_beta_one: float


@dataclass(frozen=True)
class TrackingReport:
    year: int
    exemplars: tuple[str, ...]
    tracking_error: float
    beta: float
    intercept: float
    t_stat: float
    t_stat_beta_one: float
    dates: np.ndarray
    r_index: np.ndarray
    r_port: np.ndarray
    fit_window: tuple[np.datetime64, np.datetime64]
    weights: tuple[float, ...] = ()
    energy: float | None = None
    feasible: bool | None = None
    seed_used: int | None = None

    @property
    def n_days(self) -> int:
        return len(self.dates)


def _ratio(num: float, se: float) -> float:
    if se > 0:
        return num / se
    return float("nan") if num == 0 else float(np.copysign(np.inf, num))


def exemplar_weights(exemplars: Sequence[str], weighting: str = "equal", graph: MarketGraph | None = None) -> np.ndarray:
    """Portfolio weights for ``exemplars``, in the given order.

    ``cluster-size`` weights each exemplar by the share of graph assets whose
    nearest exemplar (by correlation distance) it is; ties go to the exemplar
    with the lower graph index.
    """
    if weighting not in WEIGHTINGS:
        raise ValidationError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")
    k = len(exemplars)
    if k == 0:
        raise ValidationError("empty exemplar list")
    if weighting == "equal":
        return np.full(k, 1.0 / k)
    if graph is None:
        raise ValidationError("cluster-size weighting needs the fit-window market graph")
    lookup = {a: i for i, a in enumerate(graph.assets)}
    missing = [e for e in exemplars if e not in lookup]
    if missing:
        raise AlignmentError(f"exemplars not in market graph: {missing}")
    idx = np.array([lookup[e] for e in exemplars])
    order = np.argsort(idx, kind="stable")
    # argmin over columns sorted by graph index picks the lower-index exemplar on ties
    nearest = np.argmin(graph.dist[:, idx[order]], axis=1)
    counts = np.bincount(nearest, minlength=k)
    weights = np.empty(k)
    weights[order] = counts / graph.n
    return weights


def portfolio_returns(
    panel: ReturnsPanel,
    exemplars: Sequence[str],
    weighting: str = "equal",
    graph: MarketGraph | None = None,
) -> np.ndarray:
    """Daily portfolio log return, approximated as the weighted mean of member log returns."""
    exemplars = list(exemplars)
    try:
        idx = panel.index_of(exemplars)
    except KeyError as exc:
        raise AlignmentError(f"exemplars missing from returns panel: {exc.args[0]}") from None
    w = exemplar_weights(exemplars, weighting, graph)
    return w @ panel.returns[idx]


def index_returns(panel: ReturnsPanel, explicit: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Benchmark returns on ``panel.dates``.

    Without ``explicit`` (a ``(dates, returns)`` pair), the benchmark is the
    equal-weighted mean of every asset in the panel.
    """
    if panel.n_assets == 0 or panel.n_dates == 0:
        raise DataError("empty returns panel")
    if explicit is None:
        return panel.returns.mean(axis=0)
    dates, values = explicit
    dates = np.asarray(dates, dtype="datetime64[D]")
    pos = np.searchsorted(dates, panel.dates)
    pos = np.minimum(pos, len(dates) - 1)
    hit = dates[pos] == panel.dates
    if not hit.all():
        missing = panel.dates[~hit]
        raise AlignmentError(f"index series lacks {len(missing)} panel dates, first {missing[0]}")
    return np.asarray(values, dtype=float)[pos]


def _pair(r_index, r_port, minimum: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(r_index, dtype=float)
    y = np.asarray(r_port, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AlignmentError(f"series shapes differ: {x.shape} vs {y.shape}")
    if len(x) < minimum:
        raise InsufficientDataError(f"need at least {minimum} paired observations, got {len(x)}")
    return x, y


def tracking_error(r_index, r_port) -> float:
    x, y = _pair(r_index, r_port, 2)
    return float(np.std(x - y, ddof=1))


def beta_regression(r_index, r_port) -> Regression:
    x, y = _pair(r_index, r_port, 3)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if not sxx > 0:
        raise DegenerateSeriesError("index returns have zero variance")
    beta = float(xc @ (y - y.mean())) / sxx
    alpha = float(y.mean() - beta * x.mean())
    resid = y - alpha - beta * x
    s2 = float(resid @ resid) / (len(x) - 2)
    se = float(np.sqrt(s2 / sxx))
    return Regression(alpha, beta, se, _ratio(beta, se), _ratio(beta - 1.0, se))


def evaluate(
    year: int,
    eval_panel: ReturnsPanel,
    exemplars: Sequence[str],
    weighting: str = "equal",
    graph: MarketGraph | None = None,
    index: tuple[np.ndarray, np.ndarray] | None = None,
    fit_window=None,
    **extra,
) -> TrackingReport:
    """Metrics for a fixed exemplar set over ``eval_panel``."""
    r_port = portfolio_returns(eval_panel, exemplars, weighting, graph)
    r_idx = index_returns(eval_panel, index)
    reg = beta_regression(r_idx, r_port)
    return TrackingReport(
        year=year,
        exemplars=tuple(exemplars),
        tracking_error=tracking_error(r_idx, r_port),
        beta=reg.beta,
        intercept=reg.alpha,
        t_stat=reg.t_stat,
        t_stat_beta_one=reg.t_stat_beta_one,
        dates=eval_panel.dates,
        r_index=r_idx,
        r_port=r_port,
        fit_window=graph.fit_window if graph is not None else fit_window,
        weights=tuple(float(w) for w in exemplar_weights(exemplars, weighting, graph)),
        **extra,
    )


def select_exemplars(
    fit_panel: ReturnsPanel,
    k: int,
    solver_config: AnnealConfig | None = None,
    gamma: float = 2.0,
    workers: int = 1,
):
    """Fit the market graph on ``fit_panel`` and anneal the K-medoid QUBO.

    Returns ``(graph, exemplar tickers, SolveResult)``.
    """
    graph = build_market_graph(fit_panel)
    problem = build_kmedoid_qubo(graph.delta, k, gamma=gamma)
    result = solve_anneal(problem, solver_config, workers=workers)
    tickers = [graph.assets[i] for i in result.best.exemplars]
    return graph, tickers, result


def run_annual_backtest(
    full_panel: ReturnsPanel,
    years: Sequence[int],
    k: int,
    solver_config: AnnealConfig | None = None,
    weighting: str = "equal",
    index: tuple[np.ndarray, np.ndarray] | None = None,
    gamma: float = 2.0,
    workers: int = 1,
) -> list[TrackingReport]:
    """One :class:`TrackingReport` per year, each fitted on the previous calendar year.

    All years share one solver seed; an unset seed is resolved once up front.
    """
    config = solver_config or AnnealConfig()
    config = dataclasses.replace(config, seed=resolve_seed(config.seed))
    reports = []
    for year in sorted(years):
        try:
            fit = slice_year(full_panel, year - 1)
        except NoDataForYearError:
            raise InsufficientDataError(f"no history in {year - 1} to fit the {year} portfolio") from None
        test = slice_year(full_panel, year)
        assert fit.dates[-1] < test.dates[0], "fit and evaluation windows overlap"
        graph, tickers, result = select_exemplars(fit, k, config, gamma=gamma, workers=workers)
        report = evaluate(
            year, test, tickers, weighting, graph, index,
            energy=result.best_energy, feasible=result.feasible, seed_used=result.seed_used,
        )
        log.info(
            "%d: %d exemplars, tracking error %.6f, beta %.4f, t %.2f",
            year, len(tickers), report.tracking_error, report.beta, report.t_stat,
        )
        reports.append(report)
    return reports


def write_report_csv(reports: Sequence[TrackingReport], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in reports:
            writer.writerow([
                r.year, repr(r.tracking_error), repr(r.beta), repr(r.intercept),
                repr(r.t_stat), r.n_days, ";".join(r.exemplars),
            ])


def write_series_csv(report: TrackingReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for d, ri, rp in zip(report.dates, report.r_index, report.r_port):
            writer.writerow([str(d), repr(float(ri)), repr(float(rp)), repr(float(ri - rp))])


def read_report_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["year"] = int(row["year"])
        row["n_days"] = int(row["n_days"])
        for key in ("tracking_error", "beta", "intercept", "t_stat"):
            row[key] = float(row[key])
        row["exemplars"] = row["exemplars"].split(";") if row["exemplars"] else []
    return rows
