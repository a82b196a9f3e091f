"""Command-line entry point.

Subcommands: ``ingest``, ``graph``, ``solve``, ``backtest``, ``pipeline``,
``plot-data``. Options resolve as built-in defaults, then a JSON ``--config``
file, then explicit flags. Exit codes: 0 success, 1 validation error, 2 data
error, 3 solver error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    WEIGHTINGS,
    evaluate,
    run_annual_backtest,
    write_report_csv,
    write_series_csv,
)
from .errors import ConfigError, MarketQuboError, ValidationError
from .ingest import (
    MISSING_POLICIES,
    compute_log_returns,
    load_index_returns,
    load_prices,
    slice_year,
    write_returns_csv,
)
from .market_graph import build_market_graph, read_matrix_csv, write_matrix_csv
from .qubo import build_kmedoid_qubo, write_qubo_triplets
from .solver import AnnealConfig, resolve_seed, solve_anneal

log = logging.getLogger("marketqubo")

OUTPUT_DIR_ENV = "MARKETQUBO_OUTPUT_DIR"
INCOMPLETE_MARKER = "INCOMPLETE"


@dataclass
class RunConfig:
    prices_path: str | None = None
    years: list[int] = field(default_factory=lambda: [2016, 2017, 2018, 2019])
    k: int = 10
    gamma: float = 2.0
    missing_policy: str = "drop-asset"
    weighting: str = "equal"
    solver: AnnealConfig = field(default_factory=AnnealConfig)
    index_csv: str | None = None
    output_dir: str = "marketqubo-out"
    workers: int = 1

    def validate(self, need_prices: bool = True) -> "RunConfig":
        if not self.years:
            raise ValidationError("years must be non-empty")
        self.years = sorted({int(y) for y in self.years})
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise ValidationError(f"missing_policy must be one of {MISSING_POLICIES}")
        if self.weighting not in WEIGHTINGS:
            raise ValidationError(f"weighting must be one of {WEIGHTINGS}")
        if need_prices and self.prices_path is None:
            raise ValidationError("no prices file given")
        for p in (self.prices_path if need_prices else None, self.index_csv):
            if p is not None and not Path(p).is_file():
                raise ValidationError(f"file not found: {p}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["solver"] = dataclasses.asdict(self.solver)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        solver = d.pop("solver", {}) or {}
        try:
            return cls(solver=AnnealConfig(**solver), **d)
        except TypeError as exc:
            raise ValidationError(f"bad config: {exc}") from None


_SOLVER_FLAGS = {"sweeps": "sweeps", "restarts": "restarts", "seed": "seed", "t_initial": "t_initial", "t_final": "t_final"}
_RUN_FLAGS = {
    "prices": "prices_path", "years": "years", "k": "k", "gamma": "gamma",
    "missing_policy": "missing_policy", "weighting": "weighting",
    "index_csv": "index_csv", "output_dir": "output_dir", "workers": "workers",
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overlaid by ``--config`` file, overlaid by explicit flags."""
    base = RunConfig().to_dict()
    env_out = os.environ.get(OUTPUT_DIR_ENV)
    if env_out:
        base["output_dir"] = env_out
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {args.config} is not valid JSON: {exc}") from None
        solver = {**base["solver"], **loaded.pop("solver", {})}
        base.update(loaded)
        base["solver"] = solver
    for flag, key in _RUN_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            base[key] = value
    for flag, key in _SOLVER_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            base["solver"][key] = value
    if getattr(args, "no_repair", False):
        base["solver"]["repair"] = False
    return RunConfig.from_dict(base)


def _returns(cfg: RunConfig):
    return compute_log_returns(load_prices(cfg.prices_path), cfg.missing_policy)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _versions() -> dict:
    import numba
    return {"marketqubo": __version__, "python": platform.python_version(), "numpy": np.__version__, "numba": numba.__version__}


def cmd_ingest(args) -> int:
    cfg = resolve_config(args).validate()
    panel = _returns(cfg)
    path = _out_dir(cfg) / "returns.csv"
    write_returns_csv(panel, path)
    log.info("wrote %d assets x %d dates to %s", panel.n_assets, panel.n_dates, path)
    return 0


def cmd_graph(args) -> int:
    cfg = resolve_config(args).validate()
    fit = slice_year(_returns(cfg), args.year)
    graph = build_market_graph(fit)
    out = _out_dir(cfg)
    for name in ("rho", "dist", "delta"):
        write_matrix_csv(getattr(graph, name), graph.assets, out / f"{name}.csv")
    log.info("graph on %d assets fitted over %s..%s written to %s", graph.n, *graph.fit_window, out)
    return 0


def _solve_record(result, tickers) -> dict:
    return {
        "exemplars": list(tickers),
        "indices": list(result.best.exemplars),
        "energy": result.best_energy,
        "feasible": result.feasible,
        "raw_feasible": result.raw_feasible,
        "seed_used": result.seed_used,
        "t_initial": result.t_initial,
        "t_final": result.t_final,
        "restart_energies": list(result.restart_energies),
    }


def cmd_solve(args) -> int:
    cfg = resolve_config(args).validate(need_prices=False)
    labels, delta = read_matrix_csv(args.delta)
    problem = build_kmedoid_qubo(delta, cfg.k, gamma=cfg.gamma)
    result = solve_anneal(problem, cfg.solver, workers=cfg.workers)
    tickers = [labels[i] for i in result.best.exemplars]
    out = _out_dir(cfg)
    (out / "exemplars.txt").write_text("".join(f"{t}\n" for t in tickers))
    _write_json(out / "solve.json", _solve_record(result, tickers))
    if args.export_qubo:
        write_qubo_triplets(problem, args.export_qubo)
    print(f"energy {result.best_energy!r} feasible {result.feasible} exemplars {' '.join(tickers)}")
    return 0


def _read_exemplars(path) -> list[str]:
    tickers = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
    if not tickers:
        raise ValidationError(f"no exemplars listed in {path}")
    return tickers


def cmd_backtest(args) -> int:
    cfg = resolve_config(args).validate()
    panel = _returns(cfg)
    exemplars = _read_exemplars(args.exemplars)
    year = args.year if args.year is not None else cfg.years[0]
    test = slice_year(panel, year)
    graph = build_market_graph(slice_year(panel, year - 1)) if cfg.weighting == "cluster-size" else None
    index = load_index_returns(cfg.index_csv) if cfg.index_csv else None
    report = evaluate(year, test, exemplars, cfg.weighting, graph, index)
    out = _out_dir(cfg)
    write_report_csv([report], out / "report.csv")
    write_series_csv(report, out / f"series_{year}.csv")
    print(f"{year}: tracking error {report.tracking_error:.6f} beta {report.beta:.4f} t {report.t_stat:.3f}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = resolve_config(args).validate()
    cfg.solver = dataclasses.replace(cfg.solver, seed=resolve_seed(cfg.solver.seed))
    out = _out_dir(cfg)
    marker = out / INCOMPLETE_MARKER
    marker.unlink(missing_ok=True)
    try:
        panel = _returns(cfg)
        index = load_index_returns(cfg.index_csv) if cfg.index_csv else None
        reports = run_annual_backtest(
            panel, cfg.years, cfg.k, cfg.solver, cfg.weighting, index, gamma=cfg.gamma, workers=cfg.workers
        )
        write_report_csv(reports, out / "report.csv")
        per_year = {}
        for r in reports:
            write_series_csv(r, out / f"series_{r.year}.csv")
            (out / f"exemplars_{r.year}.txt").write_text("".join(f"{t}\n" for t in r.exemplars))
            per_year[str(r.year)] = {
                "fit_window": [str(d) for d in r.fit_window],
                "exemplars": list(r.exemplars),
                "weights": list(r.weights),
                "energy": r.energy,
                "feasible": r.feasible,
                "t_stat_beta_one": r.t_stat_beta_one,
            }
        _write_json(out / "manifest.json", {
            "config": cfg.to_dict(),
            "seed": cfg.solver.seed,
            "n_assets": panel.n_assets,
            "versions": _versions(),
            "years": per_year,
        })
    except BaseException as exc:
        (out / "manifest.json").unlink(missing_ok=True)
        marker.write_text(f"run failed: {exc}\noutputs in this directory are partial\n")
        raise
    for r in reports:
        print(f"{r.year}: tracking error {r.tracking_error:.6f} beta {r.beta:.4f} t {r.t_stat:.3f}")
    return 0


def cmd_plot_data(args) -> int:
    run_dir = Path(args.run_dir)
    if (run_dir / INCOMPLETE_MARKER).exists():
        raise ValidationError(f"{run_dir} holds an incomplete run")
    files = sorted(run_dir.glob("series_*.csv"))
    if not files:
        raise ValidationError(f"no series_<year>.csv files in {run_dir}")
    target = Path(args.out) if args.out else run_dir / "figure_data.csv"
    with target.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "date", "r_index", "r_port", "diff", "cum_index", "cum_port"])
        for path in files:
            year = path.stem.split("_", 1)[1]
            with path.open(newline="") as src:
                rows = list(csv.DictReader(src))
            cum_i = np.cumsum([float(r["r_index"]) for r in rows])
            cum_p = np.cumsum([float(r["r_port"]) for r in rows])
            for row, ci, cp in zip(rows, cum_i, cum_p):
                writer.writerow([year, row["date"], row["r_index"], row["r_port"], row["diff"], repr(float(ci)), repr(float(cp))])
    log.info("wrote %s", target)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./marketqubo-out)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("-q", "--quiet", action="store_true")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prices", help="price CSV (long date,ticker,close or wide date,<tickers>)")
    p.add_argument("--missing-policy", choices=MISSING_POLICIES)


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="number of exemplars")
    p.add_argument("--gamma", type=float, help="cardinality penalty weight")
    p.add_argument("--sweeps", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-initial", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--no-repair", action="store_true", help="skip the cardinality repair step")
    p.add_argument("--workers", type=int, help="threads for annealing restarts (results do not depend on it)")


def _add_eval(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weighting", choices=WEIGHTINGS)
    p.add_argument("--index-csv", help="explicit index returns, header date,return")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marketqubo", description="Index tracking by QUBO K-medoid selection on a market graph.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="prices -> returns.csv")
    _add_common(p), _add_data(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("graph", help="fit-year returns -> rho/dist/delta CSV matrices")
    _add_common(p), _add_data(p)
    p.add_argument("--year", type=int, required=True, help="calendar year to fit the graph on")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("solve", help="delta CSV -> exemplars.txt and solve.json")
    _add_common(p), _add_solver(p)
    p.add_argument("--delta", required=True, help="delta matrix CSV written by 'graph'")
    p.add_argument("--export-qubo", help="also write the QUBO as 'i j value' triplets")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("backtest", help="exemplars + prices -> report.csv for one year")
    _add_common(p), _add_data(p), _add_eval(p)
    p.add_argument("--exemplars", required=True, help="file with one ticker per line")
    p.add_argument("--year", type=int, help="evaluation year")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("pipeline", help="full rolling annual backtest")
    _add_common(p), _add_data(p), _add_solver(p), _add_eval(p)
    p.add_argument("--years", type=int, nargs="+")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("plot-data", help="merge per-year series into one plot-ready CSV")
    p.add_argument("run_dir", help="pipeline output directory")
    p.add_argument("--out", help="target CSV (default <run_dir>/figure_data.csv)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except MarketQuboError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return ConfigError.exit_code if isinstance(exc, ConfigError) else ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
