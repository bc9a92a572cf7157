"""Command-line entry point.

Subcommands: ``diagnose``, ``fit``, ``select``, ``forecast``, ``evaluate``.
Exit status is 0 on success, 1 for usage or configuration errors, 2 for
data errors and 3 for model or estimation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .diagnostics import DEFAULT_MCLEOD_LI_LAGS, adf_test, mcleod_li
from .errors import DataError, LoadGarchError, ModelError
from .estimation import FittedModel, best_candidate, fit, fit_candidates
from .evaluation import compare, format_ranking, ranking_to_dict
from .forecasting import forecast
from .innovations import Family
from .model import ModelSpec
from .series import format_timestamp, log_returns, read_load_csv, reconstruct_levels, split

log = logging.getLogger("loadgarch")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3


class ConfigError(LoadGarchError):
    """Bad flags or an unreadable configuration file."""


@dataclass
class RunConfig:
    command: str
    input_path: Path | None = None
    model_spec_path: Path | None = None
    model_path: Path | None = None
    holdout: int | None = None
    horizon: int = 24
    coverage: float = 0.95
    seed: int = 0
    output_path: Path | None = None
    criterion: str = "bic"
    innovation: str | None = None
    level_correction: bool = False
    lags: int | None = None
    forecast_paths: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError(f"--horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.coverage < 1.0:
            raise ConfigError(f"--coverage must lie in (0, 1), got {self.coverage}")
        if self.holdout is not None and self.holdout < 1:
            raise ConfigError(f"--holdout must be >= 1, got {self.holdout}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loadgarch", description="SARIMA-GARCH load forecasting")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *, spec=False, output_required=False):
        p.add_argument("--input", required=True, type=Path, help="CSV with header timestamp,load")
        p.add_argument("--output", type=Path, required=output_required)
        p.add_argument("--seed", type=int, default=0)
        if spec:
            p.add_argument("--spec", type=Path, help="model spec JSON")
            p.add_argument("--innovation", choices=[f.value for f in Family])
            p.add_argument("--holdout", type=int, help="returns withheld from the end of the series")

    p = sub.add_parser("diagnose", help="ADF and McLeod-Li tests on levels and returns")
    common(p)
    p.add_argument("--lags", type=int, help=f"McLeod-Li lags (default {DEFAULT_MCLEOD_LI_LAGS})")

    p = sub.add_parser("fit", help="fit one model spec")
    common(p, spec=True)

    p = sub.add_parser("select", help="fit a candidate list and keep the best")
    common(p, spec=True)
    p.add_argument("--criterion", choices=["aic", "bic"], default="bic")

    p = sub.add_parser("forecast", help="forecast load levels")
    common(p, spec=True, output_required=True)
    p.add_argument("--model", type=Path, help="fitted model JSON written by 'fit' or 'select'")
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--coverage", type=float, default=0.95)
    p.add_argument("--level-correction", choices=["on", "off"], default="off")

    p = sub.add_parser("evaluate", help="score forecasts against actual loads")
    common(p)
    p.add_argument(
        "--forecast", action="append", default=[], metavar="NAME=PATH",
        help="forecast CSV with timestamp and level_point columns; repeatable",
    )
    return parser


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=args.input,
        model_spec_path=getattr(args, "spec", None),
        model_path=getattr(args, "model", None),
        holdout=getattr(args, "holdout", None),
        horizon=getattr(args, "horizon", 24),
        coverage=getattr(args, "coverage", 0.95),
        seed=args.seed,
        output_path=args.output,
        criterion=getattr(args, "criterion", "bic"),
        innovation=getattr(args, "innovation", None),
        level_correction=getattr(args, "level_correction", "off") == "on",
        lags=getattr(args, "lags", None),
        forecast_paths=getattr(args, "forecast", []),
    )


# --- helpers ---------------------------------------------------------------


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _load_series(path: Path):
    if not path.exists():
        raise DataError(f"{path}: input file not found")
    return read_load_csv(path)


def _override_innovation(spec: ModelSpec, family: str | None) -> ModelSpec:
    if family is None or Family(family) is spec.innovation:
        return spec
    d = spec.to_dict()
    d["innovation"] = family
    return ModelSpec.from_dict(d)


def _specs(cfg: RunConfig) -> list[ModelSpec]:
    if cfg.model_spec_path is None:
        raise ConfigError("--spec is required")
    raw = _read_json(cfg.model_spec_path)
    if isinstance(raw, dict) and "candidates" in raw:
        raw = raw["candidates"]
    items = raw if isinstance(raw, list) else [raw]
    if not items:
        raise ConfigError(f"{cfg.model_spec_path}: empty candidate list")
    try:
        specs = [ModelSpec.from_dict(item) for item in items]
    except (ModelError, TypeError, AttributeError) as exc:
        raise ConfigError(f"{cfg.model_spec_path}: {exc}") from exc
    return [_override_innovation(s, cfg.innovation) for s in specs]


def _training_returns(cfg: RunConfig, holdout: int | None):
    levels = _load_series(cfg.input_path)
    returns = log_returns(levels)
    if holdout:
        return split(returns, holdout)
    return returns, None


def _training_info(returns, holdout) -> dict:
    return {
        "holdout": holdout,
        "n_returns": len(returns),
        "first_timestamp": format_timestamp(returns.timestamps[0]),
        "last_timestamp": format_timestamp(returns.timestamps[-1]),
    }


def _model_document(model: FittedModel, returns, cfg: RunConfig) -> dict:
    doc = model.to_dict()
    doc["training"] = _training_info(returns, cfg.holdout)
    doc["seed"] = cfg.seed
    return doc


def _print_tables(model: FittedModel) -> None:
    def fmt(v, spec=".4f"):
        return "" if v is None else format(v, spec)

    for title, rows in model.tables().items():
        if not rows:
            continue
        print(f"{title} equation" if title != "distribution" else "innovation distribution")
        print(f"  {'':<12}{'Value':>12}{'Std. Error':>12}{'T-Statistic':>13}{'P-Value':>10}")
        for r in rows:
            print(
                f"  {r['label']:<12}{fmt(r['value']):>12}{fmt(r['std_error']):>12}"
                f"{fmt(r['t_stat'], '.3f'):>13}{fmt(r['p_value'], '.3f'):>10}"
            )
    print(f"loglik {model.loglik:.4f}  aic {model.aic:.4f}  bic {model.bic:.4f}  n_obs {model.n_obs}")
    for w in model.warnings:
        print(f"warning: {w}")


# --- commands ----------------------------------------------------------------


def cmd_diagnose(cfg: RunConfig) -> int:
    levels = _load_series(cfg.input_path)
    returns = log_returns(levels)
    lags = cfg.lags or DEFAULT_MCLEOD_LI_LAGS
    report = {}
    for name, values in (("levels", levels.values), ("returns", returns.values)):
        report[name] = {
            "n": int(values.size),
            "adf": adf_test(values).to_dict(),
            "mcleod_li": mcleod_li(values, lags).to_dict(),
        }
    _write(cfg.output_path, _dump(report))
    if cfg.output_path is not None:
        for name, rep in report.items():
            print(
                f"{name:<8} ADF stat {rep['adf']['statistic']:.3f} p {rep['adf']['p_value']:.3f}  "
                f"McLeod-Li Q {rep['mcleod_li']['statistic']:.2f} p {rep['mcleod_li']['p_value']:.4f}"
            )
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    specs = _specs(cfg)
    if len(specs) != 1:
        raise ConfigError("fit takes a single spec; use 'select' for a candidate list")
    train, _ = _training_returns(cfg, cfg.holdout)
    model = fit(specs[0], train, seed=cfg.seed)
    _write(cfg.output_path, _dump(_model_document(model, train, cfg)))
    if cfg.output_path is not None:
        _print_tables(model)
    return EXIT_OK


def cmd_select(cfg: RunConfig) -> int:
    specs = _specs(cfg)
    train, _ = _training_returns(cfg, cfg.holdout)
    results = fit_candidates(specs, train, seed=cfg.seed)
    winner = best_candidate(results, cfg.criterion)
    doc = _model_document(winner.model, train, cfg)
    doc["selection"] = {
        "criterion": cfg.criterion,
        "winner_index": winner.index,
        "candidates": [
            {
                "index": r.index,
                "label": r.spec.label,
                "n_params": r.spec.n_params,
                "loglik": None if r.model is None else r.model.loglik,
                "aic": None if r.model is None else r.model.aic,
                "bic": None if r.model is None else r.model.bic,
                "error": r.error,
            }
            for r in results
        ],
    }
    _write(cfg.output_path, _dump(doc))
    if cfg.output_path is not None:
        for c in doc["selection"]["candidates"]:
            mark = "*" if c["index"] == winner.index else " "
            crit = c[cfg.criterion]
            shown = "failed: " + c["error"] if crit is None else f"{cfg.criterion} {crit:.4f}"
            print(f"{mark} #{c['index']} {c['label']:<40} {shown}")
    return EXIT_OK


def cmd_forecast(cfg: RunConfig) -> int:
    if cfg.model_path is None and cfg.model_spec_path is None:
        raise ConfigError("forecast needs --model (fitted JSON) or --spec")
    holdout = cfg.holdout
    doc = None
    if cfg.model_path is not None:
        doc = _read_json(cfg.model_path)
        if holdout is None:
            holdout = (doc.get("training") or {}).get("holdout")
    train, test = _training_returns(cfg, holdout)
    if doc is not None:
        try:
            model = FittedModel.from_dict(doc, train)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{cfg.model_path}: not a fitted model ({exc})") from exc
    else:
        specs = _specs(cfg)
        if len(specs) != 1:
            raise ConfigError("forecast takes a single spec")
        model = fit(specs[0], train, seed=cfg.seed)

    result = forecast(
        model, train, h=cfg.horizon, coverage=cfg.coverage, level_correction=cfg.level_correction
    )
    actual = None
    if test is not None:
        actual = reconstruct_levels(test).values[1:]

    out = cfg.output_path
    out.parent.mkdir(parents=True, exist_ok=True)
    result.to_csv(out)
    stem = out.with_suffix("")
    payload = result.to_dict()
    payload["level_correction"] = cfg.level_correction
    payload["model"] = {"spec": model.spec.to_dict(), "params": model.params.to_dict()}
    payload["warning"] = "; ".join(model.warnings) or None
    Path(f"{stem}.json").write_text(_dump(payload))
    result.to_csv(f"{stem}_plot.csv", actual=actual if actual is not None else np.array([]))
    print(f"wrote {out}, {stem}.json, {stem}_plot.csv ({result.horizon} steps)")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    if not cfg.input_path.exists():
        raise DataError(f"{cfg.input_path}: input file not found")
    actual, extra = read_load_csv(cfg.input_path, extra_columns=True)
    index = {format_timestamp(t): i for i, t in enumerate(actual.timestamps)}
    rows = None
    from_files = {}
    for item in cfg.forecast_paths:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        stamps, values = _read_forecast_csv(Path(path))
        missing = [t for t in stamps if t not in index]
        if missing:
            raise DataError(f"{path}: timestamp {missing[0]} not found in {cfg.input_path}")
        these = [index[t] for t in stamps]
        if rows is not None and these != rows:
            raise DataError("forecast files cover different timestamps")
        rows = these
        from_files[name] = values
    if rows is None:
        rows = list(range(len(actual)))
    predictions = {name: values[rows] for name, values in extra.items()}
    predictions.update(from_files)
    if not predictions:
        raise ConfigError("nothing to evaluate: add prediction columns or --forecast NAME=PATH")
    ranking = compare(actual.values[rows], predictions)
    _write(cfg.output_path, _dump(ranking_to_dict(ranking)))
    if cfg.output_path is not None:
        print(format_ranking(ranking))
    return EXIT_OK


def _read_forecast_csv(path: Path):
    if not path.exists():
        raise DataError(f"{path}: forecast file not found")
    frame = pd.read_csv(path, dtype={"timestamp": str})
    if "timestamp" not in frame or "level_point" not in frame:
        raise DataError(f"{path}: forecast CSV needs timestamp and level_point columns")
    return frame["timestamp"].str.strip().tolist(), frame["level_point"].to_numpy(dtype=float)


COMMANDS = {
    "diagnose": cmd_diagnose,
    "fit": cmd_fit,
    "select": cmd_select,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
}


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
