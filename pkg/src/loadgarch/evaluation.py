"""Forecast error scores and model ranking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class ScoreReport:
    mse: float
    mae: float
    n: int
    per_step_errors: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "mae": self.mae,
            "n": self.n,
            "per_step_errors": self.per_step_errors.tolist(),
        }


def score(actual, predicted) -> ScoreReport:
    """Mean squared and mean absolute error of ``predicted - actual``."""
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.ndim != 1 or predicted.ndim != 1:
        raise DataError("score expects 1-d sequences")
    if actual.size != predicted.size:
        raise DataError(f"length mismatch: {actual.size} actual vs {predicted.size} predicted")
    if actual.size == 0:
        raise DataError("cannot score empty sequences")
    if not (np.all(np.isfinite(actual)) and np.all(np.isfinite(predicted))):
        raise DataError("score inputs must be finite")
    err = predicted - actual
    return ScoreReport(float(np.mean(err**2)), float(np.mean(np.abs(err))), err.size, err)


def compare(actual, predictions: Mapping[str, object]) -> list[tuple[str, ScoreReport]]:
    """Score every named prediction; best (lowest MSE, then MAE) first."""
    if not predictions:
        raise DataError("compare needs at least one prediction")
    scored = [(name, score(actual, pred)) for name, pred in predictions.items()]
    return sorted(scored, key=lambda item: (item[1].mse, item[1].mae))


def ranking_to_dict(ranking) -> dict:
    return {
        "ranking": [{"rank": i + 1, "name": name, **rep.to_dict()} for i, (name, rep) in enumerate(ranking)]
    }


def format_ranking(ranking) -> str:
    width = max(len("model"), *(len(name) for name, _ in ranking))
    lines = [f"{'rank':>4}  {'model':<{width}}  {'mse':>10}  {'mae':>10}  {'n':>4}"]
    for i, (name, rep) in enumerate(ranking, 1):
        lines.append(f"{i:>4}  {name:<{width}}  {rep.mse:>10.4f}  {rep.mae:>10.4f}  {rep.n:>4}")
    return "\n".join(lines)
