"""Nearest-common-vector classification under L1, L2 and cosine measures."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError


class Measure(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    COS = "cos"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, Measure):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown measure {value!r}; choose l1, l2 or cos") from None


def score(measure, y, m) -> float:
    """Dissimilarity of ``y`` to template ``m``; smaller is closer.

    L2 is the squared Euclidean distance (no root). COS is the negated
    cosine of the angle between the vectors.
    """
    return float(score_matrix(measure, np.asarray(y, dtype=np.float64)[None, :],
                              np.asarray(m, dtype=np.float64)[None, :])[0, 0])


def score_matrix(measure, Y, T) -> np.ndarray:
    """Scores (P x C) of probe rows ``Y`` against template rows ``T``."""
    measure = Measure.parse(measure)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    if Y.shape[1] != T.shape[1]:
        raise DimensionError(f"vector length mismatch: {Y.shape[1]} vs {T.shape[1]}")
    diff = Y[:, None, :] - T[None, :, :]
    if measure is Measure.L1:
        return np.abs(diff).sum(axis=2)
    if measure is Measure.L2:
        return np.einsum("pcd,pcd->pc", diff, diff)
    ny = np.linalg.norm(Y, axis=1)
    nt = np.linalg.norm(T, axis=1)
    if np.any(ny == 0) or np.any(nt == 0):
        raise DimensionError("cosine measure is undefined for a zero vector")
    cos = (Y @ T.T) / np.outer(ny, nt)
    return -np.clip(cos, -1.0, 1.0)


@dataclass(frozen=True)
class Ranking:
    classes: tuple[int, ...]
    scores: tuple[float, ...]

    @property
    def predicted(self) -> int:
        return self.classes[0]

    @property
    def best_score(self) -> float:
        return self.scores[0]

    def rank_of(self, class_id: int) -> int:
        """1-based position of ``class_id``."""
        return self.classes.index(class_id) + 1

    def top(self, n: int) -> list[tuple[int, float]]:
        return list(zip(self.classes[:n], self.scores[:n]))


def _templates(model) -> np.ndarray:
    return np.asarray(getattr(model, "common_vectors", model), dtype=np.float64)


def rank_scores(row: np.ndarray) -> Ranking:
    # lexsort keys: last is primary; ties fall back to the smaller class id
    order = np.lexsort((np.arange(row.size), row))
    return Ranking(tuple(int(i) for i in order), tuple(float(row[i]) for i in order))


def classify(model, y, measure=Measure.COS) -> Ranking:
    """Rank every class by the score of ``y`` against its common vector.

    ``model`` is a fitted :class:`~gkdcv.kdcv.KdcvModel` or a (C x p) array
    of class templates.
    """
    T = _templates(model)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != T.shape[1]:
        raise DimensionError(f"discriminant vector length {y.size} does not match model dimension {T.shape[1]}")
    return rank_scores(score_matrix(measure, y[None, :], T)[0])


def classify_many(model, Y, measure=Measure.COS) -> list[Ranking]:
    T = _templates(model)
    S = score_matrix(measure, Y, T)
    return [rank_scores(row) for row in S]
