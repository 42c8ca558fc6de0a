"""Sensitivity / specificity reports, CMC curves and threshold sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import Measure, _templates, score_matrix
from .errors import EvaluationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise EvaluationError(f"{name} must be a non-negative integer, got {v}")

    @property
    def genuine(self) -> int:
        return self.tp + self.fn

    @property
    def impostor(self) -> int:
        return self.fp + self.tn


@dataclass(frozen=True)
class EvalReport:
    """Rates are percentages; ``None`` where a run cannot define them."""

    counts: ConfusionCounts
    sensitivity: float | None = None
    specificity: float | None = None
    accuracy: float | None = None
    balanced_accuracy: float | None = None
    fpr: float | None = None
    fnr: float | None = None
    cmc: tuple[float, ...] | None = None
    threshold: float | None = None
    measure: str | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def rows(self) -> list[tuple[str, float]]:
        """``(metric, value)`` pairs for CSV output."""
        out: list[tuple[str, float]] = [
            ("tp", self.counts.tp),
            ("fp", self.counts.fp),
            ("tn", self.counts.tn),
            ("fn", self.counts.fn),
        ]
        for name in ("sensitivity", "specificity", "accuracy", "balanced_accuracy", "fpr", "fnr", "threshold"):
            v = getattr(self, name)
            if v is not None:
                out.append((name, v))
        if self.cmc:
            out.append(("rank1", self.cmc[0]))
        return out


def metrics(counts: ConfusionCounts, threshold=None, measure=None) -> EvalReport:
    """Sensitivity TP/(TP+FN), specificity TN/(FP+TN), accuracy
    (TP+TN)/(TP+TN+FP+FN) and the complementary error rates, as percentages.

    ``balanced_accuracy`` is the mean of sensitivity and specificity.
    """
    if counts.genuine == 0:
        raise EvaluationError("no genuine probes: sensitivity is undefined")
    if counts.impostor == 0:
        raise EvaluationError("no impostor probes: specificity is undefined")
    sens = 100.0 * counts.tp / counts.genuine
    spec = 100.0 * counts.tn / counts.impostor
    total = counts.genuine + counts.impostor
    return EvalReport(
        counts=counts,
        sensitivity=sens,
        specificity=spec,
        accuracy=100.0 * (counts.tp + counts.tn) / total,
        balanced_accuracy=(sens + spec) / 2,
        fpr=100.0 * counts.fp / counts.impostor,
        fnr=100.0 * counts.fn / counts.genuine,
        threshold=threshold,
        measure=None if measure is None else Measure.parse(measure).value,
    )


def cmc_curve(scores: np.ndarray, labels) -> tuple[float, ...]:
    """Rank-k identification rates (percent) for k = 1..C.

    ``scores`` is (P x C); a probe's rank is one plus the number of classes
    that beat its true class, with ties resolved toward smaller class ids.
    """
    scores = np.atleast_2d(scores)
    labels = np.asarray(labels, dtype=np.int64)
    P, C = scores.shape
    if labels.shape != (P,):
        raise EvaluationError(f"{labels.size} labels for {P} probes")
    if P == 0:
        raise EvaluationError("no probes to evaluate")
    if labels.min() < 0 or labels.max() >= C:
        raise EvaluationError(f"probe label outside model classes 0..{C - 1}")
    true = scores[np.arange(P), labels][:, None]
    ids = np.arange(C)[None, :]
    better = (scores < true) | ((scores == true) & (ids < labels[:, None]))
    ranks = better.sum(axis=1) + 1
    hist = np.bincount(ranks, minlength=C + 1)[1:]
    return tuple(float(v) for v in 100.0 * np.cumsum(hist) / P)


def closed_set_eval(model, probes, labels, measure=Measure.COS) -> EvalReport:
    """Closed-set identification of discriminant vectors ``probes``.

    Counts hold rank-1 hits (tp) and misses (fn); sensitivity and accuracy
    both equal the rank-1 rate.
    """
    T = _templates(model)
    S = score_matrix(measure, probes, T)
    cmc = cmc_curve(S, labels)
    P = S.shape[0]
    hits = int(round(cmc[0] * P / 100.0))
    counts = ConfusionCounts(tp=hits, fp=0, tn=0, fn=P - hits)
    return EvalReport(
        counts=counts,
        sensitivity=cmc[0],
        accuracy=cmc[0],
        fnr=100.0 - cmc[0],
        cmc=cmc,
        measure=Measure.parse(measure).value,
    )


def claim_scores(model, probes, claims, measure=Measure.COS) -> np.ndarray:
    """Score of each probe against the common vector of its claimed class."""
    T = _templates(model)
    claims = np.asarray(claims, dtype=np.int64)
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    if claims.shape != (probes.shape[0],):
        raise EvaluationError(f"{claims.size} claims for {probes.shape[0]} probes")
    if claims.size and (claims.min() < 0 or claims.max() >= T.shape[0]):
        raise EvaluationError(f"claimed class outside model classes 0..{T.shape[0] - 1}")
    if claims.size == 0:
        return np.empty(0)
    S = score_matrix(measure, probes, T)
    return S[np.arange(claims.size), claims]


def verify_counts(genuine_scores, impostor_scores, tau: float) -> ConfusionCounts:
    """Accept a claim iff its score is <= tau."""
    g = np.asarray(genuine_scores, dtype=np.float64)
    i = np.asarray(impostor_scores, dtype=np.float64)
    tp = int(np.count_nonzero(g <= tau))
    fp = int(np.count_nonzero(i <= tau))
    return ConfusionCounts(tp=tp, fp=fp, tn=i.size - fp, fn=g.size - tp)


def verification_eval(model, genuine, genuine_claims, impostors, impostor_claims,
                      measure=Measure.COS, tau: float = 0.0) -> EvalReport:
    if np.isnan(tau):
        raise EvaluationError("threshold must not be NaN")
    g = claim_scores(model, genuine, genuine_claims, measure)
    i = claim_scores(model, impostors, impostor_claims, measure)
    return metrics(verify_counts(g, i, tau), threshold=float(tau), measure=measure)


def tau_sweep(genuine_scores, impostor_scores, taus, measure=None) -> list[EvalReport]:
    return [metrics(verify_counts(genuine_scores, impostor_scores, t), threshold=float(t), measure=measure)
            for t in taus]


def equal_error_point(reports: list[EvalReport]) -> EvalReport:
    """Sweep entry where FPR and FNR are closest (first on ties)."""
    if not reports:
        raise EvaluationError("empty threshold sweep")
    gaps = [abs(r.fpr - r.fnr) for r in reports]
    return reports[int(np.argmin(gaps))]
