"""Applications of topological uncertainty: out-of-distribution detection
with a confidence baseline, trained-network selection, and batch shift
monitoring.

Detectors are one-sided: a TU detector flags scores *above* its threshold,
the max-softmax confidence baseline flags scores *below* its own. Threshold
comparisons are strict, so the flag rate on the calibration set itself never
exceeds one rank beyond the chosen quantile. Separation quality is reported
threshold-free through AUROC (Mann-Whitney rank statistic, ties at half
credit) and the false-positive rate at 95% true-positive rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import profile as profile_mod
from ._stats import nearest_rank_quantile
from .errors import ClassUncoveredError
from .model import NetworkModel, predict

DIRECTIONS = ("flag_above", "flag_below")


@dataclass(frozen=True)
class DetectorConfig:
    """Quantile of the calibration scores used as threshold, plus which side
    of it is flagged."""

    quantile: float
    direction: str

    def __post_init__(self):
        if not 0.0 < self.quantile <= 1.0:
            raise ValueError(f"quantile must be in (0, 1], got {self.quantile}")
        _check_direction(self.direction)


@dataclass(frozen=True)
class DetectionReport:
    threshold: float
    fpr_at_95_tpr: float
    auroc: float
    in_scores: tuple[float, ...]
    out_scores: tuple[float, ...]
    direction: str


@dataclass(frozen=True)
class ModelScore:
    model_id: str
    mean_score: float
    accuracy: float | None
    skipped: int


@dataclass(frozen=True)
class SelectionResult:
    """Per-model mean scores, the ascending-score ranking (low score means
    the batch looks familiar to that model), and the accuracy gap between
    the 5 best- and 5 worst-ranked models when accuracies are known."""

    scores: tuple[ModelScore, ...]
    ranking: tuple[str, ...]
    gap_metric: float | None


@dataclass(frozen=True)
class ShiftSummary:
    level: float
    mean_tu: float
    tu_q10: float
    tu_q90: float
    mean_confidence: float
    accuracy: float | None
    size: int


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def calibrate_threshold(scores, q: float) -> float:
    """Nearest-rank quantile of the scores (sorted internally, so input
    order is irrelevant)."""
    return nearest_rank_quantile(scores, q)


def detect(score: float, threshold: float, direction: str) -> bool:
    """True when the score falls on the flagged side; equality never flags."""
    _check_direction(direction)
    if direction == "flag_above":
        return score > threshold
    return score < threshold


def _auroc(in_scores: np.ndarray, out_scores: np.ndarray, direction: str) -> float:
    # P(out beats in) with half credit for ties, where "beats" means lying
    # further in the flagged direction
    sorted_in = np.sort(in_scores)
    below = np.searchsorted(sorted_in, out_scores, side="left")
    below_or_eq = np.searchsorted(sorted_in, out_scores, side="right")
    wins = below.sum() + 0.5 * (below_or_eq - below).sum()
    above = wins / (in_scores.size * out_scores.size)
    return float(above) if direction == "flag_above" else float(1.0 - above)


def _fpr_at_tpr(
    in_scores: np.ndarray, out_scores: np.ndarray, direction: str, tpr: float
) -> float:
    # loosest threshold still flagging >= tpr of the OOD scores, then the
    # fraction of in-distribution scores it flags
    m = out_scores.size
    k = math.ceil(tpr * m - 1e-12)
    out_sorted = np.sort(out_scores)
    if direction == "flag_above":
        anchor = out_sorted[m - k]  # k-th largest; threshold sits just below it
        return float(np.mean(in_scores >= anchor))
    anchor = out_sorted[k - 1]  # k-th smallest; threshold sits just above it
    return float(np.mean(in_scores <= anchor))


def roc_metrics(
    in_scores,
    out_scores,
    direction: str = "flag_above",
    q: float = 0.95,
    calibration_scores=None,
) -> DetectionReport:
    """Threshold-free separation metrics for an in/out score pair.

    AUROC is the Mann-Whitney statistic oriented so 1.0 means every OOD
    score lies strictly on the flagged side of every in-distribution score.
    FPR@95TPR evaluates the loosest threshold that still flags at least 95%
    of the OOD scores. The reported deployment threshold is the q-quantile
    (flag_above) or (1-q)-quantile (flag_below) of `calibration_scores`,
    which default to the in-distribution scores.
    """
    _check_direction(direction)
    ins = np.asarray(in_scores, dtype=np.float64)
    outs = np.asarray(out_scores, dtype=np.float64)
    if ins.size == 0 or outs.size == 0:
        raise ValueError("score lists must be nonempty")
    calib = ins if calibration_scores is None else np.asarray(calibration_scores)
    q_eff = q if direction == "flag_above" else 1.0 - q
    q_eff = min(max(q_eff, 1e-12), 1.0)
    return DetectionReport(
        threshold=calibrate_threshold(calib, q_eff),
        fpr_at_95_tpr=_fpr_at_tpr(ins, outs, direction, 0.95),
        auroc=_auroc(ins, outs, direction),
        in_scores=tuple(float(v) for v in ins),
        out_scores=tuple(float(v) for v in outs),
        direction=direction,
    )


def confidence_scores(net: NetworkModel, batch) -> np.ndarray:
    """Max-softmax confidence per sample, order preserved."""
    return np.array([predict(net, x)[1] for x in batch], dtype=np.float64)


def selection_score(
    models,
    batch,
    accuracies=None,
    model_ids=None,
) -> SelectionResult:
    """Rank candidate (network, profile) pairs by mean TU over the batch.

    Samples whose predicted class a model's profile does not cover are
    skipped and counted per model; a model that can score nothing is an
    error. When accuracies are supplied and there are at least 10 models,
    `gap_metric` is the mean accuracy of the 5 lowest-scoring models minus
    the mean accuracy of the 5 highest-scoring ones (positive means the
    score prefers better models).
    """
    models = list(models)
    if not models:
        raise ValueError("empty model list")
    if model_ids is None:
        model_ids = [f"model-{i}" for i in range(len(models))]
    model_ids = [str(mid) for mid in model_ids]
    if len(model_ids) != len(models):
        raise ValueError("model_ids length does not match models")
    if accuracies is not None and len(accuracies) != len(models):
        raise ValueError("accuracies length does not match models")

    batch = np.ascontiguousarray(batch, dtype=np.float64)
    scores = []
    for pos, (net, prof) in enumerate(models):
        tus = []
        skipped = 0
        for x in batch:
            try:
                tus.append(profile_mod.topological_uncertainty(prof, net, x).tu)
            except ClassUncoveredError:
                skipped += 1
        if not tus:
            raise ValueError(
                f"{model_ids[pos]}: no batch sample is scorable (all classes uncovered)"
            )
        scores.append(
            ModelScore(
                model_id=model_ids[pos],
                mean_score=float(np.mean(tus)),
                accuracy=None if accuracies is None else float(accuracies[pos]),
                skipped=skipped,
            )
        )

    order = sorted(range(len(scores)), key=lambda i: (scores[i].mean_score, i))
    ranking = tuple(scores[i].model_id for i in order)
    gap = None
    if accuracies is not None and len(models) >= 10:
        best5 = [scores[i].accuracy for i in order[:5]]
        worst5 = [scores[i].accuracy for i in order[-5:]]
        gap = float(np.mean(best5) - np.mean(worst5))
    return SelectionResult(scores=tuple(scores), ranking=ranking, gap_metric=gap)


def shift_monitor(
    profile: profile_mod.TopologicalProfile,
    net: NetworkModel,
    batches,
) -> list[ShiftSummary]:
    """Summarize the TU distribution of each (shift level, batch) pair.

    Batches are (level, features) or (level, features, labels); accuracy is
    reported when labels are present. Emits data series only: what counts as
    an alarming change in the TU distribution is a deployment policy, not
    something this library can decide.
    """
    batches = list(batches)
    if not batches:
        raise ValueError("no batches to monitor")
    summaries = []
    for entry in batches:
        if len(entry) == 3:
            level, feats, labels = entry
        else:
            level, feats = entry
            labels = None
        reports = profile_mod.score_batch(profile, net, feats)
        if not reports:
            raise ValueError(f"shift level {level}: empty batch")
        tus = np.array([r.tu for r in reports])
        confs = np.array([r.confidence for r in reports])
        accuracy = None
        if labels is not None:
            labels = np.asarray(labels)
            accuracy = float(
                np.mean([r.predicted == int(y) for r, y in zip(reports, labels)])
            )
        summaries.append(
            ShiftSummary(
                level=float(level),
                mean_tu=float(tus.mean()),
                tu_q10=nearest_rank_quantile(tus, 0.10),
                tu_q90=nearest_rank_quantile(tus, 0.90),
                mean_confidence=float(confs.mean()),
                accuracy=accuracy,
                size=int(tus.size),
            )
        )
    return summaries
