"""Cross-validated evaluation: folds, confusion counts, F1, PR curves.

Folds are 60/20/20 train/dev/test resamples, one independent shuffle per
fold, so test sets overlap between folds; confusion matrices and curve
scores are pooled over the concatenated test sets while F1 and AUC are
averaged per fold. Curve points are generated one per distinct score, so
tied scores enter or leave the positive set together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .labels import CLASS_INDEX, CLASS_ORDER, N_CLASSES, Stance
from .models.sampling import upsample

MIN_IDS_FOR_FOLDS = 10
HOLDOUT_FRACTION = 0.2

# (score, is_positive) pairs; the one-vs-all reduction happens at the caller
ScoredExample = tuple[float, bool]


@dataclass(frozen=True)
class FoldSplit:
    fold_id: int
    train_ids: tuple[str, ...]
    dev_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def make_folds(ids: Sequence[str], n_folds: int = 10, seed: int = 0,
               train_only: frozenset[str] = frozenset()) -> list[FoldSplit]:
    """Draw independent train/dev/test splits, 10 by default.

    Dev and test each take floor(0.2 * n) of the eligible ids; the remainder
    trains. Ids marked train-only never enter dev or test but always augment
    the train side. Ids are sorted before shuffling so the result does not
    depend on input order.
    """
    unique = sorted(set(ids))
    if len(unique) != len(ids):
        raise ValueError("duplicate ids passed to make_folds")
    eligible = [i for i in unique if i not in train_only]
    extra = tuple(i for i in unique if i in train_only)
    if len(eligible) < MIN_IDS_FOR_FOLDS:
        raise ValueError(
            f"need at least {MIN_IDS_FOR_FOLDS} ids to make folds, "
            f"got {len(eligible)}"
        )
    if n_folds < 1:
        raise ValueError("n_folds must be positive")
    n_hold = math.floor(HOLDOUT_FRACTION * len(eligible))
    folds = []
    for fold_id in range(n_folds):
        rng = np.random.default_rng([seed, fold_id])
        order = rng.permutation(len(eligible))
        shuffled = [eligible[i] for i in order]
        dev = tuple(shuffled[:n_hold])
        test = tuple(shuffled[n_hold:2 * n_hold])
        train = tuple(shuffled[2 * n_hold:]) + extra
        folds.append(FoldSplit(fold_id=fold_id, train_ids=train,
                               dev_ids=dev, test_ids=test))
    return folds


def confusion(golds: Sequence[Stance], preds: Sequence[Stance]) -> np.ndarray:
    """3x3 count matrix, rows true class, columns predicted class."""
    if len(golds) != len(preds):
        raise ValueError("golds and preds length mismatch")
    out = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for g, p in zip(golds, preds):
        out[CLASS_INDEX[g], CLASS_INDEX[p]] += 1
    return out


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class F1Report:
    per_class: dict[Stance, ClassMetrics]
    macro_f1: float


def f1_report(cm: np.ndarray) -> F1Report:
    """Per-class precision/recall/F1 with zero denominators scored as 0,
    plus the unweighted macro average."""
    cm = np.asarray(cm)
    if cm.shape != (N_CLASSES, N_CLASSES):
        raise ValueError(f"confusion matrix must be {N_CLASSES}x{N_CLASSES}")
    per_class = {}
    for i, stance in enumerate(CLASS_ORDER):
        tp = float(cm[i, i])
        pred = float(cm[:, i].sum())
        true = float(cm[i, :].sum())
        precision = tp / pred if pred > 0 else 0.0
        recall = tp / true if true > 0 else 0.0
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        per_class[stance] = ClassMetrics(precision=precision, recall=recall,
                                         f1=f1)
    macro = sum(c.f1 for c in per_class.values()) / N_CLASSES
    return F1Report(per_class=per_class, macro_f1=macro)


def _sweep(scored: Sequence[ScoredExample]):
    """Yield (threshold, tp, fp) after each distinct-score block, descending."""
    s = np.array([x[0] for x in scored], dtype=np.float64)
    y = np.array([x[1] for x in scored], dtype=bool)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        block_pos = int(y[i:j].sum())
        tp += block_pos
        fp += (j - i) - block_pos
        yield float(s[i]), tp, fp
        i = j


def pr_curve(scored: Sequence[ScoredExample]) -> list[tuple[float, float]]:
    """(recall, precision) points sweeping the threshold from high to low.

    Input is (score, is_positive) pairs. One point per distinct score value:
    examples sharing a score become positive predictions together, so
    all-equal scores give the single point (1.0, prevalence).
    """
    if len(scored) == 0:
        raise ValueError("pr_curve needs at least one score")
    n_pos = sum(1 for _, positive in scored if positive)
    if n_pos == 0:
        raise ValueError("pr_curve needs at least one positive example")
    return [(tp / n_pos, tp / (tp + fp)) for _, tp, fp in _sweep(scored)]


def auc(curve: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under a PR curve, anchored at recall 0 with the
    first point's precision. A single-point curve is refused rather than
    silently scored."""
    if len(curve) < 2:
        raise ValueError("curve too short")
    points = [(0.0, curve[0][1])] + list(curve)
    area = 0.0
    for (r0, p0), (r1, p1) in zip(points, points[1:]):
        area += (r1 - r0) * (p0 + p1) / 2.0
    return area


@dataclass(frozen=True)
class Calibration:
    """Chosen score threshold for a precision target.

    When the target is unachievable the achieved fields describe the
    highest-precision operating point instead and ``achievable`` is False.
    """

    target_precision: float
    threshold: float | None
    achieved_precision: float
    achieved_recall: float
    achievable: bool
    stance: Stance | None = None


def calibrate_threshold(scored: Sequence[ScoredExample],
                        target_precision: float) -> Calibration:
    """Pick the threshold with maximum recall among those meeting the
    precision target (predict positive at score >= threshold)."""
    if not 0.0 < target_precision <= 1.0:
        raise ValueError("target_precision must be in (0, 1]")
    if len(scored) == 0:
        raise ValueError("calibration needs at least one score")
    n_pos = sum(1 for _, positive in scored if positive)
    if n_pos == 0:
        raise ValueError("calibration needs at least one positive example")

    candidates = [(thr, tp / (tp + fp), tp / n_pos)
                  for thr, tp, fp in _sweep(scored)]
    meeting = [c for c in candidates if c[1] >= target_precision]
    if meeting:
        # max recall; among equal recalls prefer the higher threshold
        thr, prec, rec = max(meeting, key=lambda c: (c[2], c[0]))
        return Calibration(target_precision=target_precision, threshold=thr,
                           achieved_precision=prec, achieved_recall=rec,
                           achievable=True)
    thr, prec, rec = max(candidates, key=lambda c: (c[1], c[2]))
    return Calibration(target_precision=target_precision, threshold=None,
                       achieved_precision=prec, achieved_recall=rec,
                       achievable=False)


@dataclass(frozen=True)
class FoldResult:
    fold_id: int
    confusion: np.ndarray
    f1: F1Report
    auc: dict[Stance, float | None]


@dataclass
class EvaluationReport:
    n_folds: int
    folds: tuple[FoldResult, ...]
    pooled_confusion: np.ndarray
    pooled_f1: F1Report
    mean_f1: dict[Stance, float]
    mean_macro_f1: float
    mean_auc: dict[Stance, float | None]
    pooled_auc: dict[Stance, float | None]
    pooled_curves: dict[Stance, list[tuple[float, float]]]
    calibrations: dict[Stance, Calibration] = field(default_factory=dict)


def _curve_and_auc(scored: list[ScoredExample]):
    """Curve and AUC, or (None, None) when the scores cannot support them."""
    try:
        curve = pr_curve(scored)
        return curve, auc(curve)
    except ValueError:
        return None, None


def cross_validate(features: Mapping[str, Any], labels: Mapping[str, Stance],
                   make_estimator: Callable[[int], Any], n_folds: int = 10,
                   seed: int = 0, train_only: frozenset[str] = frozenset(),
                   upsample_train: bool = False,
                   target_precision: float = 0.8) -> EvaluationReport:
    """Run the full fold loop for one model family.

    ``make_estimator`` receives the fold id and must return a fresh unfitted
    estimator (fold the seed in there if the model uses one). Upsampling,
    when requested, happens inside each fold's train portion only. Ids in
    ``train_only`` never reach dev or test. Calibration runs per class on
    the pooled test scores at ``target_precision``.
    """
    missing = [i for i in features if i not in labels]
    if missing:
        raise ValueError(f"{len(missing)} ids lack labels, e.g. {missing[0]!r}")
    splits = make_folds(list(features), n_folds=n_folds, seed=seed,
                        train_only=train_only)

    fold_results = []
    pooled_cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    pooled_scored: dict[Stance, list[ScoredExample]] = {s: [] for s in CLASS_ORDER}

    for split in splits:
        train_pairs = [(features[i], labels[i]) for i in split.train_ids]
        if upsample_train:
            rng = np.random.default_rng([seed, split.fold_id, 1])
            train_pairs = upsample(train_pairs, rng)
        X_train = [f for f, _ in train_pairs]
        y_train = [s for _, s in train_pairs]
        X_test = [features[i] for i in split.test_ids]
        y_test = [labels[i] for i in split.test_ids]

        est = make_estimator(split.fold_id)
        est.fit(X_train, y_train)
        y_pred = list(est.predict(X_test))
        cm = confusion(y_test, y_pred)
        pooled_cm += cm

        fold_auc: dict[Stance, float | None] = {s: None for s in CLASS_ORDER}
        if hasattr(est, "predict_proba"):
            probs = np.asarray(est.predict_proba(X_test))
            for stance in CLASS_ORDER:
                col = CLASS_INDEX[stance]
                scored = [(float(probs[row, col]), y_test[row] == stance)
                          for row in range(len(y_test))]
                pooled_scored[stance].extend(scored)
                _, fold_auc[stance] = _curve_and_auc(scored)

        fold_results.append(FoldResult(fold_id=split.fold_id, confusion=cm,
                                       f1=f1_report(cm), auc=fold_auc))

    mean_f1 = {
        s: sum(fr.f1.per_class[s].f1 for fr in fold_results) / len(fold_results)
        for s in CLASS_ORDER
    }
    mean_macro = sum(fr.f1.macro_f1 for fr in fold_results) / len(fold_results)
    mean_auc: dict[Stance, float | None] = {}
    for stance in CLASS_ORDER:
        vals = [fr.auc[stance] for fr in fold_results if fr.auc[stance] is not None]
        mean_auc[stance] = sum(vals) / len(vals) if vals else None

    pooled_curves: dict[Stance, list[tuple[float, float]]] = {}
    pooled_auc: dict[Stance, float | None] = {}
    calibrations: dict[Stance, Calibration] = {}
    for stance in CLASS_ORDER:
        scored = pooled_scored[stance]
        if scored:
            curve, area = _curve_and_auc(scored)
            pooled_curves[stance] = curve or []
            pooled_auc[stance] = area
            try:
                calib = calibrate_threshold(scored, target_precision)
                calibrations[stance] = replace(calib, stance=stance)
            except ValueError:
                pass
        else:
            pooled_curves[stance] = []
            pooled_auc[stance] = None

    return EvaluationReport(
        n_folds=n_folds,
        folds=tuple(fold_results),
        pooled_confusion=pooled_cm,
        pooled_f1=f1_report(pooled_cm),
        mean_f1=mean_f1,
        mean_macro_f1=mean_macro,
        mean_auc=mean_auc,
        pooled_auc=pooled_auc,
        pooled_curves=pooled_curves,
        calibrations=calibrations,
    )


def calibration_to_dict(c: Calibration) -> dict:
    return {
        "stance": c.stance.value if c.stance else None,
        "target_precision": c.target_precision,
        "threshold": c.threshold,
        "achieved_precision": c.achieved_precision,
        "achieved_recall": c.achieved_recall,
        "achievable": c.achievable,
    }


def calibration_from_dict(d: dict) -> Calibration:
    return Calibration(
        target_precision=float(d["target_precision"]),
        threshold=None if d["threshold"] is None else float(d["threshold"]),
        achieved_precision=float(d["achieved_precision"]),
        achieved_recall=float(d["achieved_recall"]),
        achievable=bool(d["achievable"]),
        stance=Stance(d["stance"]) if d.get("stance") else None,
    )


def report_to_dict(report: EvaluationReport) -> dict:
    """JSON-ready form of the report with stable key order."""
    def f1_dict(f1: F1Report) -> dict:
        return {
            "macro_f1": f1.macro_f1,
            "per_class": {
                s.value: {"precision": m.precision, "recall": m.recall,
                          "f1": m.f1}
                for s, m in sorted(f1.per_class.items(),
                                   key=lambda kv: CLASS_INDEX[kv[0]])
            },
        }

    return {
        "n_folds": report.n_folds,
        "pooled_confusion": report.pooled_confusion.tolist(),
        "pooled_f1": f1_dict(report.pooled_f1),
        "mean_f1": {s.value: report.mean_f1[s] for s in CLASS_ORDER},
        "mean_macro_f1": report.mean_macro_f1,
        "mean_auc": {s.value: report.mean_auc[s] for s in CLASS_ORDER},
        "pooled_auc": {s.value: report.pooled_auc[s] for s in CLASS_ORDER},
        "pooled_curves": {
            s.value: [[r, p] for r, p in report.pooled_curves[s]]
            for s in CLASS_ORDER
        },
        "calibrations": {
            s.value: calibration_to_dict(c)
            for s, c in sorted(report.calibrations.items(),
                               key=lambda kv: CLASS_INDEX[kv[0]])
        },
        "folds": [
            {
                "fold_id": fr.fold_id,
                "confusion": fr.confusion.tolist(),
                "f1": f1_dict(fr.f1),
                "auc": {s.value: fr.auc[s] for s in CLASS_ORDER},
            }
            for fr in report.folds
        ],
    }


def report_to_text(report: EvaluationReport) -> str:
    """Fixed-format human-readable summary; stable across runs."""
    lines = []
    lines.append(f"folds: {report.n_folds}")
    lines.append("")
    lines.append("fold  macro_f1  " + "  ".join(
        f"f1_{s.value}" for s in CLASS_ORDER))
    for fr in report.folds:
        cells = "  ".join(f"{fr.f1.per_class[s].f1:.4f}" for s in CLASS_ORDER)
        lines.append(f"{fr.fold_id:>4}  {fr.f1.macro_f1:.4f}    {cells}")
    lines.append("")
    lines.append(f"mean macro F1: {report.mean_macro_f1:.4f}")
    for s in CLASS_ORDER:
        a = report.mean_auc[s]
        auc_text = f"{a:.4f}" if a is not None else "n/a"
        lines.append(f"mean F1 {s.value}: {report.mean_f1[s]:.4f}"
                     f"  mean AUC: {auc_text}")
    lines.append("")
    lines.append("pooled confusion (rows true, cols predicted; order "
                 + ", ".join(s.value for s in CLASS_ORDER) + "):")
    for row in report.pooled_confusion:
        lines.append("  " + "  ".join(f"{int(c):>7}" for c in row))
    for s, c in sorted(report.calibrations.items(),
                       key=lambda kv: CLASS_INDEX[kv[0]]):
        thr = f"{c.threshold:.6f}" if c.threshold is not None else "unachievable"
        lines.append(
            f"calibration {s.value}: target P={c.target_precision:.2f} "
            f"threshold={thr} P={c.achieved_precision:.4f} "
            f"R={c.achieved_recall:.4f}"
        )
    return "\n".join(lines) + "\n"
