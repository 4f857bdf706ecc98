"""Detection evaluation: distance matching, AP, TP error metrics and the
composite detection score."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Box3D, normalize_angle

DEFAULT_DIST_THRESHOLDS = (0.5, 1.0, 2.0, 4.0)  # meters
TP_ERROR_THRESHOLD = 2.0                        # matches at 2 m feed the TP errors
MIN_RECALL = 0.1
MIN_PRECISION = 0.1
TP_ERROR_NAMES = ("ate", "ase", "aoe", "ave", "aae")


@dataclass(frozen=True)
class TPErrors:
    ate: float  # mean BEV translation error, meters
    ase: float  # 1 - aligned IoU
    aoe: float  # mean absolute yaw error, radians
    ave: float  # mean velocity L2 error, m/s
    aae: float  # 1 - attribute accuracy

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.ate, self.ase, self.aoe, self.ave, self.aae)


@dataclass
class MetricReport:
    ap: dict                          # (class_id, threshold) -> AP
    mean_ap: float
    class_errors: dict                # class_id -> TPErrors
    mean_errors: TPErrors
    nds: float
    classes: tuple = ()
    thresholds: tuple = DEFAULT_DIST_THRESHOLDS
    num_gt: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mAP": self.mean_ap,
            "mATE": self.mean_errors.ate,
            "mASE": self.mean_errors.ase,
            "mAOE": self.mean_errors.aoe,
            "mAVE": self.mean_errors.ave,
            "mAAE": self.mean_errors.aae,
            "NDS": self.nds,
            "per_class_ap": {f"{c}@{t}": v for (c, t), v in sorted(self.ap.items())},
            "per_class_errors": {
                str(c): dict(zip(TP_ERROR_NAMES, e.as_tuple()))
                for c, e in sorted(self.class_errors.items())
            },
            "num_gt": {str(c): n for c, n in sorted(self.num_gt.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        """Plain-text summary with one row per class plus the means."""
        header = f"{'class':>8} | {'AP(mean)':>8} | {'ATE':>6} {'ASE':>6} {'AOE':>6} {'AVE':>6} {'AAE':>6}"
        lines = [header, "-" * len(header)]
        for c in self.classes:
            aps = [self.ap[(c, t)] for t in self.thresholds if (c, t) in self.ap]
            e = self.class_errors[c]
            lines.append(f"{c:>8} | {np.mean(aps):8.3f} | "
                         f"{e.ate:6.3f} {e.ase:6.3f} {e.aoe:6.3f} {e.ave:6.3f} {e.aae:6.3f}")
        m = self.mean_errors
        lines.append("-" * len(header))
        lines.append(f"{'mean':>8} | {self.mean_ap:8.3f} | "
                     f"{m.ate:6.3f} {m.ase:6.3f} {m.aoe:6.3f} {m.ave:6.3f} {m.aae:6.3f}")
        lines.append(f"NDS: {self.nds:.4f}")
        return "\n".join(lines)


def bev_distance(a: Box3D, b: Box3D) -> float:
    return float(np.linalg.norm(a.center[:2] - b.center[:2]))


def match_detections(preds, gts, threshold: float):
    """Greedy one-to-one matching in descending prediction score.

    A prediction matches the nearest unmatched same-class GT within the BEV
    distance threshold. Returns (matches, unmatched_pred_idx, unmatched_gt_idx)
    where matches is a list of (pred_idx, gt_idx).
    """
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    taken = [False] * len(gts)
    matches = []
    unmatched_preds = []
    for i in order:
        best_j, best_d = None, threshold
        for j, gt in enumerate(gts):
            if taken[j] or gt.class_id != preds[i].class_id:
                continue
            d = bev_distance(preds[i], gt)
            if d <= best_d:
                best_j, best_d = j, d
        if best_j is None:
            unmatched_preds.append(i)
        else:
            taken[best_j] = True
            matches.append((i, best_j))
    unmatched_gts = [j for j, t in enumerate(taken) if not t]
    return matches, unmatched_preds, unmatched_gts


def average_precision(scored_preds, num_gt: int) -> float:
    """AP from (score, is_tp) pairs against num_gt ground truths.

    Precision is interpolated at 101 recall samples; the curve is clipped at
    recall 0.1 and precision 0.1 and renormalized (the standard protocol for
    this benchmark family).
    """
    if num_gt == 0:
        return 0.0
    if not scored_preds:
        return 0.0
    ranked = sorted(scored_preds, key=lambda st: -st[0])
    tp = np.cumsum([1 if is_tp else 0 for _, is_tp in ranked])
    fp = np.cumsum([0 if is_tp else 1 for _, is_tp in ranked])
    recall = tp / num_gt
    precision = tp / (tp + fp)
    rec_interp = np.linspace(0.0, 1.0, 101)
    prec = np.interp(rec_interp, recall, precision, right=0.0)
    prec = prec[round(100 * MIN_RECALL) + 1:]
    prec = np.clip(prec - MIN_PRECISION, 0.0, None)
    return float(prec.mean() / (1.0 - MIN_PRECISION))


def _aligned_iou(dims_a: np.ndarray, dims_b: np.ndarray) -> float:
    """IoU of two boxes after aligning centers and yaw."""
    inter = float(np.prod(np.minimum(dims_a, dims_b)))
    va, vb = float(np.prod(dims_a)), float(np.prod(dims_b))
    return inter / (va + vb - inter)


def tp_errors(matched_pairs) -> TPErrors:
    """Average TP errors over (pred, gt) box pairs; all 1.0 when empty."""
    if not matched_pairs:
        return TPErrors(1.0, 1.0, 1.0, 1.0, 1.0)
    ate = ase = aoe = ave = acc = 0.0
    for pred, gt in matched_pairs:
        ate += bev_distance(pred, gt)
        ase += 1.0 - _aligned_iou(pred.dims, gt.dims)
        aoe += abs(normalize_angle(pred.yaw - gt.yaw))
        ave += float(np.linalg.norm(pred.velocity - gt.velocity))
        acc += 1.0 if pred.attribute_id == gt.attribute_id else 0.0
    n = len(matched_pairs)
    return TPErrors(ate / n, ase / n, aoe / n, ave / n, 1.0 - acc / n)


def nds(mean_ap: float, errors) -> float:
    """Composite score: (5 * mAP + sum over errors of (1 - min(1, err))) / 10."""
    errs = list(errors.as_tuple() if isinstance(errors, TPErrors) else errors)
    if len(errs) != 5:
        raise ValueError("expected five TP errors")
    return (5.0 * mean_ap + sum(1.0 - min(1.0, e) for e in errs)) / 10.0


def evaluate(pred_scenes, gt_scenes,
             thresholds=DEFAULT_DIST_THRESHOLDS) -> MetricReport:
    """Evaluate per-scene prediction lists against per-scene GT lists.

    Classes with zero GT anywhere are excluded from the averages. TP errors
    use the matches at the 2 m threshold.
    """
    if len(pred_scenes) != len(gt_scenes):
        raise ValueError("prediction and GT scene counts differ")
    classes = sorted({b.class_id for scene in gt_scenes for b in scene})
    num_gt = {c: sum(1 for scene in gt_scenes for b in scene if b.class_id == c)
              for c in classes}

    ap: dict = {}
    class_errors: dict = {}
    for c in classes:
        for t in thresholds:
            scored = []
            for preds, gts in zip(pred_scenes, gt_scenes):
                cpreds = [p for p in preds if p.class_id == c]
                cgts = [g for g in gts if g.class_id == c]
                matches, unmatched, _ = match_detections(cpreds, cgts, t)
                matched_idx = {i for i, _ in matches}
                for i, p in enumerate(cpreds):
                    scored.append((p.score, i in matched_idx))
            ap[(c, t)] = average_precision(scored, num_gt[c])
        pairs = []
        for preds, gts in zip(pred_scenes, gt_scenes):
            cpreds = [p for p in preds if p.class_id == c]
            cgts = [g for g in gts if g.class_id == c]
            matches, _, _ = match_detections(cpreds, cgts, TP_ERROR_THRESHOLD)
            pairs.extend((cpreds[i], cgts[j]) for i, j in matches)
        class_errors[c] = tp_errors(pairs)

    if classes:
        mean_ap = float(np.mean([ap[(c, t)] for c in classes for t in thresholds]))
        mean_errors = TPErrors(*(float(np.mean([class_errors[c].as_tuple()[k]
                                                for c in classes]))
                                 for k in range(5)))
    else:
        mean_ap = 0.0
        mean_errors = TPErrors(1.0, 1.0, 1.0, 1.0, 1.0)
    score = nds(mean_ap, mean_errors)
    return MetricReport(ap=ap, mean_ap=mean_ap, class_errors=class_errors,
                        mean_errors=mean_errors, nds=score,
                        classes=tuple(classes), thresholds=tuple(thresholds),
                        num_gt=num_gt)
