"""Training objectives as pure numeric functions, with analytic gradients.

No training loop exists in this library; the gradients are provided so the
losses can be verified against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch

EPS = 1e-7  # clamp keeping logs finite


@dataclass(frozen=True)
class LossConfig:
    alpha_focal: float = 2.0
    beta_focal: float = 4.0

    def __post_init__(self):
        if self.alpha_focal < 0 or self.beta_focal < 0:
            raise ValueError("focal exponents must be non-negative")


def _check_shapes(pred, target):
    if pred.shape != target.shape:
        raise ShapeMismatch(f"{pred.shape} vs {target.shape}")


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, EPS, 1.0 - EPS)


def focal_loss(pred: np.ndarray, gt: np.ndarray,
               cfg: LossConfig = LossConfig()) -> float:
    """Penalty-reduced focal loss over a keypoint heatmap.

    Cells with gt exactly 1 are positives; everywhere else the Gaussian tail
    value (1 - gt)^beta down-weights the negative term. Normalized by the
    positive count (at least 1).
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _check_shapes(pred, gt)
    p = _clamp(pred)
    pos = gt == 1.0
    a, b = cfg.alpha_focal, cfg.beta_focal
    pos_term = np.where(pos, (1.0 - p) ** a * np.log(p), 0.0)
    neg_term = np.where(~pos, (1.0 - gt) ** b * p ** a * np.log(1.0 - p), 0.0)
    n = max(int(pos.sum()), 1)
    return float(-(pos_term.sum() + neg_term.sum()) / n)


def focal_loss_grad(pred: np.ndarray, gt: np.ndarray,
                    cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Analytic d(focal_loss)/d(pred)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _check_shapes(pred, gt)
    p = _clamp(pred)
    pos = gt == 1.0
    a, b = cfg.alpha_focal, cfg.beta_focal
    d_pos = -a * (1.0 - p) ** (a - 1.0) * np.log(p) + (1.0 - p) ** a / p
    d_neg = (1.0 - gt) ** b * (a * p ** (a - 1.0) * np.log(1.0 - p) - p ** a / (1.0 - p))
    n = max(int(pos.sum()), 1)
    grad = np.where(pos, d_pos, d_neg)
    return -grad / n


def l1_loss(pred: np.ndarray, target: np.ndarray, mask=None) -> float:
    """Mean absolute error over masked entries; 0 when the mask is empty."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    mask = np.ones(pred.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    _check_shapes(pred, mask)
    n = int(mask.sum())
    if n == 0:
        return 0.0
    return float(np.abs(pred - target)[mask].sum() / n)


def l1_loss_grad(pred: np.ndarray, target: np.ndarray, mask=None) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    mask = np.ones(pred.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        return np.zeros(pred.shape)
    return np.where(mask, np.sign(pred - target), 0.0) / n


def bce_loss(pred: np.ndarray, target: np.ndarray, mask=None) -> float:
    """Mean binary cross-entropy over masked entries; predictions are eps-clamped."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    mask = np.ones(pred.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    _check_shapes(pred, mask)
    n = int(mask.sum())
    if n == 0:
        return 0.0
    p = _clamp(pred)
    terms = -(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))
    return float(terms[mask].sum() / n)


def bce_loss_grad(pred: np.ndarray, target: np.ndarray, mask=None) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    mask = np.ones(pred.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        return np.zeros(pred.shape)
    p = _clamp(pred)
    grad = (p - target) / (p * (1.0 - p))
    return np.where(mask, grad, 0.0) / n
