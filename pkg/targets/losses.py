"""Detection and mask losses with analytic gradients.

Every loss returns a ``LossValue`` whose gradient is taken with respect to the
prediction it was given (encoding, probability or mask logits) and has the
same shape as that prediction.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import ContractError

PROB_EPS = 1e-12
MASK_SIZE = 28


@dataclass(kw_only=True, frozen=True, eq=False)
class LossValue:
    value: float
    gradient: npt.NDArray[np.float64]


class LossWeights(BaseModel):
    """Weights balancing localization (alpha) and classification (beta)."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=1.0, ge=0.0)
    beta: float = Field(default=1.0, ge=0.0)

    @model_validator(mode="after")
    def _not_both_zero(self) -> "LossWeights":
        if self.alpha == 0.0 and self.beta == 0.0:
            raise ValueError("alpha and beta cannot both be zero")
        return self


def smooth_l1(x: float) -> tuple[float, float]:
    """Value and derivative: quadratic for |x| < 1, linear beyond."""
    if abs(x) < 1.0:
        return 0.5 * x * x, x
    return abs(x) - 0.5, math.copysign(1.0, x)


def location_loss(
    pred_encoding: npt.ArrayLike,
    target_encoding: npt.ArrayLike,
    p_star: int,
    smooth_l1_fn=smooth_l1,
) -> LossValue:
    pred = np.asarray(pred_encoding, dtype=np.float64).ravel()
    target = np.asarray(target_encoding, dtype=np.float64).ravel()
    if pred.shape != (4,) or target.shape != (4,):
        raise ContractError(f"Encodings must have length 4, got {pred.shape} and {target.shape}")
    gradient = np.zeros(4, dtype=np.float64)
    if p_star == 0:
        return LossValue(value=0.0, gradient=gradient)

    value = 0.0
    for i in range(4):
        v, d = smooth_l1_fn(float(target[i] - pred[i]))
        value += v
        # d/dpred of smooth_l1(target - pred)
        gradient[i] = -d
    return LossValue(value=value, gradient=gradient)


def classification_loss(predicted_prob: float, p_star: int) -> LossValue:
    """Binary cross-entropy on an objectness probability, clamped to [eps, 1 - eps]."""
    p = min(max(float(predicted_prob), PROB_EPS), 1.0 - PROB_EPS)
    value = -(p_star * math.log(p) + (1 - p_star) * math.log(1.0 - p))
    grad = -p_star / p + (1 - p_star) / (1.0 - p)
    return LossValue(value=value, gradient=np.array([grad], dtype=np.float64))


def total_loss(loc: LossValue, cls: LossValue, weights: LossWeights | None = None) -> LossValue:
    """alpha * L_loc + beta * L_cls; the gradient is the concatenation [alpha * dloc, beta * dcls]."""
    w = weights or LossWeights()
    return LossValue(
        value=w.alpha * loc.value + w.beta * cls.value,
        gradient=np.concatenate([w.alpha * loc.gradient.ravel(), w.beta * cls.gradient.ravel()]),
    )


def mean_total_loss(components: Sequence[tuple[LossValue, LossValue]], weights: LossWeights | None = None) -> LossValue:
    """Arithmetic mean of per-anchor totals over an anchor batch."""
    if not components:
        raise ContractError("mean_total_loss needs at least one anchor")
    totals = [total_loss(loc, cls, weights) for loc, cls in components]
    n = len(totals)
    return LossValue(
        value=sum(t.value for t in totals) / n,
        gradient=np.concatenate([t.gradient for t in totals]) / n,
    )


def sigmoid(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _as_slices(logits: npt.ArrayLike) -> npt.NDArray[np.float64]:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ContractError(f"Mask logits must be MxM or MxMxK, got shape {arr.shape}")
    return arr


def mask_loss(
    predicted_logits: npt.ArrayLike,
    gt_mask: npt.ArrayLike,
    class_of_roi: int = 0,
    *,
    predicted_class_slice: int | None = None,
) -> LossValue:
    """Mean per-pixel sigmoid cross-entropy on the slice of the RoI's ground-truth class.

    ``predicted_logits`` is MxM or MxMxK; the gradient has the same shape and is zero on
    every other class slice. ``predicted_class_slice``, when given, must equal ``class_of_roi``.
    """
    if predicted_class_slice is not None and predicted_class_slice != class_of_roi:
        raise ContractError(
            f"Mask loss is defined on the ground-truth class slice {class_of_roi}, got slice {predicted_class_slice}"
        )
    logits = _as_slices(predicted_logits)
    target = np.asarray(gt_mask, dtype=np.float64)
    if target.shape != logits.shape[:2]:
        raise ContractError(f"Mask target shape {target.shape} does not match logits {logits.shape[:2]}")
    if not 0 <= class_of_roi < logits.shape[2]:
        raise ContractError(f"Class slice {class_of_roi} out of range for {logits.shape[2]} classes")

    z = logits[:, :, class_of_roi]
    n = z.size
    # max(z, 0) - z*y + log(1 + exp(-|z|)) is the overflow-free form of the BCE.
    per_pixel = np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))
    gradient = np.zeros_like(logits)
    gradient[:, :, class_of_roi] = (sigmoid(z) - target) / n
    if np.ndim(predicted_logits) == 2:
        gradient = gradient[:, :, 0]
    return LossValue(value=float(per_pixel.mean()), gradient=gradient)


def select_class_mask(predicted_logits: npt.ArrayLike, class_index: int) -> npt.NDArray[np.float64]:
    """Per-pixel probabilities of the predicted class's mask slice."""
    logits = _as_slices(predicted_logits)
    if not 0 <= class_index < logits.shape[2]:
        raise ContractError(f"Class slice {class_index} out of range for {logits.shape[2]} classes")
    return sigmoid(logits[:, :, class_index])
