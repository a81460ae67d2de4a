"""Positive/negative RoI sampling."""

import numpy as np
import numpy.typing as npt

from errors import ContractError

from .matching import MatchResult


def sample_rois(
    match: MatchResult,
    total: int = 100,
    pos_fraction: float = 0.25,
    rng_seed: int | None = 0,
) -> npt.NDArray[np.int64]:
    """Sample up to ``total`` anchor indices, at most ``round(total * pos_fraction)`` positive.

    Positives come first in the returned array, then negatives. Ignored anchors are never drawn.
    """
    if total < 1:
        raise ContractError(f"sample_rois total must be at least 1, got {total}")
    rng = np.random.default_rng(rng_seed)

    positives = match.positive_indices
    negatives = match.negative_indices
    n_pos = min(len(positives), int(round(total * pos_fraction)))
    n_neg = min(len(negatives), total - n_pos)

    chosen_pos = rng.choice(positives, size=n_pos, replace=False) if n_pos else np.empty(0, dtype=np.int64)
    chosen_neg = rng.choice(negatives, size=n_neg, replace=False) if n_neg else np.empty(0, dtype=np.int64)
    return np.concatenate([chosen_pos, chosen_neg]).astype(np.int64)
