import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import ContractError
from geometry import AnchorSet, Box, encode_box, iou
from targets import (
    IGNORE,
    NEGATIVE,
    POSITIVE,
    LossValue,
    LossWeights,
    MatchConfig,
    MatchResult,
    classification_loss,
    location_loss,
    mask_loss,
    match_anchors,
    mean_total_loss,
    sample_rois,
    select_class_mask,
    sigmoid,
    smooth_l1,
    total_loss,
)

FD_STEP = 1e-6


def numeric_gradient(fn, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up, down = x.copy(), x.copy()
        up[idx] += FD_STEP
        down[idx] -= FD_STEP
        grad[idx] = (fn(up) - fn(down)) / (2 * FD_STEP)
    return grad


# ====================================================================
# Matching and sampling
# ====================================================================


def _anchors(*boxes):
    return AnchorSet.from_boxes(np.array(boxes, dtype=float))


def test_match_labels_and_targets():
    anchors = _anchors([0, 0, 10, 10], [0, 0, 10, 20], [50, 50, 60, 60])
    result = match_anchors(anchors, [Box(0, 0, 10, 10)])
    assert result.labels.tolist() == [POSITIVE, POSITIVE, NEGATIVE]
    assert result.matched_gt.tolist() == [0, 0, -1]
    assert np.allclose(result.targets[0], 0.0)
    assert result.targets[1] == pytest.approx([0.0, -0.25, 0.0, math.log(0.5)])
    assert np.all(np.isnan(result.targets[2]))
    assert result.positive_indices.tolist() == [0, 1]


def test_match_forces_best_anchor_for_unmatched_gt():
    anchors = _anchors([0, 0, 10, 10], [100, 100, 110, 110])
    result = match_anchors(anchors, [Box(0, 0, 30, 30)])
    assert result.max_iou[0] == pytest.approx(100 / 900)
    assert result.labels.tolist() == [POSITIVE, NEGATIVE]

    no_force = match_anchors(anchors, [Box(0, 0, 30, 30)], config=MatchConfig(force_best_anchor=False))
    assert no_force.labels.tolist() == [NEGATIVE, NEGATIVE]


def test_match_ties_go_to_lowest_gt():
    anchors = _anchors([0, 0, 10, 10])
    result = match_anchors(anchors, [Box(0, 0, 10, 20), Box(0, -10, 10, 10)])
    assert result.matched_gt.tolist() == [0]


def test_match_ignore_band():
    anchors = _anchors([0, 0, 10, 10], [0, 0, 10, 30], [60, 60, 70, 70])
    cfg = MatchConfig(pos_iou=0.5, neg_iou=0.3, force_best_anchor=False)
    result = match_anchors(anchors, [Box(0, 0, 10, 12)], config=cfg)
    # IoUs: 10/12, 12/30 = 0.4 and 0.
    assert result.labels.tolist() == [POSITIVE, IGNORE, NEGATIVE]


def test_match_without_ground_truth():
    result = match_anchors(_anchors([0, 0, 10, 10]), [])
    assert result.labels.tolist() == [NEGATIVE]
    assert len(result) == 1


def test_match_config_rejects_inverted_band():
    with pytest.raises(ValidationError):
        MatchConfig(pos_iou=0.4, neg_iou=0.6)



def _pairwise_labels(anchors: np.ndarray, gt: list[Box], pos_iou: float = 0.5):
    """Labels and matches from scalar IoU over every (anchor, ground truth) pair."""
    table = [[iou(Box(*a), g) for g in gt] for a in anchors]
    labels, matched = [], []
    for row in table:
        best = 0
        for g in range(1, len(gt)):
            if row[g] > row[best]:
                best = g
        hit = row[best] >= pos_iou
        labels.append(POSITIVE if hit else NEGATIVE)
        matched.append(best if hit else -1)
    for g in range(len(gt)):
        column = [row[g] for row in table]
        if max(column) >= pos_iou:
            continue
        a = column.index(max(column))
        if column[a] > 0.0 and labels[a] != POSITIVE:
            labels[a], matched[a] = POSITIVE, g
    return labels, matched


def test_match_agrees_with_pairwise_iou(make_boxes):
    anchors = make_boxes(200)
    gt = [Box(*row) for row in make_boxes(5)]
    result = match_anchors(AnchorSet.from_boxes(anchors), gt)
    labels, matched = _pairwise_labels(anchors, gt)
    assert result.labels.tolist() == labels
    assert result.matched_gt.tolist() == matched
    for a in result.positive_indices:
        expected = encode_box(gt[result.matched_gt[a]], Box(*anchors[a])).as_array()
        assert np.allclose(result.targets[a], expected, rtol=1e-12, atol=1e-12)


def test_match_labels_ignore_gt_order(rng, make_boxes):
    anchors = AnchorSet.from_boxes(make_boxes(200))
    gt = [Box(*row) for row in make_boxes(5)]
    base = match_anchors(anchors, gt)
    for _ in range(5):
        order = rng.permutation(len(gt))
        shuffled = match_anchors(anchors, [gt[k] for k in order])
        assert np.array_equal(shuffled.labels, base.labels)
        by_threshold = base.max_iou >= 0.5
        assert np.array_equal(order[shuffled.matched_gt[by_threshold]], base.matched_gt[by_threshold])


def test_sample_rois_respects_fraction():
    anchors = _anchors(*[[i, 0, i + 10, 10] for i in range(0, 400, 20)])
    gt = [Box(i, 0, i + 10, 10) for i in range(0, 400, 40)]
    match = match_anchors(anchors, gt)
    chosen = sample_rois(match, total=8, pos_fraction=0.25, rng_seed=3)
    assert len(chosen) == 8
    labels = match.labels[chosen]
    assert labels[:2].tolist() == [POSITIVE, POSITIVE]
    assert np.all(labels[2:] == NEGATIVE)
    assert len(set(chosen.tolist())) == 8
    assert np.array_equal(chosen, sample_rois(match, total=8, pos_fraction=0.25, rng_seed=3))


def test_sample_rois_one_to_three():
    labels = np.array([POSITIVE] * 50 + [NEGATIVE] * 500, dtype=np.int8)
    match = MatchResult(
        labels=labels,
        matched_gt=np.where(labels == POSITIVE, 0, -1),
        targets=np.zeros((550, 4)),
        max_iou=np.where(labels == POSITIVE, 0.8, 0.1),
    )
    chosen = sample_rois(match, rng_seed=11)
    assert len(chosen) == 100
    assert np.count_nonzero(labels[chosen] == POSITIVE) == 25
    assert np.count_nonzero(labels[chosen] == NEGATIVE) == 75


def test_sample_rois_rejects_empty_total():
    match = match_anchors(_anchors([0, 0, 10, 10]), [])
    with pytest.raises(ContractError):
        sample_rois(match, total=0)


# ====================================================================
# Losses
# ====================================================================


@pytest.mark.parametrize(
    "x, value, slope",
    [(0.5, 0.125, 0.5), (-0.5, 0.125, -0.5), (2.0, 1.5, 1.0), (-3.0, 2.5, -1.0)],
)
def test_smooth_l1_pieces(x, value, slope):
    assert smooth_l1(x) == pytest.approx((value, slope))


def test_location_loss_gradient_matches_finite_difference(rng):
    pred = rng.normal(size=4) * 2
    target = rng.normal(size=4)
    loss = location_loss(pred, target, 1)
    numeric = numeric_gradient(lambda p: location_loss(p, target, 1).value, pred)
    assert np.allclose(loss.gradient, numeric, atol=1e-6)


def test_location_loss_gated_by_p_star():
    loss = location_loss([1, 2, 3, 4], [0, 0, 0, 0], 0)
    assert loss.value == 0.0
    assert np.all(loss.gradient == 0.0)


def test_location_loss_rejects_bad_shapes():
    with pytest.raises(ContractError):
        location_loss([1, 2, 3], [0, 0, 0, 0], 1)


@pytest.mark.parametrize("p_star", [0, 1])
def test_classification_loss_gradient(p_star):
    loss = classification_loss(0.3, p_star)
    expected = -math.log(0.3) if p_star else -math.log(0.7)
    assert loss.value == pytest.approx(expected)
    numeric = numeric_gradient(lambda p: classification_loss(float(p[0]), p_star).value, np.array([0.3]))
    assert loss.gradient == pytest.approx(numeric, rel=1e-6)


def test_classification_loss_clamps_extremes():
    assert math.isfinite(classification_loss(0.0, 1).value)
    assert math.isfinite(classification_loss(1.0, 0).value)


def test_total_loss_weights():
    loc = LossValue(value=2.0, gradient=np.array([1.0, 1.0, 1.0, 1.0]))
    cls = LossValue(value=3.0, gradient=np.array([-2.0]))
    total = total_loss(loc, cls, LossWeights(alpha=0.5, beta=2.0))
    assert total.value == pytest.approx(7.0)
    assert total.gradient.tolist() == [0.5, 0.5, 0.5, 0.5, -4.0]


def test_mean_total_loss_averages():
    loc = LossValue(value=1.0, gradient=np.ones(4))
    cls = LossValue(value=1.0, gradient=np.ones(1))
    mean = mean_total_loss([(loc, cls), (loc, LossValue(value=3.0, gradient=np.ones(1)))])
    assert mean.value == pytest.approx(3.0)
    assert mean.gradient.shape == (10,)
    assert np.allclose(mean.gradient, 0.5)
    with pytest.raises(ContractError):
        mean_total_loss([])


def test_loss_weights_validation():
    with pytest.raises(ValidationError):
        LossWeights(alpha=0.0, beta=0.0)


def test_sigmoid_is_stable():
    out = sigmoid([-1000.0, 0.0, 1000.0])
    assert out.tolist() == [0.0, 0.5, 1.0]


def test_mask_loss_gradient_and_class_slice(rng):
    logits = rng.normal(size=(6, 6, 3))
    target = rng.random((6, 6)) > 0.5
    loss = mask_loss(logits, target, class_of_roi=1)
    assert loss.gradient.shape == logits.shape
    assert np.all(loss.gradient[:, :, 0] == 0.0)
    assert np.all(loss.gradient[:, :, 2] == 0.0)
    numeric = numeric_gradient(lambda z: mask_loss(z, target, 1).value, logits)
    assert np.allclose(loss.gradient, numeric, atol=1e-7)


def test_mask_loss_on_single_slice():
    logits = np.zeros((4, 4))
    loss = mask_loss(logits, np.ones((4, 4)))
    assert loss.value == pytest.approx(math.log(2.0))
    assert loss.gradient.shape == (4, 4)


def test_mask_loss_contract_errors():
    with pytest.raises(ContractError):
        mask_loss(np.zeros((4, 4, 2)), np.zeros((5, 5)))
    with pytest.raises(ContractError):
        mask_loss(np.zeros((4, 4, 2)), np.zeros((4, 4)), class_of_roi=2)
    with pytest.raises(ContractError, match="slice 1"):
        mask_loss(np.zeros((4, 4, 2)), np.zeros((4, 4)), class_of_roi=0, predicted_class_slice=1)
    matched = mask_loss(np.zeros((4, 4, 2)), np.zeros((4, 4)), class_of_roi=1, predicted_class_slice=1)
    assert matched.value == pytest.approx(math.log(2.0))


def test_select_class_mask():
    logits = np.zeros((2, 2, 2))
    logits[:, :, 1] = 100.0
    assert np.allclose(select_class_mask(logits, 1), 1.0)
    assert np.allclose(select_class_mask(logits, 0), 0.5)
