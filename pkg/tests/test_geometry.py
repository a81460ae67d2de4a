import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import ContractError, DomainError
from geometry import (
    AnchorConfig,
    AnchorSet,
    Box,
    BoxEncoding,
    anchor_shapes,
    clip_boxes,
    decode_box,
    decode_boxes,
    encode_box,
    encode_boxes,
    generate_anchors,
    iou,
    iou_matrix,
    nms,
    nms_indices,
    rank_proposals,
    score_order,
    select_proposals,
    top_k,
)

# ====================================================================
# Boxes and IoU
# ====================================================================


def test_iou_of_offset_squares():
    assert iou(Box(0, 0, 2, 2), Box(1, 1, 3, 3)) == pytest.approx(1 / 7)


def test_iou_identical_and_disjoint():
    box = Box(3, 4, 10, 12)
    assert iou(box, box) == 1.0
    assert iou(box, Box(10, 12, 20, 20)) == 0.0


def test_touching_boxes_do_not_overlap():
    assert iou(Box(0, 0, 5, 5), Box(5, 0, 10, 5)) == 0.0


def test_degenerate_box_is_rejected():
    with pytest.raises(DomainError):
        Box(5, 5, 5, 10)
    with pytest.raises(DomainError):
        Box(0, 0, math.nan, 3)


def test_iou_matrix_matches_scalar_iou(make_boxes):
    a = make_boxes(20)
    b = make_boxes(15)
    m = iou_matrix(a, b)
    assert m.shape == (20, 15)
    for i in (0, 7, 19):
        for j in (0, 3, 14):
            assert m[i, j] == pytest.approx(iou(Box(*a[i]), Box(*b[j])))
    assert np.allclose(m, iou_matrix(b, a).T)


def test_iou_matrix_rejects_degenerate_rows():
    with pytest.raises(DomainError):
        iou_matrix(np.array([[0, 0, 0, 5]]), np.array([[0, 0, 1, 1]]))


def test_clip_boxes_and_box_clip():
    clipped = clip_boxes(np.array([[-5.0, -5.0, 20.0, 8.0]]), 10, 10)
    assert clipped.tolist() == [[0.0, 0.0, 10.0, 8.0]]
    assert Box(-5, -5, -1, 3).clip(10, 10) is None
    assert Box(2, 2, 50, 50).clip(10, 10) == Box(2, 2, 10, 10)


# ====================================================================
# Encoding
# ====================================================================


def test_encode_anchor_relative():
    enc = encode_box(Box(5, 0, 25, 10), Box(0, 0, 10, 10))
    assert enc.values == pytest.approx((1.0, 0.0, math.log(2.0), 0.0))


def test_encode_absolute_variant():
    enc = encode_box(Box(8, 8, 24, 24), Box(0, 0, 32, 32), variant="absolute")
    assert enc.values == pytest.approx((0.5, 0.5, math.log(16.0), math.log(16.0)))


@pytest.mark.parametrize("variant", ["anchor_relative", "absolute"])
def test_decode_inverts_encode(make_boxes, variant):
    boxes = make_boxes(50)
    anchors = make_boxes(50)
    back = decode_boxes(encode_boxes(boxes, anchors, variant), anchors, variant)
    assert np.allclose(back, boxes, atol=1e-9)


def test_decode_box_keeps_variant():
    anchor = Box(0, 0, 32, 32)
    enc = BoxEncoding(0.5, 0.5, math.log(16.0), math.log(16.0), variant="absolute")
    box = decode_box(enc, anchor)
    assert box.as_tuple() == pytest.approx((8, 8, 24, 24))


def test_encoding_rejects_non_finite():
    with pytest.raises(DomainError):
        BoxEncoding(0.0, math.inf, 0.0, 0.0)


# ====================================================================
# Anchors
# ====================================================================


def test_default_anchor_grid_count():
    anchors = generate_anchors(AnchorConfig(), 48, 48)
    assert len(anchors) == 48 * 48 * 15 == 34560


def test_anchor_shapes_preserve_area_and_ratio():
    cfg = AnchorConfig()
    shapes = anchor_shapes(cfg)
    assert shapes.shape == (15, 2)
    for k, (w, h) in enumerate(shapes):
        side = cfg.base_size * cfg.scales[k // 3]
        assert w * h == pytest.approx(side * side)
        assert w / h == pytest.approx(cfg.aspect_ratios[k % 3])


def test_anchor_centers_follow_stride():
    anchors = generate_anchors(AnchorConfig(scales=(1.0,), aspect_ratios=(1.0,)), 3, 2)
    first = anchors[0]
    assert first.box.as_tuple() == (-8.0, -8.0, 8.0, 8.0)
    last = anchors[len(anchors) - 1]
    assert (last.grid_x, last.grid_y) == (2, 1)
    assert last.box.center == (32.0, 16.0)


def test_anchor_order_is_scale_major_within_location():
    anchors = generate_anchors(AnchorConfig(), 2, 2)
    assert anchors.scale_index[:15].tolist() == [s for s in range(5) for _ in range(3)]
    assert anchors.aspect_index[:15].tolist() == [0, 1, 2] * 5
    assert anchors.grid_x[15] == 1


def test_anchor_config_validation():
    with pytest.raises(ValidationError):
        AnchorConfig(scales=())
    with pytest.raises(ValidationError):
        AnchorConfig(aspect_ratios=(1.0, -2.0))
    with pytest.raises(ContractError):
        generate_anchors(AnchorConfig(), 0, 5)


# ====================================================================
# NMS
# ====================================================================


def test_nms_drops_duplicates():
    dets = [(Box(0, 0, 10, 10), 0.9), (Box(0, 0, 10, 10), 0.8), (Box(20, 20, 30, 30), 0.7)]
    kept = nms(dets, 0.5)
    assert [score for _, score in kept] == [0.9, 0.7]


def test_nms_keeps_at_threshold():
    # IoU exactly 1/3: overlap must exceed the threshold to suppress.
    boxes = np.array([[0, 0, 2, 1], [1, 0, 3, 1]], dtype=float)
    assert nms_indices(boxes, [0.9, 0.8], 1 / 3).tolist() == [0, 1]
    assert nms_indices(boxes, [0.9, 0.8], 0.3).tolist() == [0]


def test_nms_ties_prefer_lower_index():
    boxes = np.array([[0, 0, 10, 10], [0, 0, 10, 10]], dtype=float)
    assert nms_indices(boxes, [0.5, 0.5], 0.5).tolist() == [0]
    assert score_order([0.2, 0.5, 0.5]).tolist() == [1, 2, 0]


def test_nms_input_validation():
    with pytest.raises(ContractError):
        nms_indices(np.zeros((2, 4)), [1.0], 0.5)
    with pytest.raises(ContractError):
        nms_indices(np.array([[0, 0, 1, 1]]), [math.nan], 0.5)
    with pytest.raises(ContractError):
        nms_indices(np.array([[0, 0, 1, 1]]), [1.0], 1.5)
    assert nms([], 0.5) == []


# ====================================================================
# Proposals
# ====================================================================


def test_rank_proposals_orders_and_limits():
    anchors = AnchorSet.from_boxes(np.array([[0, 0, 10, 10], [0, 0, 10, 11], [40, 40, 50, 50], [60, 60, 70, 70]]))
    deltas = np.zeros((4, 4))
    ranked = rank_proposals(anchors, [0.2, 0.9, 0.8, 0.1], deltas, n=2, image_w=100, image_h=100)
    # Anchor 0 is suppressed by anchor 1; anchor 3 falls outside the top two.
    assert ranked.anchor_indices.tolist() == [1, 2]
    assert ranked.scores.tolist() == [0.9, 0.8]
    assert len(ranked) == 2


def test_rank_proposals_clips_and_filters():
    anchors = AnchorSet.from_boxes(np.array([[90, 90, 120, 120], [200, 200, 210, 210]]))
    ranked = rank_proposals(anchors, [0.5, 0.9], np.zeros((2, 4)), image_w=100, image_h=100, nms_threshold=None)
    assert ranked.anchor_indices.tolist() == [0]
    assert ranked.boxes.tolist() == [[90.0, 90.0, 100.0, 100.0]]


def test_rank_proposals_shape_mismatch():
    anchors = AnchorSet.from_boxes(np.array([[0, 0, 10, 10]]))
    with pytest.raises(ContractError):
        rank_proposals(anchors, [0.5, 0.4], np.zeros((1, 4)))


def test_select_proposals_returns_boxes():
    anchors = generate_anchors(AnchorConfig(), 4, 4)
    scores = np.linspace(0, 1, len(anchors))
    boxes = select_proposals(anchors, scores, np.zeros((len(anchors), 4)), n=5, image_w=64, image_h=64)
    assert 0 < len(boxes) <= 5
    assert all(isinstance(b, Box) and b.x2 <= 64 and b.y2 <= 64 for b in boxes)


def test_select_proposals_depends_only_on_score_order(rng):
    anchors = generate_anchors(AnchorConfig(), 6, 6)
    scores = rng.random(len(anchors))
    deltas = rng.normal(scale=0.2, size=(len(anchors), 4))
    boxes = select_proposals(anchors, scores, deltas, n=50, image_w=96, image_h=96)
    for rescale in (lambda s: 3.0 * s - 7.0, np.exp, lambda s: s**3):
        again = select_proposals(anchors, rescale(scores), deltas, n=50, image_w=96, image_h=96)
        assert again == boxes


def test_top_k():
    dets = [(Box(0, 0, 1, 1), s) for s in (0.1, 0.7, 0.4)]
    assert [s for _, s in top_k(dets, 2)] == [0.7, 0.4]
