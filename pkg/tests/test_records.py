import json
import logging

import numpy as np
import pytest
from pydantic import ValidationError

from errors import ContractError, RecordParseError
from imaging import read_png, write_mask_png, write_png
from masks import read_rle
from records import (
    DetectionRecord,
    GroundTruthRecord,
    echo_detections,
    ingest_gdxray,
    load_dataset,
    masks_to_records,
    parse_row,
    read_detections,
    read_ground_truth,
    read_series,
    tile_annotations,
    to_detections,
    to_ground_truths,
    write_dataset,
    write_detections,
    write_ground_truth,
)

# ====================================================================
# Ground-truth CSV and detection JSON-lines
# ====================================================================


def test_ground_truth_csv_round_trip(tmp_path):
    records = [
        GroundTruthRecord(image_id="a", class_id=1, x1=10, y1=20, x2=30, y2=40),
        GroundTruthRecord(image_id="b", class_id=2, x1=0.5, y1=1.25, x2=3.0, y2=4.0, mask="masks/b_0.rle"),
    ]
    path = write_ground_truth(tmp_path / "gt.csv", records)
    assert path.read_text().splitlines() == [
        "image_id,class_id,x1,y1,x2,y2,mask",
        "a,1,10,20,30,40,",
        "b,2,0.5,1.25,3,4,masks/b_0.rle",
    ]
    assert read_ground_truth(path) == records


def test_ground_truth_malformed_row_names_line(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("image_id,class_id,x1,y1,x2,y2,mask\na,1,0,0,5,5,\n\na,1,9,0,5,5,\n")
    with pytest.raises(RecordParseError) as info:
        read_ground_truth(path)
    assert info.value.line == 4
    assert str(info.value).startswith(f"{path}:4: ")


def test_ground_truth_rejects_bad_header_and_columns(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("id,cls\n")
    with pytest.raises(RecordParseError) as info:
        read_ground_truth(path)
    assert info.value.line == 1

    path.write_text("image_id,class_id,x1,y1,x2,y2,mask\na,1,0,0\n")
    with pytest.raises(RecordParseError, match="expected 7 columns"):
        read_ground_truth(path)


def test_detections_round_trip_with_key_order(tmp_path):
    records = [DetectionRecord(image_id="a", class_id=1, score=0.75, x1=1, y1=2, x2=3, y2=4)]
    path = write_detections(tmp_path / "det.jsonl", records)
    line = path.read_text().splitlines()[0]
    assert list(json.loads(line)) == ["image_id", "class_id", "score", "x1", "y1", "x2", "y2", "mask"]
    assert read_detections(path) == records


def test_detections_parse_error_names_line(tmp_path):
    path = tmp_path / "det.jsonl"
    good = DetectionRecord(image_id="a", class_id=1, score=0.5, x1=0, y1=0, x2=1, y2=1).model_dump_json()
    path.write_text(f"{good}\n\n{{\"image_id\": \"a\", \"class_id\": 1, \"score\": 1.5}}\n")
    with pytest.raises(RecordParseError) as info:
        read_detections(path)
    assert info.value.line == 3


def test_record_validation():
    with pytest.raises(ValidationError):
        GroundTruthRecord(image_id="a,b", class_id=1, x1=0, y1=0, x2=1, y2=1)
    with pytest.raises(ValidationError):
        GroundTruthRecord(image_id="a", class_id=-1, x1=0, y1=0, x2=1, y2=1)
    with pytest.raises(ValidationError):
        GroundTruthRecord(image_id="a", class_id=1, x1=0, y1=0, x2=float("inf"), y2=1)
    with pytest.raises(ValidationError):
        DetectionRecord(image_id="a", class_id=1, score=0.5, x1=0, y1=0, x2=1, y2=1, extra=3)
    assert GroundTruthRecord(image_id="a", class_id=1, x1=0, y1=0, x2=1, y2=1, mask="").mask is None


# ====================================================================
# Dataset directories
# ====================================================================


def test_dataset_round_trip(tmp_path, small_dataset):
    records = write_dataset(small_dataset, tmp_path / "ds")
    assert len(records) == sum(len(item.annotations) for item in small_dataset)
    loaded = load_dataset(tmp_path / "ds")
    assert [item.image_id for item in loaded] == [item.image_id for item in small_dataset]
    for a, b in zip(loaded, small_dataset, strict=True):
        assert np.array_equal(a.image, np.clip(np.round(b.image), 0, 255))
        assert a.boxes == b.boxes
        for ann_a, ann_b in zip(a.annotations, b.annotations, strict=True):
            assert np.array_equal(ann_a.mask, ann_b.mask)


def test_load_dataset_requires_images(tmp_path):
    write_ground_truth(
        tmp_path / "ground_truth.csv", [GroundTruthRecord(image_id="ghost", class_id=1, x1=0, y1=0, x2=1, y2=1)]
    )
    (tmp_path / "images").mkdir()
    with pytest.raises(ContractError, match="ghost"):
        load_dataset(tmp_path)


def test_conversion_resolves_masks_against_base_dir(tmp_path, small_dataset):
    records = write_dataset(small_dataset, tmp_path)
    gts = to_ground_truths(records, tmp_path)
    dets = to_detections(echo_detections(records, score=0.9), tmp_path)
    assert all(g.mask is not None for g in gts)
    assert [d.score for d in dets] == [0.9] * len(gts)
    assert np.array_equal(dets[0].mask, gts[0].mask)
    assert dets[0].box == gts[0].box


# ====================================================================
# GDXray ingestion
# ====================================================================


def test_parse_row_orderings():
    assert parse_row([1, 10, 30, 20, 40], "gdxray") == (1, (10, 20, 30, 40))
    assert parse_row([1, 10, 20, 30, 40], "xyxy") == (1, (10, 20, 30, 40))
    with pytest.raises(ValueError):
        parse_row([1.5, 0, 1, 0, 1], "gdxray")
    with pytest.raises(ValueError):
        parse_row([1, 0, 1, 0], "gdxray")


def test_ingest_gdxray(tmp_path, caplog):
    series = tmp_path / "Castings" / "C0001"
    series.mkdir(parents=True)
    (series / "ground_truth.txt").write_text("# index x1 x2 y1 y2\n1 10 30 20 40\n\n2 50 40 10 20\n3,5,9,1,4\n")
    other = tmp_path / "Castings" / "C0002"
    other.mkdir()
    (other / "ground_truth.txt").write_text("7 0 8 0 8\n")

    with caplog.at_level(logging.WARNING):
        records = ingest_gdxray(tmp_path)
    assert [r.image_id for r in records] == ["C0001_0001", "C0001_0003", "C0002_0007"]
    assert records[0].to_box().as_tuple() == (10, 20, 30, 40)
    assert records[1].to_box().as_tuple() == (5, 1, 9, 4)
    assert all(r.class_id == 1 for r in records)
    assert "rejected box" in caplog.text


def test_read_series_reports_bad_line(tmp_path):
    path = tmp_path / "ground_truth.txt"
    path.write_text("1 10 30 20 40\n2 oops 1 2 3\n")
    with pytest.raises(RecordParseError) as info:
        read_series(path, series="C0001")
    assert info.value.line == 2


# ====================================================================
# Weld masks
# ====================================================================


def test_tile_annotations_splits_crossing_blob():
    mask = np.zeros((6, 16), dtype=bool)
    mask[1:3, 6:10] = True
    tiles = list(tile_annotations(mask, 2, stem="w"))
    assert [tile_id for tile_id, _, _ in tiles] == ["w_t0", "w_t1"]
    assert [r.box.as_tuple() for r in tiles[0][2]] == [(6, 1, 8, 3)]
    assert [r.box.as_tuple() for r in tiles[1][2]] == [(0, 1, 2, 3)]
    (single,) = tile_annotations(mask, 1, stem="w")
    assert single[0] == "w"


def test_masks_to_records_tiles_images(tmp_path):
    mask_dir, image_dir = tmp_path / "masks_in", tmp_path / "images_in"
    mask_dir.mkdir()
    image_dir.mkdir()
    mask = np.zeros((96, 4000), dtype=bool)
    mask[10:20, 100:130] = True
    mask[40:60, 990:1010] = True
    write_mask_png(mask_dir / "W0001.png", mask)
    write_png(image_dir / "W0001.png", np.full((96, 4000), 1000.0), bit_depth=16)

    out = tmp_path / "out"
    records = masks_to_records(mask_dir, out, 8, image_dir=image_dir)
    assert [(r.image_id, r.to_box().as_tuple()) for r in records] == [
        ("W0001_t0", (100, 10, 130, 20)),
        ("W0001_t1", (490, 40, 500, 60)),
        ("W0001_t2", (0, 40, 10, 60)),
    ]
    tile = read_png(out / "images" / "W0001_t1.png")
    assert tile.shape == (96, 500)
    assert tile.max() == 1000.0
    assert read_rle(out / records[0].mask).shape == (96, 500)
    assert read_ground_truth(out / "ground_truth.csv") == records


def test_masks_to_records_shape_mismatch(tmp_path):
    (tmp_path / "m").mkdir()
    (tmp_path / "i").mkdir()
    write_mask_png(tmp_path / "m" / "a.png", np.zeros((4, 8), dtype=bool))
    write_png(tmp_path / "i" / "a.png", np.zeros((4, 9)))
    with pytest.raises(ContractError):
        masks_to_records(tmp_path / "m", tmp_path / "out", 2, image_dir=tmp_path / "i")
