"""Turn wide weld segmentation masks into tiled box annotations."""

import logging
from pathlib import Path

import numpy as np

from errors import ContractError
from imaging import read_mask_png, read_png, write_png
from masks import split_tiles, trace_regions, write_rle

from .dataset import GT_FILENAME, IMAGES_DIR, MASKS_DIR
from .formats import GroundTruthRecord, write_ground_truth

logger = logging.getLogger(__name__)

DEFAULT_TILES = 8


def tile_annotations(mask: np.ndarray, tiles: int = DEFAULT_TILES, *, stem: str = "mask"):
    """Yield ``(tile_id, tile_mask, regions)`` per horizontal tile.

    Regions are traced inside each tile, so a blob crossing a tile edge yields one
    annotation per tile it touches.
    """
    for k, tile in enumerate(split_tiles(np.asarray(mask, dtype=bool), tiles)):
        tile_id = stem if tiles == 1 else f"{stem}_t{k}"
        yield tile_id, tile, trace_regions(tile)


def masks_to_records(
    mask_dir: str | Path,
    out_dir: str | Path,
    tiles: int = DEFAULT_TILES,
    *,
    image_dir: str | Path | None = None,
    class_id: int = 1,
) -> list[GroundTruthRecord]:
    """Convert every ``*.png`` mask in ``mask_dir`` into a dataset directory at ``out_dir``.

    With ``image_dir`` the X-ray image of the same file name is tiled alongside its mask.
    """
    src = Path(mask_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for mask_path in sorted(src.glob("*.png")):
        mask = read_mask_png(mask_path)
        image_tiles = None
        if image_dir is not None:
            image_path = Path(image_dir) / mask_path.name
            image = read_png(image_path)
            if image.shape != mask.shape:
                raise ContractError(f"{image_path} is {image.shape}, its mask {mask_path} is {mask.shape}")
            image_tiles = split_tiles(image, tiles)
            bit_depth = 16 if image.max() > 255 else 8
            (out / IMAGES_DIR).mkdir(exist_ok=True)

        for k, (tile_id, tile, regions) in enumerate(tile_annotations(mask, tiles, stem=mask_path.stem)):
            if image_tiles is not None:
                write_png(out / IMAGES_DIR / f"{tile_id}.png", image_tiles[k], bit_depth)
            tile_h, tile_w = tile.shape
            for j, region in enumerate(regions):
                (out / MASKS_DIR).mkdir(exist_ok=True)
                mask_ref = f"{MASKS_DIR}/{tile_id}_{j}.rle"
                write_rle(out / mask_ref, region.to_mask(tile_w, tile_h))
                x1, y1, x2, y2 = region.box.as_tuple()
                records.append(
                    GroundTruthRecord(image_id=tile_id, class_id=class_id, x1=x1, y1=y1, x2=x2, y2=y2, mask=mask_ref)
                )
        logger.debug("%s: %d annotations so far", mask_path.name, len(records))

    write_ground_truth(out / GT_FILENAME, records)
    logger.info("Converted masks in %s into %d boxes", src, len(records))
    return records
