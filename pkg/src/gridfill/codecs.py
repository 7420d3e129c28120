"""Codecs that turn each task's native data into RGB tiles and back.

Images are float32 (H, W, 3) arrays in [0, 1]; on disk they are 8-bit
PNG. All real-to-byte conversions round half up so the quantization
bounds asserted in the tests are exact.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import CodecError

# corner colors first, then mid-grid lattice points, per the default palette
_CORNERS = [
    (0, 0, 0),
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (255, 255, 255),
]


def round_half_up(x):
    return np.floor(np.asarray(x) + 0.5)


class ColorCodebook:
    """Bijection between dense class ids and distinct RGB byte triples."""

    def __init__(self, entries):
        ids = [cid for cid, _ in entries]
        colors = [tuple(int(v) for v in rgb) for _, rgb in entries]
        if ids != list(range(len(ids))):
            raise CodecError(f"codebook ids must be dense from 0, got {ids}")
        if len(set(colors)) != len(colors):
            raise CodecError("codebook colors must be pairwise distinct")
        for c in colors:
            if any(v < 0 or v > 255 for v in c):
                raise CodecError(f"codebook color out of byte range: {c}")
        self.colors = np.array(colors, dtype=np.uint8)

    def __len__(self):
        return len(self.colors)

    @property
    def colors_unit(self):
        return self.colors.astype(np.float32) / 255.0

    def serialize(self):
        return ";".join(f"{i}:{r},{g},{b}" for i, (r, g, b) in enumerate(self.colors))

    @classmethod
    def deserialize(cls, text):
        entries = []
        for item in text.split(";"):
            cid, rgb = item.split(":")
            entries.append((int(cid), tuple(int(v) for v in rgb.split(","))))
        return cls(entries)


def default_codebook(n_classes):
    """Maximally separated palette: RGB cube corners, then the mid-grid."""
    colors = list(_CORNERS)
    if n_classes > len(colors):
        for r in (0, 128, 255):
            for g in (0, 128, 255):
                for b in (0, 128, 255):
                    if (r, g, b) not in colors:
                        colors.append((r, g, b))
    if n_classes > len(colors):
        raise CodecError(f"default palette supports up to {len(colors)} classes")
    return ColorCodebook(list(enumerate(colors[:n_classes])))


@dataclass
class DepthMap:
    """Nonnegative per-pixel depths with the calibration range used to encode."""

    values: np.ndarray
    d_min: float
    d_max: float


# ---------------------------------------------------------------------------
# segmentation


def seg_encode(seg, book):
    seg = np.asarray(seg)
    if seg.min(initial=0) < 0 or seg.max(initial=0) >= len(book):
        raise CodecError(
            f"seg_encode: class id outside codebook of size {len(book)}"
        )
    return book.colors_unit[seg]


def seg_decode(img, book):
    """Nearest codebook color per pixel; ties break to the lowest class id."""
    img = np.asarray(img, dtype=np.float32)
    diff = img[..., None, :] - book.colors_unit[None, None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    return d2.argmin(axis=-1).astype(np.int64)


# ---------------------------------------------------------------------------
# depth


def depth_encode(depth: DepthMap):
    if not depth.d_min < depth.d_max:
        raise CodecError(
            f"depth_encode: invalid calibration [{depth.d_min}, {depth.d_max}]"
        )
    d = np.clip(depth.values, depth.d_min, depth.d_max)
    v = round_half_up(255.0 * (d - depth.d_min) / (depth.d_max - depth.d_min))
    chan = (v / 255.0).astype(np.float32)
    return np.repeat(chan[..., None], 3, axis=-1)


def depth_decode(img, d_min, d_max):
    """Channel mean back to scene units; the mean absorbs model drift."""
    img = np.asarray(img, dtype=np.float32)
    return DepthMap(d_min + img.mean(axis=-1) * (d_max - d_min), d_min, d_max)


# ---------------------------------------------------------------------------
# keypoints

SQUARE_HALF = 4  # squares span [c-4, c+4], 9x9 pixels


def keypoint_encode(keypoints, book, shape):
    """Render 9x9 squares centered on each keypoint; later entries win overlaps."""
    h, w = shape
    img = np.zeros((h, w, 3), dtype=np.float32)
    colors = book.colors_unit
    for part, row, col in keypoints:
        if not (0 <= row < h and 0 <= col < w):
            raise CodecError(f"keypoint_encode: ({row}, {col}) outside {h}x{w}")
        if not 0 <= part < len(book):
            raise CodecError(f"keypoint_encode: part {part} not in codebook")
        r0, r1 = max(row - SQUARE_HALF, 0), min(row + SQUARE_HALF + 1, h)
        c0, c1 = max(col - SQUARE_HALF, 0), min(col + SQUARE_HALF + 1, w)
        img[r0:r1, c0:c1] = colors[part]
    return img


def keypoint_decode(img, book):
    """Recover keypoints: per part, centroid of the largest connected blob."""
    classes = seg_decode(img, book)
    found = []
    for part in range(1, len(book)):
        mask = classes == part
        if not mask.any():
            continue
        labels, n = ndimage.label(mask)
        sizes = ndimage.sum_labels(mask, labels, index=range(1, n + 1))
        best = int(np.argmax(sizes)) + 1
        rows, cols = np.nonzero(labels == best)
        found.append(
            (part, int(round_half_up(rows.mean())), int(round_half_up(cols.mean())))
        )
    return found


# ---------------------------------------------------------------------------
# pass-through and edges


def identity_codec(img):
    return np.asarray(img, dtype=np.float32)


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float32)


def edge_extract(img, threshold=0.25):
    """Binary edge map from Sobel gradient magnitude.

    The magnitude is normalized by 4 (the per-axis response to a unit
    step), so threshold lives in (0, 1). Border handling replicates the
    edge pixels, keeping constant images edge-free.
    """
    if not 0.0 < threshold < 1.0:
        raise CodecError(f"edge_extract: threshold {threshold} outside (0, 1)")
    luma = np.asarray(img, dtype=np.float32).mean(axis=-1)
    gx = ndimage.correlate(luma, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(luma, _SOBEL_X.T, mode="nearest")
    mag = np.hypot(gx, gy) / 4.0
    binary = (mag >= threshold).astype(np.float32)
    return np.repeat(binary[..., None], 3, axis=-1)
