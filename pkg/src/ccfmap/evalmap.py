"""Whole-scene classification, palette rendering, and mask evaluation."""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .forest import predict_class_batch
from .geodata import MaskValue
from .pipeline import MaterialClass, normalize_reflectance

# Fixed rendering palette, bijective with class codes.
PALETTE = {
    MaterialClass.ENVIRONMENT: (0, 0, 0),
    MaterialClass.METAL: (255, 255, 0),
    MaterialClass.SHINGLES: (0, 0, 255),
    MaterialClass.THATCH: (255, 0, 0),
}
INVALID_COLOR = (64, 64, 64)

# Grayscale codes for the raw class-grid file.
GRID_INVALID = 250


@dataclass(frozen=True)
class ClassMap:
    """Per-pixel class codes plus a validity flag grid.

    Invalid pixels (any nodata band) carry class environment and are
    excluded from metrics.
    """

    width: int
    height: int
    classes: np.ndarray  # (height, width) uint8 class codes
    valid: np.ndarray    # (height, width) bool


@dataclass(frozen=True)
class EvalReport:
    settlement_recall: float
    environment_specificity: float
    per_class_pixel_counts: tuple
    n_evaluated: int
    n_unknown_skipped: int

    def to_text_table(self):
        lines = [
            f"settlement_recall         {self.settlement_recall:.4f}",
            f"environment_specificity   {self.environment_specificity:.4f}",
            f"n_evaluated               {self.n_evaluated}",
            f"n_unknown_skipped         {self.n_unknown_skipped}",
        ]
        for cls in MaterialClass:
            lines.append(f"pixels_{cls.name.lower():<18s}"
                         f"{self.per_class_pixel_counts[int(cls)]}")
        return "\n".join(lines) + "\n"

    def to_kv(self):
        lines = [
            f"settlement_recall {self.settlement_recall!r}",
            f"environment_specificity {self.environment_specificity!r}",
            f"n_evaluated {self.n_evaluated}",
            f"n_unknown_skipped {self.n_unknown_skipped}",
        ]
        for cls in MaterialClass:
            lines.append(f"pixels_{cls.name.lower()} "
                         f"{self.per_class_pixel_counts[int(cls)]}")
        return "\n".join(lines) + "\n"


def classify_scene(forest, scene):
    """Classify every valid pixel of a scene; nodata pixels become invalid.

    Deterministic and independent of pixel visitation order.
    """
    if forest.n_features != scene.n_bands:
        raise ValueError(f"forest expects {forest.n_features} bands, "
                         f"scene has {scene.n_bands}")
    # (h*w, bands) feature matrix
    cube = scene.data.reshape(scene.n_bands, -1).T
    valid = ~np.any(cube == scene.nodata, axis=1)
    classes = np.zeros(cube.shape[0], dtype=np.uint8)
    if valid.any():
        feats = normalize_reflectance(cube[valid].astype(float))
        classes[valid] = predict_class_batch(forest, feats).astype(np.uint8)
    return ClassMap(width=scene.width, height=scene.height,
                    classes=classes.reshape(scene.height, scene.width),
                    valid=valid.reshape(scene.height, scene.width))


def render_png(class_map):
    """Render the fixed material palette to PNG bytes (black/yellow/blue/red)."""
    rgb = np.zeros((class_map.height, class_map.width, 3), dtype=np.uint8)
    for cls, color in PALETTE.items():
        rgb[class_map.classes == int(cls)] = color
    rgb[~class_map.valid] = INVALID_COLOR
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(png_bytes):
    """Inverse of render_png; recovers the class grid and validity flags."""
    img = Image.open(io.BytesIO(png_bytes))
    img.load()
    rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    h, w = rgb.shape[:2]
    classes = np.zeros((h, w), dtype=np.uint8)
    matched = np.zeros((h, w), dtype=bool)
    for cls, color in PALETTE.items():
        hit = np.all(rgb == color, axis=2)
        classes[hit] = int(cls)
        matched |= hit
    invalid = np.all(rgb == INVALID_COLOR, axis=2)
    matched |= invalid
    if not matched.all():
        raise ValueError("image contains colors outside the class palette")
    return ClassMap(width=w, height=h, classes=classes, valid=~invalid)


def grid_png_bytes(class_map):
    """Raw class grid as 8-bit grayscale PNG: value = class code, 250 = invalid."""
    arr = class_map.classes.copy()
    arr[~class_map.valid] = GRID_INVALID
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def load_grid(path):
    """Read a class grid written by grid_png_bytes."""
    img = Image.open(path)
    img.load()
    if img.mode != "L":
        raise ValueError(f"{path}: class grid must be 8-bit grayscale")
    arr = np.asarray(img, dtype=np.uint8)
    allowed = [int(c) for c in MaterialClass] + [GRID_INVALID]
    if not np.isin(arr, allowed).all():
        raise ValueError(f"{path}: class grid contains values outside {allowed}")
    valid = arr != GRID_INVALID
    classes = np.where(valid, arr, 0).astype(np.uint8)
    return ClassMap(width=arr.shape[1], height=arr.shape[0],
                    classes=classes, valid=valid)


def evaluate_against_mask(class_map, mask):
    """Score a 4-class map against a binary settlement/environment mask.

    A predicted settlement is any non-environment material.  Pixels whose
    mask value is unknown are skipped; invalid map pixels are excluded from
    the rates.  A rate with an empty denominator reports 1.0 (vacuous).
    """
    if (mask.width, mask.height) != (class_map.width, class_map.height):
        raise ValueError(f"mask is {mask.width}x{mask.height}, "
                         f"map is {class_map.width}x{class_map.height}")
    known = mask.values != int(MaskValue.UNKNOWN)
    scored = known & class_map.valid
    predicted_settlement = class_map.classes != int(MaterialClass.ENVIRONMENT)

    informal = scored & (mask.values == int(MaskValue.INFORMAL))
    environment = scored & (mask.values == int(MaskValue.ENVIRONMENT))

    recall = (float(np.sum(predicted_settlement & informal) / informal.sum())
              if informal.any() else 1.0)
    specificity = (float(np.sum(~predicted_settlement & environment)
                         / environment.sum()) if environment.any() else 1.0)

    counts = tuple(int(np.sum(class_map.classes[scored] == int(c)))
                   for c in MaterialClass)
    n_unknown = int(np.sum(~known))
    return EvalReport(settlement_recall=recall,
                      environment_specificity=specificity,
                      per_class_pixel_counts=counts,
                      n_evaluated=class_map.width * class_map.height - n_unknown,
                      n_unknown_skipped=n_unknown)


def confusion_matrix(predicted, truth, n_classes=len(MaterialClass)):
    """Counts matrix, rows = truth, cols = prediction."""
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have the same shape")
    out = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(out, (truth.ravel(), predicted.ravel()), 1)
    return out
