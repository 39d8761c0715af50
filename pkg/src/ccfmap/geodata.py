"""Raster scenes, labeled survey points, and ground-truth masks.

The scene format is deliberately minimal: a text header next to a raw
band-sequential little-endian u16 data file.  Real satellite products can be
converted with one external command (see README); no GeoTIFF dependency.
Coordinates are assumed to already be in the scene's map coordinate system.
"""

import csv
import io
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from PIL import Image

from .errors import DataError, LoadError, ParseError

SCENE_DTYPE = np.dtype("<u2")

_REQUIRED_HEADER_FIELDS = ("width", "height", "bands", "dtype", "order",
                           "geotransform", "nodata")


@dataclass(frozen=True)
class Scene:
    """A width x height x bands raster cube of raw u16 reflectance counts."""

    width: int
    height: int
    n_bands: int
    geotransform: tuple  # (origin_x, pixel_w, row_rot, origin_y, col_rot, pixel_h)
    nodata: int
    data: np.ndarray  # (bands, height, width), u16

    def __post_init__(self):
        if self.data.shape != (self.n_bands, self.height, self.width):
            raise ValueError(f"data shape {self.data.shape} does not match "
                             f"({self.n_bands}, {self.height}, {self.width})")
        if self.geotransform[1] == 0 or self.geotransform[5] == 0:
            raise ValueError("pixel width and height must be nonzero")


@dataclass(frozen=True)
class LabeledPoint:
    lon: float
    lat: float
    survey_class: str
    source_id: str


class MaskValue(IntEnum):
    ENVIRONMENT = 0
    INFORMAL = 1
    UNKNOWN = 2


# Grayscale encoding on disk.
_MASK_PIXEL = {0: MaskValue.ENVIRONMENT, 255: MaskValue.INFORMAL,
               128: MaskValue.UNKNOWN}
_MASK_BYTE = {MaskValue.ENVIRONMENT: 0, MaskValue.INFORMAL: 255,
              MaskValue.UNKNOWN: 128}


@dataclass(frozen=True)
class GroundTruthMask:
    width: int
    height: int
    values: np.ndarray  # (height, width) of MaskValue codes


def _parse_header(path):
    fields = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise LoadError(f"{path}: malformed header line {lineno}: '{line}'")
            fields[parts[0]] = parts[1]
    for key in _REQUIRED_HEADER_FIELDS:
        if key not in fields:
            raise LoadError(f"{path}: missing header field '{key}'")
    return fields


def load_scene(header_path, data_path):
    """Read a scene from its header document and raw data file."""
    fields = _parse_header(header_path)
    try:
        width = int(fields["width"])
        height = int(fields["height"])
        bands = int(fields["bands"])
        nodata = int(fields["nodata"])
    except ValueError as exc:
        raise LoadError(f"{header_path}: non-integer header field: {exc}") from None
    if fields["dtype"] != "u16":
        raise LoadError(f"{header_path}: unknown dtype '{fields['dtype']}' "
                        "(only u16 is supported)")
    if fields["order"] != "band_sequential":
        raise LoadError(f"{header_path}: unknown order '{fields['order']}'")
    gt = fields["geotransform"].split()
    if len(gt) != 6:
        raise LoadError(f"{header_path}: geotransform needs 6 values, got {len(gt)}")
    try:
        geotransform = tuple(float(v) for v in gt)
    except ValueError:
        raise LoadError(f"{header_path}: non-numeric geotransform") from None
    if width < 1 or height < 1 or bands < 1:
        raise LoadError(f"{header_path}: non-positive dimensions")

    with open(data_path, "rb") as fh:
        raw = fh.read()
    expected = width * height * bands * SCENE_DTYPE.itemsize
    if len(raw) != expected:
        raise LoadError(f"{data_path}: expected {expected} bytes "
                        f"({bands}x{height}x{width} u16), got {len(raw)}")
    data = np.frombuffer(raw, dtype=SCENE_DTYPE).reshape(bands, height, width)
    try:
        return Scene(width=width, height=height, n_bands=bands,
                     geotransform=geotransform, nodata=nodata, data=data)
    except ValueError as exc:
        raise LoadError(f"{header_path}: {exc}") from None


def write_scene(scene, header_path, data_path):
    """Inverse of load_scene; header fields and data bytes round-trip exactly."""
    gt = " ".join(repr(float(v)) for v in scene.geotransform)
    header = (
        f"width {scene.width}\n"
        f"height {scene.height}\n"
        f"bands {scene.n_bands}\n"
        "dtype u16\n"
        "order band_sequential\n"
        f"geotransform {gt}\n"
        f"nodata {scene.nodata}\n"
    )
    with open(header_path, "w", encoding="utf-8") as fh:
        fh.write(header)
    with open(data_path, "wb") as fh:
        fh.write(np.ascontiguousarray(scene.data, dtype=SCENE_DTYPE).tobytes())


def geo_to_pixel(scene, lon, lat):
    """Map coordinates -> integer (col, row), or None when off the raster."""
    ox, pw, rrot, oy, crot, ph = scene.geotransform
    det = pw * ph - rrot * crot
    if det == 0:
        raise DataError("singular geotransform")
    dx = lon - ox
    dy = lat - oy
    col = (dx * ph - dy * rrot) / det
    row = (dy * pw - dx * crot) / det
    col = int(np.floor(col))
    row = int(np.floor(row))
    if col < 0 or col >= scene.width or row < 0 or row >= scene.height:
        return None
    return col, row


def pixel_to_geo(scene, col, row):
    """Map coordinates of the center of pixel (col, row)."""
    ox, pw, rrot, oy, crot, ph = scene.geotransform
    c = col + 0.5
    r = row + 0.5
    return ox + c * pw + r * rrot, oy + c * crot + r * ph


def pixel_spectrum(scene, col, row):
    """Band-ordered raw values at (col, row); returns (values, has_nodata)."""
    if not (0 <= col < scene.width and 0 <= row < scene.height):
        raise ValueError(f"pixel ({col}, {row}) outside "
                         f"{scene.width}x{scene.height} scene")
    values = scene.data[:, row, col].copy()
    return values, bool(np.any(values == scene.nodata))


_POINT_COLUMNS = ("source_id", "lon", "lat", "survey_class")


def load_points(csv_path):
    """Read labeled survey points; header row with the documented columns."""
    points = []
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{csv_path}: empty file, header row required") from None
        if [h.strip() for h in header] != list(_POINT_COLUMNS):
            raise ParseError(f"{csv_path}: header must be "
                             f"{','.join(_POINT_COLUMNS)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{csv_path}: expected 4 columns, got {len(row)}",
                                 line=lineno)
            source_id, lon_s, lat_s, survey_class = row
            try:
                lon = float(lon_s)
                lat = float(lat_s)
            except ValueError:
                raise ParseError(f"{csv_path}: non-numeric coordinate",
                                 line=lineno) from None
            if not -180.0 <= lon <= 180.0:
                raise ParseError(f"{csv_path}: lon {lon} out of [-180, 180]",
                                 line=lineno)
            if not -90.0 <= lat <= 90.0:
                raise ParseError(f"{csv_path}: lat {lat} out of [-90, 90]",
                                 line=lineno)
            points.append(LabeledPoint(lon=lon, lat=lat,
                                       survey_class=survey_class,
                                       source_id=source_id))
    return points


def write_points(points, csv_path):
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_POINT_COLUMNS)
        for p in points:
            writer.writerow([p.source_id, repr(p.lon), repr(p.lat), p.survey_class])


def load_mask(path):
    """8-bit grayscale PNG: 255=informal, 0=environment, 128=unknown."""
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise LoadError(f"{path}: cannot read image: {exc}") from None
    if img.mode != "L":
        raise LoadError(f"{path}: mask must be 8-bit grayscale, got mode '{img.mode}'")
    arr = np.asarray(img, dtype=np.uint8)
    valid = np.isin(arr, list(_MASK_PIXEL))
    if not valid.all():
        bad = sorted(np.unique(arr[~valid]).tolist())
        raise LoadError(f"{path}: mask contains values {bad}; "
                        "only 0, 128, 255 are allowed")
    values = np.zeros(arr.shape, dtype=np.uint8)
    for byte, code in _MASK_PIXEL.items():
        values[arr == byte] = int(code)
    return GroundTruthMask(width=arr.shape[1], height=arr.shape[0], values=values)


def mask_png_bytes(mask):
    arr = np.zeros((mask.height, mask.width), dtype=np.uint8)
    for code, byte in _MASK_BYTE.items():
        arr[mask.values == int(code)] = byte
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def write_mask(mask, path):
    with open(path, "wb") as fh:
        fh.write(mask_png_bytes(mask))
