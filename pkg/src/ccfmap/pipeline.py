"""From raw survey points and a scene to a clean, balanced training set.

Survey answers collapse to four material classes; points are rejected (and
counted, per reason) rather than silently dropped.  Balancing draws the same
number of samples per class so the ensemble never sees skewed priors.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ImbalanceError
from .geodata import geo_to_pixel, pixel_spectrum


class MaterialClass(IntEnum):
    """Stable integer codes; they index distributions and the palette."""

    ENVIRONMENT = 0
    METAL = 1
    SHINGLES = 2
    THATCH = 3


MATERIAL_NAMES = tuple(c.name.lower() for c in MaterialClass)

REFLECTANCE_SCALE = 10000.0


@dataclass(frozen=True)
class SpectralSample:
    """One reflectance vector with an optional class label."""

    features: np.ndarray  # normalized reflectance, nominally [0, 1]
    label: int | None
    provenance: str


# Survey answers that map to a material class (casefolded, trimmed).
_ACCEPTED = {
    "metal, tin or zinc": MaterialClass.METAL,
    "shingles": MaterialClass.SHINGLES,
    "asbestos": MaterialClass.SHINGLES,
    "thatch or grass": MaterialClass.THATCH,
}

# Answers deliberately outside the four-class design.
_REJECTED = {
    "tiles",
    "plastic sheets",
    "multiple materials",
    "some other material",
    "could not tell/could not see",
}


def map_survey_class(answer):
    """Collapse a raw survey answer to a MaterialClass, or None if rejected.

    Total: unknown strings are rejected, never raised on.
    """
    key = answer.strip().casefold()
    if key in _ACCEPTED:
        return _ACCEPTED[key]
    return None


def normalize_reflectance(raw):
    """Raw u16 count -> unitless reflectance (raw / 10000).

    Values above 10000 (sensor saturation) pass through unchanged.
    """
    return raw / REFLECTANCE_SCALE


REJECT_CLASS = "rejected_class"
REJECT_OUT_OF_BOUNDS = "out_of_bounds"
REJECT_NODATA = "nodata"
REJECT_EMPTY = "empty_spectrum"

_REJECT_REASONS = (REJECT_CLASS, REJECT_OUT_OF_BOUNDS, REJECT_NODATA, REJECT_EMPTY)


@dataclass
class RejectionReport:
    """Per-reason rejection counts for one extraction pass."""

    accepted: int = 0
    counts: Counter = field(default_factory=Counter)

    @property
    def total_rejected(self):
        return sum(self.counts.values())

    def to_text_table(self):
        lines = ["reason            count",
                 "----------------  -----",
                 f"accepted          {self.accepted:5d}"]
        for reason in _REJECT_REASONS:
            lines.append(f"{reason:<16s}  {self.counts.get(reason, 0):5d}")
        return "\n".join(lines) + "\n"

    def to_kv(self):
        lines = [f"accepted {self.accepted}"]
        for reason in _REJECT_REASONS:
            lines.append(f"{reason} {self.counts.get(reason, 0)}")
        return "\n".join(lines) + "\n"


def extract_samples(scene, points, force_class=None):
    """Pull normalized spectra for survey points; returns (samples, report).

    Rejections are data, not errors: unmapped survey class, off-raster
    location, any nodata band, or an all-zero spectrum (empty acquisition).
    `force_class` bypasses survey mapping, for analyst-chosen point sets
    such as environment spectra.
    """
    samples = []
    report = RejectionReport()
    for point in points:
        if force_class is not None:
            label = MaterialClass(force_class)
        else:
            label = map_survey_class(point.survey_class)
            if label is None:
                report.counts[REJECT_CLASS] += 1
                continue
        pix = geo_to_pixel(scene, point.lon, point.lat)
        if pix is None:
            report.counts[REJECT_OUT_OF_BOUNDS] += 1
            continue
        raw, has_nodata = pixel_spectrum(scene, *pix)
        if has_nodata:
            report.counts[REJECT_NODATA] += 1
            continue
        if np.all(raw == 0):
            report.counts[REJECT_EMPTY] += 1
            continue
        features = normalize_reflectance(raw.astype(float))
        samples.append(SpectralSample(features=features, label=int(label),
                                      provenance=point.source_id))
        report.accepted += 1
    return samples, report


def balance(samples, n_per_class, seed):
    """Exactly n_per_class samples per material class, drawn without
    replacement under `seed`; output sorted by (class, provenance).
    """
    by_class = {c: [] for c in MaterialClass}
    for s in samples:
        by_class[MaterialClass(s.label)].append(s)

    for cls, group in by_class.items():
        if len(group) < n_per_class:
            raise ImbalanceError(
                f"class '{cls.name.lower()}' has {len(group)} samples, "
                f"need {n_per_class}")

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    chosen = []
    for cls in MaterialClass:
        group = sorted(by_class[cls], key=lambda s: s.provenance)
        picks = rng.choice(len(group), size=n_per_class, replace=False)
        chosen.extend(group[i] for i in sorted(picks))
    chosen.sort(key=lambda s: (s.label, s.provenance))
    return chosen
