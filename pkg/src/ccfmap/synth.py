"""Synthetic spectra and scenes with known ground truth.

The prototypes are hand-designed 13-band signatures, loosely shaped like
vegetation / bright metal roofing / dark shingles / dry thatch.  They are
fixtures for exercising the pipeline, not physically measured spectra.
"""

from dataclasses import dataclass

import numpy as np

from .geodata import GroundTruthMask, MaskValue, Scene, pixel_to_geo, LabeledPoint
from .pipeline import MaterialClass, SpectralSample

N_BANDS = 13

DEFAULT_NODATA = 65535
DEFAULT_GEOTRANSFORM = (0.0, 1.0, 0.0, 0.0, 0.0, -1.0)

# Survey answer emitted for each material when writing points CSVs.
SURVEY_ANSWERS = {
    MaterialClass.METAL: "Metal, tin or zinc",
    MaterialClass.SHINGLES: "Shingles",
    MaterialClass.THATCH: "Thatch or grass",
}
ENVIRONMENT_ANSWER = "environment"


@dataclass(frozen=True)
class ClassPrototype:
    material: MaterialClass
    mean_spectrum: np.ndarray  # (13,), in [0, 1]
    stddev: np.ndarray         # (13,), > 0


def _proto(material, means, std):
    means = np.asarray(means, dtype=float)
    return ClassPrototype(material=material, mean_spectrum=means,
                          stddev=np.full(N_BANDS, std))


def default_prototypes(stddev=0.03):
    """Four well-separated signatures, one per material class."""
    return (
        _proto(MaterialClass.ENVIRONMENT,
               [0.06, 0.05, 0.08, 0.05, 0.10, 0.25, 0.35, 0.40,
                0.42, 0.43, 0.20, 0.20, 0.10], stddev),
        _proto(MaterialClass.METAL,
               [0.35, 0.40, 0.45, 0.48, 0.50, 0.52, 0.53, 0.55,
                0.55, 0.50, 0.30, 0.40, 0.35], stddev),
        _proto(MaterialClass.SHINGLES,
               [0.12, 0.14, 0.16, 0.18, 0.19, 0.20, 0.21, 0.22,
                0.22, 0.21, 0.15, 0.18, 0.17], stddev),
        _proto(MaterialClass.THATCH,
               [0.10, 0.12, 0.16, 0.22, 0.26, 0.30, 0.32, 0.33,
                0.34, 0.35, 0.28, 0.45, 0.40], stddev),
    )


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def generate_samples(prototypes, n_per_class, seed):
    """Gaussian draws around each prototype, clamped to [0, 1.2]."""
    rng = _rng(seed)
    samples = []
    for proto in prototypes:
        noise = rng.standard_normal((n_per_class, N_BANDS))
        feats = np.clip(proto.mean_spectrum + noise * proto.stddev, 0.0, 1.2)
        for i in range(n_per_class):
            samples.append(SpectralSample(
                features=feats[i],
                label=int(proto.material),
                provenance=f"synth-{proto.material.name.lower()}-{i:04d}"))
    return samples


def quadrant_layout(width, height):
    """Four-quadrant class grid: env | metal over shingles | thatch."""
    layout = np.zeros((height, width), dtype=np.uint8)
    hw, hh = width // 2, height // 2
    layout[:hh, hw:] = int(MaterialClass.METAL)
    layout[hh:, :hw] = int(MaterialClass.SHINGLES)
    layout[hh:, hw:] = int(MaterialClass.THATCH)
    return layout


def generate_scene(width, height, layout, prototypes, seed,
                   unknown_fraction=0.0, nodata=DEFAULT_NODATA,
                   geotransform=DEFAULT_GEOTRANSFORM):
    """Scene + partial mask + truth grid from a per-pixel class layout.

    Raw values are round(10000 * spectrum).  The mask marks non-environment
    pixels informal; a `unknown_fraction` share of mask pixels is blanked to
    unknown to model incomplete ground truth.
    """
    layout = np.asarray(layout, dtype=np.uint8)
    if layout.shape != (height, width):
        raise ValueError(f"layout shape {layout.shape} != ({height}, {width})")
    rng = _rng(seed)
    means = np.stack([p.mean_spectrum for p in
                      sorted(prototypes, key=lambda p: int(p.material))])
    stds = np.stack([p.stddev for p in
                     sorted(prototypes, key=lambda p: int(p.material))])
    noise = rng.standard_normal((height, width, N_BANDS))
    spectra = np.clip(means[layout] + noise * stds[layout], 0.0, 1.2)
    raw = np.rint(spectra * 10000.0).astype(np.uint16)
    data = np.ascontiguousarray(np.moveaxis(raw, 2, 0))
    scene = Scene(width=width, height=height, n_bands=N_BANDS,
                  geotransform=geotransform, nodata=nodata, data=data)

    mask_vals = np.where(layout == int(MaterialClass.ENVIRONMENT),
                         int(MaskValue.ENVIRONMENT),
                         int(MaskValue.INFORMAL)).astype(np.uint8)
    if unknown_fraction > 0:
        blank = rng.random((height, width)) < unknown_fraction
        mask_vals[blank] = int(MaskValue.UNKNOWN)
    mask = GroundTruthMask(width=width, height=height, values=mask_vals)
    return scene, mask, layout


def rotated_two_class(n, angle, seed, noise=0.25, n_features=N_BANDS):
    """Two separable classes split by a hyperplane at `angle` to the axes.

    A 2-D pattern (signed offset along one coordinate) is rotated by `angle`
    radians within the first two dimensions, embedded into `n_features`
    dims, and blurred with isotropic gaussian noise.  angle=0 gives an
    axis-aligned boundary; noise=0 gives perfect separability.
    """
    rng = _rng(seed)
    labels = rng.integers(0, 2, size=n)
    margin = rng.uniform(0.25, 1.0, size=n) * np.where(labels == 0, -1.0, 1.0)
    spread = rng.uniform(-1.0, 1.0, size=n)
    c, s = np.cos(angle), np.sin(angle)
    feats = np.zeros((n, n_features))
    feats[:, 0] = c * margin - s * spread
    feats[:, 1] = s * margin + c * spread
    feats += noise * rng.standard_normal((n, n_features))
    return [SpectralSample(features=feats[i], label=int(labels[i]),
                           provenance=f"synth-rot-{i:05d}")
            for i in range(n)]


def sample_points(scene, layout, n_per_class, seed):
    """Pick labeled survey points at pixel centers of a generated scene.

    Returns (survey_points, environment_points): the survey CSV rows carry
    the raw answer strings; environment rows use a plain 'environment' tag
    and are meant for the analyst-chosen second CSV.
    """
    rng = _rng(seed)
    survey, environment = [], []
    for material in MaterialClass:
        rows, cols = np.nonzero(layout == int(material))
        if rows.shape[0] < n_per_class:
            raise ValueError(f"layout has only {rows.shape[0]} "
                             f"{material.name.lower()} pixels, "
                             f"need {n_per_class}")
        picks = rng.choice(rows.shape[0], size=n_per_class, replace=False)
        for j, i in enumerate(sorted(picks)):
            lon, lat = pixel_to_geo(scene, int(cols[i]), int(rows[i]))
            point = LabeledPoint(
                lon=lon, lat=lat,
                survey_class=SURVEY_ANSWERS.get(material, ENVIRONMENT_ANSWER),
                source_id=f"synth-{material.name.lower()}-{j:04d}")
            if material == MaterialClass.ENVIRONMENT:
                environment.append(point)
            else:
                survey.append(point)
    return survey, environment
