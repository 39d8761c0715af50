import numpy as np
import pytest

from ccfmap.evalmap import (ClassMap, GRID_INVALID, classify_scene,
                            confusion_matrix, decode_png,
                            evaluate_against_mask, grid_png_bytes, load_grid,
                            render_png)
from ccfmap.forest import ForestParams, train_forest, predict_class
from ccfmap.geodata import GroundTruthMask, MaskValue, Scene
from ccfmap.pipeline import MaterialClass, normalize_reflectance
from ccfmap.synth import (default_prototypes, generate_samples,
                          generate_scene, quadrant_layout)


def _forest(seed=0, n_trees=10):
    samples = generate_samples(default_prototypes(), 11, seed=1)
    return train_forest(samples, ForestParams(n_classes=4, n_trees=n_trees,
                                              seed=seed),
                        class_names=[c.name.lower() for c in MaterialClass])


def _cmap(classes, valid=None):
    classes = np.asarray(classes, dtype=np.uint8)
    if valid is None:
        valid = np.ones_like(classes, dtype=bool)
    return ClassMap(width=classes.shape[1], height=classes.shape[0],
                    classes=classes, valid=valid)


def test_classify_single_pixel():
    forest = _forest()
    proto = default_prototypes()[1]  # metal
    raw = np.rint(proto.mean_spectrum * 10000).astype(np.uint16)
    scene = Scene(width=1, height=1, n_bands=13,
                  geotransform=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
                  nodata=65535, data=raw.reshape(13, 1, 1))
    cmap = classify_scene(forest, scene)
    assert cmap.classes[0, 0] == int(MaterialClass.METAL)
    assert cmap.valid[0, 0]


def test_classify_all_nodata():
    forest = _forest()
    scene = Scene(width=3, height=2, n_bands=13,
                  geotransform=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
                  nodata=65535,
                  data=np.full((13, 2, 3), 65535, dtype=np.uint16))
    cmap = classify_scene(forest, scene)
    assert not cmap.valid.any()
    assert np.all(cmap.classes == int(MaterialClass.ENVIRONMENT))


def test_classify_band_mismatch():
    forest = _forest()
    scene = Scene(width=1, height=1, n_bands=3,
                  geotransform=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
                  nodata=65535, data=np.zeros((3, 1, 1), dtype=np.uint16))
    with pytest.raises(ValueError):
        classify_scene(forest, scene)


def test_classify_matches_generator_truth():
    forest = _forest()
    scene, _, truth = generate_scene(48, 48, quadrant_layout(48, 48),
                                     default_prototypes(), seed=5)
    cmap = classify_scene(forest, scene)
    agreement = np.mean(cmap.classes == truth)
    assert agreement >= 0.99


def test_classify_matches_per_pixel_prediction():
    forest = _forest(n_trees=3)
    scene, _, _ = generate_scene(8, 8, quadrant_layout(8, 8),
                                 default_prototypes(), seed=6)
    cmap = classify_scene(forest, scene)
    for row in range(8):
        for col in range(8):
            feats = normalize_reflectance(scene.data[:, row, col].astype(float))
            assert cmap.classes[row, col] == predict_class(forest, feats)


def test_render_all_metal():
    cmap = _cmap(np.full((4, 4), int(MaterialClass.METAL)))
    png = render_png(cmap)
    decoded = decode_png(png)
    np.testing.assert_array_equal(decoded.classes, cmap.classes)
    from PIL import Image
    import io
    rgb = np.asarray(Image.open(io.BytesIO(png)).convert("RGB"))
    assert np.all(rgb == (255, 255, 0))


def test_render_all_invalid():
    cmap = _cmap(np.zeros((3, 3)), valid=np.zeros((3, 3), dtype=bool))
    from PIL import Image
    import io
    rgb = np.asarray(Image.open(io.BytesIO(render_png(cmap))).convert("RGB"))
    assert np.all(rgb == (64, 64, 64))


def test_render_decode_roundtrip():
    rng = np.random.default_rng(2)
    classes = rng.integers(0, 4, (10, 12)).astype(np.uint8)
    valid = rng.random((10, 12)) > 0.2
    cmap = _cmap(classes, valid)
    decoded = decode_png(render_png(cmap))
    np.testing.assert_array_equal(decoded.valid, valid)
    np.testing.assert_array_equal(decoded.classes[valid], classes[valid])


def test_grid_file_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    classes = rng.integers(0, 4, (7, 9)).astype(np.uint8)
    valid = rng.random((7, 9)) > 0.3
    cmap = _cmap(classes, valid)
    (tmp_path / "grid.png").write_bytes(grid_png_bytes(cmap))
    loaded = load_grid(tmp_path / "grid.png")
    np.testing.assert_array_equal(loaded.valid, valid)
    np.testing.assert_array_equal(loaded.classes[valid], classes[valid])


def test_load_grid_rejects_stray_values(tmp_path):
    from PIL import Image
    Image.fromarray(np.full((2, 2), 99, dtype=np.uint8), "L").save(
        tmp_path / "g.png")
    with pytest.raises(ValueError):
        load_grid(tmp_path / "g.png")


def _mask(values):
    values = np.asarray(values, dtype=np.uint8)
    return GroundTruthMask(width=values.shape[1], height=values.shape[0],
                           values=values)


def test_evaluate_perfect_prediction():
    mask = _mask([[int(MaskValue.INFORMAL), int(MaskValue.ENVIRONMENT)],
                  [int(MaskValue.ENVIRONMENT), int(MaskValue.INFORMAL)]])
    cmap = _cmap([[int(MaterialClass.METAL), int(MaterialClass.ENVIRONMENT)],
                  [int(MaterialClass.ENVIRONMENT), int(MaterialClass.THATCH)]])
    report = evaluate_against_mask(cmap, mask)
    assert report.settlement_recall == 1.0
    assert report.environment_specificity == 1.0
    assert report.n_evaluated == 4
    assert report.n_unknown_skipped == 0


def test_evaluate_all_environment_prediction():
    mask = _mask(np.full((3, 3), int(MaskValue.INFORMAL)))
    cmap = _cmap(np.full((3, 3), int(MaterialClass.ENVIRONMENT)))
    report = evaluate_against_mask(cmap, mask)
    assert report.settlement_recall == 0.0


def test_evaluate_skips_unknown():
    mask = _mask([[int(MaskValue.UNKNOWN), int(MaskValue.INFORMAL)]])
    cmap = _cmap([[int(MaterialClass.ENVIRONMENT), int(MaterialClass.METAL)]])
    report = evaluate_against_mask(cmap, mask)
    assert report.n_unknown_skipped == 1
    assert report.n_evaluated == 1
    assert report.settlement_recall == 1.0


def test_evaluate_dimension_mismatch():
    mask = _mask(np.zeros((2, 2)))
    cmap = _cmap(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        evaluate_against_mask(cmap, mask)


def test_evaluate_invariant_sum():
    rng = np.random.default_rng(4)
    mask = _mask(rng.integers(0, 3, (9, 11)))
    cmap = _cmap(rng.integers(0, 4, (9, 11)),
                 rng.random((9, 11)) > 0.2)
    report = evaluate_against_mask(cmap, mask)
    assert report.n_evaluated + report.n_unknown_skipped == 9 * 11


def test_confusion_identity():
    m = confusion_matrix([0, 1, 2, 3], [0, 1, 2, 3])
    np.testing.assert_array_equal(m, np.eye(4, dtype=int))
    assert np.trace(m) / m.sum() == 1.0


def test_confusion_disjoint():
    m = confusion_matrix([1, 2, 3, 0], [0, 1, 2, 3])
    assert np.trace(m) == 0


def test_confusion_hand_counted():
    truth = [0, 0, 1, 1, 2, 3]
    pred = [0, 1, 1, 1, 3, 3]
    m = confusion_matrix(pred, truth)
    expected = np.array([[1, 1, 0, 0],
                         [0, 2, 0, 0],
                         [0, 0, 0, 1],
                         [0, 0, 0, 1]])
    np.testing.assert_array_equal(m, expected)
