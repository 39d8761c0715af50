import numpy as np
import pytest
from PIL import Image

from ccfmap.errors import DataError, LoadError, ParseError
from ccfmap.geodata import (GroundTruthMask, MaskValue, Scene, geo_to_pixel,
                            load_mask, load_points, load_scene, pixel_spectrum,
                            pixel_to_geo, write_mask, write_points, write_scene)


def _scene(width=4, height=3, bands=13, nodata=65535,
           geotransform=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0), fill=None):
    if fill is None:
        data = np.arange(bands * height * width, dtype=np.uint16)
        data = data.reshape(bands, height, width)
    else:
        data = np.full((bands, height, width), fill, dtype=np.uint16)
    return Scene(width=width, height=height, n_bands=bands,
                 geotransform=geotransform, nodata=nodata, data=data)


def test_scene_roundtrip(tmp_path):
    scene = _scene()
    write_scene(scene, tmp_path / "s.hdr", tmp_path / "s.bsq")
    loaded = load_scene(tmp_path / "s.hdr", tmp_path / "s.bsq")
    assert loaded.width == scene.width
    assert loaded.height == scene.height
    assert loaded.n_bands == scene.n_bands
    assert loaded.geotransform == scene.geotransform
    assert loaded.nodata == scene.nodata
    np.testing.assert_array_equal(loaded.data, scene.data)


def test_all_zero_scene(tmp_path):
    scene = _scene(width=2, height=2, fill=0)
    write_scene(scene, tmp_path / "s.hdr", tmp_path / "s.bsq")
    loaded = load_scene(tmp_path / "s.hdr", tmp_path / "s.bsq")
    assert np.all(loaded.data == 0)


def test_short_data_file_names_byte_counts(tmp_path):
    scene = _scene()
    write_scene(scene, tmp_path / "s.hdr", tmp_path / "s.bsq")
    raw = (tmp_path / "s.bsq").read_bytes()
    (tmp_path / "s.bsq").write_bytes(raw[:-2])  # one sample short
    with pytest.raises(LoadError) as exc:
        load_scene(tmp_path / "s.hdr", tmp_path / "s.bsq")
    assert str(len(raw)) in str(exc.value)
    assert str(len(raw) - 2) in str(exc.value)


def test_unknown_dtype_rejected(tmp_path):
    scene = _scene()
    write_scene(scene, tmp_path / "s.hdr", tmp_path / "s.bsq")
    hdr = (tmp_path / "s.hdr").read_text().replace("u16", "f32")
    (tmp_path / "s.hdr").write_text(hdr)
    with pytest.raises(LoadError):
        load_scene(tmp_path / "s.hdr", tmp_path / "s.bsq")


def test_missing_header_field_rejected(tmp_path):
    scene = _scene()
    write_scene(scene, tmp_path / "s.hdr", tmp_path / "s.bsq")
    lines = [l for l in (tmp_path / "s.hdr").read_text().splitlines()
             if not l.startswith("nodata")]
    (tmp_path / "s.hdr").write_text("\n".join(lines) + "\n")
    with pytest.raises(LoadError):
        load_scene(tmp_path / "s.hdr", tmp_path / "s.bsq")


def test_geo_to_pixel_hand_inverted():
    scene = _scene(width=10, height=10)
    assert geo_to_pixel(scene, 2.5, -3.5) == (2, 3)


def test_geo_to_pixel_origin():
    scene = _scene(width=10, height=10)
    assert geo_to_pixel(scene, 0.0, 0.0) == (0, 0)


def test_geo_to_pixel_west_of_origin():
    scene = _scene(width=10, height=10)
    assert geo_to_pixel(scene, -0.5, -1.0) is None


def test_singular_geotransform_raises():
    scene = _scene(geotransform=(0.0, 1.0, 1.0, 0.0, 1.0, 1.0))
    with pytest.raises(DataError):
        geo_to_pixel(scene, 1.0, 1.0)


def test_pixel_geo_roundtrip():
    scene = _scene(width=8, height=6,
                   geotransform=(100.0, 0.25, 0.0, 50.0, 0.0, -0.5))
    for row in range(scene.height):
        for col in range(scene.width):
            lon, lat = pixel_to_geo(scene, col, row)
            assert geo_to_pixel(scene, lon, lat) == (col, row)


def test_pixel_spectrum_length_and_flag():
    scene = _scene()
    values, has_nodata = pixel_spectrum(scene, 1, 2)
    assert values.shape == (13,)
    assert not has_nodata
    np.testing.assert_array_equal(values, scene.data[:, 2, 1])
    nod = _scene(fill=65535)
    _, flag = pixel_spectrum(nod, 0, 0)
    assert flag


def test_points_roundtrip(tmp_path):
    from ccfmap.geodata import LabeledPoint
    pts = [LabeledPoint(lon=1.5, lat=-2.5, survey_class="Metal, tin or zinc",
                        source_id="a1")]
    write_points(pts, tmp_path / "p.csv")
    loaded = load_points(tmp_path / "p.csv")
    assert loaded == pts


def test_points_lat_out_of_range(tmp_path):
    (tmp_path / "p.csv").write_text(
        "source_id,lon,lat,survey_class\nid1,10.0,95.0,Shingles\n")
    with pytest.raises(ParseError) as exc:
        load_points(tmp_path / "p.csv")
    assert exc.value.line == 2


def test_points_crlf_and_quoted(tmp_path):
    (tmp_path / "p.csv").write_bytes(
        b'source_id,lon,lat,survey_class\r\n'
        b'id1,1.0,2.0,"Metal, tin or zinc"\r\n')
    loaded = load_points(tmp_path / "p.csv")
    assert len(loaded) == 1
    assert loaded[0].survey_class == "Metal, tin or zinc"


def test_points_header_required(tmp_path):
    (tmp_path / "p.csv").write_text("id1,1.0,2.0,Shingles\n")
    with pytest.raises(ParseError):
        load_points(tmp_path / "p.csv")


def test_mask_all_informal(tmp_path):
    Image.fromarray(np.full((4, 5), 255, dtype=np.uint8), "L").save(
        tmp_path / "m.png")
    mask = load_mask(tmp_path / "m.png")
    assert np.all(mask.values == int(MaskValue.INFORMAL))
    assert (mask.width, mask.height) == (5, 4)


def test_mask_all_unknown(tmp_path):
    Image.fromarray(np.full((4, 5), 128, dtype=np.uint8), "L").save(
        tmp_path / "m.png")
    mask = load_mask(tmp_path / "m.png")
    assert np.all(mask.values == int(MaskValue.UNKNOWN))


def test_mask_checkerboard(tmp_path):
    grid = np.indices((6, 6)).sum(axis=0) % 2
    arr = np.where(grid == 0, 0, 255).astype(np.uint8)
    Image.fromarray(arr, "L").save(tmp_path / "m.png")
    mask = load_mask(tmp_path / "m.png")
    expected = np.where(grid == 0, int(MaskValue.ENVIRONMENT),
                        int(MaskValue.INFORMAL))
    np.testing.assert_array_equal(mask.values, expected)


def test_mask_rejects_other_values(tmp_path):
    Image.fromarray(np.full((2, 2), 17, dtype=np.uint8), "L").save(
        tmp_path / "m.png")
    with pytest.raises(LoadError):
        load_mask(tmp_path / "m.png")


def test_mask_write_read_roundtrip(tmp_path):
    values = np.array([[0, 1, 2], [2, 1, 0]], dtype=np.uint8)
    mask = GroundTruthMask(width=3, height=2, values=values)
    write_mask(mask, tmp_path / "m.png")
    loaded = load_mask(tmp_path / "m.png")
    np.testing.assert_array_equal(loaded.values, values)
