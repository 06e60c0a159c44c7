import json

import numpy as np
import pytest

import ctfdct


def corpus(target, n, seed, size=64):
    return np.stack([ctfdct.image_betas(ctfdct.synth_image(i, target, 2.0, seed, size)) for i in range(n)])


def test_zigzag_and_dct():
    assert ctfdct.zigzag_index(0, 1) == 1
    assert ctfdct.zigzag_index(1, 0) == 2
    assert ctfdct.zigzag_position(63) == (7, 7)
    img = np.full((16, 24), 100.0)
    blocks = ctfdct.block_dct(img)
    assert blocks.shape == (6, 64)
    # Orthonormal DCT without level shift: DC = 8 * mean.
    np.testing.assert_allclose(blocks[:, 0], 800.0)
    np.testing.assert_allclose(blocks[:, 1:], 0.0, atol=1e-9)


def test_betas_of_constant_image_are_zero():
    betas = ctfdct.image_betas(np.full((32, 32), 7.0))
    assert betas.shape == (63,)
    np.testing.assert_allclose(betas, 0.0, atol=1e-12)


def test_png_round_trip(tmp_path):
    img = np.round(ctfdct.synth_image(0, size=32))
    path = str(tmp_path / "a.png")
    ctfdct.write_png(path, img)
    np.testing.assert_array_equal(ctfdct.decode(path), img)


def test_gsf_recovers_injected_coefficient():
    clean = corpus(0, 40, 1)
    fake = corpus(21, 40, 2)
    r = ctfdct.gsf(fake, clean, seed=3)
    assert r["gsf"] == 21
    assert r["chi2"].shape == (63,)
    assert r["rows"] == 40
    with pytest.raises(ctfdct.Error) as info:
        ctfdct.gsf(clean, clean)
    assert ctfdct.error_code(info.value) == "no-signal"


def test_amplify_and_spectrum():
    img = ctfdct.synth_image(0, 13, 2.0, 4, 64)
    out = ctfdct.amplify(img, 13)
    assert out.shape == img.shape
    assert out.min() >= 0 and out.max() <= 255
    np.testing.assert_allclose(ctfdct.amplify(img, 13, k1=1.0, k2=1.0), img, atol=1e-9)
    assert ctfdct.spectral_peak_ratio(out) > 10 > 3 > ctfdct.spectral_peak_ratio(img)


def test_attacks():
    img = ctfdct.synth_image(1, size=64)
    np.testing.assert_array_equal(ctfdct.apply_attack(img, "mirror:H"), img[:, ::-1])
    np.testing.assert_array_equal(ctfdct.apply_attack(img, "rotation:90"), np.rot90(img))
    assert ctfdct.apply_attack(img, "scale:-50").shape == (32, 32)
    assert len(ctfdct.attack_grid()) == 17
    with pytest.raises(ctfdct.Error) as info:
        ctfdct.apply_attack(img, "jpeg:75")
    assert ctfdct.error_code(info.value) == "spec"


def test_train_predict_evaluate():
    x = np.vstack([corpus(0, 30, 5), corpus(13, 30, 6)])
    y = ["real"] * 30 + ["fake"] * 30
    model = ctfdct.train_boosted(x, y, seed=1)
    assert model.classes == ["fake", "real"]
    proba = model.predict_proba(x)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)
    assert model.predict(x) == y
    back = ctfdct.Model.from_json(model.to_json())
    np.testing.assert_array_equal(back.predict_proba(x), proba)

    probe = ctfdct.train_logistic(x, y, 13)
    assert json.loads(probe.to_json())["feature_index"] == 13
    report = ctfdct.evaluate(y, probe.predict(x))
    assert report["accuracy"] >= 95.0
    assert sum(map(sum, report["confusion"])) == 60
