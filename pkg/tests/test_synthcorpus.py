import numpy as np
import pytest

from dmscope.imageio import LabelMap, load_image, load_labelmap, normalize
from dmscope.metrics import ConfusionAccumulator, miou
from dmscope.reconstruction import Quantize, score_corpus
from dmscope.synthcorpus import (CorpusSpec, Shift, apply_shift, fill_ignored,
                                 generate_corpus, generate_image, perturb_labels,
                                 write_corpus)


@pytest.mark.parametrize("kind", ["gradient", "checker", "noise", "blotch"])
def test_deterministic(kind):
    spec = CorpusSpec(kind, 4, 16, 24, seed=9, shift=Shift(0.1, 3, 0.2))
    a, b = generate_corpus(spec), generate_corpus(spec)
    assert a.images == b.images
    assert a.labels == b.labels
    # any single image can be regenerated on its own
    raw, _ = generate_image(spec, 2)
    assert normalize(raw) == a.images[2]


def test_seeds_differ():
    a = generate_corpus(CorpusSpec("gradient", 3, seed=1))
    b = generate_corpus(CorpusSpec("gradient", 3, seed=2))
    assert a.images != b.images


def test_gradient_beats_noise_under_quantize():
    r = Quantize(8)
    g = score_corpus(r, generate_corpus(CorpusSpec("gradient", 30, seed=1)).images)
    n = score_corpus(r, generate_corpus(CorpusSpec("noise", 30, seed=1)).images)
    assert np.mean(g) > np.mean(n)


def test_blotch_labels_are_region_ids():
    spec = CorpusSpec("blotch", 3, 12, 10, seed=4, class_count=6)
    corpus = generate_corpus(spec)
    for img, lab in zip(corpus.images, corpus.labels):
        assert lab.class_count == 6
        # each region is a flat colour, so pixels of one class share one colour
        for c in np.unique(lab.data):
            colours = img.data[lab.data == c]
            assert (colours == colours[0]).all()


def test_checker_labels_follow_blocks():
    corpus = generate_corpus(CorpusSpec("checker", 2, 16, 16, seed=5))
    for img, lab in zip(corpus.images, corpus.labels):
        assert set(np.unique(lab.data)) <= {0, 1}
        assert lab.data[0, 0] == 0
        for c in (0, 1):
            colours = img.data[lab.data == c]
            assert (colours == colours[0]).all()


def test_unlabeled_kinds():
    assert generate_corpus(CorpusSpec("noise", 2)).labels is None
    assert generate_corpus(CorpusSpec("gradient", 2)).labels is None


@pytest.mark.parametrize("bad", [dict(kind="stripes"), dict(count=0), dict(height=4),
                                 dict(seed=-1), dict(kind="blotch", class_count=1)])
def test_spec_validation(bad):
    args = dict(kind="noise", count=1) | bad
    with pytest.raises(ValueError):
        CorpusSpec(**args)


def test_shift_validation():
    for bad in (dict(brightness_offset=1.5), dict(blur_factor=0), dict(noise_amplitude=-0.1)):
        with pytest.raises(ValueError):
            Shift(**bad)


def test_identity_shift_is_base_corpus():
    base = generate_corpus(CorpusSpec("gradient", 3, seed=6))
    same = generate_corpus(CorpusSpec("gradient", 3, seed=6, shift=Shift(0.0, 1, 0.0)))
    assert base.images == same.images


def test_brightness_then_blur():
    levels = np.zeros((8, 8, 3))
    levels[:, 4:] = 255.0
    out = apply_shift(levels, Shift(brightness_offset=0.5, blur_factor=3), 0, 0)
    # brightness first: black moves to -0.5, white clips at 1, then the blur mixes them
    left = (-1.0 + 0.5 + 1.0) * 255 / 2
    assert out[0, 0, 0] == pytest.approx(left)
    assert out[0, 7, 0] == pytest.approx(255.0)
    assert out[0, 3, 0] == pytest.approx((2 * left + 255.0) / 3)


def test_noise_shift_stays_in_range_and_grows():
    levels = np.full((16, 16, 3), 250.0)
    spreads = []
    for amp in (0.1, 0.3, 0.6):
        out = apply_shift(levels, Shift(noise_amplitude=amp), 3, 0)
        assert out.min() >= 0 and out.max() <= 255
        spreads.append(np.abs(out - levels).mean())
    assert spreads[0] < spreads[1] < spreads[2]


def _miou(gt, pred):
    return miou(ConfusionAccumulator(gt.class_count).add(gt, pred))


def test_perturb_labels_extremes():
    gt = generate_corpus(CorpusSpec("blotch", 1, seed=2, class_count=2)).labels[0]
    assert perturb_labels(gt, 0.0, 1) == gt
    assert _miou(gt, perturb_labels(gt, 0.0, 1)) == 1.0
    assert _miou(gt, perturb_labels(gt, 1.0, 1)) == 0.0


def test_perturb_labels_monotone():
    gt = generate_corpus(CorpusSpec("blotch", 1, 32, 32, seed=3, class_count=5)).labels[0]
    scores = [_miou(gt, perturb_labels(gt, f / 10, 7)) for f in range(11)]
    assert all(a >= b for a, b in zip(scores, scores[1:]))
    flipped = [(perturb_labels(gt, f / 10, 7).data != gt.data) for f in range(11)]
    for small, big in zip(flipped, flipped[1:]):
        assert not (small & ~big).any()


def test_perturb_keeps_ignore():
    gt = LabelMap(np.array([[0, 255], [1, 2]]), 3)
    out = perturb_labels(gt, 1.0, 0)
    assert out.data[0, 1] == 255
    assert (out.data[gt.valid_mask] != gt.data[gt.valid_mask]).all()
    assert fill_ignored(out).data[0, 1] == 0
    with pytest.raises(ValueError):
        perturb_labels(gt, 1.5, 0)


def test_write_corpus(tmp_path):
    corpus = generate_corpus(CorpusSpec("checker", 3, 12, 9, seed=1))
    root = write_corpus(corpus, tmp_path / "c", pred_flip=0.2, pred_seed=4)
    for i in range(3):
        assert normalize(load_image(root / "images" / f"img_{i:05d}.ppm")) == corpus.images[i]
        assert load_labelmap(root / "labels" / f"img_{i:05d}.pgm", 2) == corpus.labels[i]
        pred = load_labelmap(root / "pred" / f"img_{i:05d}.pgm", 2)
        assert pred.data.shape == (12, 9)
