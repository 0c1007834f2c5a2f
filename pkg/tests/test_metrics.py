import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from helpers import image_from_levels, labels

from dmscope.errors import EmptyInputError, ShapeMismatchError
from dmscope.imageio import Image, LabelMap
from dmscope.metrics import (ConfusionAccumulator, PsnrConfig, accumulate_confusion,
                             delta_miou, miou, psnr, squared_error_sum)

levels = arrays(np.uint8, (3, 4, 3))


def test_psnr_unit_mse(rng):
    raw = rng.integers(1, 256, size=(6, 6, 3))
    assert psnr(image_from_levels(raw), image_from_levels(raw - 1)) == pytest.approx(
        48.1308036086791, abs=1e-9)


def test_psnr_identical_is_capped():
    img = image_from_levels(np.zeros((2, 2, 3)))
    assert psnr(img, img) == 99.0
    assert psnr(img, img, PsnrConfig(cap_dB=120.0)) == 120.0


def test_psnr_black_vs_white():
    black = image_from_levels(np.zeros((2, 2, 3)))
    white = image_from_levels(np.full((2, 2, 3), 255))
    assert psnr(black, white) == 0.0


def test_psnr_against_float_oracle(rng):
    a = rng.integers(0, 256, size=(8, 9, 3))
    b = rng.integers(0, 256, size=(8, 9, 3))
    mse = np.mean((a.astype(float) - b) ** 2)
    assert psnr(image_from_levels(a), image_from_levels(b)) == pytest.approx(
        10 * math.log10(255 ** 2 / mse), abs=1e-12)


def test_psnr_is_computed_after_denormalizing():
    a = Image(np.zeros((1, 1, 3)))
    # offsets far below one 8-bit step vanish after rounding
    assert psnr(a, Image(np.full((1, 1, 3), 1e-4))) == 99.0


def test_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        psnr(image_from_levels(np.zeros((2, 2, 3))), image_from_levels(np.zeros((2, 3, 3))))


@given(levels, levels)
def test_psnr_symmetric(a, b):
    assert psnr(image_from_levels(a), image_from_levels(b)) == \
        psnr(image_from_levels(b), image_from_levels(a))


@settings(max_examples=50)
@given(levels, st.integers(1, 40))
def test_psnr_decreases_with_error(a, extra):
    base = image_from_levels(a)
    near = np.clip(a.astype(int) + 1, 0, 255)
    far = np.clip(a.astype(int) + 1 + extra, 0, 255)
    e_near = squared_error_sum(base, image_from_levels(near))
    e_far = squared_error_sum(base, image_from_levels(far))
    assert e_far >= e_near
    if e_near > 0:
        assert psnr(base, image_from_levels(far)) <= psnr(base, image_from_levels(near))


def test_confusion_hand_count():
    acc = ConfusionAccumulator(2).add(labels([[0, 0], [1, 1]], 2), labels([[0, 1], [1, 1]], 2))
    assert acc.tp.tolist() == [1, 2]
    assert acc.fn.tolist() == [1, 0]
    assert acc.fp.tolist() == [0, 1]
    assert acc.iou().tolist() == [0.5, 2 / 3]
    assert miou(acc) == pytest.approx(7 / 12, abs=1e-15)


def test_ignore_pixels_do_not_count():
    acc = ConfusionAccumulator(2).add(labels([[255, 255], [255, 255]], 2),
                                      labels([[0, 1], [1, 0]], 2))
    assert acc.matrix.sum() == 0
    with pytest.raises(EmptyInputError):
        miou(acc)


def test_pred_with_ignore_marker_rejected():
    with pytest.raises(ValueError):
        ConfusionAccumulator(2).add(labels([[0, 1]], 2), labels([[0, 255]], 2))


def test_perfect_and_disjoint():
    gt = labels([[0, 1], [2, 2]], 3)
    assert miou(ConfusionAccumulator(3).add(gt, gt)) == 1.0
    shifted = LabelMap((gt.data + 1) % 3, 3)
    assert miou(ConfusionAccumulator(3).add(gt, shifted)) == 0.0


def test_absent_class_excluded():
    acc = ConfusionAccumulator(4).add(labels([[0, 1]], 4), labels([[0, 1]], 4))
    assert np.isnan(acc.iou()[2:]).all()
    assert miou(acc) == 1.0


def test_class_count_mismatch():
    with pytest.raises(ValueError):
        ConfusionAccumulator(3).add(labels([[0, 1]], 2), labels([[0, 1]], 2))
    with pytest.raises(ShapeMismatchError):
        ConfusionAccumulator(2).add(labels([[0, 1]], 2), labels([[0], [1]], 2))


def _random_pairs(rng, n, s=4):
    out = []
    for _ in range(n):
        gt = rng.integers(0, s, size=(5, 6))
        gt[rng.random(gt.shape) < 0.1] = 255
        out.append((LabelMap(gt, s), LabelMap(rng.integers(0, s, size=(5, 6)), s)))
    return out


def test_order_independent_and_mergeable(rng):
    pairs = _random_pairs(rng, 12)
    forward = ConfusionAccumulator(4)
    for gt, pred in pairs:
        accumulate_confusion(forward, gt, pred)
    backward = ConfusionAccumulator(4)
    for gt, pred in reversed(pairs):
        backward.add(gt, pred)
    left, right = ConfusionAccumulator(4), ConfusionAccumulator(4)
    for gt, pred in pairs[:5]:
        left.add(gt, pred)
    for gt, pred in pairs[5:]:
        right.add(gt, pred)
    assert forward == backward == left.merge(right) == right.merge(left)
    # every labeled pixel lands in exactly one cell
    assert forward.matrix.sum() == sum(int(gt.valid_mask.sum()) for gt, _ in pairs)


def test_miou_against_loop_oracle(rng):
    pairs = _random_pairs(rng, 6)
    acc = ConfusionAccumulator(4)
    for gt, pred in pairs:
        acc.add(gt, pred)
    ious = []
    for c in range(4):
        tp = fp = fn = 0
        for gt, pred in pairs:
            for g, p in zip(gt.data.ravel(), pred.data.ravel()):
                if g == 255:
                    continue
                tp += g == c and p == c
                fp += g != c and p == c
                fn += g == c and p != c
        if tp + fp + fn:
            ious.append(tp / (tp + fp + fn))
    assert miou(acc) == pytest.approx(sum(ious) / len(ious), abs=1e-15)


def test_delta_miou():
    assert delta_miou(0.812, 0.667) == pytest.approx(0.145, abs=1e-12)
    assert delta_miou(0.5, 0.5) == 0.0
    assert delta_miou(0.4, 0.6) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        delta_miou(1.2, 0.5)


def test_psnr_single_channel_off_by_full_range():
    a = image_from_levels([[[0, 10, 20]]])
    b = image_from_levels([[[255, 10, 20]]])
    assert psnr(a, b) == pytest.approx(10 * math.log10(3), abs=1e-12)
    assert psnr(a, b) == pytest.approx(4.7712, abs=1e-4)


def test_delta_miou_bdd_row():
    assert delta_miou(0.538, 0.490) == pytest.approx(0.048, abs=1e-12)
