import numpy as np
import pytest

from conftest import make_sample
from trajwarp.core import RawSequence, SymmetryMap, mirror_sample, to_trajectory_sample
from trajwarp.dtw import dtw_distance, warp
from trajwarp.exceptions import DimensionMismatch, EmptyClass
from trajwarp.templates import (MeanSample, build_template, build_templates, build_templates_mirrored,
                                mean_sample, warp_to_templates)


def test_identical_samples_pick_first():
    s = [make_sample([[1.0, 2.0, 3.0]], index=i) for i in range(3)]
    m = mean_sample(s)
    assert m.source_sample_index == [0]


def test_constant_sequence_example():
    s = [make_sample([[v] * 3], index=i) for i, v in enumerate([0.0, 1.0, 5.0])]
    m = mean_sample(s)
    np.testing.assert_array_equal(m.sub_signals[0], [1, 1, 1])
    assert m.source_sample_index == [1]


def test_per_k_selection_mixes_samples_and_lengths():
    a = make_sample([[0.0, 0.0], [9.0, 9.0, 9.0, 9.0]])
    b = make_sample([[1.0, 1.0, 1.0], [8.0]])
    c = make_sample([[5.0], [0.0, 0.0]])
    m = mean_sample([a, b, c])
    assert m.source_sample_index == [1, 1]
    b2 = make_sample([[1.0, 1.0, 1.0], [4.0]])
    m = mean_sample([a, b2, c])
    assert m.source_sample_index == [1, 1]
    assert m.lengths == (3, 1)


def test_mean_sample_provenance(rng):
    samples = [make_sample([rng.normal(size=rng.integers(3, 12)) for _ in range(4)], index=j)
               for j in range(6)]
    m = mean_sample(samples)
    for k, j in enumerate(m.source_sample_index):
        np.testing.assert_array_equal(m.sub_signals[k], samples[j].sub_signals[k])
        totals = [sum(dtw_distance(s.sub_signals[k], t.sub_signals[k]) for t in samples)
                  for s in samples]
        assert j == int(np.argmin(totals))


def test_template_example():
    s1 = make_sample([[0.0, 2.0, 4.0]])
    s2 = make_sample([[0.0, 4.0]])
    # both summed distances are equal, so selection takes the first sample
    assert mean_sample([s1, s2]).source_sample_index == [0]
    m = MeanSample([np.array([0.0, 4.0])], [1], 1)
    t = build_template([s1, s2], m)
    np.testing.assert_array_equal(t.sub_signals[0], [0.5, 4.0])


def test_single_sample_and_identical_classes(rng):
    s = make_sample([rng.normal(size=7), rng.normal(size=7)])
    t = build_template([s], mean_sample([s]))
    for a, b in zip(t.sub_signals, s.sub_signals):
        np.testing.assert_array_equal(a, b)
    t = build_template([s, s, s], mean_sample([s, s, s]))
    for a, b in zip(t.sub_signals, s.sub_signals):
        np.testing.assert_array_equal(a, b)


def test_template_bounded_by_warped_values(rng):
    samples = [make_sample([rng.normal(size=rng.integers(4, 15)) for _ in range(3)]) for _ in range(5)]
    m = mean_sample(samples)
    t = build_template(samples, m)
    warped = [warp(s, m) for s in samples]
    assert t.lengths == m.lengths
    for k in range(3):
        stack = np.stack([w.sub_signals[k] for w in warped])
        assert np.all(stack.min(axis=0) <= t.sub_signals[k] + 1e-12)
        assert np.all(t.sub_signals[k] <= stack.max(axis=0) + 1e-12)


def test_errors():
    with pytest.raises(EmptyClass):
        mean_sample([])
    with pytest.raises(DimensionMismatch):
        mean_sample([make_sample([[1.0]]), make_sample([[1.0], [2.0]])])
    s = make_sample([[1.0, 2.0]])
    with pytest.raises(DimensionMismatch):
        warp_to_templates(s, build_templates([make_sample([[1.0], [2.0]])])[0])


def test_deterministic(rng):
    samples = [make_sample([rng.normal(size=rng.integers(4, 15)) for _ in range(3)]) for _ in range(5)]
    a = build_template(samples, mean_sample(samples))
    b = build_template(samples, mean_sample(samples, n_jobs=2), n_jobs=2)
    for x, y in zip(a.sub_signals, b.sub_signals):
        assert x.tobytes() == y.tobytes()


def test_build_templates_ordered_by_class(rng):
    samples = [make_sample([rng.normal(size=6)], label=c) for c in (3, 1, 2, 1, 3)]
    templates, means = build_templates(samples)
    assert [t.class_label for t in templates] == [1, 2, 3]
    assert [m.class_label for m in means] == [1, 2, 3]


def test_warp_to_templates_shapes_and_identity(rng):
    s = make_sample([rng.normal(size=9), rng.normal(size=5)])
    templates, _ = build_templates([s])
    w = warp_to_templates(s, templates)
    assert len(w) == 1
    for a, b in zip(w[0].sub_signals, s.sub_signals):
        np.testing.assert_array_equal(a, b)
    others = [make_sample([rng.normal(size=n), rng.normal(size=n + 2)], label=c)
              for c, n in ((1, 7), (2, 12))]
    templates, _ = build_templates(others)
    w = warp_to_templates(s, templates)
    for nu, t in enumerate(templates):
        assert w[nu].lengths == t.lengths


def test_sine_and_ramp_residuals(rng):
    def sample(label, n):
        u = np.linspace(0, 1, n)
        x = np.sin(2 * np.pi * u) if label == 1 else 2 * u - 1
        return make_sample([x + rng.normal(0, 0.05, n)], label=label)

    train = [sample(c, n) for c in (1, 2) for n in (30, 40, 50)]
    templates, _ = build_templates(train)
    for c in (1, 2):
        for n in (25, 45, 60):
            s = sample(c, n)
            res = [dtw_distance(s.sub_signals[0], t.sub_signals[0]) for t in templates]
            assert res[c - 1] < res[2 - c]


SYM = SymmetryMap(((1, 2),), axis=0)


def _hand_sample(side, rng, T=30):
    """Three-point body; the hand on ``side`` (1 or 2) draws an arc."""
    u = np.linspace(0, np.pi, T)
    joints = np.zeros((T, 3, 3))
    joints[:, 1] = [-0.2, 0, 0]
    joints[:, 2] = [0.2, 0, 0]
    sign = -1 if side == 1 else 1
    joints[:, side] += np.stack([sign * 0.3 * np.sin(u), 0.2 * np.cos(u), 0.4 * np.sin(u)], 1)
    joints += rng.normal(0, 0.01, joints.shape)
    return to_trajectory_sample(RawSequence(joints, class_label=1), 0)


def test_mirrored_templates(rng):
    right = [_hand_sample(2, rng) for _ in range(4)]
    left = _hand_sample(1, rng)
    templates, means, doubled, labels = build_templates_mirrored(right, SYM)
    assert [t.variant for t in templates] == ["original", "mirrored"]
    assert len(doubled) == 8 and labels == [1] * 8
    total = [sum(dtw_distance(a, b) for a, b in zip(left.sub_signals, t.sub_signals))
             for t in templates]
    assert total[1] < total[0]


def test_mirrored_template_is_mirror_of_original(rng):
    samples = [make_sample([rng.normal(size=6) for _ in range(9)], n_joints=3) for _ in range(4)]
    templates, _, _, _ = build_templates_mirrored(samples, SYM)
    expected = mirror_sample(make_sample(templates[0].sub_signals, n_joints=3), SYM)
    for a, b in zip(templates[1].sub_signals, expected.sub_signals):
        np.testing.assert_allclose(a, b, atol=1e-12)
