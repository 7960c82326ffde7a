"""
Tests for the statistical privacy audit.
"""

import numpy as np
import pytest

from secure_sum import privacy_audit, sample_announcements


def test_uniform_pads_hide_inputs():
    report = privacy_audit((10, 20, 30, 40), (10, 20, 30, 200), n=8, rounds=100_000, seed=1)
    assert len(report.parties) == 4
    assert report.min_uniformity_p() > 1e-3
    assert report.min_two_sample_p() > 1e-3
    assert report.passes()


def test_constant_pads_are_detected():
    report = privacy_audit((10, 20, 30, 40), (10, 20, 30, 40), n=8, rounds=10_000, seed=2, constant_pads=True)
    assert report.min_uniformity_p() < 1e-6
    assert not report.passes()


def test_sampled_announcements_telescope():
    x = sample_announcements((5, 6, 7), n=6, rounds=1000, seed=3)
    assert x.shape == (1000, 3)
    assert np.all(x.sum(axis=1) % 64 == 18)


def test_constant_pads_repeat_announcements():
    x = sample_announcements((5, 6, 7), n=6, rounds=50, seed=4, constant_pads=True)
    assert np.all(x == x[0])


@pytest.mark.parametrize("kwargs", [{"n": 13}, {"rounds": 500}])
def test_audit_preconditions(kwargs):
    options = {"n": 8, "rounds": 10_000}
    options.update(kwargs)
    with pytest.raises(ValueError):
        privacy_audit((1, 2, 3), (1, 2, 3), **options)
