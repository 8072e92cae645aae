import numpy as np
import pytest

from boxplan.core import BoundingBox, box_from_point, rng_from_seed
from boxplan.learned_models import IdentityFeature, LinearModel, NoDataError


def unit_box(n):
    return BoundingBox(np.zeros(n), np.ones(n))


def identity_model(weights, **kw):
    return LinearModel([IdentityFeature(d) for d in range(len(weights))], weights, **kw)


def test_output_bounds_sign_split():
    m = identity_model([1.0, -2.0])
    b = m.output_bounds(unit_box(2))
    assert (b.lo, b.hi) == (-2.0, 1.0)


def test_point_box_output_is_exact():
    m = identity_model([0.5, 1.5, -3.0])
    x = np.array([0.2, -0.7, 1.1])
    b = m.output_bounds(box_from_point(x))
    assert b.lo == pytest.approx(m.predict(x))
    assert b.hi == pytest.approx(m.predict(x))


def test_one_hot_group_rule():
    m = identity_model([3.0, 1.0, 2.0], one_hot_groups=[(0, 1, 2)])
    b = m.output_bounds(unit_box(3))
    assert (b.lo, b.hi) == (1.0, 3.0)  # not the naive (0, 6)


def test_one_hot_tightening_never_widens():
    rng = rng_from_seed(0)
    for _ in range(100):
        w = rng.normal(size=4)
        grouped = identity_model(w, one_hot_groups=[(0, 1, 2, 3)])
        naive = identity_model(w)
        box = unit_box(4)
        g = grouped.output_bounds(box)
        nv = naive.output_bounds(box)
        assert nv.lo <= g.lo and g.hi <= nv.hi


def test_one_hot_group_restricted_by_box():
    # member 0 cannot activate inside the box, so only 1 and 2 contribute
    m = identity_model([3.0, 1.0, 2.0], one_hot_groups=[(0, 1, 2)])
    box = BoundingBox([0.0, 0.0, 0.0], [0.0, 1.0, 1.0])
    b = m.output_bounds(box)
    assert (b.lo, b.hi) == (1.0, 2.0)


def test_outcome_bounds_widen_by_residual_extrema():
    m = identity_model([1.0])
    box = BoundingBox([1.0], [2.0])
    m.observe([0.0], -0.1)  # residual -0.1
    m.observe([0.0], 0.3)  # residual 0.3
    b = m.outcome_bounds(box)
    assert b.lo == pytest.approx(0.9)
    assert b.hi == pytest.approx(2.3)


def test_outcome_equals_output_with_zero_residuals():
    m = identity_model([2.0])
    m.observe([1.0], 2.0)  # exact fit, residual 0
    box = BoundingBox([0.0], [1.0])
    out = m.output_bounds(box)
    oc = m.outcome_bounds(box)
    assert (oc.lo, oc.hi) == (out.lo, out.hi)


def test_observed_outcome_inside_point_outcome_bounds():
    rng = rng_from_seed(1)
    m = identity_model(rng.normal(size=3))
    data = [(rng.normal(size=3), rng.normal()) for _ in range(50)]
    for x, y in data:
        m.observe(x, y)
    for x, y in data:
        b = m.outcome_bounds(box_from_point(x))
        assert b.lo - 1e-9 <= y <= b.hi + 1e-9


def test_no_data_error():
    m = identity_model([1.0])
    with pytest.raises(NoDataError):
        m.outcome_bounds(unit_box(1))


def test_binned_residuals_use_intersecting_bins():
    m = identity_model([0.0], bins=4, bin_dim=0, bin_range=(0.0, 4.0))
    m.observe([0.5], 1.0)  # bin 0, residual 1.0
    m.observe([3.5], -2.0)  # bin 3, residual -2.0
    only_first = m.outcome_bounds(BoundingBox([0.0], [0.9]))
    assert (only_first.lo, only_first.hi) == (1.0, 1.0)
    both = m.outcome_bounds(BoundingBox([0.0], [4.0]))
    assert (both.lo, both.hi) == (-2.0, 1.0)


def test_output_bounds_soundness_random():
    rng = rng_from_seed(2)
    for _ in range(20):
        w = rng.normal(size=5)
        m = identity_model(w)
        lo = rng.normal(size=5)
        hi = lo + rng.random(5) * 2
        box = BoundingBox(lo, hi)
        b = m.output_bounds(box)
        xs = rng.uniform(box.lower, box.upper, size=(500, 5))
        preds = xs @ w
        assert b.lo - 1e-9 <= preds.min() and preds.max() <= b.hi + 1e-9
