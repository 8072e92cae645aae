import numpy as np
import pytest

from boxplan.core import BoundingBox, box_from_point, rng_from_seed
from boxplan.learned_models import NoDataError, RegressionTree


def train_stream(tree, xs, ys):
    for x, y in zip(np.atleast_2d(xs.T).T, ys):
        tree.observe(np.atleast_1d(x), y)


def test_constant_outcomes_never_split():
    tree = RegressionTree()
    rng = rng_from_seed(0)
    for _ in range(2000):
        tree.observe([rng.random()], 4.2)
    assert tree.num_leaves == 1


def test_step_function_splits_near_step():
    tree = RegressionTree()
    rng = rng_from_seed(1)
    step_at = 0.37
    for _ in range(3000):
        x = rng.random()
        tree.observe([x], 0.0 if x <= step_at else 1.0)
    assert tree.num_leaves >= 2
    # the first split threshold is the root's
    assert abs(tree.root.threshold - step_at) < 0.05


def test_max_leaves_cap_and_node_count():
    tree = RegressionTree(max_leaves=5)
    rng = rng_from_seed(2)
    for _ in range(8000):
        x = rng.random()
        tree.observe([x], np.sin(12 * x) + rng.normal() * 0.01)
    assert tree.num_leaves <= 5
    assert tree.num_nodes <= 2 * 5 - 1
    leaves_before = tree.num_leaves
    for _ in range(2000):
        x = rng.random()
        tree.observe([x], np.sin(12 * x))
    assert tree.num_leaves == leaves_before


def test_point_queries_match_routed_leaf():
    tree = RegressionTree()
    rng = rng_from_seed(3)
    for _ in range(1500):
        x = rng.random()
        tree.observe([x], (2.0 if x <= 0.5 else -1.0) + rng.normal() * 0.1)
    x = np.array([0.25])
    leaf = tree._route(x)
    assert tree.predict(x) == leaf.mean
    assert tree.variance_at(x) == leaf.variance
    rg = tree.range_at(x)
    assert (rg.lo, rg.hi) == (leaf.y_min, leaf.y_max)


def test_box_straddling_root_combines_children():
    tree = RegressionTree(split_period=10, tie_threshold=1.0)  # split eagerly
    rng = rng_from_seed(4)
    for _ in range(400):
        x = rng.random()
        tree.observe([x], rng.uniform(0.0, 1.0) if x <= 0.5 else rng.uniform(3.0, 4.0))
    assert tree.num_leaves >= 2
    b = tree.outcome_bounds(BoundingBox([0.0], [1.0]))
    lo_left = tree.outcome_bounds(BoundingBox([0.0], [0.4])).lo
    hi_right = tree.outcome_bounds(BoundingBox([0.6], [1.0])).hi
    assert b.lo == lo_left and b.hi == hi_right


def test_sample_uses_leaf_normal_and_rng_state():
    tree = RegressionTree()
    for y in (0.0, 2.0, 4.0):
        tree.observe([0.5], y)
    a = tree.sample([0.5], rng_from_seed(9))
    b = tree.sample([0.5], rng_from_seed(9))
    assert a == b
    draws = np.array([tree.sample([0.5], rng_from_seed(s)) for s in range(200)])
    # mean 2, sample variance 4: draws are not clipped to [0, 4]
    assert draws.std() > 0.5
    assert (draws < 0).any() or (draws > 4).any()


def test_empty_tree_raises_no_data():
    tree = RegressionTree()
    with pytest.raises(NoDataError):
        tree.predict([0.0])
    with pytest.raises(NoDataError):
        tree.outcome_bounds(BoundingBox([0.0], [1.0]))


def leaf_regions_bounds(tree, box, outcome):
    """Independent oracle: enumerate leaves with their routing regions."""
    results = []

    def rec(node, lo, hi):
        if not hasattr(node, "dim"):  # leaf
            results.append((lo.copy(), hi.copy(), node))
            return
        if lo[node.dim] <= node.threshold:
            hi2 = hi.copy()
            hi2[node.dim] = min(hi2[node.dim], node.threshold)
            rec(node.left, lo, hi2)
        if hi[node.dim] > node.threshold:
            lo2 = lo.copy()
            lo2[node.dim] = max(lo2[node.dim], np.nextafter(node.threshold, np.inf))
            rec(node.right, lo2, hi)

    rec(tree.root, box.lower.copy(), box.upper.copy())
    vals = []
    for _, _, leaf in results:
        vals.extend([leaf.y_min, leaf.y_max] if outcome else [leaf.mean])
    return min(vals), max(vals)


@pytest.mark.parametrize("dims", [1, 3])
def test_box_bounds_match_leaf_region_oracle(dims):
    rng = rng_from_seed(5)
    for _ in range(40):
        tree = RegressionTree(split_period=25, tie_threshold=1.0, max_leaves=8)
        for _ in range(600):
            x = rng.random(dims)
            tree.observe(x, float(np.sin(x.sum() * 7)) + rng.normal() * 0.05)
        lo = rng.random(dims) * 0.5
        hi = lo + rng.random(dims) * 0.5
        box = BoundingBox(lo, hi)
        for outcome in (False, True):
            got = tree.outcome_bounds(box) if outcome else tree.output_bounds(box)
            want_lo, want_hi = leaf_regions_bounds(tree, box, outcome)
            assert got.lo == want_lo and got.hi == want_hi


def test_three_leaf_1d_analytic_box_bounds():
    """Hand-built tree with thresholds 0.3 and 0.7 and leaf means 1, 5, -2:
    box bounds must equal the analytic piecewise max/min."""
    tree = RegressionTree()
    for x, y in ((0.1, 1.0), (0.5, 5.0), (0.9, -2.0)):
        tree.observe([x], y)
    d = tree.to_dict()
    leaf1, leaf5, leaf_neg = (
        {"leaf": True, "count": 1, "mean": m, "m2": 0.0, "y_min": m, "y_max": m}
        for m in (1.0, 5.0, -2.0)
    )
    d["root"] = {
        "leaf": False,
        "dim": 0,
        "threshold": 0.3,
        "left": leaf1,
        "right": {
            "leaf": False,
            "dim": 0,
            "threshold": 0.7,
            "left": leaf5,
            "right": leaf_neg,
        },
    }
    tree = RegressionTree.from_dict(d)
    assert tree.num_leaves == 3
    full = tree.output_bounds(BoundingBox([0.0], [1.0]))
    assert (full.lo, full.hi) == (-2.0, 5.0)
    left_only = tree.output_bounds(BoundingBox([0.0], [0.25]))
    assert (left_only.lo, left_only.hi) == (1.0, 1.0)
    b_mid = tree.output_bounds(BoundingBox([0.4], [0.6]))
    assert (b_mid.lo, b_mid.hi) == (5.0, 5.0)
    straddle = tree.output_bounds(BoundingBox([0.25], [0.5]))
    assert (straddle.lo, straddle.hi) == (1.0, 5.0)
    # boundary point routes left (x <= t)
    at_threshold = tree.output_bounds(box_from_point([0.3]))
    assert (at_threshold.lo, at_threshold.hi) == (1.0, 1.0)


def test_leaf_stats_match_recomputation():
    tree = RegressionTree(split_period=50, tie_threshold=1.0, max_leaves=6)
    rng = rng_from_seed(7)
    for _ in range(1200):
        x = rng.random(2)
        tree.observe(x, float(x[0] * 3 - x[1]) + rng.normal() * 0.2)

    def walk(node):
        if not hasattr(node, "dim"):
            yield node
        else:
            yield from walk(node.left)
            yield from walk(node.right)

    for leaf in walk(tree.root):
        ys = np.array(leaf.ys)
        assert leaf.count == len(ys)
        assert leaf.mean == pytest.approx(ys.mean(), rel=1e-9)
        if len(ys) > 1:
            assert leaf.variance == pytest.approx(ys.var(ddof=1), rel=1e-9)
        assert leaf.y_min == ys.min() and leaf.y_max == ys.max()


def test_serialization_roundtrip_preserves_queries():
    tree = RegressionTree(split_period=20, tie_threshold=1.0)
    rng = rng_from_seed(8)
    for _ in range(500):
        x = rng.random(2)
        tree.observe(x, float(x[0] > 0.5) + rng.normal() * 0.02)
    clone = RegressionTree.from_dict(tree.to_dict())
    assert clone.num_leaves == tree.num_leaves
    for _ in range(50):
        x = rng.random(2)
        assert clone.predict(x) == tree.predict(x)
        assert clone.variance_at(x) == tree.variance_at(x)
    box = BoundingBox([0.2, 0.1], [0.9, 0.8])
    assert clone.outcome_bounds(box) == tree.outcome_bounds(box)
