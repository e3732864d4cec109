import math

import numpy as np
import pytest

from modules.metrics.core import DomainError, ShapeError, Validity
from modules.metrics.segment import (
    Connectivity, EmptyPolicy, HausdorffVariant, Mask, OverlapVariant, PartitionKind, PointSet, boundary_extract,
    boundary_f1, contingency_table, hausdorff, overlap_metrics, partition_metrics,
)
from modules.oracles import naive_directed_hausdorff, naive_hausdorff, pair_counting_rand


def mask_of(shape, points, spacing=None) -> Mask:
    grid = np.zeros(shape, dtype=bool)
    for p in points:
        grid[p] = True
    return Mask(grid, spacing)


def random_mask(rng, shape, density=0.4) -> Mask:
    grid = rng.random(shape) < density
    grid.flat[int(rng.integers(grid.size))] = True
    return Mask(grid)


# ---------------------------------------------------------------------------
# Overlap
# ---------------------------------------------------------------------------

def test_identical_masks_overlap_perfectly():
    m = mask_of((4, 4), [(0, 0), (1, 1), (2, 3)])
    report = overlap_metrics(m, m)
    for value in (report.accuracy, report.precision, report.recall, report.f1, report.dice, report.iou):
        assert value.value == 1.0


def test_hand_counted_overlap():
    report = overlap_metrics(mask_of((1, 3), [(0, 0), (0, 1)]), mask_of((1, 3), [(0, 1), (0, 2)]))
    assert report.dice.value == pytest.approx(0.5)
    assert report.iou.value == pytest.approx(1.0 / 3.0)
    assert report.precision.value == pytest.approx(0.5)
    assert report.recall.value == pytest.approx(0.5)
    assert report.accuracy.value == pytest.approx(1.0 / 3.0)


def test_background_dominance_on_disjoint_masks():
    pred = mask_of((20, 20), [(0, 0)])
    ref = mask_of((20, 20), [(19, 19)])
    foreground = overlap_metrics(pred, ref, OverlapVariant.FOREGROUND_ONLY)
    averaged = overlap_metrics(pred, ref, OverlapVariant.CLASS_AVERAGED)
    assert foreground.dice.value == 0.0
    assert foreground.iou.value == 0.0
    assert averaged.iou.value == pytest.approx((0.0 + 398.0 / 400.0) / 2.0)
    assert averaged.dice.value > 0.45
    assert averaged.mean_iou.value == averaged.iou.value


def test_micro_precision_is_accuracy(rng):
    for _ in range(20):
        pred, ref = random_mask(rng, (6, 7)), random_mask(rng, (6, 7))
        report = overlap_metrics(pred, ref, OverlapVariant.MICRO)
        assert report.precision.value == pytest.approx(report.accuracy.value)
        assert report.recall.value == pytest.approx(report.accuracy.value)


@pytest.mark.parametrize("policy,expected", [(EmptyPolicy.ZERO, 0.0), (EmptyPolicy.ONE, 1.0)])
def test_empty_masks_follow_the_policy(policy, expected):
    empty = Mask(np.zeros((3, 3), dtype=bool))
    report = overlap_metrics(empty, empty, empty_policy=policy)
    assert report.dice.value == expected
    assert report.iou.value == expected
    assert report.accuracy.value == 1.0


def test_empty_masks_undefined_by_default():
    empty = Mask(np.zeros((3, 3), dtype=bool))
    report = overlap_metrics(empty, empty)
    assert report.dice.validity == Validity.UNDEFINED
    assert report.dice.descriptor.params_dict["empty_policy"] == "undefined"


def test_dice_iou_identity(rng):
    for shape in ((5, 8), (4, 5, 6)):
        for _ in range(50):
            pred, ref = random_mask(rng, shape), random_mask(rng, shape)
            for variant in (OverlapVariant.FOREGROUND_ONLY, OverlapVariant.BACKGROUND_ONLY, OverlapVariant.MICRO):
                report = overlap_metrics(pred, ref, variant)
                iou = report.iou.value
                assert report.dice.value == pytest.approx(2.0 * iou / (1.0 + iou), abs=1e-12)


def test_overlap_invariant_under_shared_permutation(rng):
    pred, ref = random_mask(rng, (6, 6)), random_mask(rng, (6, 6))
    order = rng.permutation(36)
    shuffled_pred = Mask(pred.grid.ravel()[order].reshape(6, 6))
    shuffled_ref = Mask(ref.grid.ravel()[order].reshape(6, 6))
    a = overlap_metrics(pred, ref, OverlapVariant.CLASS_AVERAGED)
    b = overlap_metrics(shuffled_pred, shuffled_ref, OverlapVariant.CLASS_AVERAGED)
    assert (a.dice.value, a.iou.value, a.accuracy.value) == (b.dice.value, b.iou.value, b.accuracy.value)


def test_mask_preconditions():
    with pytest.raises(ShapeError):
        overlap_metrics(Mask(np.ones((2, 2))), Mask(np.ones((2, 3))))
    with pytest.raises(ShapeError):
        Mask(np.ones(4))
    with pytest.raises(ShapeError):
        Mask(np.ones((2, 2)), spacing=(1.0,))
    with pytest.raises(DomainError):
        Mask(np.ones((2, 2)), spacing=(1.0, 0.0))


# ---------------------------------------------------------------------------
# Boundaries and distances
# ---------------------------------------------------------------------------

def test_boundary_extraction():
    line = mask_of((5, 5), [(2, c) for c in range(5)])
    assert len(boundary_extract(line)) == 5
    square = mask_of((5, 5), [(r, c) for r in range(1, 4) for c in range(1, 4)])
    boundary = boundary_extract(square)
    assert len(boundary) == 8
    assert [2.0, 2.0] not in boundary.coordinates.tolist()
    assert boundary_extract(Mask(np.zeros((3, 3)))).is_empty


def test_boundary_coordinates_use_spacing():
    m = mask_of((3, 3), [(2, 1)], spacing=(0.5, 2.0))
    assert boundary_extract(m).coordinates.tolist() == [[1.0, 2.0]]


def test_single_pair_hausdorff():
    a = mask_of((5, 5), [(0, 0)])
    b = mask_of((5, 5), [(3, 4)])
    for variant in HausdorffVariant:
        assert hausdorff(a, b, variant).value == pytest.approx(5.0)


def test_hausdorff_asymmetry():
    a = mask_of((1, 11), [(0, 0)])
    b = mask_of((1, 11), [(0, 0), (0, 10)])
    assert hausdorff(a, b, HausdorffVariant.DIRECTED_AB).value == 0.0
    assert hausdorff(a, b, HausdorffVariant.DIRECTED_BA).value == 10.0
    assert hausdorff(a, b, HausdorffVariant.SYMMETRIC_MAX).value == 10.0


def test_hausdorff_edge_cases():
    m = mask_of((4, 4), [(1, 1), (2, 2)])
    for variant in HausdorffVariant:
        assert hausdorff(m, m, variant).value == 0.0
    empty = Mask(np.zeros((4, 4)))
    assert hausdorff(m, empty).validity == Validity.UNDEFINED
    with pytest.raises(DomainError):
        hausdorff(m, m, HausdorffVariant.PERCENTILE, q=120.0)


def test_hausdorff_matches_naive_point_sets(rng):
    for _ in range(30):
        a, b = random_mask(rng, (7, 6), 0.3), random_mask(rng, (7, 6), 0.3)
        pa = np.argwhere(a.grid).tolist()
        pb = np.argwhere(b.grid).tolist()
        everywhere = {"point_set": PointSet.ALL_FOREGROUND}
        assert hausdorff(a, b, HausdorffVariant.DIRECTED_AB, **everywhere).value == pytest.approx(
            naive_directed_hausdorff(pa, pb))
        assert hausdorff(a, b, HausdorffVariant.SYMMETRIC_MAX, **everywhere).value == pytest.approx(
            naive_hausdorff(pa, pb))


def test_hausdorff_variant_ordering(rng):
    for _ in range(30):
        a, b = random_mask(rng, (8, 8), 0.25), random_mask(rng, (8, 8), 0.25)
        symmetric = hausdorff(a, b).value
        assert hausdorff(a, b, HausdorffVariant.PERCENTILE, q=100.0).value == pytest.approx(symmetric)
        assert hausdorff(a, b, HausdorffVariant.PERCENTILE, q=95.0).value <= symmetric + 1e-12
        directed = max(hausdorff(a, b, HausdorffVariant.DIRECTED_AB).value,
                       hausdorff(a, b, HausdorffVariant.DIRECTED_BA).value)
        assert directed == symmetric


def test_distances_scale_with_spacing(rng):
    a, b = random_mask(rng, (6, 6), 0.3), random_mask(rng, (6, 6), 0.3)
    scaled_a, scaled_b = Mask(a.grid, (2.5, 2.5)), Mask(b.grid, (2.5, 2.5))
    assert hausdorff(scaled_a, scaled_b).value == pytest.approx(2.5 * hausdorff(a, b).value)
    assert boundary_f1(scaled_a, scaled_b, theta=2.5).value == pytest.approx(boundary_f1(a, b, theta=1.0).value)


def test_boundary_f1():
    upper = mask_of((6, 6), [(2, c) for c in range(6)])
    lower = mask_of((6, 6), [(3, c) for c in range(6)])
    assert boundary_f1(upper, upper, theta=0.0).value == 1.0
    assert boundary_f1(upper, lower, theta=1.0).value == 1.0
    assert boundary_f1(upper, lower, theta=0.5).value == 0.0
    far = mask_of((20, 20), [(19, 19)])
    assert boundary_f1(mask_of((20, 20), [(0, 0)]), far, theta=2.0).value == 0.0
    assert boundary_f1(upper, Mask(np.zeros((6, 6)))).validity == Validity.UNDEFINED


def test_full_connectivity_is_a_declared_variant():
    ring = mask_of((5, 5), [(r, c) for r in range(5) for c in range(5) if (r, c) != (2, 2)])
    face = boundary_extract(ring, Connectivity.FACE)
    full = boundary_extract(ring, Connectivity.FULL)
    assert len(full) >= len(face)
    a = hausdorff(ring, ring, connectivity=Connectivity.FACE)
    b = hausdorff(ring, ring, connectivity=Connectivity.FULL)
    assert a.descriptor != b.descriptor


def test_depth_one_volume_matches_its_slice(rng):
    for _ in range(10):
        a, b = random_mask(rng, (6, 5), 0.35), random_mask(rng, (6, 5), 0.35)
        a3, b3 = Mask(a.grid[None, :, :]), Mask(b.grid[None, :, :])
        assert overlap_metrics(a3, b3).dice.value == overlap_metrics(a, b).dice.value
        assert hausdorff(a3, b3).value == pytest.approx(hausdorff(a, b).value)
        assert boundary_f1(a3, b3).value == pytest.approx(boundary_f1(a, b).value)
        for kind in PartitionKind:
            first, second = partition_metrics(a3, b3, kind), partition_metrics(a, b, kind)
            assert first.validity == second.validity
            assert first.value == second.value


# ---------------------------------------------------------------------------
# Partition comparison
# ---------------------------------------------------------------------------

def test_identical_partitions():
    m = mask_of((3, 3), [(0, 0), (1, 1)])
    assert partition_metrics(m, m, PartitionKind.ADAPTED_RAND_ERROR).value == pytest.approx(0.0, abs=1e-15)
    assert partition_metrics(m, m, PartitionKind.ADJUSTED_RAND_INDEX).value == pytest.approx(1.0)
    assert partition_metrics(m, m, PartitionKind.VARIATION_OF_INFORMATION).value == pytest.approx(0.0, abs=1e-15)


def test_all_foreground_against_half_foreground():
    pred = Mask(np.ones((2, 2), dtype=bool))
    ref = mask_of((2, 2), [(0, 0), (0, 1)])
    assert contingency_table(pred, ref).tolist() == [[2.0, 2.0]]
    ari, are, voi = pair_counting_rand([1, 1, 1, 1], [1, 1, 0, 0])
    assert partition_metrics(pred, ref, PartitionKind.ADAPTED_RAND_ERROR).value == pytest.approx(are)
    assert partition_metrics(pred, ref, PartitionKind.ADAPTED_RAND_ERROR).value == pytest.approx(0.5)
    assert partition_metrics(pred, ref, PartitionKind.ADJUSTED_RAND_INDEX).value == pytest.approx(ari, abs=1e-15)
    assert partition_metrics(pred, ref, PartitionKind.VARIATION_OF_INFORMATION).value == pytest.approx(voi)
    assert voi == pytest.approx(math.log(2.0))


def test_single_segment_partitions():
    full = Mask(np.ones((2, 3), dtype=bool))
    empty = Mask(np.zeros((2, 3), dtype=bool))
    assert partition_metrics(full, empty, PartitionKind.ADJUSTED_RAND_INDEX).value == 1.0
    assert partition_metrics(full, empty, PartitionKind.VARIATION_OF_INFORMATION).value == 0.0


def test_partition_metrics_match_pair_counting(rng):
    for _ in range(40):
        pred, ref = random_mask(rng, (5, 6), rng.uniform(0.1, 0.9)), random_mask(rng, (5, 6), rng.uniform(0.1, 0.9))
        ari, are, voi = pair_counting_rand(pred.grid.ravel().tolist(), ref.grid.ravel().tolist())
        expected = {
            PartitionKind.ADJUSTED_RAND_INDEX: ari,
            PartitionKind.ADAPTED_RAND_ERROR: are,
            PartitionKind.VARIATION_OF_INFORMATION: voi,
        }
        for kind, oracle in expected.items():
            value = partition_metrics(pred, ref, kind)
            if math.isnan(oracle):
                assert value.validity == Validity.UNDEFINED
            else:
                assert value.value == pytest.approx(oracle, abs=1e-9)


def test_independent_partitions_have_chance_level_ari(rng):
    pred = Mask(rng.random((100, 100)) < 0.5)
    ref = Mask(rng.random((100, 100)) < 0.3)
    assert abs(partition_metrics(pred, ref, PartitionKind.ADJUSTED_RAND_INDEX).value) < 0.05


def test_single_row_mask_is_all_boundary():
    row = Mask(np.ones((1, 5)))
    boundary = boundary_extract(row)
    assert len(boundary) == 5
    assert boundary.coordinates.shape == (5, 2)
    column = Mask(np.ones((4, 1, 3)))
    assert len(boundary_extract(column)) == 12


def test_depth_one_volume_keeps_in_plane_boundaries():
    volume = Mask(np.ones((1, 3, 3)))
    assert len(boundary_extract(volume)) == 8
    assert boundary_extract(volume).coordinates.shape == (8, 2)


def test_distances_reject_mismatched_spacing():
    a = mask_of((4, 4), [(1, 1)], spacing=(1.0, 1.0))
    b = mask_of((4, 4), [(2, 2)], spacing=(0.5, 0.5))
    with pytest.raises(DomainError):
        hausdorff(a, b)
    with pytest.raises(DomainError):
        boundary_f1(a, b)
