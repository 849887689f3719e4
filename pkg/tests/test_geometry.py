import numpy as np
import pytest

from fuzzymatch.geometry import (DegenerateConfigurationError, Homography,
                                 PointAtInfinityError, apply, correct_mask, count_correct,
                                 dlt, ransac_homography, read_homography,
                                 reprojection_errors, write_homography)
from fuzzymatch.matcher import MatchCandidate


def random_h(rng, perspective=5e-4):
    m = np.eye(3)
    m[:2, :2] += rng.uniform(-0.2, 0.2, (2, 2))
    m[:2, 2] = rng.uniform(-50, 50, 2)
    m[2, :2] = rng.uniform(-perspective, perspective, 2)
    return Homography(m)


def project_oracle(h, p):
    x, y = p
    w = h[2, 0] * x + h[2, 1] * y + h[2, 2]
    return ((h[0, 0] * x + h[0, 1] * y + h[0, 2]) / w,
            (h[1, 0] * x + h[1, 1] * y + h[1, 2]) / w)


def identity_matches(n):
    return [MatchCandidate(i, i, 0) for i in range(n)]


@pytest.mark.parametrize("m, p, expected", [
    (np.eye(3), (10, 20), (10, 20)),
    ([[1, 0, 5], [0, 1, -3], [0, 0, 1]], (0, 0), (5, -3)),
    ([[2, 0, 0], [0, 2, 0], [0, 0, 1]], (3, 4), (6, 8)),
])
def test_apply_examples(m, p, expected):
    assert np.allclose(apply(Homography(m), p), expected, atol=1e-12)


def test_apply_batch_matches_scalar(rng):
    H = random_h(rng)
    pts = rng.uniform(0, 500, (30, 2))
    got = apply(H, pts)
    for p, q in zip(pts, got):
        assert np.allclose(q, project_oracle(H.h, p), atol=1e-9)


def test_apply_point_at_infinity():
    H = Homography([[1, 0, 0], [0, 1, 0], [1, 0, 1]])
    with pytest.raises(PointAtInfinityError):
        apply(H, (-1, 5))


def test_normalization_convention():
    H = Homography(np.diag([4.0, 4.0, 2.0]))
    assert np.allclose(H.h, np.diag([2.0, 2.0, 1.0]))
    Z = Homography([[2, 0, 0], [0, 0, 2], [0, 2, 0.0]])
    assert np.isclose(np.linalg.norm(Z.h), 1.0)
    with pytest.raises(DegenerateConfigurationError):
        Homography([[1, 2, 3], [2, 4, 6], [0, 0, 1]])
    with pytest.raises(ValueError):
        Homography(np.eye(2))


def test_inverse_round_trip(rng):
    for _ in range(20):
        H = random_h(rng)
        p = rng.uniform(0, 600, (10, 2))
        assert np.max(np.abs(apply(H, apply(H.inverse(), p)) - p)) < 1e-9


def test_dlt_unit_square_exact():
    H = Homography([[1.2, 0.1, 3.0], [-0.2, 0.9, 1.0], [0.05, 0.02, 1.0]])
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    est = dlt(sq, apply(H, sq))
    assert np.max(np.abs(est.h - H.h)) < 1e-8


@pytest.mark.parametrize("pts", [
    [[0, 0], [1, 1], [2, 2], [3, 3]],
    [[0, 0], [1, 0], [2, 0], [5, 7]],
    [[4, 4], [4, 4], [4, 4], [4, 4]],
])
def test_dlt_degenerate(pts):
    with pytest.raises(DegenerateConfigurationError):
        dlt(pts, pts)


def test_dlt_needs_four_points():
    with pytest.raises(ValueError):
        dlt([[0, 0], [1, 0], [0, 1]], [[0, 0], [1, 0], [0, 1]])


def test_dlt_twenty_points_noiseless(rng):
    H = random_h(rng)
    src = rng.uniform(0, 640, (20, 2))
    est = dlt(src, apply(H, src))
    assert reprojection_errors(est, src, apply(H, src)).max() < 1e-8


def test_dlt_similarity_stability(rng):
    for _ in range(10):
        H = random_h(rng)
        src = rng.uniform(0, 640, (12, 2))
        th = rng.uniform(0, 2 * np.pi)
        s = rng.uniform(0.5, 2.0)
        S = Homography([[s * np.cos(th), -s * np.sin(th), rng.uniform(-40, 40)],
                        [s * np.sin(th), s * np.cos(th), rng.uniform(-40, 40)],
                        [0, 0, 1]])
        est = dlt(src, apply(S, apply(H, src)))
        assert np.max(np.abs(est.h - (S @ H).h)) < 1e-6


def test_ransac_exact_consensus(rng):
    H = random_h(rng)
    src = rng.uniform(0, 640, (30, 2))
    est, inliers = ransac_homography(identity_matches(30), src, apply(H, src), iters=50)
    assert inliers.all()
    assert np.max(np.abs(est.h - H.h)) < 1e-8


def test_ransac_too_few():
    pts = np.array([[0, 0], [1, 0], [0, 1]], float)
    with pytest.raises(ValueError):
        ransac_homography(identity_matches(3), pts, pts)


def test_ransac_argument_checks(rng):
    pts = rng.uniform(0, 10, (6, 2))
    with pytest.raises(ValueError):
        ransac_homography(identity_matches(6), pts, pts, iters=0)
    with pytest.raises(ValueError):
        ransac_homography(identity_matches(6), pts, pts, inlier_eps=0)
    with pytest.raises(ValueError):
        ransac_homography(identity_matches(6), pts, pts, seed=0)


def test_ransac_no_model():
    line = np.array([[i, i] for i in range(10)], float)
    with pytest.raises(DegenerateConfigurationError):
        ransac_homography(identity_matches(10), line, line, iters=20)


def outlier_scene(seed, n=200, frac=0.3):
    rng = np.random.default_rng(seed)
    H = random_h(rng)
    src = rng.uniform(0, 640, (n, 2))
    dst = apply(H, src)
    bad = rng.choice(n, int(frac * n), replace=False)
    dst[bad] = rng.uniform(0, 640, (bad.size, 2))
    good = np.ones(n, bool)
    good[bad] = False
    return H, src, dst, good


def test_ransac_with_outliers():
    H, src, dst, good = outlier_scene(3)
    est, inliers = ransac_homography(identity_matches(200), src, dst, iters=500, seed=3)
    assert reprojection_errors(est, src[good], dst[good]).max() < 0.5
    assert np.array_equal(inliers, good)


def test_ransac_deterministic():
    _, src, dst, _ = outlier_scene(4)
    a = ransac_homography(identity_matches(200), src, dst, iters=300, seed=11)
    b = ransac_homography(identity_matches(200), src, dst, iters=300, seed=11)
    assert a[0].h.tobytes() == b[0].h.tobytes()
    assert np.array_equal(a[1], b[1])


def test_ransac_accepts_keypoint_lists(rng):
    from fuzzymatch.features import Keypoint
    H = Homography([[1, 0, 7], [0, 1, -2], [0, 0, 1]])
    kps_a = [Keypoint(int(x), int(y), 1) for x, y in rng.integers(20, 300, (12, 2))]
    kps_b = [Keypoint(k.x + 7, k.y - 2, 1) for k in kps_a][::-1]
    matches = [MatchCandidate(i, 11 - i, 0) for i in range(12)]
    est, inliers = ransac_homography(matches, kps_a, kps_b, iters=30)
    assert inliers.all() and np.allclose(est.h, H.h, atol=1e-8)


def test_count_correct_identity():
    pts = np.array([[20, 30], [40, 50], [60, 70]], float)
    assert count_correct(identity_matches(3), pts, pts, Homography.identity()) == 3


def test_count_correct_displaced():
    pts = np.array([[20, 30], [40, 50], [60, 70]], float)
    moved = pts.copy()
    moved[1, 0] += 10
    assert count_correct(identity_matches(3), pts, moved, Homography.identity(), 3.0) == 2
    assert count_correct([], pts, moved, Homography.identity()) == 0


def test_count_correct_oracle(rng):
    H = random_h(rng)
    src = rng.uniform(0, 640, (500, 2))
    dst = apply(H, src) + rng.uniform(-6, 6, (500, 2))
    expected = 0
    for p, q in zip(src, dst):
        u, v = project_oracle(H.h, p)
        if ((u - q[0]) ** 2 + (v - q[1]) ** 2) ** 0.5 <= 3.0:
            expected += 1
    assert count_correct(identity_matches(500), src, dst, H, 3.0) == expected
    assert 0 < expected < 500
    with pytest.raises(ValueError):
        correct_mask(identity_matches(2), src, dst, H, 0.0)


def test_homography_file_round_trip(tmp_path, rng):
    H = random_h(rng)
    path = tmp_path / "H1to2p"
    write_homography(H, path)
    assert np.array_equal(read_homography(path).h, H.h)


def test_homography_file_oxford_style(tmp_path):
    path = tmp_path / "H1to3p"
    path.write_text("   1.0   0.0  12.5\n   0.0   2.0  -3.0\n   0.0   0.0   2.0\n")
    assert np.allclose(read_homography(path).h, [[0.5, 0, 6.25], [0, 1, -1.5], [0, 0, 1]])


@pytest.mark.parametrize("text", ["1 2 3", "1 0 0 0 1 0 0 0 x", "1 0 0 0 1 0 0 0 1 5"])
def test_homography_file_errors(tmp_path, text):
    path = tmp_path / "H"
    path.write_text(text)
    with pytest.raises(ValueError):
        read_homography(path)
