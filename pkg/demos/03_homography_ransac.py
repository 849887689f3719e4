"""
Homography estimation and verification
======================================

Normalized DLT recovers a homography from exact correspondences; RANSAC
does the same when a third of the matches are wrong. count_correct then
scores matches against a known (ground-truth) homography, which is how the
CM statistic is computed.
"""

import numpy as np

from fuzzymatch import Homography, MatchCandidate, apply, count_correct, dlt
from fuzzymatch import ransac_homography
from fuzzymatch.geometry import reprojection_errors

rng = np.random.default_rng(3)
H = Homography([[0.95, 0.08, 12.0], [-0.05, 1.05, -7.0], [2e-4, -1e-4, 1.0]])

src = rng.uniform(0, 640, (200, 2))
dst = apply(H, src)
print("DLT on 20 exact points, max error:",
      reprojection_errors(dlt(src[:20], dst[:20]), src, dst).max())

# corrupt 30% of the correspondences
bad = rng.choice(200, 60, replace=False)
dst[bad] = rng.uniform(0, 640, (60, 2))
matches = [MatchCandidate(i, i, 0) for i in range(200)]

est, inliers = ransac_homography(matches, src, dst, iters=2000, inlier_eps=3.0, seed=42)
print("RANSAC inliers:", int(inliers.sum()), "of", len(matches))
print("estimate:\n", np.round(est.h, 6))

print("CM against ground truth (eps=3 px):", count_correct(matches, src, dst, H, eps=3.0))
