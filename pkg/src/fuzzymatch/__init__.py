"""Fuzzy brute-force matching of binary image features.

Binary descriptors are matched by Hamming distance either against a constant
threshold or through a two-rule zero-order Sugeno system, and the resulting
matches are scored against ground-truth homographies.
"""

__version__ = "0.1.0"

from .features import (Keypoint, SamplingPattern, agreement_ratio, bit_counts, describe,
                       describe_all, detect_fast, hamming_bits, hamming_matrix,
                       make_pattern, read_descriptors, write_descriptors)
from .fuzzy import (FuzzyMatcherConfig, TrapezoidMF, fuzzy_decide, mf_eval,
                    parse_config, sugeno_infer)
from .geometry import (Homography, apply, count_correct, dlt, ransac_homography,
                       read_homography, write_homography)
from .harness import (DatasetPair, EvaluationRecord, ExtractionParams, emit_csv,
                      evaluate, load_dataset, run_pair)
from .imageio import GrayImage, box_smooth, load_image, save_image
from .matcher import MatchCandidate, match_constant, match_fuzzy, nearest_neighbor
