// metrics.hpp — detection F1, object-level Dice and Hausdorff, and the exact
// Euclidean distance transform backing the fast Hausdorff path.
#pragma once

#include <optional>
#include <vector>

#include "gmc/labelops.hpp"

namespace gmc::metrics {

struct MatchAssignment {
    // pred_to_gt[i] = matched gt id for pred id i+1, or 0; gt_to_pred symmetric.
    std::vector<std::uint32_t> pred_to_gt;
    std::vector<std::uint32_t> gt_to_pred;
    long long tp = 0, fp = 0, fn = 0;
};

struct F1Result {
    double f1 = 0.0, precision = 0.0, recall = 0.0;
    MatchAssignment assignment;
};

/// Contest detection rule: a prediction is a true positive iff it claims an
/// unmatched ground-truth object with which it shares more than half of that
/// object's area. Predictions are processed in descending area order and claim
/// their maximal-overlap eligible object.
F1Result f1_detection(const InstanceMap& pred, const InstanceMap& gt);

/// 2|A n B| / (|A| + |B|); 1 when both masks are empty.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Area-weighted symmetric object-level Dice. Both sides empty -> 1,
/// exactly one side empty -> 0.
double object_dice(const InstanceMap& pred, const InstanceMap& gt);

/// Exact squared Euclidean distance transform (two-pass, per-row lower
/// envelope of parabolas then per-column). dist2[p] = min over true pixels q
/// of |p-q|^2; infinity when the mask is empty.
std::vector<double> distance_transform_squared(const BinaryMask& mask);

/// O(|a|*|b|) reference Hausdorff over foreground pixel centers. Throws
/// DataError when either set is empty.
double hausdorff_exact(const std::vector<std::pair<int, int>>& a,
                       const std::vector<std::pair<int, int>>& b);
double hausdorff_exact(const BinaryMask& a, const BinaryMask& b);

/// Same value as hausdorff_exact, via two distance transforms.
double hausdorff_fast(const BinaryMask& a, const BinaryMask& b);

/// Fallback rule when an instance overlaps nothing on the opposite side.
enum class HausdorffFallback { MinPairwise, NearestCentroid };

struct ObjectHausdorffOptions {
    HausdorffFallback fallback = HausdorffFallback::MinPairwise;
};

/// Area-weighted symmetric object-level Hausdorff. Counterparts are
/// maximal-overlap instances; an instance with no overlap falls back per
/// `options`; an entirely empty opposite side contributes the image diagonal.
/// Both sides empty -> 0.
double object_hausdorff(const InstanceMap& pred, const InstanceMap& gt,
                        const ObjectHausdorffOptions& options = {});

struct ImageMetrics {
    long long tp = 0, fp = 0, fn = 0;
    std::size_t n_pred = 0, n_gt = 0;
    double f1 = 0.0, precision = 0.0, recall = 0.0;
    double object_dice = 0.0;
    double object_hausdorff = 0.0;

    // Per-instance terms for dataset-level aggregation (weights over the whole
    // split): (area, metric value) per pred / gt instance.
    std::vector<std::pair<long long, double>> pred_dice_terms, gt_dice_terms;
    std::vector<std::pair<long long, double>> pred_hausdorff_terms, gt_hausdorff_terms;
};

ImageMetrics evaluate_image(const InstanceMap& pred, const InstanceMap& gt,
                            const ObjectHausdorffOptions& options = {});

struct DatasetMetrics {
    double f1 = 0.0, precision = 0.0, recall = 0.0;
    double object_dice = 0.0, object_hausdorff = 0.0;
    long long tp = 0, fp = 0, fn = 0;
};

/// Split-level aggregation: TP/FP/FN are summed before computing F1; the
/// object metrics re-normalize instance weights over all instances in the split.
DatasetMetrics aggregate(const std::vector<ImageMetrics>& images);

}  // namespace gmc::metrics
