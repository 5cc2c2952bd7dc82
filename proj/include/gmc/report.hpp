// report.hpp — metrics reports and rank tables as JSON, plus the evaluation
// walk over a manifest.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gmc/manifest.hpp"
#include "gmc/metrics.hpp"
#include "gmc/ranking.hpp"

namespace gmc::report {

struct EvalOptions {
    metrics::ObjectHausdorffOptions hausdorff;
    std::string config_hash;
};

struct EvalOutcome {
    std::vector<std::string> names;
    std::vector<metrics::ImageMetrics> per_image;
    metrics::DatasetMetrics dataset;
    std::vector<std::string> warnings;  // e.g. missing predictions
};

/// Evaluates predictions named <record>.pred.pgm under pred_dir against the
/// manifest ground truth. A missing prediction counts as an empty map (its
/// instances become false negatives) and produces a warning.
EvalOutcome run_eval(const Manifest& manifest, const std::filesystem::path& pred_dir,
                     const EvalOptions& options = {});

std::string report_json(const EvalOutcome& outcome, const std::string& split,
                        const std::string& config_hash);

/// Reads dataset-level scores back from a report produced by report_json.
metrics::DatasetMetrics read_report_dataset(const std::filesystem::path& path);

std::string rank_table_json(const ranking::RankTable& table);

/// Score grid: {"methods":[{"name","f1_a","f1_b","dice_a","dice_b",
/// "hausdorff_a","hausdorff_b"}], "weights":{"a","b"}(optional)}.
std::vector<ranking::MethodScores> read_score_grid(const std::filesystem::path& path,
                                                   double* weight_a, double* weight_b);

}  // namespace gmc::report
