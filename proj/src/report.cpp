#include "gmc/report.hpp"

#include <json.hpp>

#include "gmc/netpbm.hpp"

namespace gmc::report {

using nlohmann::json;

EvalOutcome run_eval(const Manifest& manifest, const std::filesystem::path& pred_dir,
                     const EvalOptions& options) {
    EvalOutcome out;
    out.names.resize(manifest.records.size());
    out.per_image.resize(manifest.records.size());
    std::vector<std::string> warnings(manifest.records.size());

    parallel_for(manifest.records.size(), [&](std::size_t i) {
        const ManifestRecord& rec = manifest.records[i];
        const InstanceMap gt = read_instance_map(rec.labels);
        const std::filesystem::path pred_path = pred_dir / (rec.name + ".pred.pgm");
        InstanceMap pred;
        if (std::filesystem::exists(pred_path)) {
            pred = read_instance_map(pred_path);
        } else {
            pred = InstanceMap(gt.width, gt.height);  // empty: everything becomes FN
            warnings[i] = "missing prediction for '" + rec.name + "'; counted as empty";
        }
        out.names[i] = rec.name;
        out.per_image[i] = metrics::evaluate_image(pred, gt, options.hausdorff);
    });
    for (std::string& w : warnings)
        if (!w.empty()) out.warnings.push_back(std::move(w));
    out.dataset = metrics::aggregate(out.per_image);
    return out;
}

std::string report_json(const EvalOutcome& outcome, const std::string& split,
                        const std::string& config_hash) {
    json j;
    if (!config_hash.empty()) j["config"] = config_hash;
    j["split"] = split;
    json per_image = json::array();
    for (std::size_t i = 0; i < outcome.per_image.size(); ++i) {
        const metrics::ImageMetrics& m = outcome.per_image[i];
        per_image.push_back(json{{"name", outcome.names[i]},
                                 {"f1", m.f1},
                                 {"precision", m.precision},
                                 {"recall", m.recall},
                                 {"object_dice", m.object_dice},
                                 {"object_hausdorff", m.object_hausdorff},
                                 {"tp", m.tp},
                                 {"fp", m.fp},
                                 {"fn", m.fn},
                                 {"n_pred", m.n_pred},
                                 {"n_gt", m.n_gt}});
    }
    j["per_image"] = per_image;
    j["dataset"] = json{{"f1", outcome.dataset.f1},
                        {"precision", outcome.dataset.precision},
                        {"recall", outcome.dataset.recall},
                        {"object_dice", outcome.dataset.object_dice},
                        {"object_hausdorff", outcome.dataset.object_hausdorff},
                        {"tp", outcome.dataset.tp},
                        {"fp", outcome.dataset.fp},
                        {"fn", outcome.dataset.fn}};
    if (!outcome.warnings.empty()) j["warnings"] = outcome.warnings;
    return j.dump(2) + "\n";
}

metrics::DatasetMetrics read_report_dataset(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed report: " + e.what());
    }
    metrics::DatasetMetrics d;
    try {
        const json& ds = j.at("dataset");
        d.f1 = ds.at("f1").get<double>();
        d.precision = ds.at("precision").get<double>();
        d.recall = ds.at("recall").get<double>();
        d.object_dice = ds.at("object_dice").get<double>();
        d.object_hausdorff = ds.at("object_hausdorff").get<double>();
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": report lacks dataset scores: " + e.what());
    }
    return d;
}

std::string rank_table_json(const ranking::RankTable& table) {
    json j;
    j["weights"] = json{{"a", table.weight_a}, {"b", table.weight_b}};
    json methods = json::array();
    for (const ranking::RankedMethod& m : table.methods) {
        json scores, ranks;
        for (std::size_t c = 0; c < ranking::kColumns; ++c) {
            scores[ranking::column_name(c)] = m.scores[c];
            ranks[ranking::column_name(c)] = m.ranks[c];
        }
        methods.push_back(json{{"name", m.name},
                               {"scores", scores},
                               {"ranks", ranks},
                               {"rank_sum", m.rank_sum},
                               {"weighted_rank_sum", m.weighted_rank_sum},
                               {"had_tie", m.had_tie}});
    }
    j["methods"] = methods;
    if (table.any_tie) j["note"] = "tied scores share the smaller rank";
    return j.dump(2) + "\n";
}

std::vector<ranking::MethodScores> read_score_grid(const std::filesystem::path& path,
                                                   double* weight_a, double* weight_b) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed score grid: " + e.what());
    }
    std::vector<ranking::MethodScores> methods;
    try {
        if (j.contains("weights")) {
            if (weight_a) *weight_a = j["weights"].at("a").get<double>();
            if (weight_b) *weight_b = j["weights"].at("b").get<double>();
        }
        for (const json& m : j.at("methods")) {
            ranking::MethodScores ms;
            ms.name = m.at("name").get<std::string>();
            for (std::size_t c = 0; c < ranking::kColumns; ++c)
                ms.scores[c] = m.at(ranking::column_name(c)).get<double>();
            methods.push_back(std::move(ms));
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": bad score grid: " + e.what());
    }
    return methods;
}

}  // namespace gmc::report
