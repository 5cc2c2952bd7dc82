// weights_io.hpp — GMCN1 model-weight files and raw probability-map caches.
//
// Weights: magic "GMCN1\n", then per parameter: name length (u32 LE), UTF-8
// name, rank (u32 LE), dims (u32 LE each), float64 LE values. Probability
// maps: <stem>.f64 raw little-endian doubles plus a JSON sidecar {w,h,k}.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gmc/nn.hpp"

namespace gmc {

std::string serialize_params(const nn::NetworkParams& params);
void save_params(const std::filesystem::path& path, const nn::NetworkParams& params);

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

/// Rejects unknown magic and truncated payloads.
std::vector<NamedTensor> load_params(const std::filesystem::path& path);

/// Copies loaded values into an existing parameter set (names and shapes must
/// match exactly).
void assign_params(nn::NetworkParams& params, const std::vector<NamedTensor>& loaded);

struct ProbMap {
    int width = 0, height = 0, channels = 0;
    std::vector<double> values;  // [k][h][w] planes

    ProbMap() = default;
    ProbMap(int w, int h, int k)
        : width(w), height(h), channels(k), values(static_cast<std::size_t>(w) * h * k, 0.0) {}

    double at(int x, int y, int k) const {
        return values[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
    double& at(int x, int y, int k) {
        return values[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
};

void save_probmap(const std::filesystem::path& stem, const ProbMap& map,
                  const std::string& config_hash = {});
ProbMap load_probmap(const std::filesystem::path& stem);

}  // namespace gmc
