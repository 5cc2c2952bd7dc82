// manifest.hpp — dataset manifests and the run configuration file.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmc/common.hpp"

namespace gmc {

struct ManifestRecord {
    std::string name;  // record stem used for derived filenames
    std::filesystem::path image;
    std::filesystem::path labels;
    std::optional<std::filesystem::path> boxes;
};

struct Manifest {
    std::string split;  // train | testA | testB
    std::vector<ManifestRecord> records;

    /// Parses manifest JSON; paths resolve relative to the manifest file.
    /// With validate, checks files exist, parse, and agree on dimensions.
    static Manifest load(const std::filesystem::path& path, bool validate = true);
    void save(const std::filesystem::path& path) const;
};

/// Plain key=value configuration ('#' comments). Unknown keys are rejected so
/// typos cannot silently change a run.
class RunConfig {
public:
    RunConfig();  // defaults only
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text);

    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    /// FNV-1a over the canonical sorted key=value listing; embedded in outputs.
    std::string hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace gmc
