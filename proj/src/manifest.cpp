#include "gmc/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gmc/channels.hpp"
#include "gmc/netpbm.hpp"

namespace gmc {

using nlohmann::json;

Manifest Manifest::load(const std::filesystem::path& path, bool validate) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
    Manifest m;
    try {
        m.split = j.at("split").get<std::string>();
        const std::filesystem::path base = path.parent_path();
        for (const json& rec : j.at("records")) {
            ManifestRecord r;
            r.image = base / rec.at("image").get<std::string>();
            r.labels = base / rec.at("labels").get<std::string>();
            if (rec.contains("boxes")) r.boxes = base / rec.at("boxes").get<std::string>();
            r.name = rec.contains("name") ? rec.at("name").get<std::string>()
                                          : r.image.stem().string();
            m.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
    if (m.split != "train" && m.split != "testA" && m.split != "testB")
        throw DataError(path.string() + ": split must be train, testA or testB, got '" + m.split + "'");

    if (validate) {
        for (const ManifestRecord& r : m.records) {
            const Image img = read_image_ppm(r.image);
            const InstanceMap labels = read_instance_map(r.labels);
            if (img.width != labels.width || img.height != labels.height)
                throw DataError(r.name + ": image is " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + " but labels are " +
                                std::to_string(labels.width) + "x" + std::to_string(labels.height));
            if (r.boxes) channels::read_boxes(*r.boxes, img.width, img.height);
        }
    }
    return m;
}

void Manifest::save(const std::filesystem::path& path) const {
    json j;
    j["split"] = split;
    json records = json::array();
    const std::filesystem::path base = path.parent_path();
    for (const ManifestRecord& r : this->records) {
        json rec;
        rec["name"] = r.name;
        rec["image"] = std::filesystem::relative(r.image, base).string();
        rec["labels"] = std::filesystem::relative(r.labels, base).string();
        if (r.boxes) rec["boxes"] = std::filesystem::relative(*r.boxes, base).string();
        records.push_back(rec);
    }
    j["records"] = records;
    atomic_write(path, j.dump(2) + "\n");
}

namespace {

const std::map<std::string, std::string>& default_config() {
    static const std::map<std::string, std::string> defaults = {
        {"seed", "1"},
        {"strategy", "1"},
        {"edge.radius", "3"},
        {"seg.schedule", "conv3c8,relu,conv3c8,relu,pool2s2,conv3c16d2,relu,conv3c16d2,relu,conv1c2,up2"},
        {"edge.schedule",
         "conv3c8,relu,tap,conv3c8,relu,tap,pool2s2,conv3c12d1,relu,tap,conv3c12d2,relu,tap,"
         "conv3c12d4,relu,tap"},
        {"fusion.schedule",
         "conv3c8d1,relu,conv3c8d1,relu,conv3c8d2,relu,conv3c8d4,relu,conv3c8d2,relu,conv3c8d1,"
         "relu,conv1c2"},
        {"seg.epochs", "40"},
        {"seg.lr", "0.2"},
        {"edge.epochs", "40"},
        {"edge.lr", "0.02"},
        {"fusion.epochs", "40"},
        {"fusion.lr", "0.2"},
        {"train.momentum", "0.9"},
        {"instantiate.min_area", "16"},
        {"augment.warps", "6"},
        {"augment.crop", "400"},
        {"rank.weight_a", "0.75"},
        {"rank.weight_b", "0.25"},
        {"hausdorff.fallback", "min_pairwise"},
    };
    return defaults;
}

}  // namespace

RunConfig::RunConfig() : values_(default_config()) {}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" + line + "'");
        cfg.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return from_text(read_file(path)); }

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!default_config().contains(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not a number: '" + v + "'");
    }
}

int RunConfig::get_int(const std::string& key) const {
    const double d = get_double(key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw ConfigError("config key '" + key + "' is not an integer");
    return i;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t used = 0;
        const unsigned long long u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(u);
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not an unsigned integer: '" + v + "'");
    }
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values_) h = fnv1a64(k + "=" + v + "\n", h);
    return to_hex(h);
}

}  // namespace gmc
