#include "gmc/weights_io.hpp"

#include <cstring>

#include <json.hpp>

namespace gmc {

namespace {

constexpr char kMagic[] = "GMCN1\n";
constexpr std::size_t kMagicLen = 6;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Cursor {
    const std::string& data;
    std::size_t pos = 0;
    std::string path;

    void need(std::size_t n) const {
        if (data.size() - pos < n) throw DataError(path + ": truncated weights file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

std::string serialize_params(const nn::NetworkParams& params) {
    std::string out(kMagic, kMagicLen);
    for (const auto& [name, tensor] : params.entries()) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(tensor->shape.size()));
        for (int d : tensor->shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : tensor->values) put_f64(out, v);
    }
    return out;
}

void save_params(const std::filesystem::path& path, const nn::NetworkParams& params) {
    atomic_write(path, serialize_params(params));
}

std::vector<NamedTensor> load_params(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < kMagicLen || std::memcmp(data.data(), kMagic, kMagicLen) != 0)
        throw DataError(path.string() + ": unknown magic (not a GMCN1 weights file)");
    Cursor cur{data, kMagicLen, path.string()};
    std::vector<NamedTensor> out;
    while (cur.pos < data.size()) {
        const std::uint32_t name_len = cur.u32();
        cur.need(name_len);
        NamedTensor nt;
        nt.name.assign(data, cur.pos, name_len);
        cur.pos += name_len;
        const std::uint32_t rank = cur.u32();
        if (rank > 8) throw DataError(path.string() + ": implausible tensor rank " + std::to_string(rank));
        std::vector<int> shape(rank);
        std::size_t n = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            const std::uint32_t d = cur.u32();
            if (d == 0) throw DataError(path.string() + ": zero dimension in " + nt.name);
            shape[i] = static_cast<int>(d);
            n *= d;
        }
        nt.tensor = Tensor(shape, true);
        cur.need(n * 8);
        for (std::size_t i = 0; i < n; ++i) nt.tensor.values[i] = cur.f64();
        out.push_back(std::move(nt));
    }
    return out;
}

void assign_params(nn::NetworkParams& params, const std::vector<NamedTensor>& loaded) {
    if (loaded.size() != params.entries().size())
        throw DataError("weights file has " + std::to_string(loaded.size()) + " parameters, network expects " +
                        std::to_string(params.entries().size()));
    for (const NamedTensor& nt : loaded) {
        Tensor* t = params.find(nt.name);
        if (!t) throw DataError("weights file names unknown parameter '" + nt.name + "'");
        if (t->shape != nt.tensor.shape)
            throw DataError("parameter '" + nt.name + "' shape mismatch: file " + shape_str(nt.tensor.shape) +
                            " vs network " + shape_str(t->shape));
        t->values = nt.tensor.values;
    }
}

void save_probmap(const std::filesystem::path& stem, const ProbMap& map, const std::string& config_hash) {
    std::string raw;
    raw.reserve(map.values.size() * 8);
    for (double v : map.values) put_f64(raw, v);
    std::filesystem::path data_path = stem;
    data_path += ".f64";
    atomic_write(data_path, raw);

    nlohmann::json j{{"w", map.width}, {"h", map.height}, {"k", map.channels}};
    if (!config_hash.empty()) j["config"] = config_hash;
    std::filesystem::path meta_path = stem;
    meta_path += ".json";
    atomic_write(meta_path, j.dump() + "\n");
}

ProbMap load_probmap(const std::filesystem::path& stem) {
    std::filesystem::path meta_path = stem;
    meta_path += ".json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": bad sidecar: " + e.what());
    }
    ProbMap map(j.at("w").get<int>(), j.at("h").get<int>(), j.at("k").get<int>());
    std::filesystem::path data_path = stem;
    data_path += ".f64";
    const std::string raw = read_file(data_path);
    if (raw.size() != map.values.size() * 8)
        throw DataError(data_path.string() + ": raster size " + std::to_string(raw.size()) +
                        " does not match sidecar dims");
    Cursor cur{raw, 0, data_path.string()};
    for (double& v : map.values) v = cur.f64();
    return map;
}

}  // namespace gmc
