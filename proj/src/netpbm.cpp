#include "gmc/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace gmc {

namespace {

std::string header(const char* magic, int w, int h, int maxval, const std::string& comment) {
    std::ostringstream ss;
    ss << magic << "\n";
    if (!comment.empty()) ss << "# " << comment << "\n";
    ss << w << " " << h << "\n" << maxval << "\n";
    return ss.str();
}

struct PnmReader {
    std::string data;
    std::size_t pos = 0;
    std::string path;

    explicit PnmReader(const std::filesystem::path& p) : data(read_file(p)), path(p.string()) {}

    [[noreturn]] void fail(const std::string& why) const { throw DataError(path + ": " + why); }

    std::string token() {
        while (pos < data.size()) {
            char c = data[pos];
            if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= data.size()) fail("truncated header");
        std::size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        return data.substr(start, pos - start);
    }

    int int_token(const char* what) {
        const std::string t = token();
        try {
            return std::stoi(t);
        } catch (...) {
            fail(std::string("bad ") + what + " '" + t + "'");
        }
    }

    // Header: magic, width, height, maxval, then exactly one whitespace byte.
    void expect_magic(const char* magic) {
        if (token() != magic) fail(std::string("expected ") + magic);
    }

    const unsigned char* raster(std::size_t bytes) {
        if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
            fail("missing raster separator");
        ++pos;
        if (data.size() - pos < bytes)
            fail("truncated raster: need " + std::to_string(bytes) + " bytes, have " +
                 std::to_string(data.size() - pos));
        return reinterpret_cast<const unsigned char*>(data.data()) + pos;
    }
};

template <typename GetU16>
std::string pgm16_bytes(int w, int h, const std::string& comment, GetU16 get) {
    std::string out = header("P5", w, h, 65535, comment);
    out.reserve(out.size() + static_cast<std::size_t>(w) * h * 2);
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        const std::uint32_t v = get(i);
        out.push_back(static_cast<char>((v >> 8) & 0xff));
        out.push_back(static_cast<char>(v & 0xff));
    }
    return out;
}

void read_pgm16(PnmReader& r, int& w, int& h, std::vector<std::uint32_t>& values) {
    r.expect_magic("P5");
    w = r.int_token("width");
    h = r.int_token("height");
    const int maxval = r.int_token("maxval");
    if (w <= 0 || h <= 0) r.fail("non-positive dimensions");
    if (maxval != 65535) r.fail("expected 16-bit PGM (maxval 65535), got maxval " + std::to_string(maxval));
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const unsigned char* raw = r.raster(n * 2);
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        values[i] = (static_cast<std::uint32_t>(raw[2 * i]) << 8) | raw[2 * i + 1];
}

}  // namespace

std::string instance_map_bytes(const InstanceMap& map, const std::string& comment) {
    const std::uint32_t top = map.max_id();
    if (top > 65535) throw DataError("instance id " + std::to_string(top) + " exceeds 16-bit PGM range");
    return pgm16_bytes(map.width, map.height, comment, [&](std::size_t i) { return map.ids[i]; });
}

void write_instance_map(const std::filesystem::path& path, const InstanceMap& map,
                        const std::string& comment) {
    atomic_write(path, instance_map_bytes(map, comment));
}

InstanceMap read_instance_map(const std::filesystem::path& path) {
    PnmReader r(path);
    InstanceMap map;
    read_pgm16(r, map.width, map.height, map.ids);
    return map;
}

void write_coverage_map(const std::filesystem::path& path, const CoverageMap& map,
                        const std::string& comment) {
    const std::uint32_t top = map.max_count();
    if (top > 65535) throw DataError("coverage count " + std::to_string(top) + " exceeds 16-bit PGM range");
    atomic_write(path, pgm16_bytes(map.width, map.height, comment,
                                   [&](std::size_t i) { return map.counts[i]; }));
}

CoverageMap read_coverage_map(const std::filesystem::path& path) {
    PnmReader r(path);
    CoverageMap map;
    read_pgm16(r, map.width, map.height, map.counts);
    return map;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask, const std::string& comment) {
    std::string out = header("P5", mask.width, mask.height, 255, comment);
    out.reserve(out.size() + mask.bits.size());
    for (std::uint8_t b : mask.bits) out.push_back(b ? '\xff' : '\0');
    atomic_write(path, out);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    PnmReader r(path);
    r.expect_magic("P5");
    BinaryMask mask;
    mask.width = r.int_token("width");
    mask.height = r.int_token("height");
    const int maxval = r.int_token("maxval");
    if (mask.width <= 0 || mask.height <= 0) r.fail("non-positive dimensions");
    if (maxval != 255) r.fail("expected 8-bit PGM mask (maxval 255)");
    const std::size_t n = static_cast<std::size_t>(mask.width) * mask.height;
    const unsigned char* raw = r.raster(n);
    mask.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) mask.bits[i] = raw[i] ? 1 : 0;
    return mask;
}

std::string image_ppm_bytes(const Image& image, const std::string& comment) {
    if (image.channels != 3) throw DataError("PPM writer expects a 3-channel image");
    std::string out = header("P6", image.width, image.height, 255, comment);
    out.reserve(out.size() + image.values.size());
    for (double v : image.values) {
        const double c = std::clamp(std::round(v), 0.0, 255.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(c)));
    }
    return out;
}

void write_image_ppm(const std::filesystem::path& path, const Image& image, const std::string& comment) {
    atomic_write(path, image_ppm_bytes(image, comment));
}

Image read_image_ppm(const std::filesystem::path& path) {
    PnmReader r(path);
    r.expect_magic("P6");
    const int w = r.int_token("width");
    const int h = r.int_token("height");
    const int maxval = r.int_token("maxval");
    if (w <= 0 || h <= 0) r.fail("non-positive dimensions");
    if (maxval != 255) r.fail("expected 8-bit PPM (maxval 255)");
    const std::size_t n = static_cast<std::size_t>(w) * h * 3;
    const unsigned char* raw = r.raster(n);
    Image img(w, h, 3);
    for (std::size_t i = 0; i < n; ++i) img.values[i] = static_cast<double>(raw[i]);
    return img;
}

}  // namespace gmc
