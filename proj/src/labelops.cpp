#include "gmc/labelops.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace gmc {

std::uint32_t InstanceMap::max_id() const {
    std::uint32_t m = 0;
    for (std::uint32_t v : ids) m = std::max(m, v);
    return m;
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b ? 1 : 0;
    return n;
}

std::uint32_t CoverageMap::max_count() const {
    std::uint32_t m = 0;
    for (std::uint32_t v : counts) m = std::max(m, v);
    return m;
}

std::string Box::str() const {
    std::ostringstream ss;
    ss << "[" << x0 << "," << y0 << ")x(" << x1 << "," << y1 << ")";
    return ss.str();
}

namespace {
// Union-find with path halving.
struct DisjointSet {
    std::vector<std::uint32_t> parent;
    std::uint32_t make() {
        parent.push_back(static_cast<std::uint32_t>(parent.size()));
        return parent.back();
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};
}  // namespace

InstanceMap connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw ConfigError("connectivity must be 4 or 8, got " + std::to_string(connectivity));
    const int w = mask.width, h = mask.height;
    InstanceMap out(w, h);
    if (w == 0 || h == 0) return out;

    // First pass: provisional labels, merging with already-visited neighbors.
    DisjointSet ds;
    ds.make();  // label 0 reserved for background
    std::vector<std::uint32_t> prov(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            std::uint32_t label = 0;
            auto consider = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
                const std::uint32_t nl = prov[static_cast<std::size_t>(ny) * w + nx];
                if (!nl) return;
                if (!label) label = nl;
                else ds.unite(label, nl);
            };
            consider(x - 1, y);
            consider(x, y - 1);
            if (connectivity == 8) {
                consider(x - 1, y - 1);
                consider(x + 1, y - 1);
            }
            if (!label) label = ds.make();
            prov[idx] = label;
        }
    }

    // Second pass: roots -> dense ids in order of first row-major appearance.
    std::vector<std::uint32_t> dense(ds.parent.size(), 0);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < prov.size(); ++i) {
        if (!prov[i]) continue;
        const std::uint32_t root = ds.find(prov[i]);
        if (!dense[root]) dense[root] = ++next;
        out.ids[i] = dense[root];
    }
    return out;
}

BinaryMask extract_edges(const InstanceMap& labels) {
    const int w = labels.width, h = labels.height;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint32_t center = labels.at(x, y);
            auto differs = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return false;  // replicate center
                return labels.at(nx, ny) != center;
            };
            if (differs(x - 1, y) || differs(x + 1, y) || differs(x, y - 1) || differs(x, y + 1))
                out.at(x, y) = 1;
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, double radius) {
    if (radius < 0) throw ConfigError("dilate radius must be >= 0");
    const int w = mask.width, h = mask.height;
    const int r = static_cast<int>(radius);
    const double r2 = radius * radius;

    // Disk offsets with dx^2 + dy^2 <= radius^2; integer squares compare exactly.
    std::vector<std::pair<int, int>> disk;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy <= r2)
                disk.emplace_back(dx, dy);

    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            for (const auto& [dx, dy] : disk) {
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h) out.at(nx, ny) = 1;
            }
        }
    }
    return out;
}

CoverageMap fill_boxes(const std::vector<Box>& boxes, int width, int height) {
    CoverageMap out(width, height);
    for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
        const Box& b = boxes[bi];
        if (b.x0 < 0 || b.y0 < 0 || b.x0 >= b.x1 || b.y0 >= b.y1 || b.x1 > width || b.y1 > height)
            throw DataError("box " + std::to_string(bi) + " " + b.str() + " invalid for extent " +
                            std::to_string(width) + "x" + std::to_string(height));
        for (int y = b.y0; y < b.y1; ++y)
            for (int x = b.x0; x < b.x1; ++x) ++out.counts[static_cast<std::size_t>(y) * width + x];
    }
    return out;
}

OverlapMatrix overlap_matrix(const InstanceMap& pred, const InstanceMap& gt) {
    if (!pred.same_extent(gt))
        throw DataError("overlap_matrix dimension mismatch: " + std::to_string(pred.width) + "x" +
                        std::to_string(pred.height) + " vs " + std::to_string(gt.width) + "x" +
                        std::to_string(gt.height));
    OverlapMatrix m;
    m.n_pred = pred.max_id();
    m.n_gt = gt.max_id();
    m.counts.assign(m.n_pred * m.n_gt, 0);
    m.pred_area.assign(m.n_pred, 0);
    m.gt_area.assign(m.n_gt, 0);
    for (std::size_t i = 0; i < pred.ids.size(); ++i) {
        const std::uint32_t p = pred.ids[i], g = gt.ids[i];
        if (p) ++m.pred_area[p - 1];
        if (g) ++m.gt_area[g - 1];
        if (p && g) ++m.counts[static_cast<std::size_t>(p - 1) * m.n_gt + (g - 1)];
    }
    return m;
}

BinaryMask foreground(const InstanceMap& labels) {
    BinaryMask out(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.ids.size(); ++i) out.bits[i] = labels.ids[i] ? 1 : 0;
    return out;
}

BinaryMask instance_mask(const InstanceMap& labels, std::uint32_t id) {
    BinaryMask out(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.ids.size(); ++i) out.bits[i] = labels.ids[i] == id ? 1 : 0;
    return out;
}

std::vector<Box> tight_boxes(const InstanceMap& labels) {
    const std::uint32_t n = labels.max_id();
    std::vector<Box> boxes;
    if (!n) return boxes;
    std::vector<int> min_x(n, labels.width), min_y(n, labels.height), max_x(n, -1), max_y(n, -1);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const std::uint32_t id = labels.at(x, y);
            if (!id) continue;
            const std::size_t k = id - 1;
            min_x[k] = std::min(min_x[k], x);
            min_y[k] = std::min(min_y[k], y);
            max_x[k] = std::max(max_x[k], x);
            max_y[k] = std::max(max_y[k], y);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (max_x[k] < 0) continue;  // id absent
        boxes.push_back(Box{min_x[k], min_y[k], max_x[k] + 1, max_y[k] + 1, std::nullopt});
    }
    return boxes;
}

}  // namespace gmc
