// Independent brute-force transcriptions of the object-level metrics, used as
// oracles against the library implementations. Everything here works on raw
// pixel lists and deliberately shares no code with gmc::metrics.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "gmc/labelops.hpp"

namespace oracle {

struct Instances {
    // points[id-1] = pixel list of that instance
    std::vector<std::vector<std::pair<int, int>>> points;
};

inline Instances collect(const gmc::InstanceMap& map) {
    Instances out;
    out.points.resize(map.max_id());
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            const std::uint32_t id = map.at(x, y);
            if (id) out.points[id - 1].emplace_back(x, y);
        }
    return out;
}

inline long long intersection(const std::vector<std::pair<int, int>>& pts,
                              const gmc::InstanceMap& other, std::uint32_t other_id) {
    long long n = 0;
    for (const auto& [x, y] : pts) n += other.at(x, y) == other_id ? 1 : 0;
    return n;
}

/// Maximal-overlap counterpart index (ties to lowest id); -1 when nothing overlaps.
inline int counterpart(const std::vector<std::pair<int, int>>& pts, const gmc::InstanceMap& other,
                       std::size_t n_other) {
    long long best = 0;
    int best_j = -1;
    for (std::size_t j = 0; j < n_other; ++j) {
        const long long inter = intersection(pts, other, static_cast<std::uint32_t>(j + 1));
        if (inter > best) {
            best = inter;
            best_j = static_cast<int>(j);
        }
    }
    return best_j;
}

inline double pair_dice(const std::vector<std::pair<int, int>>& a,
                        const std::vector<std::pair<int, int>>& b, const gmc::InstanceMap& b_map,
                        std::uint32_t b_id) {
    const long long inter = intersection(a, b_map, b_id);
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
}

inline double pair_hausdorff(const std::vector<std::pair<int, int>>& a,
                             const std::vector<std::pair<int, int>>& b) {
    auto directed = [](const std::vector<std::pair<int, int>>& from,
                       const std::vector<std::pair<int, int>>& to) {
        double worst = 0.0;
        for (const auto& [px, py] : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [qx, qy] : to) {
                const double dx = px - qx, dy = py - qy;
                best = std::min(best, dx * dx + dy * dy);
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

/// Direct evaluation of the object-level Dice definition.
inline double object_dice(const gmc::InstanceMap& pred, const gmc::InstanceMap& gt) {
    const Instances s = collect(pred), g = collect(gt);
    long long s_total = 0, g_total = 0;
    for (const auto& p : s.points) s_total += static_cast<long long>(p.size());
    for (const auto& p : g.points) g_total += static_cast<long long>(p.size());
    if (s_total == 0 && g_total == 0) return 1.0;
    if (s_total == 0 || g_total == 0) return 0.0;

    double sum_s = 0.0;
    for (const auto& pts : s.points) {
        if (pts.empty()) continue;
        const int j = counterpart(pts, gt, g.points.size());
        const double d = j < 0 ? 0.0
                               : pair_dice(pts, g.points[static_cast<std::size_t>(j)], gt,
                                           static_cast<std::uint32_t>(j + 1));
        sum_s += static_cast<double>(pts.size()) / static_cast<double>(s_total) * d;
    }
    double sum_g = 0.0;
    for (std::size_t j = 0; j < g.points.size(); ++j) {
        const auto& pts = g.points[j];
        if (pts.empty()) continue;
        const int i = counterpart(pts, pred, s.points.size());
        const double d = i < 0 ? 0.0
                               : pair_dice(pts, s.points[static_cast<std::size_t>(i)], pred,
                                           static_cast<std::uint32_t>(i + 1));
        sum_g += static_cast<double>(pts.size()) / static_cast<double>(g_total) * d;
    }
    return 0.5 * (sum_s + sum_g);
}

/// Direct evaluation of the object-level Hausdorff definition with the
/// min-pairwise fallback and image-diagonal convention.
inline double object_hausdorff(const gmc::InstanceMap& pred, const gmc::InstanceMap& gt) {
    const Instances s = collect(pred), g = collect(gt);
    long long s_total = 0, g_total = 0;
    for (const auto& p : s.points) s_total += static_cast<long long>(p.size());
    for (const auto& p : g.points) g_total += static_cast<long long>(p.size());
    if (s_total == 0 && g_total == 0) return 0.0;
    const double diagonal =
        std::sqrt(static_cast<double>(pred.width) * pred.width + static_cast<double>(pred.height) * pred.height);

    auto side_term = [&](const std::vector<std::pair<int, int>>& pts, const gmc::InstanceMap& other,
                         const Instances& other_inst) {
        const int j = counterpart(pts, other, other_inst.points.size());
        if (j >= 0) return pair_hausdorff(pts, other_inst.points[static_cast<std::size_t>(j)]);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& opts : other_inst.points) {
            if (opts.empty()) continue;
            best = std::min(best, pair_hausdorff(pts, opts));
        }
        return std::isinf(best) ? diagonal : best;
    };

    double sum_s = 0.0;
    for (const auto& pts : s.points) {
        if (pts.empty()) continue;
        sum_s += static_cast<double>(pts.size()) / static_cast<double>(s_total) * side_term(pts, gt, g);
    }
    double sum_g = 0.0;
    for (const auto& pts : g.points) {
        if (pts.empty()) continue;
        sum_g += static_cast<double>(pts.size()) / static_cast<double>(g_total) * side_term(pts, pred, s);
    }
    const double left = s_total == 0 ? 0.0 : sum_s;
    const double right = g_total == 0 ? 0.0 : sum_g;
    return 0.5 * (left + right);
}

}  // namespace oracle
