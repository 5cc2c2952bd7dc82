#include "gmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gmc::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Large finite stand-in for "no site"; keeps the envelope arithmetic NaN-free
// and dwarfs any real squared distance (<= W^2 + H^2).
constexpr double kFar = 1e20;

/// 1D squared distance transform: lower envelope of parabolas rooted at
/// (i, f[i]) (Felzenszwalb & Huttenlocher).
void dt1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    auto crossing = [&](int q, int p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
               (2.0 * q - 2.0 * p);
    };
    for (int q = 1; q < n; ++q) {
        double s = crossing(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = crossing(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> distance_transform_squared(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<double> dist(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = mask.bits[i] ? 0.0 : kFar;

    const int n = std::max(w, h);
    std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);

    for (int y = 0; y < h; ++y) {
        double* row = dist.data() + static_cast<std::size_t>(y) * w;
        dt1d(row, d.data(), w, v.data(), z.data());
        std::copy(d.begin(), d.begin() + w, row);
    }
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(y) * w + x];
        dt1d(f.data(), d.data(), h, v.data(), z.data());
        for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
    }
    for (double& v2 : dist)
        if (v2 >= kFar * 0.5) v2 = kInf;  // empty mask
    return dist;
}

double hausdorff_exact(const std::vector<std::pair<int, int>>& a,
                       const std::vector<std::pair<int, int>>& b) {
    if (a.empty() || b.empty()) throw DataError("hausdorff_exact requires nonempty point sets");
    auto directed = [](const std::vector<std::pair<int, int>>& from,
                       const std::vector<std::pair<int, int>>& to) {
        long long worst = 0;
        for (const auto& [px, py] : from) {
            long long best = std::numeric_limits<long long>::max();
            for (const auto& [qx, qy] : to) {
                const long long dx = px - qx, dy = py - qy;
                const long long d2 = dx * dx + dy * dy;
                if (d2 < best) best = d2;
            }
            if (best > worst) worst = best;
        }
        return worst;
    };
    return std::sqrt(static_cast<double>(std::max(directed(a, b), directed(b, a))));
}

namespace {
std::vector<std::pair<int, int>> mask_points(const BinaryMask& m) {
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) pts.emplace_back(x, y);
    return pts;
}
}  // namespace

double hausdorff_exact(const BinaryMask& a, const BinaryMask& b) {
    return hausdorff_exact(mask_points(a), mask_points(b));
}

double hausdorff_fast(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height)
        throw DataError("hausdorff_fast dimension mismatch");
    if (a.count() == 0 || b.count() == 0) throw DataError("hausdorff_fast requires nonempty masks");
    const std::vector<double> dist_to_b = distance_transform_squared(b);
    const std::vector<double> dist_to_a = distance_transform_squared(a);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (a.bits[i] && dist_to_b[i] > worst) worst = dist_to_b[i];
        if (b.bits[i] && dist_to_a[i] > worst) worst = dist_to_a[i];
    }
    return std::sqrt(worst);
}

F1Result f1_detection(const InstanceMap& pred, const InstanceMap& gt) {
    if (!pred.same_extent(gt))
        throw DataError("f1_detection dimension mismatch: " + std::to_string(pred.width) + "x" +
                        std::to_string(pred.height) + " vs " + std::to_string(gt.width) + "x" +
                        std::to_string(gt.height));
    const OverlapMatrix ov = overlap_matrix(pred, gt);

    F1Result res;
    res.assignment.pred_to_gt.assign(ov.n_pred, 0);
    res.assignment.gt_to_pred.assign(ov.n_gt, 0);

    // Descending area, ties to the lower id.
    std::vector<std::size_t> order(ov.n_pred);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ov.pred_area[a] > ov.pred_area[b];
    });

    std::vector<std::uint8_t> gt_taken(ov.n_gt, 0);
    for (std::size_t i : order) {
        if (ov.pred_area[i] == 0) continue;
        long long best_overlap = 0;
        std::size_t best_j = ov.n_gt;
        for (std::size_t j = 0; j < ov.n_gt; ++j) {
            if (gt_taken[j]) continue;
            const long long inter = ov.at(i, j);
            // claim requires > 50% of the ground-truth object's area
            if (2 * inter > ov.gt_area[j] && inter > best_overlap) {
                best_overlap = inter;
                best_j = j;
            }
        }
        if (best_j < ov.n_gt) {
            gt_taken[best_j] = 1;
            res.assignment.pred_to_gt[i] = static_cast<std::uint32_t>(best_j + 1);
            res.assignment.gt_to_pred[best_j] = static_cast<std::uint32_t>(i + 1);
            ++res.assignment.tp;
        } else {
            ++res.assignment.fp;
        }
    }
    for (std::size_t j = 0; j < ov.n_gt; ++j)
        if (!gt_taken[j] && ov.gt_area[j] > 0) ++res.assignment.fn;

    const long long tp = res.assignment.tp;
    res.precision = (tp + res.assignment.fp) > 0 ? static_cast<double>(tp) / (tp + res.assignment.fp) : 0.0;
    res.recall = (tp + res.assignment.fn) > 0 ? static_cast<double>(tp) / (tp + res.assignment.fn) : 0.0;
    res.f1 = (res.precision + res.recall) > 0
                 ? 2.0 * res.precision * res.recall / (res.precision + res.recall)
                 : 0.0;
    return res;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) throw DataError("dice dimension mismatch");
    long long inter = 0, total = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool pa = a.bits[i], pb = b.bits[i];
        inter += (pa && pb) ? 1 : 0;
        total += (pa ? 1 : 0) + (pb ? 1 : 0);
    }
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

namespace {

/// Counterpart with maximal overlap; ties to the lowest id; n if no overlap.
std::size_t max_overlap_counterpart(const OverlapMatrix& ov, std::size_t i, bool pred_side) {
    const std::size_t n = pred_side ? ov.n_gt : ov.n_pred;
    long long best = 0;
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
        const long long inter = pred_side ? ov.at(i, j) : ov.at(j, i);
        if (inter > best) {
            best = inter;
            best_j = j;
        }
    }
    return best_j;
}

struct InstanceGeometry {
    std::vector<BinaryMask> masks;       // cropped to tight bbox
    std::vector<Box> boxes;              // bbox per instance (absent ids -> zero area)
    std::vector<long long> areas;
    std::vector<std::pair<double, double>> centroids;
};

InstanceGeometry split_instances(const InstanceMap& map, std::size_t n) {
    InstanceGeometry geo;
    geo.boxes.assign(n, Box{0, 0, 0, 0, std::nullopt});
    geo.areas.assign(n, 0);
    geo.centroids.assign(n, {0.0, 0.0});
    std::vector<int> min_x(n, map.width), min_y(n, map.height), max_x(n, -1), max_y(n, -1);
    std::vector<double> sum_x(n, 0.0), sum_y(n, 0.0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::uint32_t id = map.at(x, y);
            if (!id || id > n) continue;
            const std::size_t k = id - 1;
            ++geo.areas[k];
            sum_x[k] += x;
            sum_y[k] += y;
            min_x[k] = std::min(min_x[k], x);
            min_y[k] = std::min(min_y[k], y);
            max_x[k] = std::max(max_x[k], x);
            max_y[k] = std::max(max_y[k], y);
        }
    }
    geo.masks.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (geo.areas[k] == 0) continue;
        geo.boxes[k] = Box{min_x[k], min_y[k], max_x[k] + 1, max_y[k] + 1, std::nullopt};
        geo.centroids[k] = {sum_x[k] / static_cast<double>(geo.areas[k]),
                            sum_y[k] / static_cast<double>(geo.areas[k])};
        geo.masks[k] = BinaryMask(max_x[k] + 1 - min_x[k], max_y[k] + 1 - min_y[k]);
    }
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::uint32_t id = map.at(x, y);
            if (!id || id > n) continue;
            const std::size_t k = id - 1;
            geo.masks[k].at(x - geo.boxes[k].x0, y - geo.boxes[k].y0) = 1;
        }
    }
    return geo;
}

/// Hausdorff between two instances living in the same image frame, computed
/// over the union of their bounding boxes.
double pair_hausdorff(const InstanceGeometry& ga, std::size_t i, const InstanceGeometry& gb,
                      std::size_t j) {
    const Box& ba = ga.boxes[i];
    const Box& bb = gb.boxes[j];
    const int x0 = std::min(ba.x0, bb.x0), y0 = std::min(ba.y0, bb.y0);
    const int x1 = std::max(ba.x1, bb.x1), y1 = std::max(ba.y1, bb.y1);
    BinaryMask ma(x1 - x0, y1 - y0), mb(x1 - x0, y1 - y0);
    for (int y = 0; y < ga.masks[i].height; ++y)
        for (int x = 0; x < ga.masks[i].width; ++x)
            if (ga.masks[i].at(x, y)) ma.at(x + ba.x0 - x0, y + ba.y0 - y0) = 1;
    for (int y = 0; y < gb.masks[j].height; ++y)
        for (int x = 0; x < gb.masks[j].width; ++x)
            if (gb.masks[j].at(x, y)) mb.at(x + bb.x0 - x0, y + bb.y0 - y0) = 1;
    return hausdorff_fast(ma, mb);
}

double pair_dice(const OverlapMatrix& ov, std::size_t pred_i, std::size_t gt_j) {
    const long long inter = ov.at(pred_i, gt_j);
    return 2.0 * static_cast<double>(inter) /
           static_cast<double>(ov.pred_area[pred_i] + ov.gt_area[gt_j]);
}

}  // namespace

double object_dice(const InstanceMap& pred, const InstanceMap& gt) {
    if (!pred.same_extent(gt)) throw DataError("object_dice dimension mismatch");
    const OverlapMatrix ov = overlap_matrix(pred, gt);
    const long long pred_total = std::accumulate(ov.pred_area.begin(), ov.pred_area.end(), 0LL);
    const long long gt_total = std::accumulate(ov.gt_area.begin(), ov.gt_area.end(), 0LL);
    if (pred_total == 0 && gt_total == 0) return 1.0;
    if (pred_total == 0 || gt_total == 0) return 0.0;

    double pred_sum = 0.0;
    for (std::size_t i = 0; i < ov.n_pred; ++i) {
        if (ov.pred_area[i] == 0) continue;
        const std::size_t j = max_overlap_counterpart(ov, i, true);
        const double d = j < ov.n_gt ? pair_dice(ov, i, j) : 0.0;
        pred_sum += static_cast<double>(ov.pred_area[i]) / static_cast<double>(pred_total) * d;
    }
    double gt_sum = 0.0;
    for (std::size_t j = 0; j < ov.n_gt; ++j) {
        if (ov.gt_area[j] == 0) continue;
        const std::size_t i = max_overlap_counterpart(ov, j, false);
        const double d = i < ov.n_pred ? pair_dice(ov, i, j) : 0.0;
        gt_sum += static_cast<double>(ov.gt_area[j]) / static_cast<double>(gt_total) * d;
    }
    return 0.5 * (pred_sum + gt_sum);
}

namespace {

struct HausdorffTerms {
    std::vector<std::pair<long long, double>> pred_terms, gt_terms;  // (area, H value)
};

HausdorffTerms hausdorff_terms(const InstanceMap& pred, const InstanceMap& gt,
                               const OverlapMatrix& ov, const ObjectHausdorffOptions& options) {
    const double diagonal = std::sqrt(static_cast<double>(pred.width) * pred.width +
                                      static_cast<double>(pred.height) * pred.height);
    const InstanceGeometry gp = split_instances(pred, ov.n_pred);
    const InstanceGeometry gg = split_instances(gt, ov.n_gt);

    auto fallback_term = [&](const InstanceGeometry& self, std::size_t i,
                             const InstanceGeometry& other) {
        double best = kInf;
        if (options.fallback == HausdorffFallback::MinPairwise) {
            for (std::size_t j = 0; j < other.areas.size(); ++j) {
                if (other.areas[j] == 0) continue;
                best = std::min(best, pair_hausdorff(self, i, other, j));
            }
        } else {
            double best_c = kInf;
            std::size_t best_j = other.areas.size();
            for (std::size_t j = 0; j < other.areas.size(); ++j) {
                if (other.areas[j] == 0) continue;
                const double dx = self.centroids[i].first - other.centroids[j].first;
                const double dy = self.centroids[i].second - other.centroids[j].second;
                const double c = dx * dx + dy * dy;
                if (c < best_c) {
                    best_c = c;
                    best_j = j;
                }
            }
            if (best_j < other.areas.size()) best = pair_hausdorff(self, i, other, best_j);
        }
        return best == kInf ? diagonal : best;
    };

    HausdorffTerms terms;
    for (std::size_t i = 0; i < ov.n_pred; ++i) {
        if (ov.pred_area[i] == 0) continue;
        const std::size_t j = max_overlap_counterpart(ov, i, true);
        const double h = j < ov.n_gt ? pair_hausdorff(gp, i, gg, j) : fallback_term(gp, i, gg);
        terms.pred_terms.emplace_back(ov.pred_area[i], h);
    }
    for (std::size_t j = 0; j < ov.n_gt; ++j) {
        if (ov.gt_area[j] == 0) continue;
        const std::size_t i = max_overlap_counterpart(ov, j, false);
        const double h = i < ov.n_pred ? pair_hausdorff(gp, i, gg, j) : fallback_term(gg, j, gp);
        terms.gt_terms.emplace_back(ov.gt_area[j], h);
    }
    return terms;
}

double weighted_mean(const std::vector<std::pair<long long, double>>& terms) {
    long long total = 0;
    for (const auto& [area, v] : terms) total += area;
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [area, v] : terms) sum += static_cast<double>(area) / static_cast<double>(total) * v;
    return sum;
}

}  // namespace

double object_hausdorff(const InstanceMap& pred, const InstanceMap& gt,
                        const ObjectHausdorffOptions& options) {
    if (!pred.same_extent(gt)) throw DataError("object_hausdorff dimension mismatch");
    const OverlapMatrix ov = overlap_matrix(pred, gt);
    const HausdorffTerms terms = hausdorff_terms(pred, gt, ov, options);
    if (terms.pred_terms.empty() && terms.gt_terms.empty()) return 0.0;
    return 0.5 * (weighted_mean(terms.pred_terms) + weighted_mean(terms.gt_terms));
}

ImageMetrics evaluate_image(const InstanceMap& pred, const InstanceMap& gt,
                            const ObjectHausdorffOptions& options) {
    ImageMetrics m;
    const F1Result f1 = f1_detection(pred, gt);
    m.tp = f1.assignment.tp;
    m.fp = f1.assignment.fp;
    m.fn = f1.assignment.fn;
    m.f1 = f1.f1;
    m.precision = f1.precision;
    m.recall = f1.recall;

    const OverlapMatrix ov = overlap_matrix(pred, gt);
    m.n_pred = 0;
    for (long long a : ov.pred_area) m.n_pred += a > 0 ? 1 : 0;
    m.n_gt = 0;
    for (long long a : ov.gt_area) m.n_gt += a > 0 ? 1 : 0;

    const long long pred_total = std::accumulate(ov.pred_area.begin(), ov.pred_area.end(), 0LL);
    const long long gt_total = std::accumulate(ov.gt_area.begin(), ov.gt_area.end(), 0LL);
    for (std::size_t i = 0; i < ov.n_pred; ++i) {
        if (ov.pred_area[i] == 0) continue;
        const std::size_t j = max_overlap_counterpart(ov, i, true);
        m.pred_dice_terms.emplace_back(ov.pred_area[i], j < ov.n_gt ? pair_dice(ov, i, j) : 0.0);
    }
    for (std::size_t j = 0; j < ov.n_gt; ++j) {
        if (ov.gt_area[j] == 0) continue;
        const std::size_t i = max_overlap_counterpart(ov, j, false);
        m.gt_dice_terms.emplace_back(ov.gt_area[j], i < ov.n_pred ? pair_dice(ov, i, j) : 0.0);
    }
    if (pred_total == 0 && gt_total == 0) {
        m.object_dice = 1.0;
    } else if (pred_total == 0 || gt_total == 0) {
        m.object_dice = 0.0;
    } else {
        m.object_dice = 0.5 * (weighted_mean(m.pred_dice_terms) + weighted_mean(m.gt_dice_terms));
    }

    const HausdorffTerms ht = hausdorff_terms(pred, gt, ov, options);
    m.pred_hausdorff_terms = ht.pred_terms;
    m.gt_hausdorff_terms = ht.gt_terms;
    m.object_hausdorff = (ht.pred_terms.empty() && ht.gt_terms.empty())
                             ? 0.0
                             : 0.5 * (weighted_mean(ht.pred_terms) + weighted_mean(ht.gt_terms));
    return m;
}

DatasetMetrics aggregate(const std::vector<ImageMetrics>& images) {
    DatasetMetrics d;
    std::vector<std::pair<long long, double>> pred_dice, gt_dice, pred_h, gt_h;
    for (const ImageMetrics& m : images) {
        d.tp += m.tp;
        d.fp += m.fp;
        d.fn += m.fn;
        pred_dice.insert(pred_dice.end(), m.pred_dice_terms.begin(), m.pred_dice_terms.end());
        gt_dice.insert(gt_dice.end(), m.gt_dice_terms.begin(), m.gt_dice_terms.end());
        pred_h.insert(pred_h.end(), m.pred_hausdorff_terms.begin(), m.pred_hausdorff_terms.end());
        gt_h.insert(gt_h.end(), m.gt_hausdorff_terms.begin(), m.gt_hausdorff_terms.end());
    }
    d.precision = (d.tp + d.fp) > 0 ? static_cast<double>(d.tp) / (d.tp + d.fp) : 0.0;
    d.recall = (d.tp + d.fn) > 0 ? static_cast<double>(d.tp) / (d.tp + d.fn) : 0.0;
    d.f1 = (d.precision + d.recall) > 0 ? 2.0 * d.precision * d.recall / (d.precision + d.recall) : 0.0;
    if (pred_dice.empty() && gt_dice.empty()) {
        d.object_dice = 1.0;
    } else if (pred_dice.empty() || gt_dice.empty()) {
        d.object_dice = 0.0;
    } else {
        d.object_dice = 0.5 * (weighted_mean(pred_dice) + weighted_mean(gt_dice));
    }
    d.object_hausdorff = (pred_h.empty() && gt_h.empty())
                             ? 0.0
                             : 0.5 * (weighted_mean(pred_h) + weighted_mean(gt_h));
    return d;
}

}  // namespace gmc::metrics
