// labelops.hpp — instance-label manipulation: components, edges, dilation,
// box filling and overlap accounting.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmc/common.hpp"

namespace gmc {

/// H x W grid of non-negative instance ids; 0 is background.
struct InstanceMap {
    int width = 0, height = 0;
    std::vector<std::uint32_t> ids;

    InstanceMap() = default;
    InstanceMap(int w, int h) : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}

    std::uint32_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t max_id() const;
    bool same_extent(const InstanceMap& o) const { return width == o.width && height == o.height; }
};

struct BinaryMask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;
};

/// Half-open pixel box [x0,x1) x [y0,y1).
struct Box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    std::optional<double> score;

    long long area() const { return static_cast<long long>(x1 - x0) * (y1 - y0); }
    std::string str() const;
};

/// Per-pixel count of covering boxes (output of the box-filling operator).
struct CoverageMap {
    int width = 0, height = 0;
    std::vector<std::uint32_t> counts;

    CoverageMap() = default;
    CoverageMap(int w, int h) : width(w), height(h), counts(static_cast<std::size_t>(w) * h, 0) {}

    std::uint32_t at(int x, int y) const { return counts[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t max_count() const;
};

/// Labels connected foreground regions. Ids are dense 1..n; the component whose
/// first pixel comes earliest in row-major order gets the lowest id.
InstanceMap connected_components(const BinaryMask& mask, int connectivity = 4);

/// A pixel is an edge iff its 4-neighborhood is not label-uniform. Out-of-bounds
/// neighbors replicate the center pixel's label, so the image border alone never
/// produces edges.
BinaryMask extract_edges(const InstanceMap& labels);

/// Euclidean disk dilation: output true at q iff some true p has |p-q| <= radius.
BinaryMask dilate(const BinaryMask& mask, double radius);

/// counts[p] = number of boxes containing p. Boxes must lie inside the extent.
CoverageMap fill_boxes(const std::vector<Box>& boxes, int width, int height);

/// Intersection pixel counts, entry (i,j) = |S_i n G_j| for pred id i+1, gt id j+1.
struct OverlapMatrix {
    std::size_t n_pred = 0, n_gt = 0;
    std::vector<long long> counts;          // n_pred x n_gt, row-major
    std::vector<long long> pred_area;       // per pred id
    std::vector<long long> gt_area;         // per gt id

    long long at(std::size_t i, std::size_t j) const { return counts[i * n_gt + j]; }
};

OverlapMatrix overlap_matrix(const InstanceMap& pred, const InstanceMap& gt);

BinaryMask foreground(const InstanceMap& labels);
BinaryMask instance_mask(const InstanceMap& labels, std::uint32_t id);

/// Tight bounding boxes per instance id (1..max), skipping absent ids.
std::vector<Box> tight_boxes(const InstanceMap& labels);

}  // namespace gmc
