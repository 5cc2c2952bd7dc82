// netpbm.hpp — binary PGM/PPM readers and writers.
//
// InstanceMap / CoverageMap travel as 16-bit P5 (maxval 65535, MSB first per
// the netpbm convention), BinaryMask as 8-bit P5 with 0/255, RGB images as
// 8-bit P6. Writers accept an optional comment line (used for config hashes).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gmc/labelops.hpp"

namespace gmc {

/// H x W x C interleaved float64 image, C = 3 for RGB.
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<double> values;

    Image() = default;
    Image(int w, int h, int c)
        : width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

void write_instance_map(const std::filesystem::path& path, const InstanceMap& map,
                        const std::string& comment = {});
InstanceMap read_instance_map(const std::filesystem::path& path);

void write_coverage_map(const std::filesystem::path& path, const CoverageMap& map,
                        const std::string& comment = {});
CoverageMap read_coverage_map(const std::filesystem::path& path);

void write_mask(const std::filesystem::path& path, const BinaryMask& mask,
                const std::string& comment = {});
BinaryMask read_mask(const std::filesystem::path& path);

/// P6 image; values are scaled to [0,255] on write (clamped) and kept as raw
/// 0..255 float64 on read.
void write_image_ppm(const std::filesystem::path& path, const Image& image,
                     const std::string& comment = {});
Image read_image_ppm(const std::filesystem::path& path);

/// Serialized bytes without touching the filesystem (used for byte-identity tests).
std::string instance_map_bytes(const InstanceMap& map, const std::string& comment = {});
std::string image_ppm_bytes(const Image& image, const std::string& comment = {});

}  // namespace gmc
