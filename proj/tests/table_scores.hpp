// Published contest score grid (14 methods, six columns) with the published
// per-column ranks and rank sums, used by the ranking tests and the acceptance
// suite.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "gmc/common.hpp"
#include "gmc/ranking.hpp"

namespace testdata {

struct PublishedRow {
    const char* name;
    // f1_a, f1_b, dice_a, dice_b, hausdorff_a, hausdorff_b
    std::array<double, 6> scores;
    std::array<int, 6> ranks;
    int rank_sum;
    double weighted_rank_sum;
};

inline const std::vector<PublishedRow>& published_rows() {
    static const std::vector<PublishedRow> rows = {
        {"FCN", {0.788, 0.764, 0.813, 0.796, 95.054, 146.2478}, {11, 4, 11, 4, 11, 4}, 45, 27.75},
        {"FCN-atrous", {0.854, 0.798, 0.879, 0.825, 62.216, 118.734}, {9, 2, 6, 2, 9, 2}, 30, 19.5},
        {"Ours", {0.893, 0.843, 0.908, 0.833, 44.129, 116.821}, {3, 1, 1, 1, 1, 1}, 8, 4.5},
        {"CUMedVision2", {0.912, 0.716, 0.897, 0.781, 45.418, 160.347}, {1, 6, 2, 8, 2, 9}, 28, 9.5},
        {"ExB3", {0.896, 0.719, 0.886, 0.765, 57.350, 159.873}, {2, 5, 3, 9, 6, 8}, 33, 13.75},
        {"ExB2", {0.892, 0.686, 0.884, 0.754, 54.785, 187.442}, {4, 9, 4, 10, 3, 11}, 41, 15.75},
        {"ExB1", {0.891, 0.703, 0.882, 0.786, 57.413, 145.575}, {5, 7, 5, 5, 7, 3}, 32, 16.5},
        {"Frerburg2", {0.870, 0.695, 0.876, 0.786, 57.093, 148.463}, {6, 8, 7, 6, 4, 6}, 37, 17.75},
        {"Frerburg1", {0.834, 0.605, 0.875, 0.783, 57.194, 146.607}, {10, 11, 8, 7, 5, 5}, 46, 23.0},
        {"CUMedVision1", {0.868, 0.769, 0.867, 0.800, 74.596, 153.646}, {7, 3, 10, 3, 10, 7}, 40, 23.5},
        {"CVIP-Dundee", {0.863, 0.633, 0.870, 0.715, 58.339, 209.048}, {8, 10, 9, 11, 8, 13}, 59, 27.25},
        {"LIB", {0.777, 0.306, 0.781, 0.617, 112.706, 190.447}, {12, 14, 12, 13, 13, 12}, 76, 37.5},
        {"CVML", {0.652, 0.541, 0.644, 0.654, 155.433, 176.244}, {13, 12, 14, 12, 14, 10}, 75, 39.25},
        {"vision4GlaS", {0.635, 0.527, 0.737, 0.610, 107.491, 210.105}, {14, 13, 13, 14, 12, 14}, 80, 39.5},
    };
    return rows;
}

inline std::vector<gmc::ranking::MethodScores> contest_scores() {
    std::vector<gmc::ranking::MethodScores> out;
    for (const PublishedRow& row : published_rows()) {
        gmc::ranking::MethodScores m;
        m.name = row.name;
        for (std::size_t c = 0; c < 6; ++c) m.scores[c] = row.scores[c];
        out.push_back(std::move(m));
    }
    return out;
}

inline const PublishedRow& published_row(const std::string& name) {
    for (const PublishedRow& row : published_rows())
        if (name == row.name) return row;
    throw gmc::DataError("no published row named " + name);
}

}  // namespace testdata
