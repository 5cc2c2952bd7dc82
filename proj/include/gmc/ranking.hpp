// ranking.hpp — contest-style rank aggregation over per-method scores.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "gmc/common.hpp"

namespace gmc::ranking {

// Column order mirrors the contest table: F1, object Dice, object Hausdorff,
// each on split A then split B. Hausdorff ranks ascending, the rest descending.
enum Column : std::size_t { F1A = 0, F1B, DiceA, DiceB, HausdorffA, HausdorffB, kColumns };

inline constexpr std::array<bool, kColumns> kHigherIsBetter = {true, true, true, true, false, false};
const char* column_name(std::size_t c);

struct MethodScores {
    std::string name;
    std::array<double, kColumns> scores{};
};

struct RankedMethod {
    std::string name;
    std::array<double, kColumns> scores{};
    std::array<int, kColumns> ranks{};
    int rank_sum = 0;
    double weighted_rank_sum = 0.0;
    bool had_tie = false;
};

struct RankTable {
    std::vector<RankedMethod> methods;  // sorted by rank_sum, ties by weighted sum then name
    double weight_a = 0.75, weight_b = 0.25;
    bool any_tie = false;

    std::string to_text() const;
};

/// Competition ranking per column (ties share the smaller rank), rank sum over
/// all six columns, and the split-weighted rank sum
/// weight_a * (ranks on split A) + weight_b * (ranks on split B).
RankTable rank_aggregate(const std::vector<MethodScores>& methods, double weight_a = 0.75,
                         double weight_b = 0.25);

struct MethodRanks {
    std::string name;
    std::array<int, kColumns> ranks{};
};

/// Aggregation over externally supplied per-column ranks (e.g. a published
/// contest table whose score precision cannot reproduce its own tie-breaks).
RankTable rank_aggregate_given_ranks(const std::vector<MethodRanks>& methods,
                                     double weight_a = 0.75, double weight_b = 0.25);

}  // namespace gmc::ranking
