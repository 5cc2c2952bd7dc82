#include "gmc/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace gmc::ranking {

const char* column_name(std::size_t c) {
    switch (c) {
        case F1A: return "f1_a";
        case F1B: return "f1_b";
        case DiceA: return "dice_a";
        case DiceB: return "dice_b";
        case HausdorffA: return "hausdorff_a";
        case HausdorffB: return "hausdorff_b";
        default: return "?";
    }
}

RankTable rank_aggregate(const std::vector<MethodScores>& methods, double weight_a, double weight_b) {
    if (methods.empty()) throw DataError("rank_aggregate needs at least one method");
    for (const MethodScores& m : methods)
        for (double s : m.scores)
            if (!std::isfinite(s)) throw DataError("missing or non-finite score for method " + m.name);

    RankTable table;
    table.weight_a = weight_a;
    table.weight_b = weight_b;
    table.methods.resize(methods.size());
    for (std::size_t i = 0; i < methods.size(); ++i) {
        table.methods[i].name = methods[i].name;
        table.methods[i].scores = methods[i].scores;
    }

    // Competition ranking: rank = 1 + number of strictly better scores.
    for (std::size_t c = 0; c < kColumns; ++c) {
        for (std::size_t i = 0; i < methods.size(); ++i) {
            int better = 0;
            bool tie = false;
            for (std::size_t j = 0; j < methods.size(); ++j) {
                if (j == i) continue;
                const double si = methods[i].scores[c], sj = methods[j].scores[c];
                if (kHigherIsBetter[c] ? sj > si : sj < si) ++better;
                if (sj == si) tie = true;
            }
            table.methods[i].ranks[c] = better + 1;
            if (tie) {
                table.methods[i].had_tie = true;
                table.any_tie = true;
            }
        }
    }

    for (RankedMethod& m : table.methods) {
        int sum = 0, sum_a = 0, sum_b = 0;
        for (std::size_t c = 0; c < kColumns; ++c) {
            sum += m.ranks[c];
            if (c == F1A || c == DiceA || c == HausdorffA) sum_a += m.ranks[c];
            else sum_b += m.ranks[c];
        }
        m.rank_sum = sum;
        m.weighted_rank_sum = weight_a * sum_a + weight_b * sum_b;
    }

    std::stable_sort(table.methods.begin(), table.methods.end(),
                     [](const RankedMethod& a, const RankedMethod& b) {
                         if (a.rank_sum != b.rank_sum) return a.rank_sum < b.rank_sum;
                         if (a.weighted_rank_sum != b.weighted_rank_sum)
                             return a.weighted_rank_sum < b.weighted_rank_sum;
                         return a.name < b.name;
                     });
    return table;
}

RankTable rank_aggregate_given_ranks(const std::vector<MethodRanks>& methods, double weight_a,
                                     double weight_b) {
    if (methods.empty()) throw DataError("rank aggregation needs at least one method");
    RankTable table;
    table.weight_a = weight_a;
    table.weight_b = weight_b;
    for (const MethodRanks& m : methods) {
        RankedMethod r;
        r.name = m.name;
        r.ranks = m.ranks;
        int sum = 0, sum_a = 0, sum_b = 0;
        for (std::size_t c = 0; c < kColumns; ++c) {
            if (m.ranks[c] < 1) throw DataError("rank below 1 for method " + m.name);
            sum += m.ranks[c];
            if (c == F1A || c == DiceA || c == HausdorffA) sum_a += m.ranks[c];
            else sum_b += m.ranks[c];
        }
        r.rank_sum = sum;
        r.weighted_rank_sum = weight_a * sum_a + weight_b * sum_b;
        table.methods.push_back(std::move(r));
    }
    std::stable_sort(table.methods.begin(), table.methods.end(),
                     [](const RankedMethod& a, const RankedMethod& b) {
                         if (a.rank_sum != b.rank_sum) return a.rank_sum < b.rank_sum;
                         if (a.weighted_rank_sum != b.weighted_rank_sum)
                             return a.weighted_rank_sum < b.weighted_rank_sum;
                         return a.name < b.name;
                     });
    return table;
}

std::string RankTable::to_text() const {
    std::size_t name_w = 6;
    for (const RankedMethod& m : methods) name_w = std::max(name_w, m.name.size());

    std::ostringstream ss;
    ss << std::left << std::setw(static_cast<int>(name_w) + 2) << "method";
    for (std::size_t c = 0; c < kColumns; ++c)
        ss << std::right << std::setw(10) << column_name(c) << std::setw(5) << "rk";
    ss << std::setw(10) << "rank_sum" << std::setw(14) << "weighted";
    ss << "\n";
    for (const RankedMethod& m : methods) {
        ss << std::left << std::setw(static_cast<int>(name_w) + 2) << m.name;
        for (std::size_t c = 0; c < kColumns; ++c) {
            ss << std::right << std::setw(10) << std::fixed
               << std::setprecision(c >= HausdorffA ? 3 : 3) << m.scores[c] << std::setw(5)
               << m.ranks[c];
        }
        ss << std::setw(10) << m.rank_sum << std::setw(14) << std::setprecision(2)
           << m.weighted_rank_sum;
        if (m.had_tie) ss << "  (tie)";
        ss << "\n";
    }
    if (any_tie) ss << "note: tied scores share the smaller rank\n";
    return ss.str();
}

}  // namespace gmc::ranking
