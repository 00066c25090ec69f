#pragma once

/// @file stats.hpp
/// @brief Rank-based comparison of several methods over several problems:
/// per-problem average ranks, the Friedman test and Nemenyi pairwise p-values.

#include <span>
#include <string>
#include <vector>

#include "lexigp/matrix.hpp"

namespace lexigp {

struct RankTable {
    std::vector<std::string> problems;
    std::vector<std::string> methods;
    Matrix ranks; ///< problems x methods, 1 = best

    std::size_t num_problems() const noexcept { return ranks.rows(); }
    std::size_t num_methods() const noexcept { return ranks.cols(); }
};

/// Ranks ascending (smallest value gets rank 1); ties share the average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Ranks every row of a problems x methods matrix of median MSEs.
RankTable rank_methods(const Matrix& median_mse, std::vector<std::string> problems, std::vector<std::string> methods);

std::vector<double> mean_ranks(const RankTable& table);
std::vector<double> median_ranks(const RankTable& table);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int degrees_of_freedom = 0;
};

/// Chi-square form of the Friedman statistic, k - 1 degrees of freedom.
/// With `tie_correction`, the statistic is divided by
/// 1 - sum(t^3 - t) / (N (k^3 - k)) over tie groups t within rows.
FriedmanResult friedman_test(const RankTable& table, bool tie_correction = false);

/// CDF of the studentized range for `groups` means with infinite degrees of
/// freedom: P(Q <= q) = k * integral phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz.
double studentized_range_cdf(double q, int groups);

/// Symmetric k x k matrix of p-values with unit diagonal. The statistic for a
/// pair is |mean rank difference| / sqrt(k(k+1)/(6N)) * sqrt(2), referred to
/// the studentized range with k groups.
Matrix nemenyi_posthoc(const RankTable& table);

} // namespace lexigp
