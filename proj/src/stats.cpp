#include "lexigp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lexigp/numeric.hpp"

namespace lexigp {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share ranks i+1..j+1
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = avg;
        i = j + 1;
    }
    return ranks;
}

RankTable rank_methods(const Matrix& median_mse, std::vector<std::string> problems, std::vector<std::string> methods) {
    if (problems.size() != median_mse.rows() || methods.size() != median_mse.cols()) {
        throw std::invalid_argument("rank_methods: label count does not match matrix shape");
    }
    for (const double v : median_mse.values()) {
        if (!std::isfinite(v)) throw std::invalid_argument("rank_methods: non-finite entry");
    }
    RankTable t;
    t.problems = std::move(problems);
    t.methods = std::move(methods);
    t.ranks = Matrix(median_mse.rows(), median_mse.cols());
    for (std::size_t p = 0; p < median_mse.rows(); ++p) {
        const auto r = average_ranks(median_mse.row(p));
        std::copy(r.begin(), r.end(), t.ranks.row(p).begin());
    }
    return t;
}

std::vector<double> mean_ranks(const RankTable& table) {
    std::vector<double> out(table.num_methods(), 0.0);
    for (std::size_t p = 0; p < table.num_problems(); ++p) {
        for (std::size_t j = 0; j < table.num_methods(); ++j) out[j] += table.ranks(p, j);
    }
    for (double& v : out) v /= static_cast<double>(table.num_problems());
    return out;
}

std::vector<double> median_ranks(const RankTable& table) {
    std::vector<double> out(table.num_methods());
    for (std::size_t j = 0; j < table.num_methods(); ++j) out[j] = median(table.ranks.column(j));
    return out;
}

namespace {

void require_shape(const RankTable& table, const char* who) {
    if (table.num_problems() < 2 || table.num_methods() < 2) {
        throw std::invalid_argument(std::string(who) + ": need at least 2 problems and 2 methods");
    }
}

} // namespace

FriedmanResult friedman_test(const RankTable& table, bool tie_correction) {
    require_shape(table, "friedman_test");
    const auto n = static_cast<double>(table.num_problems());
    const auto k = static_cast<double>(table.num_methods());
    const auto r = mean_ranks(table);

    double sum_sq = 0.0;
    for (const double rj : r) sum_sq += rj * rj;
    double stat = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);

    if (tie_correction) {
        double ties = 0.0;
        for (std::size_t p = 0; p < table.num_problems(); ++p) {
            std::vector<double> row(table.ranks.row(p).begin(), table.ranks.row(p).end());
            std::sort(row.begin(), row.end());
            std::size_t i = 0;
            while (i < row.size()) {
                std::size_t j = i;
                while (j + 1 < row.size() && row[j + 1] == row[i]) ++j;
                const double t = static_cast<double>(j - i + 1);
                ties += t * t * t - t;
                i = j + 1;
            }
        }
        const double c = 1.0 - ties / (n * (k * k * k - k));
        // c == 0 only when every row is fully tied, i.e. no evidence at all.
        stat = c > 0.0 ? stat / c : 0.0;
    }
    stat = std::max(stat, 0.0);

    FriedmanResult out;
    out.statistic = stat;
    out.degrees_of_freedom = static_cast<int>(table.num_methods()) - 1;
    const boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
    out.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    return out;
}

double studentized_range_cdf(double q, int groups) {
    if (groups < 2) throw std::invalid_argument("studentized_range_cdf: need at least 2 groups");
    if (!(q > 0.0)) return 0.0;
    const boost::math::normal normal;
    const double k = groups;
    auto integrand = [&](double z) {
        const double width = boost::math::cdf(normal, z) - boost::math::cdf(normal, z - q);
        return boost::math::pdf(normal, z) * std::pow(width, k - 1.0);
    };
    // The integrand is negligible outside [-9, q + 9].
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -9.0, q + 9.0, 15, 1e-13, &err);
    return std::clamp(k * value, 0.0, 1.0);
}

Matrix nemenyi_posthoc(const RankTable& table) {
    require_shape(table, "nemenyi_posthoc");
    const std::size_t k = table.num_methods();
    const auto n = static_cast<double>(table.num_problems());
    const auto kd = static_cast<double>(k);
    const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * n));
    const auto r = mean_ranks(table);
    Matrix p(k, k, 1.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            const double q = std::abs(r[a] - r[b]) / se * std::sqrt(2.0);
            const double pv = q == 0.0 ? 1.0 : 1.0 - studentized_range_cdf(q, static_cast<int>(k));
            p(a, b) = pv;
            p(b, a) = pv;
        }
    }
    return p;
}

} // namespace lexigp
