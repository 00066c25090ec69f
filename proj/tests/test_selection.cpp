#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "lexigp/selection.hpp"
#include "oracles.hpp"

using namespace lexigp;

namespace {

ErrorMatrix em_of(const oracle::Table& t) {
    std::vector<double> flat;
    for (const auto& row : t) flat.insert(flat.end(), row.begin(), row.end());
    return ErrorMatrix(t.size(), t.front().size(), flat);
}

oracle::Table random_table(Rng& rng, std::size_t rows, std::size_t cols, int levels) {
    oracle::Table t(rows, std::vector<double>(cols));
    for (auto& r : t) {
        for (double& v : r) v = 0.5 * static_cast<double>(uniform_index(rng, static_cast<std::size_t>(levels)));
    }
    return t;
}

double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    double stat = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] == 0.0) continue;
        const double e = n * probs[i];
        stat += (counts[i] - e) * (counts[i] - e) / e;
        ++cells;
    }
    if (cells < 2) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), stat));
}

bool within_3_sigma(const std::vector<double>& counts, const std::vector<double>& probs) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double sd = std::sqrt(n * probs[i] * (1.0 - probs[i]));
        if (std::fabs(counts[i] - n * probs[i]) > 3.0 * sd) return false;
    }
    return true;
}

template <class Select>
std::vector<double> frequencies(std::size_t n, int draws, Select select) {
    std::vector<double> counts(n, 0.0);
    for (int i = 0; i < draws; ++i) counts[select()] += 1.0;
    return counts;
}

} // namespace

TEST_CASE("error matrix validation") {
    CHECK_THROWS_AS(ErrorMatrix(0, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(ErrorMatrix(1, 1, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ErrorMatrix(1, 1, {std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(ErrorMatrix(1, 2, {1.0}), std::invalid_argument);
}

TEST_CASE("aggregate mse") {
    CHECK(aggregate_mse(em_of({{0, 0}, {2, 4}})) == std::vector<double>{0, 3});
    CHECK(aggregate_mse(em_of({{1}, {5}, {2}})) == std::vector<double>{1, 5, 2});
    CHECK(aggregate_mse(em_of({{0, 0, 0}, {0, 0, 0}})) == std::vector<double>{0, 0});
}

TEST_CASE("tournament") {
    const std::vector<double> fit{1, 0, 2};
    Rng rng(1);
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(tournament_winner(fit, all, rng) == 1);
    const std::vector<std::size_t> no_best{2, 0, 2};
    CHECK(tournament_winner(fit, no_best, rng) == 0);

    SUBCASE("k = 1 is uniform") {
        const std::vector<double> f{3, 1, 4, 1, 5};
        const auto counts = frequencies(5, 100000, [&] { return tournament_select(f, 1, rng); });
        CHECK(chi_square_p(counts, std::vector<double>(5, 0.2)) > 0.01);
    }
    SUBCASE("ties are uniform among distinct tied participants") {
        const std::vector<double> f{1, 1, 2};
        const std::vector<std::size_t> part{0, 0, 0, 1, 2};
        const auto counts = frequencies(3, 20000, [&] { return tournament_winner(f, part, rng); });
        CHECK(counts[2] == 0.0);
        CHECK(chi_square_p({counts[0], counts[1]}, {0.5, 0.5}) > 0.01);
    }
    CHECK_THROWS_AS(tournament_select(std::vector<double>{}, 3, rng), std::invalid_argument);
    CHECK_THROWS_AS(tournament_select(fit, 0, rng), std::invalid_argument);
    SelectionParams defaults;
    CHECK(defaults.tournament_size == 5);
    CHECK(defaults.batch_tournament_size == 64);
}

TEST_CASE("fitness-proportionate selection") {
    CHECK(fps_probabilities(std::vector<double>{1, 1}) == std::vector<double>{0.5, 0.5});
    const auto p = fps_probabilities(std::vector<double>{1, 3});
    CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));
    const auto z = fps_probabilities(std::vector<double>{0, 1});
    CHECK(std::isfinite(z[0]));
    CHECK(z[0] == doctest::Approx(1.0 / 1e-10 / (1.0 / 1e-10 + 1.0 / (1.0 + 1e-10))));
    Rng rng(2);
    const auto counts = frequencies(2, 100000, [&] { return fps_select(std::vector<double>{1, 3}, rng); });
    CHECK(chi_square_p(counts, {0.75, 0.25}) > 0.01);
    CHECK_THROWS_AS(fps_probabilities(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("median absolute deviation") {
    CHECK(mad(std::vector<double>{5, 5, 5}) == 0.0);
    CHECK(mad(std::vector<double>{1, 2, 3, 4, 100}) == 1.0);
    CHECK(mad(std::vector<double>{1, 2}) == 0.5);
    CHECK_THROWS_AS(mad(std::vector<double>{}), std::invalid_argument);
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> v(1 + uniform_index(rng, 12));
        for (double& x : v) x = uniform_unit(rng) * 10.0;
        CHECK(mad(v) == oracle::mad(v));
    }
}

TEST_CASE("lexicase basics") {
    Rng rng(4);
    CHECK(lexicase_select(em_of({{7, 3, 1}}), rng) == 0);
    const ErrorMatrix em = em_of({{0, 1}, {1, 0}, {0, 0}});
    for (int i = 0; i < 1000; ++i) REQUIRE(lexicase_select(em, rng) == 2);
    CHECK(oracle::lexicase_distribution({{0, 1}, {1, 0}, {0, 0}}, false) == std::vector<double>{0, 0, 1});
}

TEST_CASE("epsilon-lexicase single case") {
    const ErrorMatrix em = em_of({{0}, {0.4}, {10}});
    const std::vector<std::size_t> order{0};
    CHECK(epsilon_lexicase_survivors(em, order) == std::vector<std::size_t>{0, 1});
    Rng rng(5);
    const auto counts = frequencies(3, 100000, [&] { return epsilon_lexicase_select(em, rng); });
    CHECK(counts[2] == 0.0);
    CHECK(chi_square_p({counts[0], counts[1]}, {0.5, 0.5}) > 0.01);
}

TEST_CASE("traces replay: the selected individual passes every consumed case") {
    Rng rng(6);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto t = random_table(rng, 1 + uniform_index(rng, 8), 1 + uniform_index(rng, 6), 5);
        const ErrorMatrix em = em_of(t);
        const bool eps = trial % 2 == 1;
        const LexicaseTrace tr = eps ? epsilon_lexicase_trace(em, rng) : lexicase_trace(em, rng);
        const auto replay = eps ? epsilon_lexicase_survivors(em, tr.case_order) : lexicase_survivors(em, tr.case_order);
        REQUIRE(replay == tr.survivors);
        REQUIRE(std::find(tr.survivors.begin(), tr.survivors.end(), tr.selected) != tr.survivors.end());
        std::vector<std::size_t> sorted = tr.case_order;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        if (!eps) {
            // exact filter: the selected row is minimal on each consumed case among all rows that
            // were still in the pool, so in particular it ties the elite of the first case
            const std::size_t first = tr.case_order.empty() ? 0 : tr.case_order.front();
            double best = 1e300;
            for (std::size_t i = 0; i < em.rows(); ++i) best = std::min(best, em(i, first));
            if (!tr.case_order.empty()) REQUIRE(em(tr.selected, first) == best);
        }
    }
}

TEST_CASE("epsilon-lexicase with zero epsilon is lexicase under a shared stream") {
    Rng gen(7);
    for (int trial = 0; trial < 500; ++trial) {
        const auto t = random_table(gen, 2 + uniform_index(gen, 10), 1 + uniform_index(gen, 6), 4);
        const ErrorMatrix em = em_of(t);
        const std::uint64_t seed = gen();
        Rng a(seed);
        Rng b(seed);
        for (int k = 0; k < 20; ++k) {
            const LexicaseTrace x = lexicase_trace(em, a);
            const LexicaseTrace y = epsilon_lexicase_trace(em, b, EpsilonPolicy::kZero);
            REQUIRE(x.case_order == y.case_order);
            REQUIRE(x.survivors == y.survivors);
            REQUIRE(x.selected == y.selected);
        }
    }
}

TEST_CASE("survivor sets are invariant under positive scaling") {
    Rng gen(8);
    for (int trial = 0; trial < 500; ++trial) {
        const auto t = random_table(gen, 2 + uniform_index(gen, 6), 1 + uniform_index(gen, 4), 5);
        const ErrorMatrix em = em_of(t);
        const ErrorMatrix scaled = em.scaled(4.0); // power of two keeps the arithmetic exact
        std::vector<std::size_t> order(em.cols());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), gen);
        REQUIRE(lexicase_survivors(em, order) == lexicase_survivors(scaled, order));
        REQUIRE(epsilon_lexicase_survivors(em, order) == epsilon_lexicase_survivors(scaled, order));
        REQUIRE(epsilon_lexicase_survivors(em, order, EpsilonPolicy::kPopulation) ==
                epsilon_lexicase_survivors(scaled, order, EpsilonPolicy::kPopulation));
    }
}

TEST_CASE("exact selection distributions match the brute-force oracle") {
    // up to 5 individuals and 4 cases
    Rng gen(9);
    for (int trial = 0; trial < 400; ++trial) {
        const auto t = random_table(gen, 1 + uniform_index(gen, 5), 1 + uniform_index(gen, 4), 5);
        const ErrorMatrix em = em_of(t);
        for (const bool eps : {false, true}) {
            std::vector<std::size_t> order(em.cols());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::vector<double> p(em.rows(), 0.0);
            double perms = 0.0;
            do {
                perms += 1.0;
                const auto s = eps ? epsilon_lexicase_survivors(em, order) : lexicase_survivors(em, order);
                for (std::size_t i : s) p[i] += 1.0 / static_cast<double>(s.size());
            } while (std::next_permutation(order.begin(), order.end()));
            const auto ref = oracle::lexicase_distribution(t, eps);
            for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(p[i] / perms == doctest::Approx(ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("empirical selection frequencies match the oracle within 3 sigma") {
    const oracle::Table t43{{0, 0.5, 2}, {0.5, 0, 1}, {1, 1, 0}, {0, 2, 0.5}};
    const oracle::Table t54{{0, 1, 2, 0.5}, {1, 0, 0.5, 2}, {0.5, 0.5, 0.5, 0.5}, {2, 2, 0, 0}, {0, 1, 1, 0.5}};
    Rng rng(10);
    for (const auto* t : {&t43, &t54}) {
        const ErrorMatrix em = em_of(*t);
        const auto lex = frequencies(em.rows(), 100000, [&] { return lexicase_select(em, rng); });
        CHECK(within_3_sigma(lex, oracle::lexicase_distribution(*t, false)));
        const auto eps = frequencies(em.rows(), 100000, [&] { return epsilon_lexicase_select(em, rng); });
        CHECK(within_3_sigma(eps, oracle::lexicase_distribution(*t, true)));
    }
}

TEST_CASE("plexicase probabilities") {
    CHECK(plexicase_probabilities(em_of({{3, 1}}), 1.0) == std::vector<double>{1.0});
    for (double alpha : {0.5, 1.0, 4.0}) {
        CHECK(plexicase_probabilities(em_of({{1, 2}, {1, 2}}), alpha) == std::vector<double>{0.5, 0.5});
    }
    // row 2 is worse than row 0 on both cases by far more than the MAD
    const ErrorMatrix em = em_of({{0, 0, 5}, {5, 0, 0}, {9, 9, 9}, {0, 5, 0}});
    const auto p = plexicase_probabilities(em, 1.0);
    CHECK(p[2] == 0.0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));

    Rng gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto t = random_table(gen, 1 + uniform_index(gen, 8), 1 + uniform_index(gen, 5), 6);
        const double alpha = 0.25 + uniform_unit(gen) * 4.0;
        const auto q = plexicase_probabilities(em_of(t), alpha);
        REQUIRE(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<std::size_t> perm(t.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        oracle::Table permuted;
        for (std::size_t i : perm) permuted.push_back(t[i]);
        const auto qp = plexicase_probabilities(em_of(permuted), alpha);
        for (std::size_t i = 0; i < perm.size(); ++i) REQUIRE(qp[i] == doctest::Approx(q[perm[i]]).epsilon(1e-12));
    }
}

TEST_CASE("sharpening is monotone") {
    const std::vector<double> w{0.75, 0.25};
    double prev = 0.0;
    for (double alpha : {1.0, 2.0, 4.0, 8.0, 32.0}) {
        const auto s = sharpen(w, alpha);
        CHECK(s[0] > prev);
        prev = s[0];
    }
    CHECK(prev > 0.999);
    CHECK(sharpen(w, 1.0)[0] == doctest::Approx(0.75));
    CHECK_THROWS_AS(sharpen(w, 0.0), std::invalid_argument);
}

TEST_CASE("batches") {
    Rng rng(12);
    auto ids = [](std::size_t n) {
        std::vector<std::size_t> v(n);
        std::iota(v.begin(), v.end(), std::size_t{0});
        return v;
    };
    const Batches b100 = make_batches(ids(100), 0.1, rng);
    CHECK(b100.size() == 10);
    for (const auto& b : b100) CHECK(b.size() == 10);
    const Batches b10 = make_batches(ids(10), 1.0, rng);
    CHECK(b10.size() == 1);
    CHECK(b10[0].size() == 10);
    std::vector<std::size_t> sizes;
    for (const auto& b : make_batches(ids(10), 0.25, rng)) sizes.push_back(b.size());
    CHECK(sizes == std::vector<std::size_t>{3, 3, 3, 1});
    CHECK_THROWS_AS(make_batches(ids(10), 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_batches(ids(10), 1.5, rng), std::invalid_argument);

    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 200);
        const double frac = 0.01 + uniform_unit(rng) * 0.99;
        const Batches bs = make_batches(ids(n), frac, rng);
        std::vector<std::size_t> all;
        for (const auto& b : bs) all.insert(all.end(), b.begin(), b.end());
        std::sort(all.begin(), all.end());
        REQUIRE(all == ids(n));
        for (std::size_t i = 0; i + 1 < bs.size(); ++i) REQUIRE(bs[i].size() == batch_size_for(n, frac));
    }
}

TEST_CASE("batch error matrix") {
    const ErrorMatrix one = em_of({{1, 3}});
    CHECK(batch_error_matrix(one, {{0, 1}})(0, 0) == 2.0);

    Rng rng(13);
    const auto t = random_table(rng, 6, 8, 7);
    const ErrorMatrix em = em_of(t);
    const Batches singles = make_batches(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}, 0.125, rng);
    const ErrorMatrix bm = batch_error_matrix(em, singles);
    for (std::size_t i = 0; i < em.rows(); ++i) {
        for (std::size_t b = 0; b < singles.size(); ++b) CHECK(bm(i, b) == em(i, singles[b][0]));
    }
    const Batches fours = make_batches(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}, 0.5, rng);
    const auto agg = aggregate_mse(em);
    const auto bagg = aggregate_mse(batch_error_matrix(em, fours));
    for (std::size_t i = 0; i < agg.size(); ++i) CHECK(bagg[i] == doctest::Approx(agg[i]));
    const ErrorMatrix whole = batch_error_matrix(em, {{7, 3, 1, 0, 2, 4, 6, 5}});
    for (std::size_t i = 0; i < agg.size(); ++i) CHECK(whole(i, 0) == agg[i]);
}

TEST_CASE("batch tournament cursor") {
    Rng rng(14);
    const ErrorMatrix bm = em_of({{1, 2, 3}, {3, 2, 1}});
    SelectionContext ctx;
    ctx.batches = {{0}, {1}, {2}};
    std::vector<std::size_t> used;
    for (int i = 0; i < 7; ++i) {
        used.push_back(ctx.cursor);
        batch_tournament_select(ctx, bm, rng);
    }
    CHECK(used == std::vector<std::size_t>{0, 1, 2, 0, 1, 2, 0});
}

TEST_CASE("batch tournament with one batch is a k = 64 tournament on aggregate mse") {
    Rng gen(15);
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = random_table(gen, 20 + uniform_index(gen, 80), 1 + uniform_index(gen, 20), 9);
        const ErrorMatrix em = em_of(t);
        std::vector<std::size_t> cols(em.cols());
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        SelectionContext ctx;
        ctx.batches = {cols};
        const ErrorMatrix bm = batch_error_matrix(em, ctx.batches);
        const auto fit = aggregate_mse(em);
        const std::uint64_t seed = gen();
        Rng a(seed);
        Rng b(seed);
        for (int k = 0; k < 50; ++k) REQUIRE(batch_tournament_select(ctx, bm, a) == tournament_select(fit, 64, b));
    }
}

TEST_CASE("batch epsilon-lexicase") {
    Rng rng(16);
    SUBCASE("single batch picks uniformly within the epsilon band of the aggregate") {
        const ErrorMatrix em = em_of({{0, 2}, {1, 2}, {4, 4}, {0.5, 0.5}});
        const ErrorMatrix bm = batch_error_matrix(em, {{0, 1}});
        // aggregate [1, 1.5, 4, 0.5]: median 1.25, MAD 0.5, band [0.5, 1.0]
        const std::vector<double> expect{0.5, 0.0, 0.0, 0.5};
        CHECK(oracle::lexicase_distribution({{1}, {1.5}, {4}, {0.5}}, true) == expect);
        const auto counts = frequencies(4, 60000, [&] { return batch_epsilon_lexicase_select(bm, rng); });
        CHECK(counts[1] + counts[2] == 0.0);
        CHECK(within_3_sigma(counts, expect));
    }
    SUBCASE("four individuals, two batches") {
        const ErrorMatrix em = em_of({{0, 1, 2, 0}, {1, 1, 0, 0}, {2, 0, 0, 2}, {0.5, 0.5, 0.5, 0.5}});
        const Batches bs{{0, 1}, {2, 3}};
        const ErrorMatrix bm = batch_error_matrix(em, bs);
        oracle::Table bt(4, std::vector<double>(2));
        for (std::size_t i = 0; i < 4; ++i) {
            bt[i][0] = (em(i, 0) + em(i, 1)) / 2;
            bt[i][1] = (em(i, 2) + em(i, 3)) / 2;
        }
        const auto counts = frequencies(4, 100000, [&] { return batch_epsilon_lexicase_select(bm, rng); });
        CHECK(within_3_sigma(counts, oracle::lexicase_distribution(bt, true)));
    }
}

TEST_CASE("parent selector") {
    Rng gen(17);
    const auto t = random_table(gen, 30, 12, 9);
    const ErrorMatrix em = em_of(t);
    for (Method m : {Method::kTournament, Method::kFps, Method::kLexicase, Method::kEpsLexicase,
                     Method::kEpsPlexicase, Method::kBatchTournament, Method::kBatchEpsLexicase}) {
        CHECK(parse_method(method_id(m)) == m);
        for (EpsilonPolicy pol : {EpsilonPolicy::kCandidatePool, EpsilonPolicy::kPopulation}) {
            SelectionParams params;
            params.epsilon_policy = pol;
            params.batch_fraction = 0.25;
            ParentSelector sel(m, params, em, gen);
            for (int i = 0; i < 200; ++i) REQUIRE(sel.select(gen) < em.rows());
            if (is_batch_method(m)) CHECK(sel.context().batches.size() == 4);
        }
    }
    CHECK_THROWS_AS(parse_method("roulette"), std::invalid_argument);
    SelectionParams bad;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(ParentSelector(Method::kEpsPlexicase, bad, em, gen), std::invalid_argument);
}

TEST_CASE("tournament and fps only see aggregate mse") {
    Rng gen(18);
    const auto t = random_table(gen, 25, 7, 9);
    const ErrorMatrix em = em_of(t);
    const auto agg = aggregate_mse(em);
    const ErrorMatrix collapsed(em.rows(), 1, agg);
    for (Method m : {Method::kTournament, Method::kFps}) {
        ParentSelector a(m, SelectionParams{}, em, gen);
        ParentSelector b(m, SelectionParams{}, collapsed, gen);
        Rng ra(5);
        Rng rb(5);
        for (int i = 0; i < 500; ++i) REQUIRE(a.select(ra) == b.select(rb));
    }
}
