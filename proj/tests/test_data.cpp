#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lexigp/data.hpp"

using namespace lexigp;

namespace {

Dataset from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in, "t");
}

Dataset counting(std::size_t n) {
    Dataset ds;
    ds.name = "count";
    ds.feature_names = {"x0"};
    ds.features = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        ds.features(i, 0) = static_cast<double>(i);
        ds.targets.push_back(static_cast<double>(i) * 2.0);
    }
    return ds;
}

std::vector<std::size_t> all_rows(const SplitDataset& s) {
    std::vector<std::size_t> rows;
    for (const Partition* p : {&s.train, &s.validation, &s.test}) {
        rows.insert(rows.end(), p->source_rows.begin(), p->source_rows.end());
    }
    return rows;
}

} // namespace

TEST_CASE("parse a small csv") {
    const Dataset ds = from_text("x0,x1,target\n1,2,3\n4,5,6\n7,8,9\n");
    CHECK(ds.num_features() == 2);
    CHECK(ds.num_instances() == 3);
    CHECK(ds.feature_names == std::vector<std::string>{"x0", "x1"});
    CHECK(ds.features(2, 1) == 8.0);
    CHECK(ds.targets == std::vector<double>{3, 6, 9});
}

TEST_CASE("target column may sit anywhere; tabs are detected") {
    const Dataset ds = from_text("target\ta\tb\n1\t2\t3\n");
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.features(0, 0) == 2.0);
    CHECK(ds.targets[0] == 1.0);
}

TEST_CASE("ingestion errors") {
    CHECK_THROWS_AS(from_text(""), IngestionError);
    CHECK_THROWS_AS(from_text("x0,target\n"), IngestionError);
    CHECK_THROWS_AS(from_text("x0,x1\n1,2\n"), IngestionError);
    CHECK_THROWS_AS(from_text("x0,target\n1,2\n3\n"), IngestionError);
    CHECK_THROWS_AS(from_text("x0,target\n1,nan\n"), IngestionError);
    try {
        from_text("x0,target\n1,2\nabc,4\n");
        FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("x0") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.tsv"), IngestionError);
}

TEST_CASE("load a 380 x 2 tsv file") {
    const auto dir = std::filesystem::temp_directory_path() / "lexigp_data_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "519_vinnie.tsv";
    {
        std::ofstream out(path);
        out << "time\tperiod\ttarget\n";
        std::mt19937 rng(5);
        for (int i = 0; i < 380; ++i) out << i % 7 << '\t' << i % 3 << '\t' << rng() % 100 << '\n';
    }
    const Dataset ds = load_dataset(path);
    CHECK(ds.name == "519_vinnie");
    CHECK(ds.num_instances() == 380);
    CHECK(ds.num_features() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("split sizes follow floor/floor/remainder") {
    const auto s100 = split(counting(100), 1);
    CHECK(s100.train.size() == 70);
    CHECK(s100.validation.size() == 15);
    CHECK(s100.test.size() == 15);
    const auto s101 = split(counting(101), 1);
    CHECK(s101.train.size() == 70);
    CHECK(s101.validation.size() == 15);
    CHECK(s101.test.size() == 16);
    CHECK_THROWS_AS(split(counting(2), 1), std::invalid_argument);
}

TEST_CASE("split is a seeded, disjoint, exhaustive partition") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + gen() % 300;
        const Dataset ds = counting(n);
        const std::uint64_t seed = gen();
        const SplitDataset a = split(ds, seed);
        const SplitDataset b = split(ds, seed);
        auto rows = all_rows(a);
        REQUIRE(rows == all_rows(b));
        std::sort(rows.begin(), rows.end());
        std::vector<std::size_t> expect(n);
        std::iota(expect.begin(), expect.end(), std::size_t{0});
        REQUIRE(rows == expect);
        for (const Partition* p : {&a.train, &a.validation, &a.test}) {
            for (std::size_t i = 0; i < p->size(); ++i) {
                REQUIRE(p->features(i, 0) == static_cast<double>(p->source_rows[i]));
                REQUIRE(p->targets[i] == 2.0 * static_cast<double>(p->source_rows[i]));
            }
        }
    }
    CHECK(all_rows(split(counting(50), 1)) != all_rows(split(counting(50), 2)));
}

TEST_CASE("squared errors and mse") {
    CHECK(squared_errors(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == std::vector<double>{0, 0});
    CHECK(squared_errors(std::vector<double>{0, 0}, std::vector<double>{1, 3}) == std::vector<double>{1, 9});
    CHECK(squared_errors(std::vector<double>{2}, std::vector<double>{-2}) == std::vector<double>{16});
    CHECK(mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 3}) == 5.0);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(squared_errors(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
    CHECK(squared_errors(std::vector<double>{1e300}, std::vector<double>{-1e300})[0] == kErrorCeiling);
}

TEST_CASE("mse properties") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen() % 20;
        std::vector<double> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z(gen);
            t[i] = trial % 5 == 0 ? p[i] : z(gen);
        }
        const auto se = squared_errors(p, t);
        CHECK(mse(p, t) == doctest::Approx(std::accumulate(se.begin(), se.end(), 0.0) / n));
        CHECK(mse(p, t) == mse(t, p));
        CHECK((mse(p, t) == 0.0) == (p == t));
    }
}
