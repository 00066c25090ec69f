#include "lexigp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lexigp/numeric.hpp"

namespace lexigp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool blank(std::string_view line) { return trim(line).empty(); }

Partition take_rows(const Dataset& ds, std::span<const std::size_t> rows) {
    Partition p;
    p.features = Matrix(rows.size(), ds.num_features());
    p.targets.reserve(rows.size());
    p.source_rows.assign(rows.begin(), rows.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = ds.features.row(rows[i]);
        std::copy(src.begin(), src.end(), p.features.row(i).begin());
        p.targets.push_back(ds.targets[rows[i]]);
    }
    return p;
}

} // namespace

Dataset parse_dataset(std::istream& in, std::string name) {
    std::string header;
    while (std::getline(in, header) && blank(header)) {
    }
    if (blank(header)) throw IngestionError(name + ": empty file");

    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    const auto columns = split_line(header, delim);
    std::size_t target_col = columns.size();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == "target") target_col = c;
    }
    if (target_col == columns.size()) throw IngestionError(name + ": no 'target' column");

    Dataset ds;
    ds.name = std::move(name);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c != target_col) ds.feature_names.emplace_back(columns[c]);
    }

    std::vector<double> values;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto cells = split_line(line, delim);
        if (cells.size() != columns.size()) {
            throw IngestionError(ds.name + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " + std::to_string(columns.size()));
        }
        double target = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string_view cell = cells[c];
            double v = 0.0;
            const char* first = cell.data();
            if (!cell.empty() && cell.front() == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw IngestionError(ds.name + ": non-numeric or missing value '" + std::string(cell) + "' at line " +
                                     std::to_string(line_no) + ", column '" + std::string(columns[c]) + "'");
            }
            if (c == target_col) {
                target = v;
            } else {
                values.push_back(v);
            }
        }
        ds.targets.push_back(target);
    }
    if (ds.targets.empty()) throw IngestionError(ds.name + ": no data rows");
    ds.features = Matrix(ds.targets.size(), columns.size() - 1, std::move(values));
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset " + path.string());
    std::string name = path.filename().string();
    for (const char* ext : {".tsv", ".csv", ".txt"}) {
        if (name.size() > 4 && name.ends_with(ext)) name.resize(name.size() - 4);
    }
    return parse_dataset(in, std::move(name));
}

SplitDataset split(const Dataset& dataset, std::uint64_t seed) {
    const std::size_t n = dataset.num_instances();
    if (n < 3) throw std::invalid_argument("split: need at least 3 instances");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const std::size_t n_train = n * 70 / 100;
    const std::size_t n_val = n * 15 / 100;
    const std::span<const std::size_t> all(perm);

    SplitDataset out;
    out.split_seed = seed;
    out.train = take_rows(dataset, all.subspan(0, n_train));
    out.validation = take_rows(dataset, all.subspan(n_train, n_val));
    out.test = take_rows(dataset, all.subspan(n_train + n_val));
    return out;
}

std::vector<double> squared_errors(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw std::invalid_argument("squared_errors: length mismatch");
    std::vector<double> out(predictions.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double diff = targets[i] - predictions[i];
        const double e = diff * diff;
        out[i] = std::isfinite(e) ? std::min(e, kErrorCeiling) : kErrorCeiling;
    }
    return out;
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty()) throw std::invalid_argument("mse: empty input");
    const auto se = squared_errors(predictions, targets);
    return std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());
}

} // namespace lexigp
