#pragma once

#include "mvh/trials.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mvh::test {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(MVH_FIXTURE_DIR) / name;
}

inline std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n, double p = 0.5) {
    std::bernoulli_distribution b(p);
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) x = b(rng) ? 1 : 0;
    return v;
}

/// Matrix with n observers and N stimuli named s00, s01, ...
inline ConditionResponseMatrix make_matrix(const std::vector<std::vector<std::uint8_t>>& rows,
                                           ConditionKey key = {"exp", "cond"}) {
    std::vector<std::string> observers, stimuli;
    std::vector<std::uint8_t> cells;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        observers.push_back("h" + std::to_string(j));
        cells.insert(cells.end(), rows[j].begin(), rows[j].end());
    }
    for (std::size_t i = 0; i < (rows.empty() ? 0 : rows[0].size()); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%02zu", i);
        stimuli.emplace_back(buf);
    }
    return ConditionResponseMatrix(std::move(key), std::move(observers), std::move(stimuli),
                                   std::move(cells));
}

inline ConditionResponseMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t N,
                                             ConditionKey key = {"exp", "cond"}) {
    std::uniform_real_distribution<double> acc(0.2, 0.9);
    std::vector<std::vector<std::uint8_t>> rows;
    for (std::size_t j = 0; j < n; ++j) rows.push_back(random_bits(rng, N, acc(rng)));
    return make_matrix(rows, std::move(key));
}

inline std::string csv(const std::vector<std::string>& rows) {
    std::string s = std::string(kTrialCsvHeader) + "\n";
    for (const auto& r : rows) s += r + "\n";
    return s;
}

inline std::vector<TrialRecord> parse(const std::string& text,
                                      std::span<const std::string> vocab = benchmark_classes()) {
    std::istringstream in(text);
    return parse_trials(in, vocab);
}

}  // namespace mvh::test
