#pragma once

#include "mvh/pareto.hpp"
#include "mvh/trials.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mvh::oracle {

struct OracleBudget {
    std::uint64_t max_vectors = std::uint64_t{1} << 20;
    std::size_t max_points = 1'000'000;
};

/// Kappa from the 2x2 contingency counts, 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
std::optional<double> kappa_from_counts(std::span<const std::uint8_t> x,
                                        std::span<const std::uint8_t> y);

/// Mean over humans with defined kappa; empty if none.
std::optional<double> mean_kappa(std::span<const std::uint8_t> s,
                                 const ConditionResponseMatrix& humans);

struct CardinalityBest {
    std::size_t k = 0;
    std::optional<double> kappa;
    std::vector<std::uint8_t> s;
};

struct ConditionOptimumOracle {
    std::optional<double> best_kappa;
    std::vector<std::uint8_t> best_s;
    std::vector<CardinalityBest> per_k;  // index k
};

/// Enumerates all 2^N vectors. Refuses (Capacity) beyond the budget.
ConditionOptimumOracle brute_force_condition_optimum(const ConditionResponseMatrix& humans,
                                                     const OracleBudget& budget = {});

/// Enumerates joint response vectors across the weighted conditions and
/// returns the non-dominated (kappa, accuracy) points by pairwise comparison.
/// Undefined condition kappas count as 0. Sorted by ascending accuracy.
std::vector<FrontierPoint> brute_force_frontier(const MatrixMap& humans,
                                                const DatasetWeights& weights,
                                                const OracleBudget& budget = {},
                                                double tol = kFrontierTolerance);

/// Pairwise-scan dominance filter, sorted by ascending accuracy.
std::vector<FrontierPoint> quadratic_prune(std::span<const FrontierPoint> points,
                                           double tol = kFrontierTolerance);

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences; only `coords` if given, else every coordinate.
std::vector<double> finite_difference(const ScalarFn& fn, std::span<const double> x,
                                      double step, std::span<const std::size_t> coords = {});

/// Composite Simpson rule with n (rounded up to even) intervals.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n);

}  // namespace mvh::oracle
