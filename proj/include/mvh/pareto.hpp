#pragma once

#include "mvh/metrics.hpp"
#include "mvh/trials.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mvh {

/// How a human with p_exp == 1 against the candidate response enters the mean.
enum class DegenerateMode {
    Drop,        // excluded from the mean (matches condition_error_consistency)
    ImputeZero,  // counted with kappa 0
};

struct LinearWeights {
    std::vector<double> w;         // one weight per stimulus
    std::size_t skipped_humans = 0;  // humans with |D_j(p)| < 1e-12
};

/// Weights of the linear objective at fixed accuracy p = k/N:
/// w_i = sum_j (T[j][i] - q_j) / D_j(p), D_j(p) = q_j + (1 - 2 q_j) p.
LinearWeights linear_weights(const ConditionResponseMatrix& humans, std::size_t k);

struct ConditionOptimum {
    std::size_t k = 0;
    std::vector<std::uint8_t> s;       // certificate with exactly k ones
    std::optional<double> kappa_mean;  // empty when every human is degenerate
    double accuracy = 0.0;
    std::size_t dropped_pairs = 0;
};

/// Best response vector with exactly k correct answers (top-k of the linear
/// weights, ties to the lowest stimulus index).
ConditionOptimum optimal_for_k(const ConditionResponseMatrix& humans, std::size_t k,
                               DegenerateMode mode = DegenerateMode::Drop);

/// optimal_for_k for every k in [0, N].
std::vector<ConditionOptimum> condition_sweep(const ConditionResponseMatrix& humans,
                                              DegenerateMode mode = DegenerateMode::Drop);

/// Highest defined kappa of a sweep (first one on ties); nullptr if none.
const ConditionOptimum* best_of_sweep(const std::vector<ConditionOptimum>& sweep);

struct FrontierPoint {
    double kappa = 0.0;
    double accuracy = 0.0;
};

inline constexpr double kFrontierTolerance = 1e-12;

/// Maximal elements under (kappa, accuracy) dominance, sorted by ascending
/// accuracy. Points closer than tol on both axes are merged.
std::vector<FrontierPoint> prune_dominated(std::vector<FrontierPoint> points,
                                           double tol = kFrontierTolerance);

struct FrontierOptions {
    std::size_t max_points = 10'000'000;  // candidates per fold step, before pruning
    DegenerateMode mode = DegenerateMode::Drop;
    bool certificates = false;
    double tol = kFrontierTolerance;
};

struct ParetoFrontier {
    std::vector<FrontierPoint> points;
    /// choices[p][c]: index into condition c's (pruned) point list used by
    /// frontier point p. Empty unless certificates were requested.
    std::vector<std::vector<std::size_t>> choices;

    /// Point with the highest kappa (the first point, ascending accuracy).
    const FrontierPoint& max_kappa_point() const;
};

/// Folds per-condition point sets (already scaled by their weights) into the
/// exact frontier of their Minkowski sum, starting from {(0,0)}.
ParetoFrontier frontier_expand(const std::vector<std::vector<FrontierPoint>>& condition_sets,
                               const FrontierOptions& options = {});

/// Per-condition sweep results feeding a dataset frontier.
struct ConditionFrontier {
    ConditionKey key;
    double weight = 0.0;                      // 1 / (C * E)
    std::vector<ConditionOptimum> sweep;      // all k
    std::vector<FrontierPoint> points;        // pruned, unscaled
    std::vector<std::size_t> point_k;         // k of each pruned point
};

struct DatasetFrontier {
    ParetoFrontier frontier;
    std::vector<ConditionFrontier> conditions;
};

/// Points of one sweep. Undefined condition kappas enter as 0.
std::vector<FrontierPoint> sweep_points(const std::vector<ConditionOptimum>& sweep);

/// Sweep every weighted condition and expand the hierarchical frontier.
DatasetFrontier compute_frontier(const MatrixMap& humans, const DatasetWeights& weights,
                                 const FrontierOptions& options = {}, unsigned threads = 1);

void write_frontier_csv(std::ostream& out, const ParetoFrontier& frontier);

}  // namespace mvh
