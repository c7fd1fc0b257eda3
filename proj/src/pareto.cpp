#include "mvh/pareto.hpp"

#include "mvh/error.hpp"
#include "mvh/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace mvh {

namespace {

constexpr double kDegenerateDenominator = 1e-12;

// Indices of the maximal points, ordered by ascending accuracy.
std::vector<std::size_t> prune_indices(const std::vector<FrontierPoint>& points, double tol) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].accuracy != points[b].accuracy) return points[a].accuracy > points[b].accuracy;
        if (points[a].kappa != points[b].kappa) return points[a].kappa > points[b].kappa;
        return a < b;
    });

    std::vector<std::size_t> kept;
    double best_kappa = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < order.size()) {
        // Points within tol of the cluster's top accuracy count as one accuracy level.
        const double top = points[order[i]].accuracy;
        std::size_t rep = order[i];
        std::size_t j = i + 1;
        while (j < order.size() && top - points[order[j]].accuracy <= tol) {
            if (points[order[j]].kappa > points[rep].kappa) rep = order[j];
            ++j;
        }
        if (points[rep].kappa > best_kappa + tol) {
            kept.push_back(rep);
            best_kappa = points[rep].kappa;
        }
        i = j;
    }
    std::reverse(kept.begin(), kept.end());
    return kept;
}

}  // namespace

LinearWeights linear_weights(const ConditionResponseMatrix& humans, std::size_t k) {
    const std::size_t n_stim = humans.stimulus_count();
    if (k > n_stim) {
        throw Error(ErrorKind::Parameter, "k = " + std::to_string(k) + " exceeds N = " +
                                              std::to_string(n_stim));
    }
    LinearWeights out;
    out.w.assign(n_stim, 0.0);
    if (n_stim == 0) return out;
    const double p = static_cast<double>(k) / static_cast<double>(n_stim);
    for (std::size_t j = 0; j < humans.observer_count(); ++j) {
        const double q = humans.observer_accuracy(j);
        const double d = q + (1.0 - 2.0 * q) * p;
        if (std::abs(d) < kDegenerateDenominator) {
            ++out.skipped_humans;
            continue;
        }
        const auto row = humans.row(j);
        for (std::size_t i = 0; i < n_stim; ++i) {
            out.w[i] += (static_cast<double>(row[i]) - q) / d;
        }
    }
    return out;
}

ConditionOptimum optimal_for_k(const ConditionResponseMatrix& humans, std::size_t k,
                               DegenerateMode mode) {
    const auto weights = linear_weights(humans, k);
    const std::size_t n_stim = humans.stimulus_count();

    std::vector<std::size_t> order(n_stim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (weights.w[a] != weights.w[b]) return weights.w[a] > weights.w[b];
        return a < b;
    });

    ConditionOptimum opt;
    opt.k = k;
    opt.s.assign(n_stim, 0);
    for (std::size_t i = 0; i < k; ++i) opt.s[order[i]] = 1;
    opt.accuracy = n_stim ? static_cast<double>(k) / static_cast<double>(n_stim) : 0.0;

    if (n_stim == 0) return opt;
    const auto cc = condition_error_consistency(opt.s, humans);
    opt.dropped_pairs = cc.dropped_pairs;
    if (mode == DegenerateMode::Drop) {
        opt.kappa_mean = cc.kappa;
    } else if (humans.observer_count() > 0) {
        opt.kappa_mean = cc.kappa.value_or(0.0) * static_cast<double>(cc.used_pairs) /
                         static_cast<double>(humans.observer_count());
    }
    return opt;
}

std::vector<ConditionOptimum> condition_sweep(const ConditionResponseMatrix& humans,
                                              DegenerateMode mode) {
    std::vector<ConditionOptimum> sweep;
    sweep.reserve(humans.stimulus_count() + 1);
    for (std::size_t k = 0; k <= humans.stimulus_count(); ++k) {
        sweep.push_back(optimal_for_k(humans, k, mode));
    }
    return sweep;
}

const ConditionOptimum* best_of_sweep(const std::vector<ConditionOptimum>& sweep) {
    const ConditionOptimum* best = nullptr;
    for (const auto& opt : sweep) {
        if (opt.kappa_mean && (!best || *opt.kappa_mean > *best->kappa_mean)) best = &opt;
    }
    return best;
}

std::vector<FrontierPoint> prune_dominated(std::vector<FrontierPoint> points, double tol) {
    const auto kept = prune_indices(points, tol);
    std::vector<FrontierPoint> out;
    out.reserve(kept.size());
    for (auto i : kept) out.push_back(points[i]);
    return out;
}

const FrontierPoint& ParetoFrontier::max_kappa_point() const {
    if (points.empty()) throw Error(ErrorKind::Undefined, "empty frontier");
    return points.front();
}

ParetoFrontier frontier_expand(const std::vector<std::vector<FrontierPoint>>& condition_sets,
                               const FrontierOptions& options) {
    std::vector<FrontierPoint> current{{0.0, 0.0}};
    // Per fold step and surviving point: (index in previous set, index in condition set).
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> trail;
    if (options.certificates) trail.reserve(condition_sets.size());

    for (std::size_t c = 0; c < condition_sets.size(); ++c) {
        const auto& raw = condition_sets[c];
        if (raw.empty()) {
            throw Error(ErrorKind::Parameter,
                        "condition set " + std::to_string(c) + " has no points");
        }
        const auto own = prune_indices(raw, options.tol);

        const std::size_t candidates = current.size() * own.size();
        if (own.size() != 0 && candidates / own.size() != current.size()) {
            throw Error(ErrorKind::Capacity, "frontier candidate count overflows");
        }
        if (candidates > options.max_points) {
            throw Error(ErrorKind::Capacity,
                        "fold step " + std::to_string(c) + " needs " + std::to_string(candidates) +
                            " candidate points, cap is " + std::to_string(options.max_points));
        }

        std::vector<FrontierPoint> sum;
        std::vector<std::pair<std::size_t, std::size_t>> tags;
        sum.reserve(candidates);
        if (options.certificates) tags.reserve(candidates);
        for (std::size_t a = 0; a < current.size(); ++a) {
            for (auto b : own) {
                sum.push_back({current[a].kappa + raw[b].kappa,
                               current[a].accuracy + raw[b].accuracy});
                if (options.certificates) tags.emplace_back(a, b);
            }
        }

        const auto kept = prune_indices(sum, options.tol);
        std::vector<FrontierPoint> next;
        next.reserve(kept.size());
        std::vector<std::pair<std::size_t, std::size_t>> step;
        if (options.certificates) step.reserve(kept.size());
        for (auto i : kept) {
            next.push_back(sum[i]);
            if (options.certificates) step.push_back(tags[i]);
        }
        current = std::move(next);
        if (options.certificates) trail.push_back(std::move(step));
    }

    ParetoFrontier out;
    out.points = current;
    if (options.certificates) {
        out.choices.assign(current.size(), std::vector<std::size_t>(condition_sets.size()));
        for (std::size_t p = 0; p < current.size(); ++p) {
            std::size_t idx = p;
            for (std::size_t c = condition_sets.size(); c-- > 0;) {
                const auto [prev, choice] = trail[c][idx];
                out.choices[p][c] = choice;
                idx = prev;
            }
        }
    }
    return out;
}

std::vector<FrontierPoint> sweep_points(const std::vector<ConditionOptimum>& sweep) {
    std::vector<FrontierPoint> points;
    points.reserve(sweep.size());
    for (const auto& opt : sweep) points.push_back({opt.kappa_mean.value_or(0.0), opt.accuracy});
    return points;
}

DatasetFrontier compute_frontier(const MatrixMap& humans, const DatasetWeights& weights,
                                 const FrontierOptions& options, unsigned threads) {
    const auto keys = weights.keys();
    DatasetFrontier out;
    out.conditions.resize(keys.size());

    parallel_for(keys.size(), threads, [&](std::size_t c) {
        const auto it = humans.find(keys[c]);
        if (it == humans.end()) {
            throw Error(ErrorKind::Aggregation, "no human matrix for " + keys[c].str());
        }
        auto& cf = out.conditions[c];
        cf.key = keys[c];
        cf.weight = weights.global_weight(keys[c]);
        cf.sweep = condition_sweep(it->second, options.mode);
        const auto all = sweep_points(cf.sweep);
        for (auto i : prune_indices(all, options.tol)) {
            cf.points.push_back(all[i]);
            cf.point_k.push_back(cf.sweep[i].k);
        }
    });

    std::vector<std::vector<FrontierPoint>> scaled;
    scaled.reserve(out.conditions.size());
    for (const auto& cf : out.conditions) {
        auto pts = cf.points;
        for (auto& p : pts) {
            p.kappa *= cf.weight;
            p.accuracy *= cf.weight;
        }
        scaled.push_back(std::move(pts));
    }
    out.frontier = frontier_expand(scaled, options);
    return out;
}

void write_frontier_csv(std::ostream& out, const ParetoFrontier& frontier) {
    const auto old_precision = out.precision(17);
    out << "accuracy,kappa\n";
    for (const auto& p : frontier.points) out << p.accuracy << ',' << p.kappa << '\n';
    out.precision(old_precision);
}

}  // namespace mvh
