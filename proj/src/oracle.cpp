#include "mvh/oracle.hpp"

#include "mvh/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mvh::oracle {

std::optional<double> kappa_from_counts(std::span<const std::uint8_t> x,
                                        std::span<const std::uint8_t> y) {
    if (x.size() != y.size() || x.empty()) {
        throw Error(ErrorKind::Parameter, "kappa needs equal non-empty sequences");
    }
    long long a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) ++a;
        else if (x[i]) ++b;
        else if (y[i]) ++c;
        else ++d;
    }
    const long long den = (a + b) * (b + d) + (a + c) * (c + d);
    if (den == 0) return std::nullopt;
    return 2.0 * static_cast<double>(a * d - b * c) / static_cast<double>(den);
}

std::optional<double> mean_kappa(std::span<const std::uint8_t> s,
                                 const ConditionResponseMatrix& humans) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < humans.observer_count(); ++j) {
        if (auto k = kappa_from_counts(s, humans.row(j))) {
            sum += *k;
            ++used;
        }
    }
    if (!used) return std::nullopt;
    return sum / static_cast<double>(used);
}

namespace {

void check_budget(std::uint64_t vectors, const OracleBudget& budget) {
    if (vectors > budget.max_vectors) {
        throw Error(ErrorKind::Capacity, "oracle enumeration of " + std::to_string(vectors) +
                                             " vectors exceeds budget " +
                                             std::to_string(budget.max_vectors));
    }
}

std::vector<std::uint8_t> bits(std::uint64_t mask, std::size_t n) {
    std::vector<std::uint8_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1u;
    return s;
}

}  // namespace

ConditionOptimumOracle brute_force_condition_optimum(const ConditionResponseMatrix& humans,
                                                     const OracleBudget& budget) {
    const std::size_t n = humans.stimulus_count();
    if (n >= 63) throw Error(ErrorKind::Capacity, "too many stimuli for enumeration");
    const std::uint64_t total = std::uint64_t{1} << n;
    check_budget(total, budget);

    ConditionOptimumOracle out;
    out.per_k.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.per_k[k].k = k;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        const auto s = bits(mask, n);
        const auto k = static_cast<std::size_t>(std::count(s.begin(), s.end(), 1));
        const auto kappa = mean_kappa(s, humans);
        auto& slot = out.per_k[k];
        if (slot.s.empty() || (kappa && (!slot.kappa || *kappa > *slot.kappa))) {
            slot.kappa = kappa;
            slot.s = s;
        }
        if (kappa && (!out.best_kappa || *kappa > *out.best_kappa)) {
            out.best_kappa = kappa;
            out.best_s = s;
        }
    }
    return out;
}

std::vector<FrontierPoint> quadratic_prune(std::span<const FrontierPoint> points, double tol) {
    std::vector<FrontierPoint> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        bool drop = false;
        for (std::size_t j = 0; j < points.size() && !drop; ++j) {
            if (i == j) continue;
            const auto& q = points[j];
            const bool geq = q.kappa >= p.kappa - tol && q.accuracy >= p.accuracy - tol;
            const bool strictly = q.kappa > p.kappa + tol || q.accuracy > p.accuracy + tol;
            // Near-duplicates: keep the first.
            drop = geq && (strictly || j < i);
        }
        if (!drop) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(),
              [](const FrontierPoint& a, const FrontierPoint& b) { return a.accuracy < b.accuracy; });
    return kept;
}

std::vector<FrontierPoint> brute_force_frontier(const MatrixMap& humans,
                                                const DatasetWeights& weights,
                                                const OracleBudget& budget, double tol) {
    std::vector<const ConditionResponseMatrix*> conds;
    std::vector<std::size_t> experiment_of;
    std::vector<std::size_t> per_experiment;
    for (const auto& [experiment, conditions] : weights.experiments()) {
        per_experiment.push_back(conditions.size());
        for (const auto& c : conditions) {
            const auto it = humans.find({experiment, c});
            if (it == humans.end()) throw Error(ErrorKind::Aggregation, "missing condition " + c);
            conds.push_back(&it->second);
            experiment_of.push_back(per_experiment.size() - 1);
        }
    }
    if (conds.empty()) return {{0.0, 0.0}};

    std::size_t total_bits = 0;
    for (auto* m : conds) total_bits += m->stimulus_count();
    if (total_bits >= 63) throw Error(ErrorKind::Capacity, "too many stimuli for enumeration");
    const std::uint64_t total = std::uint64_t{1} << total_bits;
    check_budget(total, budget);

    // Best kappa for each combination of per-condition correct counts.
    std::map<std::vector<std::size_t>, FrontierPoint> best;
    const double n_exp = static_cast<double>(per_experiment.size());
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::size_t offset = 0;
        std::vector<std::size_t> counts(conds.size());
        std::vector<double> exp_kappa(per_experiment.size(), 0.0), exp_acc(per_experiment.size(), 0.0);
        for (std::size_t c = 0; c < conds.size(); ++c) {
            const std::size_t n = conds[c]->stimulus_count();
            const auto s = bits(mask >> offset, n);
            offset += n;
            counts[c] = static_cast<std::size_t>(std::count(s.begin(), s.end(), 1));
            exp_kappa[experiment_of[c]] += mean_kappa(s, *conds[c]).value_or(0.0);
            exp_acc[experiment_of[c]] += static_cast<double>(counts[c]) / static_cast<double>(n);
        }
        FrontierPoint p;
        for (std::size_t e = 0; e < per_experiment.size(); ++e) {
            p.kappa += exp_kappa[e] / static_cast<double>(per_experiment[e]);
            p.accuracy += exp_acc[e] / static_cast<double>(per_experiment[e]);
        }
        p.kappa /= n_exp;
        p.accuracy /= n_exp;
        auto [it, inserted] = best.emplace(counts, p);
        if (!inserted && p.kappa > it->second.kappa) it->second = p;
    }
    if (best.size() > budget.max_points) {
        throw Error(ErrorKind::Capacity, "oracle candidate set exceeds max_points");
    }
    std::vector<FrontierPoint> candidates;
    candidates.reserve(best.size());
    for (const auto& [_, p] : best) candidates.push_back(p);
    return quadratic_prune(candidates, tol);
}

std::vector<double> finite_difference(const ScalarFn& fn, std::span<const double> x, double step,
                                      std::span<const std::size_t> coords) {
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size(), 0.0);
    auto one = [&](std::size_t i) {
        const double orig = probe[i];
        probe[i] = orig + step;
        const double up = fn(probe);
        probe[i] = orig - step;
        const double down = fn(probe);
        probe[i] = orig;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw Error(ErrorKind::Numeric,
                        "non-finite function value probing coordinate " + std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * step);
    };
    if (coords.empty()) {
        for (std::size_t i = 0; i < x.size(); ++i) one(i);
    } else {
        for (auto i : coords) one(i);
    }
    return grad;
}

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) {
        sum += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    }
    return sum * h / 3.0;
}

}  // namespace mvh::oracle
