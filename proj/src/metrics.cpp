#include "mvh/metrics.hpp"

#include "mvh/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace mvh {

KappaInputs KappaInputs::from_sequences(BinarySeq a, BinarySeq b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorKind::Parameter, "kappa needs two sequences of equal non-zero length");
    }
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i];
        nb += b[i];
        both += a[i] & b[i];
    }
    const auto n = static_cast<double>(a.size());
    KappaInputs in;
    in.p = static_cast<double>(na) / n;
    in.q = static_cast<double>(nb) / n;
    in.r = static_cast<double>(both) / n;
    in.p_obs = 1.0 - (in.p + in.q) + 2.0 * in.r;
    in.p_exp = in.p * in.q + (1.0 - in.p) * (1.0 - in.q);
    return in;
}

std::optional<double> cohens_kappa(BinarySeq a, BinarySeq b) {
    const auto in = KappaInputs::from_sequences(a, b);
    // p_exp == 1 only when both sequences are constant and equal.
    if (in.p_exp >= 1.0) return std::nullopt;
    return (in.p_obs - in.p_exp) / (1.0 - in.p_exp);
}

std::optional<double> kappa_reformulated(double p, double q, double r) {
    const double denom = p + q - 2.0 * p * q;
    if (denom == 0.0) return std::nullopt;
    return 2.0 * (r - p * q) / denom;
}

ConditionConsistency condition_error_consistency(BinarySeq model,
                                                 const ConditionResponseMatrix& humans) {
    if (model.size() != humans.stimulus_count()) {
        throw Error(ErrorKind::Parameter,
                    "model sequence length " + std::to_string(model.size()) +
                        " does not match condition " + humans.key().str() + " with " +
                        std::to_string(humans.stimulus_count()) + " stimuli");
    }
    ConditionConsistency out;
    double sum = 0.0;
    for (std::size_t j = 0; j < humans.observer_count(); ++j) {
        if (const auto k = cohens_kappa(model, humans.row(j))) {
            sum += *k;
            ++out.used_pairs;
        } else {
            ++out.dropped_pairs;
        }
    }
    if (out.used_pairs > 0) out.kappa = sum / static_cast<double>(out.used_pairs);
    return out;
}

double hierarchical_average(const std::map<ConditionKey, double>& values,
                            const DatasetWeights& weights) {
    if (weights.experiment_count() == 0) {
        throw Error(ErrorKind::Aggregation, "nothing to aggregate");
    }
    double total = 0.0;
    for (const auto& [experiment, conditions] : weights.experiments()) {
        double sum = 0.0;
        for (const auto& condition : conditions) {
            const auto it = values.find({experiment, condition});
            if (it == values.end()) {
                throw Error(ErrorKind::Aggregation,
                            "no value for condition " + experiment + "/" + condition);
            }
            sum += it->second;
        }
        total += sum / static_cast<double>(conditions.size());
    }
    return total / static_cast<double>(weights.experiment_count());
}

double flat_average(const std::map<ConditionKey, double>& values, const DatasetWeights& weights) {
    const auto keys = weights.keys();
    if (keys.empty()) throw Error(ErrorKind::Aggregation, "nothing to aggregate");
    double sum = 0.0;
    for (const auto& key : keys) {
        const auto it = values.find(key);
        if (it == values.end()) {
            throw Error(ErrorKind::Aggregation, "no value for condition " + key.str());
        }
        sum += it->second;
    }
    return sum / static_cast<double>(keys.size());
}

double aggregate(const std::map<ConditionKey, double>& values, const DatasetWeights& weights,
                 Aggregation mode) {
    return mode == Aggregation::Hierarchical ? hierarchical_average(values, weights)
                                             : flat_average(values, weights);
}

InterHumanResult inter_human_consistency(const MatrixMap& matrices,
                                         const DatasetWeights& weights) {
    InterHumanResult out;
    std::vector<ConditionKey> defined;
    for (const auto& key : weights.keys()) {
        const auto it = matrices.find(key);
        if (it == matrices.end()) {
            throw Error(ErrorKind::Aggregation, "no matrix for condition " + key.str());
        }
        const auto& m = it->second;
        const std::size_t n = m.observer_count();
        if (n < 2) {
            throw Error(ErrorKind::Undefined, "condition " + key.str() + " has " +
                                                  std::to_string(n) +
                                                  " observer(s); inter-human consistency "
                                                  "needs at least 2");
        }
        double human_sum = 0.0;
        std::size_t humans_defined = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            std::size_t used = 0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l == j) continue;
                if (const auto k = cohens_kappa(m.row(j), m.row(l))) {
                    sum += *k;
                    ++used;
                } else {
                    ++out.dropped_pairs;
                }
            }
            if (used > 0) {
                human_sum += sum / static_cast<double>(used);
                ++humans_defined;
            }
        }
        if (humans_defined > 0) {
            out.per_condition[key] = human_sum / static_cast<double>(humans_defined);
            defined.push_back(key);
        }
    }
    if (!defined.empty()) {
        out.mean = hierarchical_average(out.per_condition, weights.restricted_to(defined));
    }
    return out;
}

std::optional<double> shape_bias(std::span<const TrialRecord> trials) {
    std::size_t shape = 0, texture = 0;
    for (const auto& t : trials) {
        if (!t.shape_class || !t.texture_class) {
            throw Error(ErrorKind::Parameter,
                        "shape bias needs cue-conflict trials; stimulus " + t.stimulus_id +
                            " has no cue labels");
        }
        if (*t.shape_class == *t.texture_class) {
            throw Error(ErrorKind::Parameter,
                        "stimulus " + t.stimulus_id + " has identical shape and texture cues");
        }
        if (t.predicted_class == *t.shape_class) {
            ++shape;
        } else if (t.predicted_class == *t.texture_class) {
            ++texture;
        }
    }
    if (shape + texture == 0) return std::nullopt;
    return static_cast<double>(shape) / static_cast<double>(shape + texture);
}

double ood_accuracy(const std::map<ConditionKey, double>& accuracies,
                    const DatasetWeights& weights, Aggregation mode) {
    return aggregate(accuracies, weights, mode);
}

ModelResponses align_model_trials(const MatrixMap& humans, std::span<const TrialRecord> model) {
    if (model.empty()) throw Error(ErrorKind::Alignment, "model trial set is empty");

    std::map<ConditionKey, std::map<std::string, std::uint8_t>> by_condition;
    std::map<ConditionKey, std::string> observer_of;
    for (const auto& t : model) {
        const ConditionKey key{t.experiment_id, t.condition_id};
        auto [it, inserted] = observer_of.emplace(key, t.observer_id);
        if (!inserted && it->second != t.observer_id) {
            throw Error(ErrorKind::Alignment, "model trials for condition " + key.str() +
                                                  " carry more than one observer id");
        }
        by_condition[key][t.stimulus_id] = t.correct() ? 1 : 0;
    }

    std::ostringstream diffs;
    std::size_t diff_count = 0;
    auto note = [&](const std::string& what) {
        if (diff_count < 20) diffs << "\n  " << what;
        ++diff_count;
    };

    ModelResponses out;
    for (const auto& [key, m] : humans) {
        const auto it = by_condition.find(key);
        if (it == by_condition.end()) {
            note("condition " + key.str() + " missing from model trials");
            continue;
        }
        std::vector<std::uint8_t> seq;
        seq.reserve(m.stimulus_count());
        for (const auto& s : m.stimuli()) {
            const auto hit = it->second.find(s);
            if (hit == it->second.end()) {
                note("condition " + key.str() + ": model lacks stimulus " + s);
                seq.push_back(0);
            } else {
                seq.push_back(hit->second);
            }
        }
        for (const auto& [s, _] : it->second) {
            if (!std::binary_search(m.stimuli().begin(), m.stimuli().end(), s)) {
                note("condition " + key.str() + ": model has extra stimulus " + s);
            }
        }
        out.emplace(key, std::move(seq));
    }
    for (const auto& [key, _] : by_condition) {
        if (!humans.count(key)) note("model condition " + key.str() + " has no human data");
    }
    if (diff_count > 0) {
        throw Error(ErrorKind::Alignment, std::to_string(diff_count) +
                                              " difference(s) between model and human trials:" +
                                              diffs.str());
    }
    return out;
}

AlignmentReport evaluate_alignment(const MatrixMap& humans, const ModelResponses& model,
                                   const DatasetWeights& weights,
                                   std::span<const TrialRecord> cue_conflict_trials,
                                   Aggregation accuracy_mode) {
    AlignmentReport report;
    std::map<ConditionKey, double> kappas;
    std::map<ConditionKey, double> accuracies;
    std::vector<ConditionKey> defined;

    for (const auto& key : weights.keys()) {
        const auto h = humans.find(key);
        const auto m = model.find(key);
        if (h == humans.end() || m == model.end()) {
            throw Error(ErrorKind::Aggregation, "condition " + key.str() + " lacks responses");
        }
        const auto cc = condition_error_consistency(m->second, h->second);
        ConditionReport entry;
        entry.kappa = cc.kappa;
        entry.dropped_pairs = cc.dropped_pairs;
        const auto& seq = m->second;
        entry.accuracy = seq.empty() ? 0.0
                                     : static_cast<double>(std::count(seq.begin(), seq.end(), 1)) /
                                           static_cast<double>(seq.size());
        accuracies[key] = entry.accuracy;
        if (cc.kappa) {
            kappas[key] = *cc.kappa;
            defined.push_back(key);
        }
        report.per_condition.emplace(key, entry);
    }

    if (!defined.empty()) {
        report.error_consistency = hierarchical_average(kappas, weights.restricted_to(defined));
    }
    report.ood_accuracy = ood_accuracy(accuracies, weights, accuracy_mode);
    if (!cue_conflict_trials.empty()) report.shape_bias = shape_bias(cue_conflict_trials);
    return report;
}

nlohmann::json to_json(const AlignmentReport& report) {
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["error_consistency"] = opt(report.error_consistency);
    j["shape_bias"] = opt(report.shape_bias);
    j["ood_accuracy"] = report.ood_accuracy;
    auto& per = j["per_condition"] = nlohmann::json::object();
    for (const auto& [key, entry] : report.per_condition) {
        per[key.str()] = {{"kappa", opt(entry.kappa)},
                          {"accuracy", entry.accuracy},
                          {"dropped_pairs", entry.dropped_pairs}};
    }
    return j;
}

}  // namespace mvh
