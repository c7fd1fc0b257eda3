#pragma once

#include "mvh/trials.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvh {

using BinarySeq = std::span<const std::uint8_t>;

/// Proportions entering Cohen's kappa for two binary correctness sequences.
struct KappaInputs {
    double p = 0.0;      // accuracy of the first classifier
    double q = 0.0;      // accuracy of the second classifier
    double r = 0.0;      // fraction of trials both got right
    double p_obs = 0.0;  // 1 - p - q + 2r
    double p_exp = 0.0;  // pq + (1-p)(1-q)

    static KappaInputs from_sequences(BinarySeq a, BinarySeq b);
};

/// Cohen's kappa (p_obs - p_exp) / (1 - p_exp). Empty when p_exp == 1.
std::optional<double> cohens_kappa(BinarySeq a, BinarySeq b);

/// Same quantity as 2(r - pq) / (p + q - 2pq). Empty when the denominator is 0.
std::optional<double> kappa_reformulated(double p, double q, double r);

struct ConditionConsistency {
    std::optional<double> kappa;  // mean over defined pairs
    std::size_t used_pairs = 0;
    std::size_t dropped_pairs = 0;
};

/// Mean kappa of a model row against every human row of the matrix.
ConditionConsistency condition_error_consistency(BinarySeq model,
                                                 const ConditionResponseMatrix& humans);

enum class Aggregation { Hierarchical, Flat };

/// Mean within each experiment, then across experiments. Throws Aggregation
/// if a weighted condition has no value.
double hierarchical_average(const std::map<ConditionKey, double>& values,
                            const DatasetWeights& weights);
/// Plain mean over the weighted conditions.
double flat_average(const std::map<ConditionKey, double>& values, const DatasetWeights& weights);
double aggregate(const std::map<ConditionKey, double>& values, const DatasetWeights& weights,
                 Aggregation mode);

struct InterHumanResult {
    std::optional<double> mean;
    std::map<ConditionKey, double> per_condition;
    std::size_t dropped_pairs = 0;
};

/// Each human against the remaining n-1, averaged per condition, then
/// hierarchically. Throws Undefined if any condition has fewer than 2 humans.
InterHumanResult inter_human_consistency(const MatrixMap& matrices, const DatasetWeights& weights);

/// Fraction of shape decisions among trials decided by either cue.
/// Empty when no trial matches either cue.
std::optional<double> shape_bias(std::span<const TrialRecord> trials);

double ood_accuracy(const std::map<ConditionKey, double>& accuracies,
                    const DatasetWeights& weights, Aggregation mode = Aggregation::Hierarchical);

using ModelResponses = std::map<ConditionKey, std::vector<std::uint8_t>>;

/// Correctness vectors of a single-observer model, ordered like the human
/// matrices. Throws Alignment listing condition and stimulus differences.
ModelResponses align_model_trials(const MatrixMap& humans, std::span<const TrialRecord> model);

struct ConditionReport {
    std::optional<double> kappa;
    double accuracy = 0.0;
    std::size_t dropped_pairs = 0;
};

struct AlignmentReport {
    std::optional<double> error_consistency;
    std::optional<double> shape_bias;
    double ood_accuracy = 0.0;
    std::map<ConditionKey, ConditionReport> per_condition;
};

/// Conditions with undefined kappa are left out of the EC average.
AlignmentReport evaluate_alignment(const MatrixMap& humans, const ModelResponses& model,
                                   const DatasetWeights& weights,
                                   std::span<const TrialRecord> cue_conflict_trials = {},
                                   Aggregation accuracy_mode = Aggregation::Hierarchical);

nlohmann::json to_json(const AlignmentReport& report);

}  // namespace mvh
