#pragma once

#include "mvh/error.hpp"
#include "mvh/imagefilter.hpp"
#include "mvh/metrics.hpp"
#include "mvh/scorer.hpp"
#include "mvh/trials.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvh {

struct LearnConfig {
    double l1_weight = 5e-5;
    double smooth_gamma = 6.0;  // blur applied to the quadrant, in quadrant cells
    double init_noise_variance = 1e-5;
    double initial_tau = 14.0;
    bool learn_tau = true;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    double divergence_limit = 1e6;
    std::size_t snapshot_every = 0;  // 0: no snapshots
    unsigned threads = 1;

    void validate() const;
};

/// One image with its true class and its place in the human data.
struct LearnItem {
    Image image;
    std::size_t true_class = 0;
    ConditionKey condition;
    std::size_t stimulus_index = 0;  // column in the condition's human matrix
    std::uint8_t ideal = 1;          // desired correctness
};

struct LearnDataset {
    std::vector<LearnItem> items;
    MatrixMap humans;
    DatasetWeights weights;
};

/// Per-condition ideal vector: the sweep entry with the highest kappa.
std::map<ConditionKey, std::vector<std::uint8_t>> ideal_responses(const MatrixMap& humans);

/// Builds a dataset from trials and images keyed by stimulus id. Human
/// trials supply the matrices; each stimulus's true class indexes the
/// scorer vocabulary. Ideal bits come from ideal_responses.
LearnDataset make_learn_dataset(std::span<const TrialRecord> human_trials,
                                const std::map<std::string, Image>& images,
                                const std::vector<std::string>& classes);

/// Target per item: true class if ideal, else the highest-scoring wrong class.
std::vector<std::size_t> build_targets(std::span<const std::uint8_t> ideal,
                                       std::span<const std::vector<double>> scores,
                                       std::span<const std::size_t> true_class);

/// Learnable state: raw quadrant theta and log(tau).
struct FilterParams {
    SpectralFilter theta;
    double log_tau = 0.0;
};

FilterParams initial_params(std::size_t rows, std::size_t cols, const LearnConfig& config);

/// The filter actually applied: theta blurred by gamma.
SpectralFilter effective_filter(const SpectralFilter& theta, double gamma);

/// Image after the training forward pass (no clamping).
Image filtered_image(const Image& img, const AmplitudeMap& map);

struct LossTerms {
    double data = 0.0;  // mean cross-entropy
    double l1 = 0.0;    // lambda * |theta|_1
    double total() const { return data + l1; }
};

struct LossGradient {
    LossTerms loss;
    std::vector<double> d_theta;  // quadrant-shaped
    double d_log_tau = 0.0;
    std::vector<std::vector<double>> scores;  // per item, before dividing by tau
};

/// Mean cross-entropy over items against fixed targets, plus the L1 term.
LossTerms forward_loss(std::span<const LearnItem> items, std::span<const std::size_t> targets,
                       const FilterParams& params, const LearnConfig& config, const Scorer& scorer);

/// Loss and exact gradient. Targets are computed from the current scores
/// when `targets` is empty.
LossGradient loss_and_gradient(std::span<const LearnItem> items,
                               std::span<const std::size_t> targets, const FilterParams& params,
                               const LearnConfig& config, const Scorer& scorer);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double data_loss = 0.0;
    std::optional<double> error_consistency;
    double accuracy = 0.0;
    double tau = 0.0;
    double max_asymmetry = 0.0;  // largest |F(u,v) - F(-u,-v)| of the expanded filter
};

struct FilterSnapshot {
    std::size_t epoch = 0;
    SpectralFilter filter;
};

struct TrainResult {
    SpectralFilter filter;  // effective filter of the best epoch
    FilterParams params;    // raw parameters of the best epoch
    std::size_t best_epoch = 0;
    std::optional<double> best_error_consistency;
    std::vector<EpochRecord> trace;
    std::vector<FilterSnapshot> snapshots;
};

nlohmann::json to_json(const std::vector<EpochRecord>& trace);

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& message, std::vector<EpochRecord> trace)
        : Error(ErrorKind::Numeric, message), trace_(std::move(trace)) {}
    const std::vector<EpochRecord>& trace() const { return trace_; }

private:
    std::vector<EpochRecord> trace_;
};

/// Full-batch Adam. Epoch e evaluates the parameters after e steps; the
/// returned filter is the one with the best training-set error consistency.
TrainResult train_filter(const LearnDataset& data, const LearnConfig& config,
                         const Scorer& scorer);

/// Filtering, argmax classification, then the alignment metrics. Unclamped
/// by default, like the training forward pass.
AlignmentReport evaluate_filter(const SpectralFilter& filter, const LearnDataset& data,
                                const Scorer& scorer, FilterOptions options = {.clamp = false});
/// Same without any filter.
AlignmentReport evaluate_unfiltered(const LearnDataset& data, const Scorer& scorer);

/// Share of sum |q| held by quadrant cells with hypot(row, col) < radius.
double amplitude_mass_below(const SpectralFilter& filter, double radius);

}  // namespace mvh
