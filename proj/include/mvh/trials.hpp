#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvh {

/// One observer response to one stimulus within a condition of an experiment.
struct TrialRecord {
    std::string experiment_id;
    std::string condition_id;
    std::string observer_id;
    std::string stimulus_id;
    std::string predicted_class;  // "na" marks a missing response
    std::string true_class;
    std::optional<std::string> shape_class;
    std::optional<std::string> texture_class;

    bool correct() const { return predicted_class == true_class; }
    bool is_cue_conflict() const { return shape_class.has_value(); }
};

inline constexpr const char* kNoResponse = "na";
inline constexpr const char* kTrialCsvHeader =
    "experiment_id,condition_id,observer_id,stimulus_id,predicted_class,true_class,shape_class,"
    "texture_class";

/// The 16 coarse classes of the benchmark.
const std::vector<std::string>& benchmark_classes();

/// Identifies a condition; condition ids are only unique within an experiment.
struct ConditionKey {
    std::string experiment;
    std::string condition;

    auto operator<=>(const ConditionKey&) const = default;
    std::string str() const { return experiment + "/" + condition; }
};

/// Binary correctness matrix T (observers x stimuli) for one condition.
class ConditionResponseMatrix {
public:
    ConditionResponseMatrix() = default;
    ConditionResponseMatrix(ConditionKey key, std::vector<std::string> observers,
                            std::vector<std::string> stimuli, std::vector<std::uint8_t> cells);

    const ConditionKey& key() const { return key_; }
    const std::vector<std::string>& observers() const { return observers_; }
    const std::vector<std::string>& stimuli() const { return stimuli_; }

    std::size_t observer_count() const { return observers_.size(); }
    std::size_t stimulus_count() const { return stimuli_.size(); }

    std::span<const std::uint8_t> row(std::size_t observer) const {
        return {cells_.data() + observer * stimuli_.size(), stimuli_.size()};
    }
    std::uint8_t at(std::size_t observer, std::size_t stimulus) const {
        return cells_[observer * stimuli_.size() + stimulus];
    }
    const std::vector<std::uint8_t>& cells() const { return cells_; }

    /// Accuracy of one observer (q_j).
    double observer_accuracy(std::size_t observer) const;
    /// Mean accuracy over all cells.
    double mean_accuracy() const;

    bool operator==(const ConditionResponseMatrix&) const = default;

private:
    ConditionKey key_;
    std::vector<std::string> observers_;
    std::vector<std::string> stimuli_;
    std::vector<std::uint8_t> cells_;
};

using MatrixMap = std::map<ConditionKey, ConditionResponseMatrix>;

/// Conditions per experiment; each condition weighs 1/C within its experiment.
class DatasetWeights {
public:
    DatasetWeights() = default;
    explicit DatasetWeights(std::map<std::string, std::vector<std::string>> conditions);

    static DatasetWeights from_keys(std::span<const ConditionKey> keys);
    static DatasetWeights from_matrices(const MatrixMap& matrices);

    const std::map<std::string, std::vector<std::string>>& experiments() const {
        return conditions_;
    }
    std::size_t experiment_count() const { return conditions_.size(); }
    std::size_t condition_count() const;
    bool contains(const ConditionKey& key) const;

    /// 1/C for the condition's experiment; 0 if the condition is unknown.
    double weight(const ConditionKey& key) const;
    /// Weight of the condition in the overall hierarchical mean: 1/(C * E).
    double global_weight(const ConditionKey& key) const;

    std::vector<ConditionKey> keys() const;
    DatasetWeights restricted_to(std::span<const ConditionKey> keys) const;

private:
    std::map<std::string, std::vector<std::string>> conditions_;
};

/// Reads a trial CSV. An empty vocabulary accepts any class label.
std::vector<TrialRecord> load_trials(const std::filesystem::path& path,
                                     std::span<const std::string> vocabulary);
std::vector<TrialRecord> parse_trials(std::istream& in, std::span<const std::string> vocabulary,
                                      const std::string& source = "<stream>");
void write_trials(std::ostream& out, std::span<const TrialRecord> trials);

/// One matrix per condition; observers and stimuli sorted lexicographically.
MatrixMap build_matrices(std::span<const TrialRecord> trials);

/// Inverse of build_matrices for data without cue labels. Predicted class is
/// the true class for correct cells and "na" otherwise.
std::vector<TrialRecord> matrices_to_trials(const MatrixMap& matrices,
                                            const std::string& true_class = "c");

struct ExclusionPolicy {
    /// Entries are either "experiment/condition" or a bare condition id that
    /// matches in every experiment.
    std::vector<std::string> conditions;
    /// Conditions whose mean human accuracy is strictly below this are removed.
    std::optional<double> min_human_accuracy;
};

struct ExclusionResult {
    MatrixMap matrices;
    DatasetWeights weights;
    std::vector<ConditionKey> excluded;
    std::vector<std::string> warnings;
};

ExclusionResult exclude_conditions(const MatrixMap& matrices, const ExclusionPolicy& policy);

}  // namespace mvh
