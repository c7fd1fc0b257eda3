#include "mvh/trials.hpp"

#include "mvh/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace mvh {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

bool in_vocabulary(std::span<const std::string> vocabulary, const std::string& label) {
    if (vocabulary.empty()) return true;
    return std::find(vocabulary.begin(), vocabulary.end(), label) != vocabulary.end();
}

[[noreturn]] void fail_at(ErrorKind kind, const std::string& source, std::size_t line,
                          const std::string& what) {
    throw Error(kind, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const std::vector<std::string>& benchmark_classes() {
    static const std::vector<std::string> classes = {
        "airplane", "bear",  "bicycle", "bird",     "boat",  "bottle", "car",  "cat",
        "chair",    "clock", "dog",     "elephant", "keyboard", "knife", "oven", "truck",
    };
    return classes;
}

ConditionResponseMatrix::ConditionResponseMatrix(ConditionKey key,
                                                 std::vector<std::string> observers,
                                                 std::vector<std::string> stimuli,
                                                 std::vector<std::uint8_t> cells)
    : key_(std::move(key)),
      observers_(std::move(observers)),
      stimuli_(std::move(stimuli)),
      cells_(std::move(cells)) {
    if (cells_.size() != observers_.size() * stimuli_.size()) {
        throw Error(ErrorKind::Parameter, "matrix " + key_.str() + ": cell count " +
                                              std::to_string(cells_.size()) +
                                              " does not match observers x stimuli");
    }
    for (auto c : cells_) {
        if (c > 1) throw Error(ErrorKind::Parameter, "matrix " + key_.str() + ": non-binary cell");
    }
}

double ConditionResponseMatrix::observer_accuracy(std::size_t observer) const {
    const auto r = row(observer);
    if (r.empty()) return 0.0;
    return static_cast<double>(std::accumulate(r.begin(), r.end(), std::size_t{0})) /
           static_cast<double>(r.size());
}

double ConditionResponseMatrix::mean_accuracy() const {
    if (cells_.empty()) return 0.0;
    return static_cast<double>(std::accumulate(cells_.begin(), cells_.end(), std::size_t{0})) /
           static_cast<double>(cells_.size());
}

DatasetWeights::DatasetWeights(std::map<std::string, std::vector<std::string>> conditions)
    : conditions_(std::move(conditions)) {
    for (auto it = conditions_.begin(); it != conditions_.end();) {
        auto& list = it->second;
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        it = list.empty() ? conditions_.erase(it) : std::next(it);
    }
}

DatasetWeights DatasetWeights::from_keys(std::span<const ConditionKey> keys) {
    std::map<std::string, std::vector<std::string>> conditions;
    for (const auto& key : keys) conditions[key.experiment].push_back(key.condition);
    return DatasetWeights(std::move(conditions));
}

DatasetWeights DatasetWeights::from_matrices(const MatrixMap& matrices) {
    std::vector<ConditionKey> keys;
    keys.reserve(matrices.size());
    for (const auto& [key, _] : matrices) keys.push_back(key);
    return from_keys(keys);
}

std::size_t DatasetWeights::condition_count() const {
    std::size_t total = 0;
    for (const auto& [_, list] : conditions_) total += list.size();
    return total;
}

bool DatasetWeights::contains(const ConditionKey& key) const {
    const auto it = conditions_.find(key.experiment);
    if (it == conditions_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), key.condition);
}

double DatasetWeights::weight(const ConditionKey& key) const {
    if (!contains(key)) return 0.0;
    return 1.0 / static_cast<double>(conditions_.at(key.experiment).size());
}

double DatasetWeights::global_weight(const ConditionKey& key) const {
    if (!contains(key)) return 0.0;
    return weight(key) / static_cast<double>(conditions_.size());
}

std::vector<ConditionKey> DatasetWeights::keys() const {
    std::vector<ConditionKey> out;
    for (const auto& [experiment, list] : conditions_) {
        for (const auto& condition : list) out.push_back({experiment, condition});
    }
    return out;
}

DatasetWeights DatasetWeights::restricted_to(std::span<const ConditionKey> keys) const {
    std::vector<ConditionKey> kept;
    for (const auto& key : keys) {
        if (contains(key)) kept.push_back(key);
    }
    return from_keys(kept);
}

std::vector<TrialRecord> parse_trials(std::istream& in, std::span<const std::string> vocabulary,
                                      const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail_at(ErrorKind::Parse, source, 1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
    if (line != kTrialCsvHeader) {
        fail_at(ErrorKind::Parse, source, line_no,
                std::string("unexpected header, expected '") + kTrialCsvHeader + "'");
    }

    std::vector<TrialRecord> trials;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        auto fields = split_fields(line);
        if (fields.size() != 8) {
            fail_at(ErrorKind::Parse, source, line_no,
                    "expected 8 fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t i = 0; i < 6; ++i) {
            if (fields[i].empty()) {
                fail_at(ErrorKind::Parse, source, line_no,
                        "empty required field " + std::to_string(i + 1));
            }
        }
        if (fields[6].empty() != fields[7].empty()) {
            fail_at(ErrorKind::Parse, source, line_no,
                    "shape_class and texture_class must be both present or both absent");
        }

        TrialRecord t;
        t.experiment_id = std::move(fields[0]);
        t.condition_id = std::move(fields[1]);
        t.observer_id = std::move(fields[2]);
        t.stimulus_id = std::move(fields[3]);
        t.predicted_class = std::move(fields[4]);
        t.true_class = std::move(fields[5]);
        if (!fields[6].empty()) {
            t.shape_class = std::move(fields[6]);
            t.texture_class = std::move(fields[7]);
        }

        if (t.predicted_class != kNoResponse && !in_vocabulary(vocabulary, t.predicted_class)) {
            fail_at(ErrorKind::Vocabulary, source, line_no,
                    "unknown class '" + t.predicted_class + "'");
        }
        for (const auto* label : {&t.true_class, t.shape_class ? &*t.shape_class : nullptr,
                                  t.texture_class ? &*t.texture_class : nullptr}) {
            if (label && !in_vocabulary(vocabulary, *label)) {
                fail_at(ErrorKind::Vocabulary, source, line_no, "unknown class '" + *label + "'");
            }
        }

        auto key = std::make_tuple(t.experiment_id, t.condition_id, t.observer_id, t.stimulus_id);
        if (!seen.insert(key).second) {
            fail_at(ErrorKind::Duplicate, source, line_no,
                    "duplicate trial (" + t.experiment_id + ", " + t.condition_id + ", " +
                        t.observer_id + ", " + t.stimulus_id + ")");
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

std::vector<TrialRecord> load_trials(const std::filesystem::path& path,
                                     std::span<const std::string> vocabulary) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open trial file " + path.string());
    return parse_trials(in, vocabulary, path.string());
}

void write_trials(std::ostream& out, std::span<const TrialRecord> trials) {
    out << kTrialCsvHeader << '\n';
    for (const auto& t : trials) {
        out << t.experiment_id << ',' << t.condition_id << ',' << t.observer_id << ','
            << t.stimulus_id << ',' << t.predicted_class << ',' << t.true_class << ','
            << t.shape_class.value_or("") << ',' << t.texture_class.value_or("") << '\n';
    }
}

MatrixMap build_matrices(std::span<const TrialRecord> trials) {
    struct Group {
        std::set<std::string> observers;
        std::set<std::string> stimuli;
        std::map<std::pair<std::string, std::string>, std::uint8_t> cells;
    };
    std::map<ConditionKey, Group> groups;
    for (const auto& t : trials) {
        auto& g = groups[{t.experiment_id, t.condition_id}];
        g.observers.insert(t.observer_id);
        g.stimuli.insert(t.stimulus_id);
        g.cells[{t.observer_id, t.stimulus_id}] = t.correct() ? 1 : 0;
    }

    MatrixMap out;
    for (auto& [key, g] : groups) {
        std::vector<std::string> observers(g.observers.begin(), g.observers.end());
        std::vector<std::string> stimuli(g.stimuli.begin(), g.stimuli.end());
        std::vector<std::uint8_t> cells;
        cells.reserve(observers.size() * stimuli.size());
        std::vector<std::string> missing;
        std::size_t missing_count = 0;
        for (const auto& o : observers) {
            for (const auto& s : stimuli) {
                const auto it = g.cells.find({o, s});
                if (it == g.cells.end()) {
                    if (missing.size() < 20) missing.push_back("(" + o + ", " + s + ")");
                    ++missing_count;
                    cells.push_back(0);
                } else {
                    cells.push_back(it->second);
                }
            }
        }
        if (missing_count > 0) {
            std::ostringstream msg;
            msg << "condition " << key.str() << ": " << missing_count
                << " missing (observer, stimulus) pairs:";
            for (const auto& m : missing) msg << ' ' << m;
            if (missing_count > missing.size()) msg << " ...";
            throw Error(ErrorKind::Coverage, msg.str());
        }
        out.emplace(key, ConditionResponseMatrix(key, std::move(observers), std::move(stimuli),
                                                 std::move(cells)));
    }
    return out;
}

std::vector<TrialRecord> matrices_to_trials(const MatrixMap& matrices,
                                            const std::string& true_class) {
    std::vector<TrialRecord> trials;
    for (const auto& [key, m] : matrices) {
        for (std::size_t j = 0; j < m.observer_count(); ++j) {
            for (std::size_t i = 0; i < m.stimulus_count(); ++i) {
                TrialRecord t;
                t.experiment_id = key.experiment;
                t.condition_id = key.condition;
                t.observer_id = m.observers()[j];
                t.stimulus_id = m.stimuli()[i];
                t.true_class = true_class;
                t.predicted_class = m.at(j, i) ? true_class : kNoResponse;
                trials.push_back(std::move(t));
            }
        }
    }
    return trials;
}

ExclusionResult exclude_conditions(const MatrixMap& matrices, const ExclusionPolicy& policy) {
    if (policy.min_human_accuracy) {
        const double thr = *policy.min_human_accuracy;
        if (!(thr >= 0.0 && thr <= 1.0)) {
            throw Error(ErrorKind::Parameter,
                        "accuracy threshold must lie in [0,1], got " + std::to_string(thr));
        }
    }

    std::set<ConditionKey> drop;
    ExclusionResult result;
    for (const auto& entry : policy.conditions) {
        bool matched = false;
        const auto slash = entry.find('/');
        for (const auto& [key, _] : matrices) {
            const bool hit = slash == std::string::npos
                                 ? key.condition == entry
                                 : key.str() == entry;
            if (hit) {
                drop.insert(key);
                matched = true;
            }
        }
        if (!matched) result.warnings.push_back("exclusion entry '" + entry + "' matches no condition");
    }
    if (policy.min_human_accuracy) {
        for (const auto& [key, m] : matrices) {
            if (m.mean_accuracy() < *policy.min_human_accuracy) drop.insert(key);
        }
    }

    for (const auto& [key, m] : matrices) {
        if (drop.count(key)) {
            result.excluded.push_back(key);
        } else {
            result.matrices.emplace(key, m);
        }
    }
    result.weights = DatasetWeights::from_matrices(result.matrices);
    return result;
}

}  // namespace mvh
