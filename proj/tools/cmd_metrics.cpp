#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/metrics.hpp"
#include "mvh/oracle.hpp"
#include "mvh/trials.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

namespace mvh::cli {

namespace {

struct MetricsOptions {
    std::string trials;
    std::string model_trials;
    std::string out = "metrics_out";
    std::string classes = "benchmark";
    std::vector<std::string> exclude;
    double min_human_accuracy = -1.0;
    std::string aggregation = "hierarchical";
};

std::string csv_value(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream s;
    s << std::setprecision(17) << *v;
    return s.str();
}

void run_metrics(const MetricsOptions& o, const CommonOptions& common) {
    const auto vocab = parse_vocabulary(o.classes);
    const auto humans_raw = load_trials(o.trials, vocab);
    const auto model_raw = load_trials(o.model_trials, vocab);
    if (model_raw.empty()) {
        throw Error(ErrorKind::Parameter, "model trial file " + o.model_trials + " has no rows");
    }
    if (humans_raw.empty()) {
        throw Error(ErrorKind::Parameter, "human trial file " + o.trials + " has no rows");
    }

    ExclusionPolicy policy;
    policy.conditions = o.exclude;
    if (o.min_human_accuracy >= 0.0) policy.min_human_accuracy = o.min_human_accuracy;
    const auto excl = exclude_conditions(build_matrices(humans_raw), policy);
    for (const auto& w : excl.warnings) std::cerr << "warning: " << w << '\n';

    std::vector<TrialRecord> model;
    std::vector<TrialRecord> cue_conflict;
    for (const auto& t : model_raw) {
        if (!excl.matrices.count({t.experiment_id, t.condition_id})) continue;
        model.push_back(t);
        if (t.is_cue_conflict()) cue_conflict.push_back(t);
    }
    const auto responses = align_model_trials(excl.matrices, model);
    const Aggregation mode =
        o.aggregation == "flat" ? Aggregation::Flat : Aggregation::Hierarchical;
    const auto report = evaluate_alignment(excl.matrices, responses, excl.weights, cue_conflict, mode);

    std::optional<InterHumanResult> inter;
    try {
        inter = inter_human_consistency(excl.matrices, excl.weights);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Undefined) throw;
        std::cerr << "note: " << e.what() << '\n';
    }

    if (common.verify) {
        std::size_t checked = 0;
        for (const auto& [key, entry] : report.per_condition) {
            const auto ref = oracle::mean_kappa(responses.at(key), excl.matrices.at(key));
            const bool same = ref.has_value() == entry.kappa.has_value() &&
                              (!ref || std::abs(*ref - *entry.kappa) < 1e-12);
            if (!same) {
                throw Error(ErrorKind::Numeric, "verify: kappa mismatch in " + key.str());
            }
            ++checked;
        }
        std::cout << "verify: " << checked << " condition kappas match the count-based oracle\n";
    }

    const std::filesystem::path dir(o.out);
    ensure_dir(dir);
    nlohmann::json j = to_json(report);
    j["inter_human_consistency"] =
        inter && inter->mean ? nlohmann::json(*inter->mean) : nlohmann::json(nullptr);
    j["aggregation"] = o.aggregation;
    j["excluded"] = nlohmann::json::array();
    for (const auto& k : excl.excluded) j["excluded"].push_back(k.str());

    Manifest manifest("metrics", {{"trials", o.trials},
                                  {"model_trials", o.model_trials},
                                  {"classes", o.classes},
                                  {"exclude", o.exclude},
                                  {"min_human_accuracy", o.min_human_accuracy},
                                  {"aggregation", o.aggregation},
                                  {"verify", common.verify}});
    {
        const auto path = dir / "report.json";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << j.dump(2) << '\n';
        out.close();
        manifest.add_artifact(path);
    }
    {
        const auto path = dir / "per_condition.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << "experiment_id,condition_id,kappa,accuracy,dropped_pairs,human_accuracy,"
               "inter_human_kappa\n";
        for (const auto& [key, entry] : report.per_condition) {
            std::optional<double> ih;
            if (inter) {
                if (auto it = inter->per_condition.find(key); it != inter->per_condition.end()) {
                    ih = it->second;
                }
            }
            out << key.experiment << ',' << key.condition << ',' << csv_value(entry.kappa) << ','
                << csv_value(entry.accuracy) << ',' << entry.dropped_pairs << ','
                << csv_value(excl.matrices.at(key).mean_accuracy()) << ',' << csv_value(ih)
                << '\n';
        }
        out.close();
        manifest.add_artifact(path);
    }
    manifest.write(dir);

    auto show = [](const std::optional<double>& v) {
        return v ? csv_value(v) : std::string("undefined");
    };
    std::cout << "error_consistency " << show(report.error_consistency) << '\n'
              << "shape_bias " << show(report.shape_bias) << '\n'
              << "ood_accuracy " << csv_value(report.ood_accuracy) << '\n';
}

}  // namespace

void register_metrics(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<MetricsOptions>();
    auto* sub = app.add_subcommand("metrics", "Error consistency, shape bias and OOD accuracy");
    sub->add_option("--trials", o->trials, "Human trial CSV")->required();
    sub->add_option("--model-trials", o->model_trials, "Model trial CSV")->required();
    sub->add_option("--out", o->out, "Output directory")->capture_default_str();
    sub->add_option("--classes", o->classes, "benchmark, any, or a comma-separated list")->capture_default_str();
    sub->add_option("--exclude", o->exclude, "Condition to drop (exp/cond or cond)");
    sub->add_option("--min-human-accuracy", o->min_human_accuracy,
                    "Drop conditions whose mean human accuracy is below this");
    sub->add_option("--aggregation", o->aggregation, "Accuracy averaging")->capture_default_str()
        ->check(CLI::IsMember({"hierarchical", "flat"}));
    add_common_options(sub, common);
    sub->callback([o, &common] { run_metrics(*o, common); });
}

}  // namespace mvh::cli
