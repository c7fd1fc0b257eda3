#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/oracle.hpp"
#include "mvh/pareto.hpp"
#include "mvh/trials.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

namespace mvh::cli {

namespace {

struct ParetoOptions {
    std::string trials;
    std::string out = "pareto_out";
    std::string classes = "benchmark";
    std::vector<std::string> exclude;
    double min_human_accuracy = -1.0;
    std::size_t max_points = FrontierOptions{}.max_points;
    std::string degenerate = "drop";
    bool certificates = false;
};

void run_pareto(const ParetoOptions& o, const CommonOptions& common) {
    const auto trials = load_trials(o.trials, parse_vocabulary(o.classes));
    if (trials.empty()) throw Error(ErrorKind::Parameter, "trial file " + o.trials + " has no rows");
    ExclusionPolicy policy;
    policy.conditions = o.exclude;
    if (o.min_human_accuracy >= 0.0) policy.min_human_accuracy = o.min_human_accuracy;
    const auto excl = exclude_conditions(build_matrices(trials), policy);
    for (const auto& w : excl.warnings) std::cerr << "warning: " << w << '\n';

    FrontierOptions fo;
    fo.max_points = o.max_points;
    fo.mode = o.degenerate == "impute-zero" ? DegenerateMode::ImputeZero : DegenerateMode::Drop;
    fo.certificates = o.certificates;
    const auto result = compute_frontier(excl.matrices, excl.weights, fo, common.threads);

    if (common.verify) {
        if (fo.mode != DegenerateMode::Drop) {
            throw Error(ErrorKind::Parameter, "--verify supports only --degenerate drop");
        }
        const auto ref = oracle::brute_force_frontier(excl.matrices, excl.weights);
        const auto& pts = result.frontier.points;
        bool same = ref.size() == pts.size();
        for (std::size_t i = 0; same && i < pts.size(); ++i) {
            same = std::abs(ref[i].kappa - pts[i].kappa) < 1e-12 &&
                   std::abs(ref[i].accuracy - pts[i].accuracy) < 1e-12;
        }
        if (!same) {
            throw Error(ErrorKind::Numeric, "verify: frontier differs from exhaustive enumeration (" +
                                                std::to_string(pts.size()) + " vs " +
                                                std::to_string(ref.size()) + " points)");
        }
        std::cout << "verify: " << pts.size() << " frontier points match exhaustive enumeration\n";
    }

    const std::filesystem::path dir(o.out);
    ensure_dir(dir);
    Manifest manifest("pareto", {{"trials", o.trials},
                                 {"classes", o.classes},
                                 {"exclude", o.exclude},
                                 {"min_human_accuracy", o.min_human_accuracy},
                                 {"max_points", o.max_points},
                                 {"degenerate", o.degenerate},
                                 {"certificates", o.certificates},
                                 {"threads", common.threads},
                                 {"verify", common.verify}});
    {
        const auto path = dir / "frontier.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        write_frontier_csv(out, result.frontier);
        out.close();
        manifest.add_artifact(path);
    }
    {
        const auto path = dir / "condition_sweeps.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << std::setprecision(17) << "experiment_id,condition_id,k,accuracy,kappa\n";
        for (const auto& c : result.conditions) {
            for (const auto& s : c.sweep) {
                out << c.key.experiment << ',' << c.key.condition << ',' << s.k << ','
                    << s.accuracy << ',';
                if (s.kappa_mean) out << *s.kappa_mean;
                out << '\n';
            }
        }
        out.close();
        manifest.add_artifact(path);
    }
    if (o.certificates) {
        const auto path = dir / "certificates.json";
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t p = 0; p < result.frontier.points.size(); ++p) {
            nlohmann::json per = nlohmann::json::object();
            for (std::size_t c = 0; c < result.conditions.size(); ++c) {
                const auto& cf = result.conditions[c];
                const std::size_t k = cf.point_k[result.frontier.choices[p][c]];
                std::string bits;
                for (auto b : cf.sweep[k].s) bits += b ? '1' : '0';
                per[cf.key.str()] = {{"k", k}, {"responses", bits}};
            }
            j.push_back({{"kappa", result.frontier.points[p].kappa},
                         {"accuracy", result.frontier.points[p].accuracy},
                         {"conditions", per}});
        }
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << j.dump(1) << '\n';
        out.close();
        manifest.add_artifact(path);
    }
    const auto& best = result.frontier.max_kappa_point();
    manifest.set("max_point", {{"kappa", best.kappa}, {"accuracy", best.accuracy}});
    manifest.write(dir);

    std::cout << std::setprecision(6) << "frontier points " << result.frontier.points.size() << '\n'
              << "max error consistency " << best.kappa << " at accuracy " << best.accuracy
              << '\n';
}

}  // namespace

void register_pareto(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<ParetoOptions>();
    auto* sub = app.add_subcommand("pareto", "Best achievable error consistency per accuracy");
    sub->add_option("--trials", o->trials, "Human trial CSV")->required();
    sub->add_option("--out", o->out, "Output directory")->capture_default_str();
    sub->add_option("--classes", o->classes, "benchmark, any, or a comma-separated list")
        ->capture_default_str();
    sub->add_option("--exclude", o->exclude, "Condition to drop (exp/cond or cond)");
    sub->add_option("--min-human-accuracy", o->min_human_accuracy,
                    "Drop conditions whose mean human accuracy is below this");
    sub->add_option("--max-points", o->max_points, "Candidate cap per fold step")
        ->capture_default_str();
    sub->add_option("--degenerate", o->degenerate, "Humans with undefined kappa")
        ->check(CLI::IsMember({"drop", "impute-zero"}))
        ->capture_default_str();
    sub->add_flag("--certificates", o->certificates, "Write the response vectors of every point");
    add_common_options(sub, common);
    sub->callback([o, &common] { run_pareto(*o, common); });
}

}  // namespace mvh::cli
