#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/filterlearn.hpp"
#include "mvh/image.hpp"
#include "mvh/oracle.hpp"
#include "mvh/parallel.hpp"
#include "mvh/scorer.hpp"
#include "mvh/trials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>

namespace mvh::cli {

namespace {

struct LearnOptions {
    std::string trials;
    std::string images;
    std::string scorer;
    std::string out = "filter.csv";
    LearnConfig config;
    bool fixed_tau = false;
};

// Central differences on a few coordinates of theta and on log tau.
void check_gradient(const LearnDataset& data, const LearnConfig& config, const Scorer& scorer) {
    const auto& img0 = data.items.front().image;
    const auto params = initial_params(img0.height / 2, img0.width / 2, config);
    const auto lg = loss_and_gradient(data.items, {}, params, config, scorer);
    std::vector<std::uint8_t> ideal;
    std::vector<std::size_t> truth;
    for (const auto& item : data.items) {
        ideal.push_back(item.ideal);
        truth.push_back(item.true_class);
    }
    const auto targets = build_targets(ideal, lg.scores, truth);

    const std::size_t n = params.theta.quadrant().size();
    std::vector<double> x(params.theta.quadrant());
    x.push_back(params.log_tau);
    auto fn = [&](std::span<const double> p) {
        FilterParams fp{SpectralFilter(params.theta.rows(), params.theta.cols(),
                                       std::vector<double>(p.begin(), p.begin() + static_cast<long>(n))),
                        p[n]};
        return forward_loss(data.items, targets, fp, config, scorer).total();
    };
    std::mt19937_64 rng(config.seed + 17);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> coords;
    for (int i = 0; i < 8; ++i) coords.push_back(pick(rng));
    if (config.learn_tau) coords.push_back(n);
    const auto fd = oracle::finite_difference(fn, x, 1e-4, coords);
    double worst = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const std::size_t c = coords[i];
        const double analytic = c == n ? lg.d_log_tau : lg.d_theta[c];
        const double numeric = fd[c];
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        worst = std::max(worst, rel);
    }
    if (!(worst < 1e-4)) {
        throw Error(ErrorKind::Numeric,
                    "verify: gradient relative error " + std::to_string(worst) + " >= 1e-4");
    }
    std::cout << "verify: gradient matches central differences (max rel. error " << worst
              << " over " << coords.size() << " coordinates)\n";
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void run_learn_filter(LearnOptions o, const CommonOptions& common) {
    o.config.learn_tau = !o.fixed_tau;
    o.config.threads = common.threads;
    o.config.validate();

    const auto scorer = LinearSoftmaxScorer::load(o.scorer);
    const auto trials = load_trials(o.trials, scorer.classes());
    if (trials.empty()) throw Error(ErrorKind::Parameter, "trial file " + o.trials + " has no rows");

    const auto paths = list_png_inputs(o.images);
    std::vector<Image> loaded(paths.size());
    parallel_for(paths.size(), common.threads, [&](std::size_t i) { loaded[i] = read_png(paths[i]); });
    std::map<std::string, Image> images;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        images.emplace(paths[i].stem().string(), std::move(loaded[i]));
    }
    const auto data = make_learn_dataset(trials, images, scorer.classes());

    if (common.verify) check_gradient(data, o.config, scorer);

    const auto baseline = evaluate_unfiltered(data, scorer);
    TrainResult result;
    try {
        result = train_filter(data, o.config, scorer);
    } catch (const TrainingDiverged& e) {
        const std::filesystem::path trace_path = std::filesystem::path(o.out).string() + ".trace.json";
        write_json(trace_path, {{"diverged", true}, {"epochs", to_json(e.trace())}});
        throw;
    }
    const auto learned = evaluate_filter(result.filter, data, scorer);

    const std::filesystem::path out(o.out);
    const auto dir = out.has_parent_path() ? out.parent_path() : std::filesystem::path(".");
    ensure_dir(dir);
    const auto& c = o.config;
    Manifest manifest("learn-filter", {{"trials", o.trials},
                                       {"images", o.images},
                                       {"scorer", o.scorer},
                                       {"out", o.out},
                                       {"epochs", c.epochs},
                                       {"l1", c.l1_weight},
                                       {"gamma", c.smooth_gamma},
                                       {"init_noise_variance", c.init_noise_variance},
                                       {"initial_tau", c.initial_tau},
                                       {"learn_tau", c.learn_tau},
                                       {"lr", c.learning_rate},
                                       {"adam_beta1", c.adam_beta1},
                                       {"adam_beta2", c.adam_beta2},
                                       {"adam_epsilon", c.adam_epsilon},
                                       {"seed", c.seed},
                                       {"divergence_limit", c.divergence_limit},
                                       {"snapshot_every", c.snapshot_every},
                                       {"threads", common.threads},
                                       {"verify", common.verify}});
    manifest.set("inputs", {{"trials_sha256", sha256_file(o.trials)},
                            {"scorer_sha256", sha256_file(o.scorer)}});

    result.filter.save_csv(out);
    manifest.add_artifact(out);

    const std::filesystem::path trace_path = out.string() + ".trace.json";
    write_json(trace_path, {{"diverged", false},
                            {"best_epoch", result.best_epoch},
                            {"tau", std::exp(result.params.log_tau)},
                            {"baseline", to_json(baseline)},
                            {"learned", to_json(learned)},
                            {"epochs", to_json(result.trace)}});
    manifest.add_artifact(trace_path);

    if (!result.snapshots.empty()) {
        const auto snap_dir = dir / (out.stem().string() + "_snapshots");
        ensure_dir(snap_dir);
        for (const auto& s : result.snapshots) {
            std::ostringstream name;
            name << "epoch_" << std::setw(4) << std::setfill('0') << s.epoch << ".csv";
            s.filter.save_csv(snap_dir / name.str());
            manifest.add_artifact(snap_dir / name.str());
        }
    }
    manifest.write(dir);

    auto show = [](const std::optional<double>& v) {
        std::ostringstream s;
        if (v) s << std::setprecision(4) << *v; else s << "undefined";
        return s.str();
    };
    std::cout << "best epoch " << result.best_epoch << " of " << c.epochs << '\n'
              << "error consistency " << show(baseline.error_consistency) << " -> "
              << show(learned.error_consistency) << '\n'
              << "accuracy " << show(baseline.ood_accuracy) << " -> " << show(learned.ood_accuracy)
              << '\n';
}

}  // namespace

void register_learn_filter(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<LearnOptions>();
    auto& c = o->config;
    auto* sub = app.add_subcommand("learn-filter", "Learn a Fourier filter that raises error consistency");
    sub->add_option("--trials", o->trials, "Human trial CSV")->required();
    sub->add_option("--images", o->images, "Directory of <stimulus_id>.png")->required();
    sub->add_option("--scorer", o->scorer, "Scorer JSON")->required();
    sub->add_option("--out", o->out, "Learned quadrant CSV")->capture_default_str();
    sub->add_option("--epochs", c.epochs, "Optimizer steps")->capture_default_str();
    sub->add_option("--l1", c.l1_weight, "L1 weight")->capture_default_str();
    sub->add_option("--gamma", c.smooth_gamma, "Filter smoothing, quadrant cells")->capture_default_str();
    sub->add_option("--seed", c.seed, "Initial-noise seed")->capture_default_str();
    sub->add_option("--lr", c.learning_rate, "Adam step size")->capture_default_str();
    sub->add_option("--init-noise", c.init_noise_variance, "Variance of the initial noise")
        ->capture_default_str();
    sub->add_option("--initial-tau", c.initial_tau, "Initial temperature")->capture_default_str();
    sub->add_flag("--fixed-tau", o->fixed_tau, "Keep the temperature fixed");
    sub->add_option("--snapshot-every", c.snapshot_every, "Write the filter every n epochs (0: off)")
        ->capture_default_str();
    add_common_options(sub, common);
    sub->callback([o, &common] { run_learn_filter(*o, common); });
}

}  // namespace mvh::cli
