#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/image.hpp"
#include "mvh/parallel.hpp"
#include "mvh/scorer.hpp"
#include "mvh/synthetic.hpp"
#include "mvh/trials.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <set>

namespace mvh::cli {

namespace {

struct SyntheticOptions {
    std::string out = "synthetic";
    SyntheticConfig config;
    ScorerTrainConfig scorer;
};

void run_synthetic(const SyntheticOptions& o, const CommonOptions& common) {
    const auto task = make_synthetic_task(o.config);
    const auto scorer =
        train_linear_scorer(task.scorer_images, task.scorer_labels, task.classes, o.scorer);

    const std::filesystem::path dir(o.out);
    const auto image_dir = dir / "images";
    ensure_dir(image_dir);
    Manifest manifest("synthetic", {{"seed", o.config.seed},
                                    {"size", o.config.size},
                                    {"classes", o.config.classes},
                                    {"stimuli_per_condition", o.config.stimuli_per_condition},
                                    {"observers", o.config.observers},
                                    {"shift_conflict_texture", o.config.shift_conflict_texture},
                                    {"scorer_pool", o.scorer.pool},
                                    {"scorer_epochs", o.scorer.epochs},
                                    {"threads", common.threads}});

    std::vector<std::string> ids;
    std::vector<const Image*> imgs;
    for (const auto& [id, img] : task.images) {
        ids.push_back(id);
        imgs.push_back(&img);
    }
    std::vector<std::string> predicted(ids.size());
    parallel_for(ids.size(), common.threads, [&](std::size_t i) {
        write_png(image_dir / (ids[i] + ".png"), *imgs[i]);
        predicted[i] = task.classes[argmax(scorer.scores(quantize_8bit(*imgs[i])))];
    });
    for (const auto& id : ids) manifest.add_artifact(image_dir / (id + ".png"));

    {
        const auto path = dir / "trials.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        write_trials(out, task.trials);
        out.close();
        manifest.add_artifact(path);
    }
    {
        std::vector<TrialRecord> model;
        std::set<std::string> seen;
        for (const auto& t : task.trials) {
            if (!seen.insert(t.experiment_id + '/' + t.condition_id + '/' + t.stimulus_id).second) {
                continue;
            }
            auto m = t;
            m.observer_id = "scorer";
            const auto pos = std::lower_bound(ids.begin(), ids.end(), t.stimulus_id);
            m.predicted_class = predicted[static_cast<std::size_t>(pos - ids.begin())];
            model.push_back(std::move(m));
        }
        const auto path = dir / "model-trials.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        write_trials(out, model);
        out.close();
        manifest.add_artifact(path);
    }
    {
        const auto path = dir / "scorer.json";
        scorer.save(path);
        manifest.add_artifact(path);
    }
    manifest.write(dir);

    std::string classes;
    for (const auto& c : task.classes) classes += (classes.empty() ? "" : ",") + c;
    std::cout << "wrote " << ids.size() << " stimuli, " << task.trials.size()
              << " human trials; classes " << classes << '\n';
}

}  // namespace

void register_synthetic(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<SyntheticOptions>();
    auto* sub = app.add_subcommand("synthetic", "Write the synthetic cue-conflict task and a scorer");
    sub->add_option("--out", o->out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o->config.seed, "Task seed")->capture_default_str();
    sub->add_option("--stimuli", o->config.stimuli_per_condition, "Stimuli per condition")
        ->capture_default_str();
    sub->add_option("--observers", o->config.observers, "Simulated observers")->capture_default_str();
    sub->add_flag("--shift-texture", o->config.shift_conflict_texture,
                  "Randomly shift the texture of every stimulus");
    add_common_options(sub, common);
    sub->callback([o, &common] { run_synthetic(*o, common); });
}

}  // namespace mvh::cli
