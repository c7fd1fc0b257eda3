#include "mvh/synthetic.hpp"

#include "mvh/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <cstdio>

namespace mvh {

namespace {

// Unit-RMS sum of cosines at integer frequencies with radius in [lo, hi].
std::vector<double> pattern(std::size_t n, std::size_t components, double lo, double hi,
                            std::mt19937_64& rng) {
    std::vector<std::pair<int, int>> pool;
    const int r = static_cast<int>(std::ceil(hi));
    for (int fy = -r; fy <= r; ++fy) {
        for (int fx = 0; fx <= r; ++fx) {
            if (fx == 0 && fy <= 0) continue;  // one of each +/- pair
            const double rad = std::hypot(fy, fx);
            if (rad >= lo && rad <= hi) pool.emplace_back(fy, fx);
        }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(pool.size(), components));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> out(n * n, 0.0);
    for (const auto& [fy, fx] : pool) {
        const double ph = phase(rng);
        for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
                out[y * n + x] += std::cos(2.0 * std::numbers::pi *
                                               (fy * static_cast<double>(y) + fx * static_cast<double>(x)) /
                                               static_cast<double>(n) +
                                           ph);
            }
        }
    }
    double ss = 0.0;
    for (double v : out) ss += v * v;
    const double rms = std::sqrt(ss / static_cast<double>(out.size()));
    for (auto& v : out) v /= rms;
    return out;
}

}  // namespace

SyntheticTask make_synthetic_task(const SyntheticConfig& cfg) {
    if (cfg.classes < 2) throw Error(ErrorKind::Parameter, "synthetic task needs >= 2 classes");
    if (cfg.conditions.size() != cfg.condition_shape_gain.size()) {
        throw Error(ErrorKind::Parameter, "one shape gain per synthetic condition");
    }
    std::mt19937_64 rng(cfg.seed);
    const std::size_t n = cfg.size;

    SyntheticTask task;
    std::vector<std::vector<double>> shape, texture;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        task.classes.push_back("class" + std::to_string(c));
        shape.push_back(pattern(n, cfg.components, cfg.shape_radius_lo, cfg.shape_radius_hi, rng));
        texture.push_back(
            pattern(n, cfg.components, cfg.texture_radius_lo, cfg.texture_radius_hi, rng));
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Low-frequency content: shape of one class plus an optional distractor
    // shape of another. The texture may be circularly shifted by (dy, dx).
    struct Content {
        std::size_t shape_cls = 0;
        double shape_amp = 0.0;
        std::size_t distractor_cls = 0;
        double distractor_amp = 0.0;
        std::size_t texture_cls = 0;
        double texture_amp = 0.0;
        std::size_t dy = 0, dx = 0;
    };
    auto render = [&](const Content& c) {
        Image img(n, n, 1);
        for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
                const std::size_t i = y * n + x;
                const double t = texture[c.texture_cls][((y + c.dy) % n) * n + (x + c.dx) % n];
                const double v = 0.5 + c.shape_amp * shape[c.shape_cls][i] +
                                 c.distractor_amp * shape[c.distractor_cls][i] +
                                 c.texture_amp * t + cfg.noise * noise(rng);
                img.data[i] = std::clamp(v, 0.0, 1.0);
            }
        }
        return img;
    };

    for (std::size_t c = 0; c < cfg.classes; ++c) {
        for (std::size_t i = 0; i < cfg.scorer_images_per_class; ++i) {
            Content k;
            k.shape_cls = k.distractor_cls = k.texture_cls = c;
            k.shape_amp = cfg.shape_amplitude * (0.25 + 0.75 * unit(rng));
            k.texture_amp = cfg.texture_amplitude * (0.25 + 0.75 * unit(rng));
            task.scorer_images.push_back(render(k));
            task.scorer_labels.push_back(c);
        }
    }

    // Observers see only the low frequencies: they report the shape class
    // when it beats the distractor, give or take a personal bias and noise.
    std::vector<double> bias(cfg.observers);
    for (auto& b : bias) b = cfg.observer_bias * (2.0 * unit(rng) - 1.0);

    std::uniform_int_distribution<std::size_t> pick(0, cfg.classes - 1);
    std::uniform_int_distribution<std::size_t> shift(0, n - 1);
    auto other = [&](std::size_t not_this) {
        std::size_t c = pick(rng);
        while (c == not_this) c = pick(rng);
        return c;
    };
    for (std::size_t cond = 0; cond < cfg.conditions.size(); ++cond) {
        for (std::size_t i = 0; i < cfg.stimuli_per_condition; ++i) {
            Content k;
            k.shape_cls = pick(rng);
            k.distractor_cls = other(k.shape_cls);
            k.texture_cls = other(k.shape_cls);
            const double strength = cfg.condition_shape_gain[cond] * (0.2 + 0.8 * unit(rng));
            k.shape_amp = cfg.shape_amplitude * strength;
            k.distractor_amp = cfg.shape_amplitude * cfg.distractor_strength;
            k.texture_amp = cfg.conflict_texture_amplitude;
            if (cfg.shift_conflict_texture) {
                k.dy = shift(rng);
                k.dx = shift(rng);
            }
            char id[64];
            std::snprintf(id, sizeof id, "%s_%03zu", cfg.conditions[cond].c_str(), i);
            task.images.emplace(id, render(k));
            for (std::size_t j = 0; j < cfg.observers; ++j) {
                const bool correct = strength + cfg.observer_noise * noise(rng) >
                                     cfg.distractor_strength + bias[j];
                TrialRecord t;
                t.experiment_id = "synthetic";
                t.condition_id = cfg.conditions[cond];
                t.observer_id = "subject-" + std::to_string(j + 1);
                t.stimulus_id = id;
                t.true_class = task.classes[k.shape_cls];
                t.predicted_class = task.classes[correct ? k.shape_cls : k.distractor_cls];
                t.shape_class = task.classes[k.shape_cls];
                t.texture_class = task.classes[k.texture_cls];
                task.trials.push_back(std::move(t));
            }
        }
    }
    return task;
}

}  // namespace mvh
