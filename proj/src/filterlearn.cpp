#include "mvh/filterlearn.hpp"

#include "mvh/error.hpp"
#include "mvh/fft.hpp"
#include "mvh/parallel.hpp"
#include "mvh/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mvh {

namespace {

constexpr std::size_t kChunk = 8;

struct ChunkSums {
    double data = 0.0;
    double d_log_tau = 0.0;
    std::vector<double> d_map;
};

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw Error(ErrorKind::Numeric, std::string("non-finite ") + what + " in filter loss");
    }
}

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

std::size_t wrong_argmax(std::span<const double> s, std::size_t truth) {
    std::size_t best = truth == 0 ? 1 : 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k != truth && s[k] > s[best]) best = k;
    }
    return best;
}

LossGradient evaluate(std::span<const LearnItem> items, std::span<const std::size_t> targets,
                      const FilterParams& params, const LearnConfig& config, const Scorer& scorer,
                      bool want_grad) {
    if (items.empty()) throw Error(ErrorKind::Parameter, "no training items");
    if (!targets.empty() && targets.size() != items.size()) {
        throw Error(ErrorKind::Parameter, "one target per item required");
    }
    const std::size_t rows = params.theta.rows(), cols = params.theta.cols();
    const std::size_t h = 2 * rows, w = 2 * cols;
    for (const auto& it : items) {
        if (it.image.height != h || it.image.width != w) {
            throw Error(ErrorKind::Parameter, "filter quadrant does not match image size");
        }
    }
    const auto map = effective_filter(params.theta, config.smooth_gamma).expand();
    const double tau = std::exp(params.log_tau);
    const auto plan = fft_plan(h, w);
    const std::size_t n_classes = scorer.class_count();
    const std::size_t n_px = h * w;

    LossGradient out;
    out.scores.resize(items.size());
    const std::size_t n_chunks = (items.size() + kChunk - 1) / kChunk;
    std::vector<ChunkSums> sums(n_chunks);

    parallel_for(n_chunks, config.threads, [&](std::size_t chunk) {
        auto& acc = sums[chunk];
        if (want_grad) acc.d_map.assign(n_px, 0.0);
        std::vector<Complex> buf(n_px), spec(n_px), gspec(n_px);
        std::vector<std::vector<Complex>> x_spec;
        const std::size_t end = std::min(items.size(), (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            const auto& item = items[i];
            if (item.true_class >= n_classes) {
                throw Error(ErrorKind::Parameter, "true class outside the scorer vocabulary");
            }
            Image y(w, h, item.image.channels);
            x_spec.assign(item.image.channels, {});
            for (std::size_t c = 0; c < item.image.channels; ++c) {
                x_spec[c] = plan->forward_real(item.image.plane(c));
                for (std::size_t k = 0; k < n_px; ++k) spec[k] = x_spec[c][k] * map.values[k];
                plan->inverse(spec.data(), buf.data());
                auto dst = y.plane(c);
                for (std::size_t k = 0; k < n_px; ++k) dst[k] = buf[k].real();
            }
            auto s = scorer.scores(y);
            const std::size_t target =
                !targets.empty() ? targets[i]
                : item.ideal     ? item.true_class
                                 : wrong_argmax(s, item.true_class);
            if (target >= n_classes) throw Error(ErrorKind::Parameter, "target out of range");

            std::vector<double> z(n_classes);
            for (std::size_t k = 0; k < n_classes; ++k) z[k] = s[k] / tau;
            acc.data += log_sum_exp(z) - z[target];

            if (want_grad) {
                auto p = softmax(z);
                p[target] -= 1.0;  // dL/dz
                std::vector<double> ds(n_classes);
                for (std::size_t k = 0; k < n_classes; ++k) {
                    ds[k] = p[k] / tau;
                    acc.d_log_tau -= p[k] * z[k];  // dz/dlog(tau) = -z
                }
                const auto g = scorer.input_gradient(y, ds);
                const double inv_n = 1.0 / static_cast<double>(n_px);
                for (std::size_t c = 0; c < item.image.channels; ++c) {
                    const auto gp = g.plane(c);
                    std::copy(gp.begin(), gp.end(), buf.begin());
                    plan->forward(buf.data(), gspec.data());
                    for (std::size_t k = 0; k < n_px; ++k) {
                        acc.d_map[k] += (x_spec[c][k] * std::conj(gspec[k])).real() * inv_n;
                    }
                }
            }
            out.scores[i] = std::move(s);
        }
    });

    const double inv_items = 1.0 / static_cast<double>(items.size());
    std::vector<double> d_map(want_grad ? n_px : 0, 0.0);
    for (const auto& acc : sums) {
        out.loss.data += acc.data;
        out.d_log_tau += acc.d_log_tau;
        for (std::size_t k = 0; k < d_map.size(); ++k) d_map[k] += acc.d_map[k];
    }
    out.loss.data *= inv_items;
    out.d_log_tau *= inv_items;
    double l1 = 0.0;
    for (double v : params.theta.quadrant()) l1 += std::abs(v);
    out.loss.l1 = config.l1_weight * l1;
    check_finite(out.loss.data, "cross-entropy term");
    check_finite(out.loss.l1, "L1 term");

    if (want_grad) {
        for (auto& v : d_map) v *= inv_items;
        const auto d_eff = fold_to_quadrant(d_map, rows, cols);
        out.d_theta.assign(rows * cols, 0.0);
        convolve_plane_adjoint(d_eff, out.d_theta, rows, cols,
                               gaussian_kernel(config.smooth_gamma));
        const auto& theta = params.theta.quadrant();
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (theta[k] > 0.0) out.d_theta[k] += config.l1_weight;
            if (theta[k] < 0.0) out.d_theta[k] -= config.l1_weight;
        }
    }
    return out;
}

AlignmentReport report_from_scores(const LearnDataset& data,
                                   const std::vector<std::vector<double>>& scores) {
    ModelResponses responses;
    for (const auto& [key, m] : data.humans) {
        responses[key].assign(m.stimulus_count(), 0);
    }
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        const auto& item = data.items[i];
        auto& seq = responses.at(item.condition);
        seq.at(item.stimulus_index) = argmax(scores[i]) == item.true_class ? 1 : 0;
    }
    return evaluate_alignment(data.humans, responses, data.weights);
}

double max_asymmetry(const AmplitudeMap& map) {
    double worst = 0.0;
    for (std::size_t y = 0; y < map.height; ++y) {
        for (std::size_t x = 0; x < map.width; ++x) {
            const double mirror = map.at((map.height - y) % map.height, (map.width - x) % map.width);
            worst = std::max(worst, std::abs(map.at(y, x) - mirror));
        }
    }
    return worst;
}

}  // namespace

void LearnConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::Parameter, what); };
    if (!(l1_weight >= 0.0)) bad("L1 weight must be >= 0");
    if (!(smooth_gamma >= 0.0)) bad("smoothing gamma must be >= 0");
    if (!(init_noise_variance >= 0.0)) bad("initial noise variance must be >= 0");
    if (!(initial_tau > 0.0)) bad("initial temperature must be > 0");
    if (!(learning_rate > 0.0)) bad("learning rate must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        bad("Adam betas must lie in [0, 1)");
    }
    if (!(divergence_limit > 0.0)) bad("divergence limit must be > 0");
}

std::map<ConditionKey, std::vector<std::uint8_t>> ideal_responses(const MatrixMap& humans) {
    std::map<ConditionKey, std::vector<std::uint8_t>> out;
    for (const auto& [key, m] : humans) {
        const auto sweep = condition_sweep(m);
        const auto* best = best_of_sweep(sweep);
        // Without any defined kappa fall back to the all-correct vector.
        out[key] = best ? best->s : std::vector<std::uint8_t>(m.stimulus_count(), 1);
    }
    return out;
}

LearnDataset make_learn_dataset(std::span<const TrialRecord> human_trials,
                                const std::map<std::string, Image>& images,
                                const std::vector<std::string>& classes) {
    LearnDataset data;
    data.humans = build_matrices(human_trials);
    data.weights = DatasetWeights::from_matrices(data.humans);
    std::map<std::pair<ConditionKey, std::string>, std::string> truth;
    for (const auto& t : human_trials) {
        truth[{{t.experiment_id, t.condition_id}, t.stimulus_id}] = t.true_class;
    }
    const auto ideal = ideal_responses(data.humans);
    for (const auto& [key, m] : data.humans) {
        const auto& bits = ideal.at(key);
        for (std::size_t i = 0; i < m.stimulus_count(); ++i) {
            const auto& sid = m.stimuli()[i];
            const auto img = images.find(sid);
            if (img == images.end()) {
                throw Error(ErrorKind::Alignment, "no image for stimulus " + sid);
            }
            const auto& cls = truth.at({key, sid});
            const auto pos = std::find(classes.begin(), classes.end(), cls);
            if (pos == classes.end()) {
                throw Error(ErrorKind::Vocabulary,
                            "true class '" + cls + "' of " + sid + " unknown to the scorer");
            }
            data.items.push_back({img->second, static_cast<std::size_t>(pos - classes.begin()), key, i,
                                  bits[i]});
        }
    }
    return data;
}

std::vector<std::size_t> build_targets(std::span<const std::uint8_t> ideal,
                                       std::span<const std::vector<double>> scores,
                                       std::span<const std::size_t> true_class) {
    if (ideal.size() != scores.size() || ideal.size() != true_class.size()) {
        throw Error(ErrorKind::Parameter, "targets need one ideal bit, score vector and class each");
    }
    std::vector<std::size_t> out(ideal.size());
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        if (true_class[i] >= scores[i].size()) {
            throw Error(ErrorKind::Parameter, "true class outside the score vector");
        }
        if (ideal[i]) {
            out[i] = true_class[i];
        } else {
            if (scores[i].size() < 2) {
                throw Error(ErrorKind::Parameter,
                            "item " + std::to_string(i) + " needs a wrong answer but the "
                                                          "vocabulary has one class");
            }
            out[i] = wrong_argmax(scores[i], true_class[i]);
        }
    }
    return out;
}

FilterParams initial_params(std::size_t rows, std::size_t cols, const LearnConfig& config) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(config.init_noise_variance));
    std::vector<double> q(rows * cols);
    for (auto& v : q) v = 1.0 + (config.init_noise_variance > 0.0 ? noise(rng) : 0.0);
    return {SpectralFilter(rows, cols, std::move(q)), std::log(config.initial_tau)};
}

SpectralFilter effective_filter(const SpectralFilter& theta, double gamma) {
    const auto kernel = gaussian_kernel(gamma);
    if (kernel.size() == 1) return theta;
    std::vector<double> out(theta.quadrant().size());
    convolve_plane(theta.quadrant(), out, theta.rows(), theta.cols(), kernel);
    return SpectralFilter(theta.rows(), theta.cols(), std::move(out));
}

Image filtered_image(const Image& img, const AmplitudeMap& map) {
    return apply_spectral_filter(img, map, {.clamp = false});
}

LossTerms forward_loss(std::span<const LearnItem> items, std::span<const std::size_t> targets,
                       const FilterParams& params, const LearnConfig& config,
                       const Scorer& scorer) {
    return evaluate(items, targets, params, config, scorer, false).loss;
}

LossGradient loss_and_gradient(std::span<const LearnItem> items,
                               std::span<const std::size_t> targets, const FilterParams& params,
                               const LearnConfig& config, const Scorer& scorer) {
    return evaluate(items, targets, params, config, scorer, true);
}

nlohmann::json to_json(const std::vector<EpochRecord>& trace) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : trace) {
        j.push_back({{"epoch", r.epoch},
                     {"loss", r.loss},
                     {"data_loss", r.data_loss},
                     {"error_consistency", r.error_consistency ? nlohmann::json(*r.error_consistency)
                                                               : nlohmann::json(nullptr)},
                     {"accuracy", r.accuracy},
                     {"tau", r.tau},
                     {"max_asymmetry", r.max_asymmetry}});
    }
    return j;
}

TrainResult train_filter(const LearnDataset& data, const LearnConfig& config,
                         const Scorer& scorer) {
    config.validate();
    if (data.items.empty()) throw Error(ErrorKind::Parameter, "empty training set");
    const auto& img0 = data.items.front().image;
    if (img0.height % 2 || img0.width % 2) {
        throw Error(ErrorKind::Parameter, "filter learning needs even image dimensions");
    }
    const std::size_t rows = img0.height / 2, cols = img0.width / 2;

    FilterParams params = initial_params(rows, cols, config);
    std::vector<double> m(rows * cols, 0.0), v(rows * cols, 0.0);
    double m_tau = 0.0, v_tau = 0.0;

    TrainResult result;
    double best_key = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (std::size_t epoch = 0;; ++epoch) {
        const auto lg = loss_and_gradient(data.items, {}, params, config, scorer);
        const auto report = report_from_scores(data, lg.scores);
        const auto eff = effective_filter(params.theta, config.smooth_gamma);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = lg.loss.total();
        rec.data_loss = lg.loss.data;
        rec.error_consistency = report.error_consistency;
        rec.accuracy = report.ood_accuracy;
        rec.tau = std::exp(params.log_tau);
        rec.max_asymmetry = max_asymmetry(eff.expand());
        result.trace.push_back(rec);

        if (!(rec.loss <= config.divergence_limit)) {
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                       " (loss " + std::to_string(rec.loss) + ")",
                                   result.trace);
        }

        const double key = rec.error_consistency.value_or(-std::numeric_limits<double>::infinity());
        if (!have_best || key > best_key) {
            have_best = true;
            best_key = key;
            result.best_epoch = epoch;
            result.best_error_consistency = rec.error_consistency;
            result.params = params;
            result.filter = eff;
        }
        if (config.snapshot_every && epoch % config.snapshot_every == 0) {
            result.snapshots.push_back({epoch, eff});
        }
        if (epoch == config.epochs) break;

        // Adam step.
        const double t = static_cast<double>(epoch + 1);
        const double c1 = 1.0 - std::pow(config.adam_beta1, t);
        const double c2 = 1.0 - std::pow(config.adam_beta2, t);
        auto q = params.theta.quadrant();
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double g = lg.d_theta[k];
            m[k] = config.adam_beta1 * m[k] + (1.0 - config.adam_beta1) * g;
            v[k] = config.adam_beta2 * v[k] + (1.0 - config.adam_beta2) * g * g;
            q[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.adam_epsilon);
        }
        params.theta = SpectralFilter(rows, cols, std::move(q));
        if (config.learn_tau) {
            const double g = lg.d_log_tau;
            m_tau = config.adam_beta1 * m_tau + (1.0 - config.adam_beta1) * g;
            v_tau = config.adam_beta2 * v_tau + (1.0 - config.adam_beta2) * g * g;
            params.log_tau -=
                config.learning_rate * (m_tau / c1) / (std::sqrt(v_tau / c2) + config.adam_epsilon);
        }
    }
    return result;
}

AlignmentReport evaluate_filter(const SpectralFilter& filter, const LearnDataset& data,
                                const Scorer& scorer, FilterOptions options) {
    const auto map = filter.expand();
    std::vector<std::vector<double>> scores;
    scores.reserve(data.items.size());
    for (const auto& item : data.items) {
        scores.push_back(scorer.scores(apply_spectral_filter(item.image, map, options)));
    }
    return report_from_scores(data, scores);
}

AlignmentReport evaluate_unfiltered(const LearnDataset& data, const Scorer& scorer) {
    std::vector<std::vector<double>> scores;
    scores.reserve(data.items.size());
    for (const auto& item : data.items) scores.push_back(scorer.scores(item.image));
    return report_from_scores(data, scores);
}

double amplitude_mass_below(const SpectralFilter& filter, double radius) {
    double below = 0.0, total = 0.0;
    for (std::size_t r = 0; r < filter.rows(); ++r) {
        for (std::size_t c = 0; c < filter.cols(); ++c) {
            const double a = std::abs(filter.at(r, c));
            total += a;
            if (std::hypot(static_cast<double>(r), static_cast<double>(c)) < radius) below += a;
        }
    }
    return total > 0.0 ? below / total : 0.0;
}

}  // namespace mvh
