#include "mvh/scorer.hpp"

#include "mvh/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mvh {

std::vector<double> softmax(std::span<const double> z) {
    std::vector<double> p(z.begin(), z.end());
    if (p.empty()) return p;
    const double m = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (auto& v : p) {
        v = std::exp(v - m);
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

LinearSoftmaxScorer::LinearSoftmaxScorer(std::vector<std::string> classes, std::size_t width,
                                         std::size_t height, std::size_t channels,
                                         std::size_t pool, std::vector<double> weights,
                                         std::vector<double> bias)
    : classes_(std::move(classes)),
      width_(width),
      height_(height),
      channels_(channels),
      pool_(pool),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
    if (pool_ == 0 || width_ % pool_ != 0 || height_ % pool_ != 0) {
        throw Error(ErrorKind::Parameter, "pool size must divide the image size");
    }
    if (classes_.size() < 2) throw Error(ErrorKind::Parameter, "scorer needs >= 2 classes");
    if (weights_.size() != classes_.size() * feature_count() || bias_.size() != classes_.size()) {
        throw Error(ErrorKind::Parameter, "scorer parameter sizes do not match its shape");
    }
}

void LinearSoftmaxScorer::check_shape(const Image& img) const {
    if (img.width != width_ || img.height != height_ || img.channels != channels_) {
        throw Error(ErrorKind::Parameter,
                    "scorer expects " + std::to_string(width_) + "x" + std::to_string(height_) +
                        "x" + std::to_string(channels_) + " images");
    }
}

std::vector<double> LinearSoftmaxScorer::features(const Image& img) const {
    check_shape(img);
    const std::size_t pw = width_ / pool_, ph = height_ / pool_;
    std::vector<double> phi(feature_count(), 0.0);
    const double norm = 1.0 / static_cast<double>(pool_ * pool_);
    for (std::size_t c = 0; c < channels_; ++c) {
        for (std::size_t y = 0; y < height_; ++y) {
            for (std::size_t x = 0; x < width_; ++x) {
                phi[(c * ph + y / pool_) * pw + x / pool_] += img.at(c, y, x) * norm;
            }
        }
    }
    return phi;
}

std::vector<double> LinearSoftmaxScorer::scores(const Image& img) const {
    const auto phi = features(img);
    const std::size_t f = phi.size();
    std::vector<double> s(bias_);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double* w = weights_.data() + k * f;
        for (std::size_t i = 0; i < f; ++i) s[k] += w[i] * phi[i];
    }
    return s;
}

Image LinearSoftmaxScorer::input_gradient(const Image& img, std::span<const double> dscores) const {
    check_shape(img);
    if (dscores.size() != classes_.size()) {
        throw Error(ErrorKind::Parameter, "score gradient has the wrong length");
    }
    const std::size_t f = feature_count();
    std::vector<double> dphi(f, 0.0);
    for (std::size_t k = 0; k < dscores.size(); ++k) {
        const double* w = weights_.data() + k * f;
        for (std::size_t i = 0; i < f; ++i) dphi[i] += dscores[k] * w[i];
    }
    const std::size_t pw = width_ / pool_, ph = height_ / pool_;
    const double norm = 1.0 / static_cast<double>(pool_ * pool_);
    Image g(width_, height_, channels_);
    for (std::size_t c = 0; c < channels_; ++c) {
        for (std::size_t y = 0; y < height_; ++y) {
            for (std::size_t x = 0; x < width_; ++x) {
                g.at(c, y, x) = dphi[(c * ph + y / pool_) * pw + x / pool_] * norm;
            }
        }
    }
    return g;
}

nlohmann::json LinearSoftmaxScorer::to_json() const {
    return {{"type", "linear-softmax"}, {"classes", classes_}, {"width", width_},
            {"height", height_},        {"channels", channels_}, {"pool", pool_},
            {"weights", weights_},      {"bias", bias_}};
}

LinearSoftmaxScorer LinearSoftmaxScorer::from_json(const nlohmann::json& j) {
    try {
        if (j.at("type").get<std::string>() != "linear-softmax") {
            throw Error(ErrorKind::Parse, "unknown scorer type " + j.at("type").dump());
        }
        return LinearSoftmaxScorer(j.at("classes").get<std::vector<std::string>>(),
                                   j.at("width").get<std::size_t>(), j.at("height").get<std::size_t>(),
                                   j.at("channels").get<std::size_t>(), j.at("pool").get<std::size_t>(),
                                   j.at("weights").get<std::vector<double>>(),
                                   j.at("bias").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed scorer: ") + e.what());
    }
}

void LinearSoftmaxScorer::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write scorer " + path.string());
    out << to_json().dump() << '\n';
}

LinearSoftmaxScorer LinearSoftmaxScorer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open scorer " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return from_json(j);
}

LinearSoftmaxScorer train_linear_scorer(std::span<const Image> images,
                                        std::span<const std::size_t> labels,
                                        std::vector<std::string> classes,
                                        const ScorerTrainConfig& config) {
    if (images.empty() || images.size() != labels.size()) {
        throw Error(ErrorKind::Parameter, "scorer training needs one label per image");
    }
    const auto& first = images.front();
    const std::size_t n_classes = classes.size();
    LinearSoftmaxScorer model(classes, first.width, first.height, first.channels, config.pool,
                              std::vector<double>(n_classes * first.plane_size() * first.channels /
                                                      (config.pool * config.pool),
                                                  0.0),
                              std::vector<double>(n_classes, 0.0));
    const std::size_t f = model.feature_count();

    std::vector<std::vector<double>> phis;
    phis.reserve(images.size());
    for (const auto& img : images) phis.push_back(model.features(img));
    for (auto l : labels) {
        if (l >= n_classes) throw Error(ErrorKind::Parameter, "label out of range");
    }

    std::vector<double> w(n_classes * f, 0.0), b(n_classes, 0.0);
    std::vector<double> mw(w.size(), 0.0), vw(w.size(), 0.0), mb(b.size(), 0.0), vb(b.size(), 0.0);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double inv_n = 1.0 / static_cast<double>(images.size());
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
        for (std::size_t i = 0; i < phis.size(); ++i) {
            std::vector<double> s(b);
            for (std::size_t k = 0; k < n_classes; ++k) {
                for (std::size_t j = 0; j < f; ++j) s[k] += w[k * f + j] * phis[i][j];
            }
            auto p = softmax(s);
            p[labels[i]] -= 1.0;
            for (std::size_t k = 0; k < n_classes; ++k) {
                gb[k] += p[k] * inv_n;
                for (std::size_t j = 0; j < f; ++j) gw[k * f + j] += p[k] * phis[i][j] * inv_n;
            }
        }
        for (std::size_t j = 0; j < w.size(); ++j) gw[j] += config.l2 * w[j];
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(epoch));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(epoch));
        auto step = [&](std::vector<double>& x, const std::vector<double>& g, std::vector<double>& m,
                        std::vector<double>& v) {
            for (std::size_t j = 0; j < x.size(); ++j) {
                m[j] = b1 * m[j] + (1 - b1) * g[j];
                v[j] = b2 * v[j] + (1 - b2) * g[j] * g[j];
                x[j] -= config.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
            }
        };
        step(w, gw, mw, vw);
        step(b, gb, mb, vb);
    }
    return LinearSoftmaxScorer(std::move(classes), first.width, first.height, first.channels,
                               config.pool, std::move(w), std::move(b));
}

}  // namespace mvh
