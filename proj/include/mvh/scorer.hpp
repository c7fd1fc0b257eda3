#pragma once

#include "mvh/image.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvh {

/// Differentiable map from an image to one score per class.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual const std::vector<std::string>& classes() const = 0;
    std::size_t class_count() const { return classes().size(); }

    virtual std::vector<double> scores(const Image& img) const = 0;
    /// Gradient of sum_k dscores[k] * scores(img)[k] with respect to the pixels.
    virtual Image input_gradient(const Image& img, std::span<const double> dscores) const = 0;
};

/// Affine classifier on block-averaged pixels: scores = W phi(x) + b.
class LinearSoftmaxScorer final : public Scorer {
public:
    LinearSoftmaxScorer(std::vector<std::string> classes, std::size_t width, std::size_t height,
                        std::size_t channels, std::size_t pool, std::vector<double> weights,
                        std::vector<double> bias);

    const std::vector<std::string>& classes() const override { return classes_; }
    std::vector<double> scores(const Image& img) const override;
    Image input_gradient(const Image& img, std::span<const double> dscores) const override;

    std::size_t feature_count() const { return channels_ * (height_ / pool_) * (width_ / pool_); }
    std::vector<double> features(const Image& img) const;

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t channels() const { return channels_; }
    std::size_t pool() const { return pool_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& bias() const { return bias_; }

    nlohmann::json to_json() const;
    static LinearSoftmaxScorer from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static LinearSoftmaxScorer load(const std::filesystem::path& path);

private:
    void check_shape(const Image& img) const;

    std::vector<std::string> classes_;
    std::size_t width_, height_, channels_, pool_;
    std::vector<double> weights_;  // classes x features, row-major
    std::vector<double> bias_;
};

struct ScorerTrainConfig {
    std::size_t pool = 2;
    std::size_t epochs = 300;
    double learning_rate = 0.01;
    double l2 = 1e-4;
};

/// Multinomial logistic regression fitted by full-batch Adam.
LinearSoftmaxScorer train_linear_scorer(std::span<const Image> images,
                                        std::span<const std::size_t> labels,
                                        std::vector<std::string> classes,
                                        const ScorerTrainConfig& config = {});

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> z);

std::size_t argmax(std::span<const double> v);

}  // namespace mvh
