#include "helpers.hpp"

#include "mvh/error.hpp"
#include "mvh/filterlearn.hpp"
#include "mvh/oracle.hpp"
#include "mvh/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mvh;

namespace {

struct SmallTask {
    LinearSoftmaxScorer scorer;
    LearnDataset data;
};

const SmallTask& small_task() {
    static const SmallTask task = [] {
        SyntheticConfig sc;
        sc.size = 32;
        sc.shape_radius_hi = 5.0;
        sc.texture_radius_lo = 10.0;
        sc.texture_radius_hi = 13.0;
        sc.scorer_images_per_class = 20;
        sc.stimuli_per_condition = 16;
        sc.observers = 3;
        const auto t = make_synthetic_task(sc);
        auto scorer = train_linear_scorer(t.scorer_images, t.scorer_labels, t.classes,
                                          {.pool = 2, .epochs = 150});
        auto data = make_learn_dataset(t.trials, t.images, scorer.classes());
        return SmallTask{std::move(scorer), std::move(data)};
    }();
    return task;
}

LearnConfig quick_config() {
    LearnConfig c;
    c.l1_weight = 5e-4;
    c.smooth_gamma = 1.5;
    c.learning_rate = 0.02;
    c.epochs = 5;
    return c;
}

std::vector<double> perturbed(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(1.0, 0.3);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST(BuildTargets, IdealTakesTrueClassOtherwiseBestWrong) {
    const std::vector<std::uint8_t> ideal{1, 0, 0};
    const std::vector<std::vector<double>> scores{{0.1, 0.9, 0.3}, {0.1, 0.9, 0.3}, {5, 4, 6}};
    const std::vector<std::size_t> truth{0, 1, 2};
    EXPECT_EQ(build_targets(ideal, scores, truth), (std::vector<std::size_t>{0, 2, 0}));
}

TEST(BuildTargets, Errors) {
    const std::vector<std::uint8_t> wrong{0};
    const std::vector<std::vector<double>> one{{1.0}};
    const std::vector<std::size_t> zero{0}, far{3};
    EXPECT_THROW(build_targets(wrong, one, zero), Error);
    const std::vector<std::uint8_t> right{1};
    EXPECT_THROW(build_targets(right, one, far), Error);
    const std::vector<std::uint8_t> two{1, 1};
    EXPECT_THROW(build_targets(two, one, zero), Error);
}

TEST(IdealResponses, HitTheConditionOptimum) {
    const auto& t = small_task();
    const auto ideal = ideal_responses(t.data.humans);
    for (const auto& [key, m] : t.data.humans) {
        if (m.stimuli().size() > 18) continue;
        const auto best = oracle::brute_force_condition_optimum(m);
        const auto got = oracle::mean_kappa(ideal.at(key), m);
        ASSERT_TRUE(best.best_kappa && got);
        EXPECT_NEAR(*got, *best.best_kappa, 1e-12);
    }
}

TEST(InitialParams, OnesPlusSeededNoise) {
    LearnConfig c;
    c.init_noise_variance = 0.0;
    const auto p = initial_params(4, 5, c);
    for (double v : p.theta.quadrant()) EXPECT_EQ(v, 1.0);
    EXPECT_NEAR(std::exp(p.log_tau), 14.0, 1e-12);
    c.init_noise_variance = 1e-5;
    c.seed = 3;
    EXPECT_EQ(initial_params(4, 5, c).theta.quadrant(), initial_params(4, 5, c).theta.quadrant());
    auto other = c;
    other.seed = 4;
    EXPECT_NE(initial_params(4, 5, c).theta.quadrant(), initial_params(4, 5, other).theta.quadrant());
}

TEST(EffectiveFilter, OnesStayOnes) {
    const auto f = effective_filter(SpectralFilter::constant(8, 8, 1.0), 2.0);
    for (double v : f.quadrant()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(ForwardLoss, L1TermOfAllOnes) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.init_noise_variance = 0.0;
    const auto p = initial_params(16, 16, c);
    const auto loss = forward_loss(t.data.items, {}, p, c, t.scorer);
    EXPECT_NEAR(loss.l1, c.l1_weight * 16 * 16, 1e-12);
}

TEST(ForwardLoss, MatchesIndependentRecompute) {
    const auto& t = small_task();
    const LearnConfig c = quick_config();
    std::mt19937_64 rng(1);
    const FilterParams p{SpectralFilter(16, 16, perturbed(rng, 256)), std::log(3.0)};
    std::vector<std::size_t> targets;
    for (const auto& it : t.data.items) targets.push_back(it.true_class);

    const auto map = effective_filter(p.theta, c.smooth_gamma).expand();
    double ce = 0.0;
    for (std::size_t i = 0; i < t.data.items.size(); ++i) {
        const auto s = t.scorer.scores(filtered_image(t.data.items[i].image, map));
        std::vector<double> z;
        for (double v : s) z.push_back(v / 3.0);
        ce -= std::log(softmax(z)[targets[i]]);
    }
    ce /= static_cast<double>(t.data.items.size());
    const auto loss = forward_loss(t.data.items, targets, p, c, t.scorer);
    EXPECT_NEAR(loss.data, ce, 1e-10);
}

TEST(ForwardLoss, ShapeMismatchRejected) {
    const auto& t = small_task();
    const auto p = initial_params(8, 8, quick_config());
    EXPECT_THROW(forward_loss(t.data.items, {}, p, quick_config(), t.scorer), Error);
}

TEST(Gradient, MatchesFiniteDifferences) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.threads = 2;
    std::mt19937_64 rng(2);
    const FilterParams p{SpectralFilter(16, 16, perturbed(rng, 256)), std::log(2.0)};
    // Fixed targets: the loss is smooth in the parameters.
    const auto lg0 = loss_and_gradient(t.data.items, {}, p, c, t.scorer);
    std::vector<std::uint8_t> ideal;
    std::vector<std::size_t> truth;
    for (const auto& it : t.data.items) {
        ideal.push_back(it.ideal);
        truth.push_back(it.true_class);
    }
    const auto targets = build_targets(ideal, lg0.scores, truth);
    const auto lg = loss_and_gradient(t.data.items, targets, p, c, t.scorer);

    std::vector<double> x = p.theta.quadrant();
    x.push_back(p.log_tau);
    auto fn = [&](std::span<const double> v) {
        FilterParams q{SpectralFilter(16, 16, {v.begin(), v.end() - 1}), v.back()};
        return forward_loss(t.data.items, targets, q, c, t.scorer).total();
    };
    std::uniform_int_distribution<std::size_t> pick(0, 255);
    std::vector<std::size_t> coords{0, 1, 16, 17, 255, 256};
    while (coords.size() < 20) coords.push_back(pick(rng));
    const auto fd = oracle::finite_difference(fn, x, 1e-4, coords);
    for (std::size_t i : coords) {
        const double exact = i < 256 ? lg.d_theta[i] : lg.d_log_tau;
        const double scale = std::max(std::abs(exact), 1e-6);
        EXPECT_LT(std::abs(fd[i] - exact) / scale, 1e-4) << "coord " << i;
    }
}

TEST(Gradient, L1SubgradientWithoutData) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.l1_weight = 0.3;
    std::vector<double> q(256, 1.0);
    q[5] = -2.0;
    q[7] = 0.0;
    const FilterParams p{SpectralFilter(16, 16, q), std::log(14.0)};
    LearnConfig no_l1 = c;
    no_l1.l1_weight = 0.0;
    const auto with = loss_and_gradient(t.data.items, {}, p, c, t.scorer);
    const auto without = loss_and_gradient(t.data.items, {}, p, no_l1, t.scorer);
    EXPECT_NEAR(with.d_theta[0] - without.d_theta[0], 0.3, 1e-15);
    EXPECT_NEAR(with.d_theta[5] - without.d_theta[5], -0.3, 1e-15);
    EXPECT_NEAR(with.d_theta[7] - without.d_theta[7], 0.0, 1e-15);
}

TEST(Gradient, LargeTemperatureFlattensTauGradient) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.init_noise_variance = 0.0;
    auto p = initial_params(16, 16, c);
    p.log_tau = std::log(1e8);
    const auto lg = loss_and_gradient(t.data.items, {}, p, c, t.scorer);
    EXPECT_LT(std::abs(lg.d_log_tau), 1e-6);
}

TEST(Training, ZeroEpochsIsBaseline) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.epochs = 0;
    c.init_noise_variance = 0.0;
    const auto r = train_filter(t.data, c, t.scorer);
    ASSERT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.best_epoch, 0u);
    const auto learned = evaluate_filter(r.filter, t.data, t.scorer);
    const auto base = evaluate_unfiltered(t.data, t.scorer);
    ASSERT_TRUE(learned.error_consistency && base.error_consistency);
    EXPECT_NEAR(*learned.error_consistency, *base.error_consistency, 1e-12);
}

TEST(Training, SeedReproducibleAndSymmetric) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.seed = 9;
    c.threads = 3;
    const auto a = train_filter(t.data, c, t.scorer);
    c.threads = 1;
    const auto b = train_filter(t.data, c, t.scorer);
    EXPECT_EQ(a.filter.quadrant(), b.filter.quadrant());
    EXPECT_EQ(a.best_epoch, b.best_epoch);
    ASSERT_EQ(a.trace.size(), c.epochs + 1);
    for (const auto& rec : a.trace) EXPECT_EQ(rec.max_asymmetry, 0.0);
}

TEST(Training, BestErrorConsistencyNotBelowStart) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.epochs = 30;
    const auto r = train_filter(t.data, c, t.scorer);
    ASSERT_TRUE(r.best_error_consistency && r.trace.front().error_consistency);
    EXPECT_GE(*r.best_error_consistency, *r.trace.front().error_consistency);
    EXPECT_LT(r.trace.back().loss, r.trace.front().loss);
}

TEST(Training, StrongL1ShrinksTheFilter) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.epochs = 40;
    c.l1_weight = 0.05;
    c.learning_rate = 0.05;
    const auto r = train_filter(t.data, c, t.scorer);
    FilterParams last = r.params;
    double mean_abs = 0.0;
    for (double v : last.theta.quadrant()) mean_abs += std::abs(v);
    mean_abs /= 256.0;
    EXPECT_LT(mean_abs, 0.5);
}

TEST(Training, InvalidConfigRejected) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.learning_rate = 0.0;
    EXPECT_THROW(train_filter(t.data, c, t.scorer), Error);
    c = quick_config();
    c.initial_tau = -1.0;
    EXPECT_THROW(train_filter(t.data, c, t.scorer), Error);
}

TEST(Training, DivergenceKeepsTrace) {
    const auto& t = small_task();
    LearnConfig c = quick_config();
    c.divergence_limit = 1e-9;
    try {
        train_filter(t.data, c, t.scorer);
        FAIL() << "expected divergence";
    } catch (const TrainingDiverged& e) {
        EXPECT_EQ(e.trace().size(), 1u);
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
    }
}

TEST(AmplitudeMass, CountsCellsInsideRadius) {
    std::vector<double> q(4 * 4, 0.0);
    q[0] = 1.0;           // r = 0
    q[1 * 4 + 1] = -1.0;  // r = 1.41
    q[3 * 4 + 3] = 2.0;   // r = 4.24
    const SpectralFilter f(4, 4, q);
    EXPECT_DOUBLE_EQ(amplitude_mass_below(f, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(amplitude_mass_below(f, 10.0), 1.0);
    EXPECT_DOUBLE_EQ(amplitude_mass_below(f, 0.0), 0.0);
}
