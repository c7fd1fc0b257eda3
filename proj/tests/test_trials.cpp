#include "helpers.hpp"

#include "mvh/error.hpp"
#include "mvh/trials.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace mvh;
using namespace mvh::test;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no mvh::Error thrown";
    return ErrorKind::Io;
}

}  // namespace

TEST(LoadTrials, SingleCorrectRow) {
    const auto t = parse(csv({"e,c,o,s1,dog,dog,,"}));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_TRUE(t[0].correct());
    EXPECT_FALSE(t[0].is_cue_conflict());
    const auto m = build_matrices(t);
    EXPECT_EQ(m.begin()->second.at(0, 0), 1);
}

TEST(LoadTrials, UnknownClassNamesTheClass) {
    try {
        parse(csv({"e,c,o,s1,zebra,dog,,"}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Vocabulary);
        EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
    }
}

TEST(LoadTrials, MalformedRowReportsLine) {
    try {
        parse(csv({"e,c,o,s1,dog,dog,,", "e,c,o,s2,dog"}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(LoadTrials, DuplicateKey) {
    EXPECT_EQ(kind_of([] { parse(csv({"e,c,o,s1,dog,dog,,", "e,c,o,s1,cat,dog,,"})); }),
              ErrorKind::Duplicate);
}

TEST(LoadTrials, HalfCueLabelsRejected) {
    EXPECT_EQ(kind_of([] { parse(csv({"e,c,o,s1,dog,dog,cat,"})); }), ErrorKind::Parse);
}

TEST(LoadTrials, WrongHeader) {
    EXPECT_EQ(kind_of([] { parse("a,b,c\n"); }), ErrorKind::Parse);
}

TEST(LoadTrials, NoResponseCountsAsIncorrect) {
    const auto t = parse(csv({"e,c,o,s1,na,dog,,"}));
    EXPECT_FALSE(t[0].correct());
}

TEST(LoadTrials, MissingFileIsIoError) {
    EXPECT_EQ(kind_of([] { load_trials("/nonexistent/trials.csv", {}); }), ErrorKind::Io);
}

TEST(BuildMatrices, TwoObserversFourStimuli) {
    const auto t = parse(csv({"e,c,a,s1,dog,dog,,", "e,c,a,s2,cat,dog,,", "e,c,a,s3,car,car,,",
                              "e,c,a,s4,na,car,,", "e,c,b,s1,dog,dog,,", "e,c,b,s2,dog,dog,,",
                              "e,c,b,s3,dog,car,,", "e,c,b,s4,car,car,,"}));
    const auto m = build_matrices(t);
    ASSERT_EQ(m.size(), 1u);
    const auto& x = m.at({"e", "c"});
    EXPECT_EQ(x.observer_count(), 2u);
    EXPECT_EQ(x.stimulus_count(), 4u);
    const std::vector<std::uint8_t> expected{1, 0, 1, 0, 1, 1, 0, 1};
    EXPECT_EQ(x.cells(), expected);
    EXPECT_DOUBLE_EQ(x.observer_accuracy(0), 0.5);
    EXPECT_DOUBLE_EQ(x.observer_accuracy(1), 0.75);
}

TEST(BuildMatrices, AllCorrectTwoByThree) {
    std::vector<std::string> rows;
    for (auto o : {"a", "b"})
        for (auto s : {"x", "y", "z"}) rows.push_back(std::string("e,c,") + o + "," + s + ",dog,dog,,");
    const auto& m = build_matrices(parse(csv(rows))).at({"e", "c"});
    EXPECT_EQ(m.cells(), std::vector<std::uint8_t>(6, 1));
}

TEST(BuildMatrices, RaggedCoverageListsMissingPairs) {
    const auto t = parse(csv({"e,c,a,s1,dog,dog,,", "e,c,a,s2,dog,dog,,", "e,c,a,s3,dog,dog,,",
                              "e,c,b,s1,dog,dog,,", "e,c,b,s2,dog,dog,,"}));
    try {
        build_matrices(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
        EXPECT_NE(std::string(e.what()).find("s3"), std::string::npos) << e.what();
    }
}

TEST(BuildMatrices, SameConditionIdInTwoExperimentsStaysSeparate) {
    const auto m = build_matrices(parse(csv({"a,c,o,s1,dog,dog,,", "b,c,o,s1,cat,dog,,"})));
    EXPECT_EQ(m.size(), 2u);
}

TEST(BuildMatrices, FixtureMatchesHandComputation) {
    const auto m = build_matrices(load_trials(fixture("small_trials.csv"), benchmark_classes()));
    ASSERT_EQ(m.size(), 3u);
    const auto& low = m.at({"noise", "low"});
    EXPECT_EQ(low.observers(), (std::vector<std::string>{"s1", "s2", "s3"}));
    const std::vector<std::uint8_t> s3{1, 0, 1, 1, 1, 1};
    EXPECT_TRUE(std::equal(s3.begin(), s3.end(), low.row(2).begin()));
    EXPECT_NEAR(low.mean_accuracy(), 14.0 / 18.0, 1e-15);
}

TEST(BuildMatrices, InvariantUnderRowOrder) {
    auto t = load_trials(fixture("small_trials.csv"), benchmark_classes());
    const auto ref = build_matrices(t);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(t.begin(), t.end(), rng);
        EXPECT_EQ(build_matrices(t), ref);
    }
}

TEST(BuildMatrices, RoundTripThroughCsv) {
    const auto t = load_trials(fixture("small_trials.csv"), benchmark_classes());
    std::ostringstream out;
    write_trials(out, t);
    std::istringstream in(out.str());
    EXPECT_EQ(build_matrices(parse_trials(in, benchmark_classes())), build_matrices(t));

    // Matrices -> trials -> matrices as well.
    const auto m = build_matrices(t);
    EXPECT_EQ(build_matrices(matrices_to_trials(m)), m);
}

TEST(DatasetWeights, SumToOnePerExperiment) {
    const auto m = build_matrices(load_trials(fixture("small_trials.csv"), benchmark_classes()));
    const auto w = DatasetWeights::from_matrices(m);
    double total = 0.0, global = 0.0;
    for (const auto& k : w.keys()) {
        total += w.weight(k);
        global += w.global_weight(k);
    }
    EXPECT_NEAR(total, static_cast<double>(w.experiment_count()), 1e-15);
    EXPECT_NEAR(global, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(w.weight({"noise", "low"}), 0.5);
    EXPECT_DOUBLE_EQ(w.weight({"blur", "4"}), 1.0);
    EXPECT_DOUBLE_EQ(w.weight({"blur", "nope"}), 0.0);
}

TEST(ExcludeConditions, EmptyPolicyIsIdentity) {
    const auto m = build_matrices(load_trials(fixture("small_trials.csv"), benchmark_classes()));
    const auto r = exclude_conditions(m, {});
    EXPECT_EQ(r.matrices, m);
    EXPECT_TRUE(r.excluded.empty());
}

TEST(ExcludeConditions, ThresholdRemovesLowAccuracyCondition) {
    std::mt19937_64 rng(1);
    MatrixMap m;
    // mean accuracy 0.1 and 0.9
    m.emplace(ConditionKey{"e", "hard"},
              make_matrix({{1, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 1}},
                          {"e", "hard"}));
    m.emplace(ConditionKey{"e", "easy"},
              make_matrix({{1, 1, 1, 1, 1, 1, 1, 1, 1, 0}, {0, 1, 1, 1, 1, 1, 1, 1, 1, 1}},
                          {"e", "easy"}));
    ExclusionPolicy p;
    p.min_human_accuracy = 0.2;
    const auto r = exclude_conditions(m, p);
    ASSERT_EQ(r.excluded.size(), 1u);
    EXPECT_EQ(r.excluded[0].condition, "hard");
    EXPECT_EQ(r.weights.condition_count(), 1u);
    EXPECT_DOUBLE_EQ(r.weights.weight({"e", "easy"}), 1.0);
}

TEST(ExcludeConditions, UnknownEntryWarnsOnly) {
    const auto m = build_matrices(load_trials(fixture("small_trials.csv"), benchmark_classes()));
    ExclusionPolicy p;
    p.conditions = {"noise/low", "does-not-exist"};
    const auto r = exclude_conditions(m, p);
    EXPECT_EQ(r.matrices.size(), 2u);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("does-not-exist"), std::string::npos);
    EXPECT_DOUBLE_EQ(r.weights.weight({"noise", "high"}), 1.0);
}

TEST(ExcludeConditions, ThresholdOutsideUnitIntervalIsParameterError) {
    ExclusionPolicy p;
    p.min_human_accuracy = 1.5;
    EXPECT_EQ(kind_of([&] { exclude_conditions({}, p); }), ErrorKind::Parameter);
}
