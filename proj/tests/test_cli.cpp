#include "helpers.hpp"

#include "mvh/image.hpp"
#include "mvh/imagefilter.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mvh;
using namespace mvh::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mvh_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string("\"") + MVH_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    const auto dir = scratch("usage");
    EXPECT_EQ(run("", dir / "log"), 2);
    EXPECT_EQ(run("metrics", dir / "log"), 2);
    EXPECT_EQ(run("nonsense", dir / "log"), 2);
    EXPECT_EQ(run("csf-fit --T -1 --out " + q(dir / "o"), dir / "log"), 2);
    EXPECT_EQ(run("--help", dir / "log"), 0);
}

TEST(Cli, MissingInputExitsThree) {
    const auto dir = scratch("missing");
    EXPECT_EQ(run("pareto --trials " + q(dir / "absent.csv") + " --out " + q(dir / "o"), dir / "log"),
              3);
}

TEST(Cli, HighpassOutOfRangeExitsTwo) {
    const auto dir = scratch("highpass");
    EXPECT_EQ(run("filter --op highpass --cutoff 1000 --input " + q(fixture("images/camera.png")) +
                      " --output " + q(dir / "o"),
                  dir / "log"),
              2);
}

TEST(Cli, PointCapExitsFive) {
    const auto dir = scratch("cap");
    EXPECT_EQ(run("pareto --trials " + q(fixture("small_trials.csv")) + " --max-points 2 --out " +
                      q(dir / "o"),
                  dir / "log"),
              5);
}

TEST(Cli, MetricsMatchOracleValues) {
    const auto dir = scratch("metrics");
    ASSERT_EQ(run("metrics --verify --trials " + q(fixture("small_trials.csv")) +
                      " --model-trials " + q(fixture("small_model_trials.csv")) + " --out " +
                      q(dir / "o"),
                  dir / "log"),
              0)
        << slurp(dir / "log");
    const auto report = read_json(dir / "o/report.json");
    EXPECT_NEAR(report["error_consistency"].get<double>(), 0.23908730158730163, 1e-12);
    EXPECT_NEAR(report["ood_accuracy"].get<double>(), 0.5833333333333333, 1e-12);
    EXPECT_NEAR(report["inter_human_consistency"].get<double>(), 0.36130952380952386, 1e-12);
    EXPECT_TRUE(fs::exists(dir / "o/per_condition.csv"));

    const auto manifest = read_json(dir / "o/manifest.json");
    EXPECT_EQ(manifest["subcommand"], "metrics");
    ASSERT_TRUE(manifest["artifacts"].is_array());
    for (const auto& a : manifest["artifacts"]) {
        EXPECT_EQ(a["sha256"].get<std::string>().size(), 64u);
        EXPECT_EQ(a["bytes"].get<std::uintmax_t>(),
                  fs::file_size(dir / "o" / a["path"].get<std::string>()));
    }
}

TEST(Cli, ParetoIsDeterministic) {
    const auto dir = scratch("pareto");
    const std::string args = "pareto --verify --threads 3 --certificates --trials " +
                             q(fixture("small_trials.csv")) + " --out ";
    ASSERT_EQ(run(args + q(dir / "a"), dir / "log"), 0) << slurp(dir / "log");
    ASSERT_EQ(run(args + q(dir / "b"), dir / "log"), 0);
    for (const char* f : {"frontier.csv", "condition_sweeps.csv", "certificates.json", "manifest.json"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const auto frontier = slurp(dir / "a/frontier.csv");
    EXPECT_EQ(frontier.rfind("accuracy,kappa\n", 0), 0u);
    EXPECT_EQ(std::count(frontier.begin(), frontier.end(), '\n'), 12);
    const auto manifest = read_json(dir / "a/manifest.json");
    EXPECT_NEAR(manifest["max_point"]["kappa"].get<double>(), 0.6646825396825398, 1e-12);
}

TEST(Cli, BlurSigmaZeroKeepsPixels) {
    const auto dir = scratch("blur0");
    ASSERT_EQ(run("filter --op blur --sigma 0 --input " + q(fixture("images")) + " --output " +
                      q(dir / "o"),
                  dir / "log"),
              0)
        << slurp(dir / "log");
    for (const auto& p : list_png_inputs(fixture("images"))) {
        EXPECT_EQ(read_png(dir / "o" / p.filename()).data, read_png(p).data) << p;
    }
}

TEST(Cli, CsfFilterMatchesLibrary) {
    const auto dir = scratch("csf");
    const auto input = fixture("images/astronaut.png");
    ASSERT_EQ(run("filter --verify --op csf --T 0.2 --input " + q(input) + " --output " + q(dir / "o"),
                  dir / "log"),
              0)
        << slurp(dir / "log");
    const auto img = read_png(input);
    const auto expected =
        quantize_8bit(apply_spectral_filter(img, csf_filter(0.2, img.height, img.width)));
    EXPECT_EQ(read_png(dir / "o/astronaut.png").data, expected.data);
    EXPECT_TRUE(fs::exists(dir / "o/manifest.json"));
}

TEST(Cli, CsfFitInRangeWithSweep) {
    const auto dir = scratch("csffit");
    ASSERT_EQ(run("csf-fit --verify --T 0.2 --beta 2 --betas 1.5 2 --out " + q(dir / "o"),
                  dir / "log"),
              0)
        << slurp(dir / "log");
    const auto fit = read_json(dir / "o/fit.json");
    const double sigma = fit["sigma_px"].get<double>();
    EXPECT_GE(sigma, 2.0);
    EXPECT_LE(sigma, 3.0);
    const auto sweep = slurp(dir / "o/beta_sweep.csv");
    EXPECT_EQ(sweep.rfind("beta,sigma_px,wrmse\n", 0), 0u);
    EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 3);
    EXPECT_TRUE(fs::exists(dir / "o/curves.csv"));
}

TEST(Cli, SyntheticThenLearnFilter) {
    const auto dir = scratch("learn");
    ASSERT_EQ(run("synthetic --stimuli 12 --observers 3 --out " + q(dir / "syn"), dir / "log"), 0)
        << slurp(dir / "log");
    ASSERT_EQ(run("learn-filter --verify --epochs 3 --gamma 3 --trials " + q(dir / "syn/trials.csv") +
                      " --images " + q(dir / "syn/images") + " --scorer " +
                      q(dir / "syn/scorer.json") + " --out " + q(dir / "filter.csv"),
                  dir / "log"),
              0)
        << slurp(dir / "log");
    const auto f = SpectralFilter::load_csv(dir / "filter.csv");
    EXPECT_EQ(f.rows(), 32u);
    EXPECT_EQ(f.cols(), 32u);
    const auto trace = read_json(dir / "filter.csv.trace.json");
    EXPECT_EQ(trace["epochs"].size(), 4u);
}
