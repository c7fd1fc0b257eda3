#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mvh::cli {

struct CommonOptions {
    unsigned threads = 1;
    bool verify = false;
};

/// Resolved configuration plus hashes of everything a run wrote.
class Manifest {
public:
    Manifest(std::string subcommand, nlohmann::json config);

    void add_artifact(const std::filesystem::path& path);
    void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
    nlohmann::json to_json(const std::filesystem::path& base) const;
    /// Writes manifest.json into dir.
    std::filesystem::path write(const std::filesystem::path& dir) const;

private:
    std::string subcommand_;
    nlohmann::json config_;
    nlohmann::json extra_ = nlohmann::json::object();
    std::vector<std::filesystem::path> artifacts_;
};

std::string sha256_file(const std::filesystem::path& path);

/// "benchmark" for the 16 benchmark classes, "any" for no check, else a
/// comma-separated list.
std::vector<std::string> parse_vocabulary(const std::string& spec);

void ensure_dir(const std::filesystem::path& dir);

// Each register_* adds a subcommand whose callback runs the command.
void register_metrics(CLI::App& app, CommonOptions& common);
void register_pareto(CLI::App& app, CommonOptions& common);
void register_csf_fit(CLI::App& app, CommonOptions& common);
void register_filter(CLI::App& app, CommonOptions& common);
void register_learn_filter(CLI::App& app, CommonOptions& common);
void register_synthetic(CLI::App& app, CommonOptions& common);

// Adds --threads and --verify to a subcommand.
void add_common_options(CLI::App* sub, CommonOptions& common);

}  // namespace mvh::cli
