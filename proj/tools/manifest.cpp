#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/trials.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace mvh::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot hash " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::Io, "sha256 unavailable");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

Manifest::Manifest(std::string subcommand, nlohmann::json config)
    : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

void Manifest::add_artifact(const std::filesystem::path& path) { artifacts_.push_back(path); }

nlohmann::json Manifest::to_json(const std::filesystem::path& base) const {
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& p : artifacts_) {
        arts.push_back({{"path", std::filesystem::relative(p, base).generic_string()},
                        {"bytes", std::filesystem::file_size(p)},
                        {"sha256", sha256_file(p)}});
    }
    nlohmann::json j = {{"schema", 1},
                        {"subcommand", subcommand_},
                        {"config", config_},
                        {"artifacts", arts}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    return j;
}

std::filesystem::path Manifest::write(const std::filesystem::path& dir) const {
    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << to_json(dir).dump(2) << '\n';
    return path;
}

std::vector<std::string> parse_vocabulary(const std::string& spec) {
    if (spec == "benchmark") return benchmark_classes();
    if (spec == "any") return {};
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw Error(ErrorKind::Parameter, "empty class list");
    return out;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void add_common_options(CLI::App* sub, CommonOptions& common) {
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_flag("--verify", common.verify, "Cross-check results against the slow oracles");
}

}  // namespace mvh::cli
