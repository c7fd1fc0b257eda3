#include "cli.hpp"

#include "mvh/error.hpp"

#include <algorithm>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"Model-vs-human alignment toolkit"};
    app.require_subcommand(1);
    mvh::cli::CommonOptions common;
    common.threads = std::max(1u, std::thread::hardware_concurrency());

    mvh::cli::register_metrics(app, common);
    mvh::cli::register_pareto(app, common);
    mvh::cli::register_csf_fit(app, common);
    mvh::cli::register_filter(app, common);
    mvh::cli::register_learn_filter(app, common);
    mvh::cli::register_synthetic(app, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mvh::Error& e) {
        std::cerr << "error (" << mvh::to_string(e.kind()) << "): " << e.what() << '\n';
        return mvh::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
