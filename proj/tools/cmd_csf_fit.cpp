#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/oracle.hpp"
#include "mvh/psychophys.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

namespace mvh::cli {

namespace {

struct CsfFitOptions {
    double T = 0.2;
    double beta = 2.0;
    std::string target = "boxcar";
    std::vector<double> betas{1.0, 1.5, 2.0, 2.5, 3.0};
    std::string spatial_unit = "angular";
    double f_min = FrequencyRange{}.f_min;
    double f_max = FrequencyRange{}.f_max;
    std::string out = "csf_out";
};

nlohmann::json fit_json(const FitResult& r) {
    return {{"sigma_px", r.sigma_px},
            {"wrmse", r.wrmse},
            {"beta", r.beta},
            {"f_min", r.range.f_min},
            {"f_max", r.range.f_max}};
}

// Simpson in ln f of the same weighted error, from fresh target samples.
double wrmse_simpson(const Curve& target, double peak, double sigma, double beta,
                     const FitOptions& fo) {
    const double u0 = std::log(fo.range.f_min), u1 = std::log(fo.range.f_max);
    auto w = [&](double u) { return std::pow(std::exp(u), 1.0 - beta); };
    const double num = oracle::simpson(
        [&](double u) {
            const double f = std::exp(u);
            const double d = target(f) / peak - gaussian_spectrum(f, sigma, fo.degrees_per_px);
            return w(u) * d * d;
        },
        u0, u1, 512);
    const double den = oracle::simpson(w, u0, u1, 512);
    return std::sqrt(num / den);
}

void run_csf_fit(const CsfFitOptions& o, const CommonOptions& common) {
    if (!(o.T > 0.0)) throw Error(ErrorKind::Parameter, "--T must be > 0");
    FitOptions fo;
    fo.range = {o.f_min, o.f_max};
    if (!(fo.range.f_min > 0.0) || !(fo.range.f_max > fo.range.f_min)) {
        throw Error(ErrorKind::Parameter, "frequency range must satisfy 0 < f_min < f_max");
    }
    BoxcarOptions bo;
    bo.kelly.spatial_unit =
        o.spatial_unit == "cpd" ? SpatialUnit::CyclesPerDegree : SpatialUnit::Angular;
    Curve target;
    if (o.target == "boxcar") {
        target = [bo, T = o.T](double f) { return boxcar_csf(f, T, bo); };
    } else {
        target = [](double f) { return williams_mtf(f); };
    }

    const auto grid = log_grid(fo.range);
    const auto raw = sample(target, grid);
    const auto normalized = normalize_max(raw);
    const double peak = *std::max_element(raw.begin(), raw.end());
    const auto fit = fit_sigma(raw, o.beta, fo);

    std::vector<FitResult> sweep;
    for (double b : o.betas) sweep.push_back(fit_sigma(raw, b, fo));

    if (common.verify) {
        const double ref = wrmse_simpson(target, peak, fit.sigma_px, o.beta, fo);
        if (std::abs(ref - fit.wrmse) > 1e-3 * std::max(ref, 1e-12) + 1e-9) {
            throw Error(ErrorKind::Numeric, "verify: trapezoid wrmse " + std::to_string(fit.wrmse) +
                                                " vs Simpson " + std::to_string(ref));
        }
        const bool interior = fit.sigma_px > fo.sigma_lo + 0.01 && fit.sigma_px < fo.sigma_hi - 0.01;
        if (interior) {
            auto cost = [&](double s) {
                return wrmse_sampled(grid, normalized,
                                     sample([&](double f) {
                                         return gaussian_spectrum(f, s, fo.degrees_per_px);
                                     }, grid),
                                     o.beta);
            };
            if (cost(fit.sigma_px - 0.01) < fit.wrmse || cost(fit.sigma_px + 0.01) < fit.wrmse) {
                throw Error(ErrorKind::Numeric, "verify: fitted sigma is not a local minimum");
            }
        }
        std::cout << "verify: Simpson wrmse " << ref << (interior ? ", local minimum confirmed" :
                                                          ", minimum sits on the search bound")
                  << '\n';
    }

    const std::filesystem::path dir(o.out);
    ensure_dir(dir);
    Manifest manifest("csf-fit", {{"T", o.T},
                                  {"beta", o.beta},
                                  {"target", o.target},
                                  {"betas", o.betas},
                                  {"spatial_unit", o.spatial_unit},
                                  {"f_min", o.f_min},
                                  {"f_max", o.f_max},
                                  {"grid_nodes", grid.size()},
                                  {"degrees_per_px", fo.degrees_per_px},
                                  {"verify", common.verify}});
    {
        const auto path = dir / "fit.json";
        nlohmann::json j = fit_json(fit);
        j["target"] = o.target;
        j["T"] = o.T;
        j["target_peak_cpd"] = grid[static_cast<std::size_t>(
            std::max_element(raw.begin(), raw.end()) - raw.begin())];
        j["at_search_bound"] = fit.sigma_px <= fo.sigma_lo + 1e-3 || fit.sigma_px >= fo.sigma_hi - 1e-3;
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << j.dump(2) << '\n';
        out.close();
        manifest.add_artifact(path);
    }
    {
        const auto path = dir / "curves.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << std::setprecision(12) << "f_cpd,target,gaussian\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out << grid[i] << ',' << normalized[i] << ','
                << gaussian_spectrum(grid[i], fit.sigma_px, fo.degrees_per_px) << '\n';
        }
        out.close();
        manifest.add_artifact(path);
    }
    {
        const auto path = dir / "beta_sweep.csv";
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << std::setprecision(12) << "beta,sigma_px,wrmse\n";
        for (const auto& r : sweep) out << r.beta << ',' << r.sigma_px << ',' << r.wrmse << '\n';
        out.close();
        manifest.add_artifact(path);
    }
    manifest.write(dir);

    std::cout << std::setprecision(6) << "sigma_px " << fit.sigma_px << " wrmse " << fit.wrmse
              << " (beta " << o.beta << ")\n";
    for (const auto& r : sweep) std::cout << "  beta " << r.beta << " -> sigma " << r.sigma_px << '\n';
}

}  // namespace

void register_csf_fit(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<CsfFitOptions>();
    auto* sub = app.add_subcommand("csf-fit", "Best Gaussian blur for a CSF or optical MTF");
    sub->add_option("--T", o->T, "Presentation time in seconds")->capture_default_str();
    sub->add_option("--beta", o->beta, "Frequency weighting exponent")->capture_default_str();
    sub->add_option("--target", o->target, "Curve to approximate")
        ->check(CLI::IsMember({"boxcar", "mtf"}))
        ->capture_default_str();
    sub->add_option("--betas", o->betas, "Exponents for the sweep CSV")->capture_default_str();
    sub->add_option("--spatial-unit", o->spatial_unit, "Frequency unit inside the Kelly CSF")
        ->check(CLI::IsMember({"angular", "cpd"}))
        ->capture_default_str();
    sub->add_option("--f-min", o->f_min, "Lower fit frequency, cpd")->capture_default_str();
    sub->add_option("--f-max", o->f_max, "Upper fit frequency, cpd")->capture_default_str();
    sub->add_option("--out", o->out, "Output directory")->capture_default_str();
    add_common_options(sub, common);
    sub->callback([o, &common] { run_csf_fit(*o, common); });
}

}  // namespace mvh::cli
