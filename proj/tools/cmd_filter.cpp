#include "cli.hpp"

#include "mvh/error.hpp"
#include "mvh/image.hpp"
#include "mvh/imagefilter.hpp"
#include "mvh/parallel.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <utility>

namespace mvh::cli {

namespace {

struct FilterCmdOptions {
    std::string input;
    std::string output;
    std::string op;
    double sigma = 0.0;
    std::size_t target_res = 64;
    double cutoff = 0.0;
    std::string filter_file;
    double T = 0.2;
};

using Size = std::pair<std::size_t, std::size_t>;  // height, width

void run_filter(const FilterCmdOptions& o, const CommonOptions& common) {
    const auto inputs = list_png_inputs(o.input);
    if (inputs.empty()) throw Error(ErrorKind::Io, "no PNG images under " + o.input);
    std::vector<Image> images(inputs.size());
    parallel_for(inputs.size(), common.threads,
                 [&](std::size_t i) { images[i] = read_png(inputs[i]); });

    const bool spectral = o.op == "csf" || o.op == "mtf" || o.op == "spectral" || o.op == "highpass";
    std::map<Size, AmplitudeMap> maps;
    if (spectral) {
        std::optional<SpectralFilter> file_filter;
        if (o.op == "spectral") file_filter = SpectralFilter::load_csv(o.filter_file);
        for (const auto& img : images) {
            const Size size{img.height, img.width};
            if (maps.count(size)) continue;
            if (o.op == "csf") {
                maps[size] = csf_filter(o.T, img.height, img.width);
            } else if (o.op == "mtf") {
                maps[size] = mtf_filter(img.height, img.width);
            } else if (o.op == "highpass") {
                maps[size] = highpass_map(img.height, img.width, o.cutoff);
            } else {
                if (file_filter->rows() * 2 != img.height || file_filter->cols() * 2 != img.width) {
                    throw Error(ErrorKind::Parameter,
                                "filter quadrant " + std::to_string(file_filter->rows()) + "x" +
                                    std::to_string(file_filter->cols()) + " does not fit a " +
                                    std::to_string(img.height) + "x" + std::to_string(img.width) +
                                    " image");
                }
                maps[size] = file_filter->expand();
            }
        }
    }

    const FilterOptions fopts;
    std::vector<Image> outputs(images.size());
    std::vector<double> residues(images.size(), 0.0);
    parallel_for(images.size(), common.threads, [&](std::size_t i) {
        const auto& img = images[i];
        if (o.op == "blur") {
            outputs[i] = gaussian_blur(img, o.sigma);
        } else if (o.op == "resize") {
            outputs[i] = resize_roundtrip(img, o.target_res);
        } else {
            FilterDiagnostics diag;
            outputs[i] = apply_spectral_filter(img, maps.at({img.height, img.width}), fopts, &diag);
            residues[i] = diag.max_imag;
        }
    });

    if (common.verify) {
        const double worst = *std::max_element(residues.begin(), residues.end());
        if (spectral) {
            if (!(worst < kImagResidueLimit)) {
                throw Error(ErrorKind::Numeric, "verify: imaginary residue " + std::to_string(worst));
            }
            for (const auto& [size, map] : maps) {
                if (!map.is_point_symmetric()) {
                    throw Error(ErrorKind::Numeric, "verify: filter map is not point symmetric");
                }
            }
            std::cout << "verify: max imaginary residue " << worst << ", maps point symmetric\n";
        }
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (!outputs[i].same_shape(images[i])) {
                throw Error(ErrorKind::Numeric, "verify: output shape differs for " +
                                                    inputs[i].filename().string());
            }
        }
        std::cout << "verify: " << images.size() << " outputs keep their input shape\n";
    }

    const std::filesystem::path dir(o.output);
    ensure_dir(dir);
    Manifest manifest("filter", {{"input", o.input},
                                 {"output", o.output},
                                 {"op", o.op},
                                 {"sigma", o.sigma},
                                 {"target_res", o.target_res},
                                 {"cutoff", o.cutoff},
                                 {"filter_file", o.filter_file},
                                 {"T", o.T},
                                 {"clamp", fopts.clamp},
                                 {"threads", common.threads},
                                 {"verify", common.verify}});
    std::vector<std::filesystem::path> written(images.size());
    parallel_for(images.size(), common.threads, [&](std::size_t i) {
        written[i] = dir / inputs[i].filename();
        write_png(written[i], outputs[i]);
    });
    for (const auto& p : written) manifest.add_artifact(p);
    if (!o.filter_file.empty()) manifest.set("filter_sha256", sha256_file(o.filter_file));
    manifest.write(dir);
    std::cout << "filtered " << images.size() << " image(s) with " << o.op << '\n';
}

}  // namespace

void register_filter(CLI::App& app, CommonOptions& common) {
    auto o = std::make_shared<FilterCmdOptions>();
    auto* sub = app.add_subcommand("filter", "Apply a low-pass, high-pass or Fourier filter to PNGs");
    sub->add_option("--input", o->input, "PNG file or directory")->required();
    sub->add_option("--output", o->output, "Output directory")->required();
    sub->add_option("--op", o->op, "Operation")
        ->required()
        ->check(CLI::IsMember({"blur", "resize", "highpass", "csf", "mtf", "spectral"}));
    sub->add_option("--sigma", o->sigma, "Blur sigma in pixels")->capture_default_str();
    sub->add_option("--target-res", o->target_res, "Intermediate resolution of the resize round trip")
        ->capture_default_str();
    sub->add_option("--cutoff", o->cutoff, "High-pass cutoff in cycles/image")->capture_default_str();
    sub->add_option("--filter-file", o->filter_file, "Quadrant CSV for --op spectral");
    sub->add_option("--T", o->T, "Presentation time for --op csf, seconds")->capture_default_str();
    add_common_options(sub, common);
    sub->callback([o, &common] {
        if (o->op == "spectral" && o->filter_file.empty()) {
            throw Error(ErrorKind::Parameter, "--op spectral needs --filter-file");
        }
        run_filter(*o, common);
    });
}

}  // namespace mvh::cli
