#include "mvh/imagefilter.hpp"

#include "mvh/error.hpp"
#include "mvh/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace mvh {

namespace {

std::size_t reflect_index(long i, std::size_t n) {
    if (n == 1) return 0;
    const long period = 2 * static_cast<long>(n - 1);
    i = std::abs(i) % period;
    if (i >= static_cast<long>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

// One separable pass. Stride/count describe the lines being filtered.
void convolve_lines(const double* in, double* out, std::size_t lines, std::size_t length,
                    std::size_t line_stride, std::size_t step, std::span<const double> kernel,
                    bool adjoint) {
    const long radius = static_cast<long>(kernel.size() / 2);
    for (std::size_t l = 0; l < lines; ++l) {
        const double* src = in + l * line_stride;
        double* dst = out + l * line_stride;
        if (adjoint) {
            for (std::size_t i = 0; i < length; ++i) dst[i * step] = 0.0;
        }
        for (std::size_t i = 0; i < length; ++i) {
            if (adjoint) {
                const double g = src[i * step];
                for (long t = -radius; t <= radius; ++t) {
                    dst[reflect_index(static_cast<long>(i) + t, length) * step] +=
                        kernel[static_cast<std::size_t>(t + radius)] * g;
                }
            } else {
                double acc = 0.0;
                for (long t = -radius; t <= radius; ++t) {
                    acc += kernel[static_cast<std::size_t>(t + radius)] *
                           src[reflect_index(static_cast<long>(i) + t, length) * step];
                }
                dst[i * step] = acc;
            }
        }
    }
}

void convolve(std::span<const double> in, std::span<double> out, std::size_t height,
              std::size_t width, std::span<const double> kernel, bool adjoint) {
    if (in.size() != height * width || out.size() != height * width) {
        throw Error(ErrorKind::Parameter, "plane size mismatch in convolution");
    }
    std::vector<double> tmp(in.size());
    // Rows, then columns. The adjoint runs the passes in reverse order.
    if (!adjoint) {
        convolve_lines(in.data(), tmp.data(), height, width, width, 1, kernel, false);
        convolve_lines(tmp.data(), out.data(), width, height, 1, width, kernel, false);
    } else {
        convolve_lines(in.data(), tmp.data(), width, height, 1, width, kernel, true);
        convolve_lines(tmp.data(), out.data(), height, width, width, 1, kernel, true);
    }
}

double bicubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

struct Taps {
    std::size_t first = 0;
    std::vector<double> w;
};

// Per output sample: first input index and normalized weights.
std::vector<Taps> resample_taps(std::size_t in_size, std::size_t out_size) {
    const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
    const double filter_scale = std::max(scale, 1.0);
    const double support = 2.0 * filter_scale;
    std::vector<Taps> taps(out_size);
    for (std::size_t o = 0; o < out_size; ++o) {
        const double center = (static_cast<double>(o) + 0.5) * scale;
        const long lo = std::max(0L, static_cast<long>(center - support + 0.5));
        const long hi = std::min(static_cast<long>(in_size), static_cast<long>(center + support + 0.5));
        auto& t = taps[o];
        t.first = static_cast<std::size_t>(lo);
        double sum = 0.0;
        for (long i = lo; i < hi; ++i) {
            const double w = bicubic((static_cast<double>(i) - center + 0.5) / filter_scale);
            t.w.push_back(w);
            sum += w;
        }
        if (sum != 0.0) {
            for (auto& w : t.w) w /= sum;
        }
    }
    return taps;
}

std::vector<double> resample_plane(std::span<const double> in, std::size_t w, std::size_t h,
                                   std::size_t nw, std::size_t nh) {
    const auto tx = resample_taps(w, nw);
    const auto ty = resample_taps(h, nh);
    std::vector<double> mid(h * nw);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < nw; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < tx[x].w.size(); ++k) {
                acc += tx[x].w[k] * in[y * w + tx[x].first + k];
            }
            mid[y * nw + x] = acc;
        }
    }
    std::vector<double> out(nh * nw);
    for (std::size_t y = 0; y < nh; ++y) {
        for (std::size_t x = 0; x < nw; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < ty[y].w.size(); ++k) {
                acc += ty[y].w[k] * mid[(ty[y].first + k) * nw + x];
            }
            out[y * nw + x] = acc;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::Parameter, "blur sigma must be finite and >= 0, got " + fmt(sigma));
    }
    if (sigma == 0.0) return {1.0};
    const auto radius = static_cast<long>(std::ceil(4.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

void convolve_plane(std::span<const double> in, std::span<double> out, std::size_t height,
                    std::size_t width, std::span<const double> kernel) {
    convolve(in, out, height, width, kernel, false);
}

void convolve_plane_adjoint(std::span<const double> in, std::span<double> out,
                            std::size_t height, std::size_t width,
                            std::span<const double> kernel) {
    convolve(in, out, height, width, kernel, true);
}

Image gaussian_blur(const Image& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    if (kernel.size() == 1) return img;
    Image out(img.width, img.height, img.channels);
    for (std::size_t c = 0; c < img.channels; ++c) {
        convolve_plane(img.plane(c), out.plane(c), img.height, img.width, kernel);
    }
    return out;
}

Image resize_bicubic(const Image& img, std::size_t new_width, std::size_t new_height) {
    if (new_width == 0 || new_height == 0) {
        throw Error(ErrorKind::Parameter, "resize target must be at least 1x1");
    }
    Image out(new_width, new_height, img.channels);
    for (std::size_t c = 0; c < img.channels; ++c) {
        const auto plane = resample_plane(img.plane(c), img.width, img.height, new_width, new_height);
        std::copy(plane.begin(), plane.end(), out.plane(c).begin());
    }
    return out;
}

Image resize_roundtrip(const Image& img, std::size_t r1) {
    if (r1 < 1) throw Error(ErrorKind::Parameter, "target resolution must be >= 1");
    if (r1 > std::max(img.width, img.height)) {
        throw Error(ErrorKind::Parameter, "target resolution " + std::to_string(r1) +
                                              " exceeds the image size");
    }
    return resize_bicubic(resize_bicubic(img, r1, r1), img.width, img.height);
}

bool AmplitudeMap::is_point_symmetric() const {
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t my = (height - y) % height;
            const std::size_t mx = (width - x) % width;
            if (at(y, x) != at(my, mx)) return false;
        }
    }
    return true;
}

SpectralFilter::SpectralFilter(std::size_t rows, std::size_t cols, std::vector<double> quadrant)
    : rows_(rows), cols_(cols), q_(std::move(quadrant)) {
    if (rows == 0 || cols == 0 || q_.size() != rows * cols) {
        throw Error(ErrorKind::Parameter, "quadrant needs rows*cols values");
    }
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (!std::isfinite(q_[i])) {
            throw Error(ErrorKind::Parameter, "non-finite filter value at row " +
                                                  std::to_string(i / cols) + ", column " +
                                                  std::to_string(i % cols));
        }
    }
}

SpectralFilter SpectralFilter::constant(std::size_t rows, std::size_t cols, double value) {
    return SpectralFilter(rows, cols, std::vector<double>(rows * cols, value));
}

AmplitudeMap SpectralFilter::expand() const {
    AmplitudeMap map{2 * rows_, 2 * cols_, {}};
    map.values.resize(map.height * map.width);
    for (std::size_t y = 0; y < map.height; ++y) {
        const auto qy = std::min<std::size_t>(
            static_cast<std::size_t>(std::abs(signed_frequency(y, map.height))), rows_ - 1);
        for (std::size_t x = 0; x < map.width; ++x) {
            const auto qx = std::min<std::size_t>(
                static_cast<std::size_t>(std::abs(signed_frequency(x, map.width))), cols_ - 1);
            map.values[y * map.width + x] = q_[qy * cols_ + qx];
        }
    }
    return map;
}

std::vector<double> fold_to_quadrant(std::span<const double> full, std::size_t rows,
                                     std::size_t cols) {
    const std::size_t h = 2 * rows, w = 2 * cols;
    if (full.size() != h * w) throw Error(ErrorKind::Parameter, "full map size mismatch");
    std::vector<double> q(rows * cols, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        const auto qy = std::min<std::size_t>(
            static_cast<std::size_t>(std::abs(signed_frequency(y, h))), rows - 1);
        for (std::size_t x = 0; x < w; ++x) {
            const auto qx = std::min<std::size_t>(
                static_cast<std::size_t>(std::abs(signed_frequency(x, w))), cols - 1);
            q[qy * cols + qx] += full[y * w + x];
        }
    }
    return q;
}

SpectralFilter SpectralFilter::read_csv(std::istream& in, const std::string& source) {
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t count = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || (*end != '\0' && !std::isspace(static_cast<unsigned char>(*end)))) {
                throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) +
                                                  ": not a number: '" + cell + "'");
            }
            values.push_back(v);
            ++count;
        }
        if (rows == 0) cols = count;
        if (count != cols) {
            throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(cols) + " values, got " +
                                              std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw Error(ErrorKind::Parse, source + ": empty filter file");
    return SpectralFilter(rows, cols, std::move(values));
}

SpectralFilter SpectralFilter::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open filter file " + path.string());
    return read_csv(in, path.string());
}

void SpectralFilter::write_csv(std::ostream& out) const {
    const auto old = out.precision(17);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (c) out << ',';
            out << q_[r * cols_ + c];
        }
        out << '\n';
    }
    out.precision(old);
}

void SpectralFilter::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write filter file " + path.string());
    write_csv(out);
}

Image apply_spectral_filter(const Image& img, const AmplitudeMap& filter,
                            const FilterOptions& options, FilterDiagnostics* diagnostics) {
    if (filter.height != img.height || filter.width != img.width) {
        throw Error(ErrorKind::Parameter,
                    "filter is " + std::to_string(filter.height) + "x" +
                        std::to_string(filter.width) + " but image is " +
                        std::to_string(img.height) + "x" + std::to_string(img.width));
    }
    const auto plan = fft_plan(img.height, img.width);
    Image out(img.width, img.height, img.channels);
    std::vector<Complex> buf(img.plane_size()), spec(img.plane_size());
    double max_imag = 0.0;
    for (std::size_t c = 0; c < img.channels; ++c) {
        const auto in = img.plane(c);
        std::copy(in.begin(), in.end(), buf.begin());
        plan->forward(buf.data(), spec.data());
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= filter.values[i];
        plan->inverse(spec.data(), buf.data());
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < buf.size(); ++i) {
            max_imag = std::max(max_imag, std::abs(buf[i].imag()));
            dst[i] = options.clamp ? std::clamp(buf[i].real(), 0.0, 1.0) : buf[i].real();
        }
    }
    if (diagnostics) diagnostics->max_imag = max_imag;
    return out;
}

AmplitudeMap radial_filter_from_curve(const Curve& curve, std::size_t height, std::size_t width,
                                      double degrees_per_px) {
    if (!(degrees_per_px > 0.0)) throw Error(ErrorKind::Parameter, "degrees per pixel must be > 0");
    AmplitudeMap map{height, width, std::vector<double>(height * width)};
    for (std::size_t y = 0; y < height; ++y) {
        const double fy = signed_frequency(y, height) / static_cast<double>(height);
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = signed_frequency(x, width) / static_cast<double>(width);
            if (y == 0 && x == 0) {
                map.values[0] = kDcGain;
                continue;
            }
            const double f_cpd = std::hypot(fy, fx) / degrees_per_px;
            const double v = curve(f_cpd);
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::Parameter, "filter curve is not finite at " + fmt(f_cpd) +
                                                      " cpd");
            }
            map.values[y * width + x] = v;
        }
    }
    return map;
}

namespace {

// Smallest and largest non-DC bin radius in cpd.
std::pair<double, double> radius_span(std::size_t height, std::size_t width, double dpp) {
    const double lo = 1.0 / static_cast<double>(std::max(height, width)) / dpp;
    const double hi = std::hypot(signed_frequency(height / 2, height) / static_cast<double>(height),
                                 signed_frequency(width / 2, width) / static_cast<double>(width)) /
                      dpp;
    return {lo, std::max(hi, lo * 2.0)};
}

}  // namespace

AmplitudeMap csf_filter(double T, std::size_t height, std::size_t width, double degrees_per_px,
                        const BoxcarOptions& options) {
    if (!(T > 0.0)) throw Error(ErrorKind::Parameter, "presentation time must be > 0");
    if (!(degrees_per_px > 0.0)) throw Error(ErrorKind::Parameter, "degrees per pixel must be > 0");
    const auto [lo, hi] = radius_span(height, width, degrees_per_px);
    const auto curve = tabulated_curve([&](double f) { return boxcar_csf(f, T, options); }, lo, hi);
    auto map = radial_filter_from_curve(curve, height, width, degrees_per_px);
    double peak = 0.0;
    for (std::size_t i = 1; i < map.values.size(); ++i) peak = std::max(peak, map.values[i]);
    if (!(peak > 0.0)) throw Error(ErrorKind::Numeric, "CSF filter has no positive amplitude");
    for (std::size_t i = 1; i < map.values.size(); ++i) map.values[i] /= peak;
    return map;
}

AmplitudeMap mtf_filter(std::size_t height, std::size_t width, double degrees_per_px,
                        const WilliamsParams& params) {
    return radial_filter_from_curve([&](double f) { return williams_mtf(f, params); }, height,
                                    width, degrees_per_px);
}

double max_frequency_radius(std::size_t height, std::size_t width) {
    return std::hypot(static_cast<double>(height / 2), static_cast<double>(width / 2));
}

AmplitudeMap highpass_map(std::size_t height, std::size_t width, double cutoff) {
    const double r_max = max_frequency_radius(height, width);
    if (!(cutoff >= 0.0) || cutoff > r_max) {
        throw Error(ErrorKind::Parameter, "high-pass cutoff " + fmt(cutoff) +
                                              " outside [0, " + fmt(r_max) + "] cycles/image");
    }
    // The nominal top of the range is quoted to two decimals; treat it as "everything".
    const bool all = cutoff >= r_max - 0.005;
    AmplitudeMap map{height, width, std::vector<double>(height * width, 1.0)};
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double r = std::hypot(signed_frequency(y, height), signed_frequency(x, width));
            if (all || r < cutoff) map.values[y * width + x] = 0.0;
        }
    }
    return map;
}

Image ideal_highpass(const Image& img, double cutoff, const FilterOptions& options) {
    if (cutoff == 0.0) return img;
    return apply_spectral_filter(img, highpass_map(img.height, img.width, cutoff), options);
}

}  // namespace mvh
