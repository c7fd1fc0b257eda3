#include "mvh/psychophys.hpp"

#include "mvh/error.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <memory>
#include <string>

namespace mvh {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

double kelly_scale_k(double v) {
    const double l = std::abs(std::log10(v / 3.0));
    return 6.1 + 7.3 * l * l * l;
}

double kelly_s_max(double v) { return 45.9 / (v + 2.0); }

double kelly_csf(double f_s, double v, const KellyParams& params) {
    if (!(v > 0.0)) throw Error(ErrorKind::Parameter, "Kelly CSF needs v > 0, got " + num(v));
    if (f_s < 0.0) throw Error(ErrorKind::Parameter, "negative spatial frequency " + num(f_s));
    const double f = params.spatial_unit == SpatialUnit::Angular ? 2.0 * kPi * f_s : f_s;
    return kelly_scale_k(v) * v * f * f * std::exp(-2.0 * f / kelly_s_max(v));
}

std::optional<double> kelly_csf_ft(double f_s, double f_t, const KellyParams& params) {
    if (f_s < 0.0 || f_t < 0.0) {
        throw Error(ErrorKind::Parameter, "negative frequency in Kelly CSF");
    }
    if (f_s == 0.0) return std::nullopt;
    if (f_t == 0.0) return 0.0;
    return kelly_csf(f_s, f_t / f_s, params);
}

double boxcar_csf(double f_s, double T, const BoxcarOptions& options) {
    if (!(f_s > 0.0)) throw Error(ErrorKind::Parameter, "boxcar CSF needs f_s > 0");
    if (!(T > 0.0)) throw Error(ErrorKind::Parameter, "boxcar CSF needs T > 0");

    auto integrand = [&](double f_t) {
        const double s = kelly_csf_ft(f_s, f_t, options.kelly).value_or(0.0);
        const double h = T * sinc(kPi * f_t * T);
        return s * s * h * h;
    };
    // Panels end on the sinc zeros, capped in width so the CSF lobe is resolved.
    const double panel = std::min(1.0 / T, 5.0);
    auto integrate = [&](double a, double b) {
        double total = 0.0;
        for (double lo = a; lo < b; lo += panel) {
            const double hi = std::min(lo + panel, b);
            double err = 0.0, l1 = 0.0;
            const double part = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                integrand, lo, hi, 15, options.panel_tolerance, &err, &l1);
            if (!std::isfinite(part) || err > 1e-6 * l1 + 1e-300) {
                throw Error(ErrorKind::Numeric, "temporal quadrature did not converge on [" +
                                                    num(lo) + ", " + num(hi) + "] Hz");
            }
            total += part;
        }
        return total;
    };

    double upper = options.start_hz;
    double mass = integrate(0.0, upper);
    while (true) {
        const double tail = integrate(upper, 2.0 * upper);
        mass += tail;
        upper *= 2.0;
        if (tail <= options.tail_tolerance * mass) break;
        if (upper > options.max_hz) {
            throw Error(ErrorKind::Numeric, "temporal tail still above tolerance at " +
                                                num(upper) + " Hz");
        }
    }
    return std::sqrt(mass);
}

double diffraction_mtf(double f_s, double s0) {
    if (f_s < 0.0) throw Error(ErrorKind::Parameter, "negative spatial frequency " + num(f_s));
    if (!(s0 > 0.0)) throw Error(ErrorKind::Parameter, "cutoff s0 must be positive");
    if (f_s >= s0) return 0.0;
    const double x = f_s / s0;
    return (2.0 / kPi) * (std::acos(x) - x * std::sqrt(1.0 - x * x));
}

double williams_mtf(double f_s, const WilliamsParams& p) {
    return diffraction_mtf(f_s, p.s0) * (p.w1 + p.w2 * std::exp(-p.a * f_s));
}

double gaussian_spectrum(double f, double sigma_px, double degrees_per_px) {
    if (!(sigma_px > 0.0)) throw Error(ErrorKind::Parameter, "sigma must be positive");
    const double f_cpp = f * degrees_per_px;
    return std::exp(-2.0 * kPi * kPi * sigma_px * sigma_px * f_cpp * f_cpp);
}

std::vector<double> log_grid(FrequencyRange range, std::size_t nodes) {
    if (!(range.f_min > 0.0) || !(range.f_max > range.f_min)) {
        throw Error(ErrorKind::Parameter, "frequency range needs 0 < f_min < f_max");
    }
    if (nodes < 2) throw Error(ErrorKind::Parameter, "grid needs at least 2 nodes");
    std::vector<double> grid(nodes);
    const double u0 = std::log(range.f_min);
    const double du = (std::log(range.f_max) - u0) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) grid[i] = std::exp(u0 + du * static_cast<double>(i));
    grid.front() = range.f_min;
    grid.back() = range.f_max;
    return grid;
}

std::vector<double> sample(const Curve& curve, std::span<const double> grid) {
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(), curve);
    return out;
}

Curve tabulated_curve(const Curve& curve, double f_lo, double f_hi, std::size_t nodes) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo) || nodes < 4) {
        throw Error(ErrorKind::Parameter, "tabulation needs 0 < f_lo < f_hi and >= 4 nodes");
    }
    const double u0 = std::log(f_lo);
    const double h = (std::log(f_hi) - u0) / static_cast<double>(nodes - 1);
    std::vector<double> y(nodes);
    for (std::size_t i = 0; i < nodes; ++i) y[i] = curve(std::exp(u0 + h * static_cast<double>(i)));
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        y.begin(), y.end(), u0, h);
    return [spline, curve, f_lo, f_hi](double f) {
        if (f < f_lo || f > f_hi) return curve(f);
        return (*spline)(std::log(f));
    };
}

std::vector<double> normalize_max(std::vector<double> values) {
    const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        throw Error(ErrorKind::Numeric, "curve has no positive finite maximum");
    }
    for (auto& v : values) v /= peak;
    return values;
}

double wrmse_sampled(std::span<const double> grid, std::span<const double> a,
                     std::span<const double> b, double beta) {
    if (grid.size() != a.size() || grid.size() != b.size() || grid.size() < 2) {
        throw Error(ErrorKind::Parameter, "wrmse needs equally sized samples on >= 2 nodes");
    }
    if (!(grid.front() > 0.0)) throw Error(ErrorKind::Parameter, "wrmse needs f_min > 0");
    // df = f du, so the weight in u is f^(1 - beta).
    double num_sum = 0.0, den_sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double du = std::log(grid[i + 1]) - std::log(grid[i]);
        const double w0 = std::pow(grid[i], 1.0 - beta);
        const double w1 = std::pow(grid[i + 1], 1.0 - beta);
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        num_sum += 0.5 * du * (w0 * d0 * d0 + w1 * d1 * d1);
        den_sum += 0.5 * du * (w0 + w1);
    }
    return std::sqrt(num_sum / den_sum);
}

double wrmse(const Curve& a, const Curve& b, double beta, FrequencyRange range) {
    if (!(range.f_min > 0.0)) throw Error(ErrorKind::Parameter, "wrmse needs f_min > 0");
    const auto grid = log_grid(range);
    return wrmse_sampled(grid, sample(a, grid), sample(b, grid), beta);
}

FitResult fit_sigma(std::span<const double> target_on_grid, double beta,
                    const FitOptions& options) {
    const auto grid = log_grid(options.range);
    if (target_on_grid.size() != grid.size()) {
        throw Error(ErrorKind::Parameter, "target must be sampled on the " +
                                              std::to_string(grid.size()) + "-node grid");
    }
    const auto target = normalize_max({target_on_grid.begin(), target_on_grid.end()});

    std::vector<double> model(grid.size());
    auto cost = [&](double sigma) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            model[i] = gaussian_spectrum(grid[i], sigma, options.degrees_per_px);
        }
        return wrmse_sampled(grid, target, model, beta);
    };

    const auto steps = static_cast<std::size_t>(
        std::llround((options.sigma_hi - options.sigma_lo) / options.sigma_step));
    double best_sigma = options.sigma_lo;
    double best_cost = cost(best_sigma);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double s = options.sigma_lo + options.sigma_step * static_cast<double>(i);
        const double c = cost(s);
        if (c < best_cost) {
            best_cost = c;
            best_sigma = s;
        }
    }

    // Golden section inside the bracket around the best grid point.
    double lo = std::max(options.sigma_lo, best_sigma - options.sigma_step);
    double hi = std::min(options.sigma_hi, best_sigma + options.sigma_step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double c1 = cost(x1), c2 = cost(x2);
    while (hi - lo > options.refine_tolerance) {
        if (c1 < c2) {
            hi = x2;
            x2 = x1;
            c2 = c1;
            x1 = hi - inv_phi * (hi - lo);
            c1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            c1 = c2;
            x2 = lo + inv_phi * (hi - lo);
            c2 = cost(x2);
        }
    }
    const double refined = 0.5 * (lo + hi);
    const double refined_cost = cost(refined);

    FitResult out;
    out.beta = beta;
    out.range = options.range;
    if (refined_cost < best_cost) {
        out.sigma_px = refined;
        out.wrmse = refined_cost;
    } else {
        out.sigma_px = best_sigma;
        out.wrmse = best_cost;
    }
    return out;
}

FitResult fit_sigma(const Curve& target, double beta, const FitOptions& options) {
    return fit_sigma(sample(target, log_grid(options.range)), beta, options);
}

}  // namespace mvh
