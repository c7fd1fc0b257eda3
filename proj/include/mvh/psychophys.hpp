#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mvh {

/// Unit of the spatial frequency inside Kelly's G. Angular uses 2*pi*f_s,
/// CyclesPerDegree plugs f_s in directly. Velocity is f_t / f_s either way.
enum class SpatialUnit { Angular, CyclesPerDegree };

struct KellyParams {
    SpatialUnit spatial_unit = SpatialUnit::Angular;
};

/// k(v) = 6.1 + 7.3 |log10(v/3)|^3
double kelly_scale_k(double v);
/// s_max(v) = 45.9 / (v + 2)
double kelly_s_max(double v);

/// Kelly's spatiotemporal CSF G(f_s, v) = k v f^2 exp(-2 f / s_max).
double kelly_csf(double f_s, double v, const KellyParams& params = {});

/// G(f_s, f_t / f_s). Empty at f_s == 0, where callers use a DC gain of 1.
/// Returns 0 at f_t == 0 (the v -> 0 limit).
std::optional<double> kelly_csf_ft(double f_s, double f_t, const KellyParams& params = {});

inline constexpr double kDcGain = 1.0;

struct BoxcarOptions {
    KellyParams kelly;
    double start_hz = 60.0;      // first temporal truncation point
    double tail_tolerance = 1e-6;  // relative mass allowed beyond the truncation
    double max_hz = 1e5;         // give up beyond this
    double panel_tolerance = 1e-10;
};

/// Sensitivity to a grating shown for T seconds with hard on/offset:
/// sqrt( int_0^F S(f_s, f_t)^2 T^2 sinc^2(pi f_t T) df_t ).
double boxcar_csf(double f_s, double T, const BoxcarOptions& options = {});

struct WilliamsParams {
    double s0 = 87.2;  // diffraction cutoff for a 3 mm pupil, cpd
    double w1 = 0.3481;
    double w2 = 0.6519;
    double a = 0.1212;
};

/// Diffraction-limited MTF of a circular pupil.
double diffraction_mtf(double f_s, double s0);
/// D(f_s, s0) (w1 + w2 exp(-a f_s)).
double williams_mtf(double f_s, const WilliamsParams& params = {});

inline constexpr double kDegreesPerPixel = 3.0 / 256.0;

/// Amplitude spectrum of a unit-mass spatial Gaussian, f in cpd.
double gaussian_spectrum(double f, double sigma_px, double degrees_per_px = kDegreesPerPixel);

struct FrequencyRange {
    double f_min = 1.0 / 3.0;
    double f_max = 42.58;
};

inline constexpr std::size_t kGridNodes = 1024;

std::vector<double> log_grid(FrequencyRange range = {}, std::size_t nodes = kGridNodes);

using Curve = std::function<double(double)>;

std::vector<double> sample(const Curve& curve, std::span<const double> grid);

/// Cubic B-spline of the curve in ln f over [f_lo, f_hi]; evaluates the curve
/// itself outside that range.
Curve tabulated_curve(const Curve& curve, double f_lo, double f_hi, std::size_t nodes = 512);
/// Divides by the maximum sample. Throws Numeric if the maximum is not positive.
std::vector<double> normalize_max(std::vector<double> values);

/// Power-weighted RMSE on a log-spaced grid (trapezoid in ln f).
double wrmse_sampled(std::span<const double> grid, std::span<const double> a,
                     std::span<const double> b, double beta);
double wrmse(const Curve& a, const Curve& b, double beta = 2.0, FrequencyRange range = {});

struct FitResult {
    double sigma_px = 0.0;
    double wrmse = 0.0;
    double beta = 2.0;
    FrequencyRange range;
};

struct FitOptions {
    FrequencyRange range;
    double degrees_per_px = kDegreesPerPixel;
    double sigma_lo = 0.1;
    double sigma_hi = 10.0;
    double sigma_step = 0.05;
    double refine_tolerance = 1e-3;
};

/// Gaussian width minimizing wrmse against the max-normalized target.
FitResult fit_sigma(std::span<const double> target_on_grid, double beta,
                    const FitOptions& options = {});
FitResult fit_sigma(const Curve& target, double beta, const FitOptions& options = {});

}  // namespace mvh
