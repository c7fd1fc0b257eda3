#pragma once

#include "mvh/image.hpp"
#include "mvh/psychophys.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace mvh {

/// Normalized 1D Gaussian taps, radius ceil(4 sigma). sigma = 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution of one plane with reflect padding (edge not repeated).
void convolve_plane(std::span<const double> in, std::span<double> out, std::size_t height,
                    std::size_t width, std::span<const double> kernel);
/// Adjoint of convolve_plane.
void convolve_plane_adjoint(std::span<const double> in, std::span<double> out,
                            std::size_t height, std::size_t width,
                            std::span<const double> kernel);

Image gaussian_blur(const Image& img, double sigma);

/// Antialiased bicubic resampling (a = -0.5), scaling the kernel on downsampling.
Image resize_bicubic(const Image& img, std::size_t new_width, std::size_t new_height);
/// Down to r1 x r1 and back to the original size.
Image resize_roundtrip(const Image& img, std::size_t r1);

/// Real amplitudes for every DFT bin, DC at (0,0).
struct AmplitudeMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
    /// F(-u,-v) == F(u,v) for every bin.
    bool is_point_symmetric() const;
};

/// Filter parameterized by its top-left (low-frequency) quadrant.
class SpectralFilter {
public:
    SpectralFilter() = default;
    SpectralFilter(std::size_t rows, std::size_t cols, std::vector<double> quadrant);
    static SpectralFilter constant(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& quadrant() const { return q_; }
    double at(std::size_t r, std::size_t c) const { return q_[r * cols_ + c]; }

    /// Full (2 rows) x (2 cols) map: F(y,x) = q[min(|fy|, rows-1)][min(|fx|, cols-1)].
    /// The Nyquist row/column repeats the last quadrant row/column.
    AmplitudeMap expand() const;

    /// Row-major CSV, one quadrant row per line.
    static SpectralFilter read_csv(std::istream& in, const std::string& source = "<stream>");
    static SpectralFilter load_csv(const std::filesystem::path& path);
    void write_csv(std::ostream& out) const;
    void save_csv(const std::filesystem::path& path) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> q_;
};

/// Adjoint of expand: sums the gradient of every full-map bin into its quadrant cell.
std::vector<double> fold_to_quadrant(std::span<const double> full, std::size_t rows,
                                     std::size_t cols);

struct FilterOptions {
    bool clamp = true;
};

struct FilterDiagnostics {
    double max_imag = 0.0;  // largest |imag| of the inverse transform
};

/// Per-channel DFT, multiply, inverse DFT, real part, optional clamp to [0,1].
Image apply_spectral_filter(const Image& img, const AmplitudeMap& filter,
                            const FilterOptions& options = {},
                            FilterDiagnostics* diagnostics = nullptr);

inline constexpr double kImagResidueLimit = 1e-10;

/// Radially symmetric map from a curve in cpd. Bin radius in cycles/pixel is
/// sqrt((fy/h)^2 + (fx/w)^2); DC is set to 1.
AmplitudeMap radial_filter_from_curve(const Curve& curve, std::size_t height, std::size_t width,
                                      double degrees_per_px = kDegreesPerPixel);

/// Boxcar CSF for a T-second presentation as a radial filter, divided by its
/// largest non-DC amplitude so every bin lies in [0, 1].
AmplitudeMap csf_filter(double T, std::size_t height, std::size_t width,
                        double degrees_per_px = kDegreesPerPixel, const BoxcarOptions& options = {});
/// Optical MTF as a radial filter (already in [0, 1]).
AmplitudeMap mtf_filter(std::size_t height, std::size_t width,
                        double degrees_per_px = kDegreesPerPixel, const WilliamsParams& params = {});

/// Largest bin radius in cycles/image, hypot(h/2, w/2).
double max_frequency_radius(std::size_t height, std::size_t width);

/// Zeroes every bin whose radius (cycles/image) is below the cutoff.
AmplitudeMap highpass_map(std::size_t height, std::size_t width, double cutoff);
Image ideal_highpass(const Image& img, double cutoff, const FilterOptions& options = {});

}  // namespace mvh
