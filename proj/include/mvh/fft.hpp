#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mvh {

using Complex = std::complex<double>;

/// Complex 2D DFT of fixed size, DC at (0,0). Executing is thread-safe;
/// inverse() includes the 1/(h*w) factor.
class Fft2d {
public:
    Fft2d(std::size_t height, std::size_t width);
    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return height_ * width_; }

    void forward(const Complex* in, Complex* out) const;
    void inverse(const Complex* in, Complex* out) const;

    std::vector<Complex> forward_real(std::span<const double> in) const;

private:
    std::size_t height_;
    std::size_t width_;
    void* forward_plan_;
    void* inverse_plan_;
};

/// Shared plan for a size, created on first use.
std::shared_ptr<const Fft2d> fft_plan(std::size_t height, std::size_t width);

/// Signed frequency of DFT index i along an axis of length n.
inline double signed_frequency(std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

/// |F|^2 of a real plane.
std::vector<double> power_spectrum(std::span<const double> plane, std::size_t height,
                                   std::size_t width);

}  // namespace mvh
