#include "mvh/fft.hpp"

#include "mvh/error.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace mvh {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* cast(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* cast(const Complex* p) { return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p)); }

}  // namespace

Fft2d::Fft2d(std::size_t height, std::size_t width) : height_(height), width_(width) {
    if (height == 0 || width == 0) throw Error(ErrorKind::Parameter, "empty FFT size");
    std::lock_guard lock(planner_mutex());
    auto* a = fftw_alloc_complex(size());
    auto* b = fftw_alloc_complex(size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int h = static_cast<int>(height), w = static_cast<int>(width);
    forward_plan_ = fftw_plan_dft_2d(h, w, a, b, FFTW_FORWARD, flags);
    inverse_plan_ = fftw_plan_dft_2d(h, w, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
    if (!forward_plan_ || !inverse_plan_) throw Error(ErrorKind::Numeric, "FFTW planning failed");
}

Fft2d::~Fft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft2d::forward(const Complex* in, Complex* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), cast(in), cast(out));
}

void Fft2d::inverse(const Complex* in, Complex* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), cast(in), cast(out));
    const double scale = 1.0 / static_cast<double>(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] *= scale;
}

std::vector<Complex> Fft2d::forward_real(std::span<const double> in) const {
    if (in.size() != size()) throw Error(ErrorKind::Parameter, "FFT input size mismatch");
    std::vector<Complex> buf(in.begin(), in.end());
    std::vector<Complex> out(size());
    forward(buf.data(), out.data());
    return out;
}

std::shared_ptr<const Fft2d> fft_plan(std::size_t height, std::size_t width) {
    static std::mutex m;
    static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const Fft2d>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[{height, width}];
    if (!slot) slot = std::make_shared<Fft2d>(height, width);
    return slot;
}

std::vector<double> power_spectrum(std::span<const double> plane, std::size_t height,
                                   std::size_t width) {
    const auto spec = fft_plan(height, width)->forward_real(plane);
    std::vector<double> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = std::norm(spec[i]);
    return out;
}

}  // namespace mvh
