#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mvh {

/// Planar image, channel-major, samples nominally in [0,1].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::size_t c = 1, double fill = 0.0)
        : width(w), height(h), channels(c), data(w * h * c, fill) {}

    std::size_t plane_size() const { return width * height; }
    std::span<double> plane(std::size_t c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(std::size_t c) const {
        return {data.data() + c * plane_size(), plane_size()};
    }
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[c * plane_size() + y * width + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[c * plane_size() + y * width + x];
    }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

/// 8-bit grayscale or RGB PNG; alpha is dropped. Samples scaled to [0,1].
Image read_png(const std::filesystem::path& path);
/// Clamps to [0,1] and quantizes to 8 bits.
void write_png(const std::filesystem::path& path, const Image& img);

/// Clamp then round to the nearest of 256 levels, as a PNG round trip would.
Image quantize_8bit(Image img);

/// Sorted *.png files of a directory, or the path itself if it is a file.
std::vector<std::filesystem::path> list_png_inputs(const std::filesystem::path& path);

}  // namespace mvh
