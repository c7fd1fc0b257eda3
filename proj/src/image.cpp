#include "mvh/image.hpp"

#include "mvh/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

namespace mvh {

Image read_png(const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw Error(ErrorKind::Io, "cannot read PNG " + path.string() + ": " + png.message);
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + msg);
    }
    Image img(png.width, png.height, color ? 3 : 1);
    const std::size_t c_count = img.channels;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < c_count; ++c) {
                img.at(c, y, x) = buffer[(y * img.width + x) * c_count + c] / 255.0;
            }
        }
    }
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw Error(ErrorKind::Parameter, "PNG output needs 1 or 3 channels");
    }
    std::vector<png_byte> buffer(img.data.size());
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < img.channels; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                buffer[(y * img.width + x) * img.channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        throw Error(ErrorKind::Io, "cannot write PNG " + path.string() + ": " + png.message);
    }
}

Image quantize_8bit(Image img) {
    for (auto& v : img.data) v = std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    return img;
}

std::vector<std::filesystem::path> list_png_inputs(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) return {path};
    if (!fs::is_directory(path, ec)) {
        throw Error(ErrorKind::Io, "input " + path.string() + " is neither file nor directory");
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(path)) {
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (entry.is_regular_file() && ext == ".png") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mvh
