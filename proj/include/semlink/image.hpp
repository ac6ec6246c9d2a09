#ifndef SEMLINK_IMAGE_HPP
#define SEMLINK_IMAGE_HPP

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semlink {

/// Grayscale 8-bit image, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    Image() = default;
    Image(int w, int h, uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return pixels.size(); }

    bool operator==(const Image&) const = default;
};

inline void write_pgm(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline Image read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    auto next_token = [&f, &path]() {
        std::string tok;
        while (f >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("truncated PGM header: " + path);
    };
    if (next_token() != "P5") throw std::runtime_error("not a binary PGM: " + path);
    Image img;
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (img.width <= 0 || img.height <= 0 || maxval != 255)
        throw std::runtime_error("unsupported PGM (need maxval 255): " + path);
    f.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    f.read(reinterpret_cast<char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("truncated PGM data: " + path);
    return img;
}

}  // namespace semlink

#endif
