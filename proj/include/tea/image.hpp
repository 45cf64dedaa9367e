#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tea {

struct Pixel {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// 8-bit RGB image, row-major, interleaved channels.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height);
    RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

    int width() const { return width_; }
    int height() const { return height_; }

    Pixel at(int x, int y) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Pixel p) {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
        data_[i] = p.r;
        data_[i + 1] = p.g;
        data_[i + 2] = p.b;
    }

    const std::vector<std::uint8_t>& data() const { return data_; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_; // 3 * width * height bytes
};

/// Per-pixel 0/255 mask, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int x, int y) const {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    void set(int x, int y, bool foreground) {
        data_[static_cast<std::size_t>(y) * width_ + x] = foreground ? 255 : 0;
    }

    const std::vector<std::uint8_t>& data() const { return data_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

enum class BoxLabel { Leaf, Background };

/// An annotated rectangle on one image, identifying leaf or background pixels.
struct SampleBox {
    std::string image_id;
    BoxLabel label = BoxLabel::Leaf;
    int x0 = 0;
    int y0 = 0;
    int width = 10;
    int height = 10;
};

/// Pixel populations as N x 3 matrices of exact channel values, one row per
/// pixel, columns (r, g, b). Doubles so scores can be formed by matrix
/// products without conversion at every grid point.
using PixelMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct SampleSet {
    PixelMatrix leaf;       // the N population
    PixelMatrix background; // the M population

    Eigen::Index leaf_count() const { return leaf.rows(); }
    Eigen::Index background_count() const { return background.rows(); }
};

PixelMatrix pixels_to_matrix(const std::vector<Pixel>& pixels);

// ---- PPM / PGM ----------------------------------------------------------
//
// Binary PPM (P6) and PGM (P5), maxval 255 only. Readers accept '#' comments
// and arbitrary whitespace between header tokens; writers emit the canonical
// "P6\n<w> <h>\n255\n" form so output is byte-stable.

RgbImage read_ppm(std::istream& in);
void write_ppm(const RgbImage& img, std::ostream& out);

BinaryMask read_pgm(std::istream& in);
void write_mask(const BinaryMask& mask, std::ostream& out);

RgbImage read_ppm_file(const std::string& path);
void write_ppm_file(const RgbImage& img, const std::string& path);
BinaryMask read_pgm_file(const std::string& path);
void write_mask_file(const BinaryMask& mask, const std::string& path);

// ---- Annotations --------------------------------------------------------
//
// Line-oriented annotation format, one box per line:
//   <image_id> <leaf|background> <x0> <y0> <w> <h>
// '#' starts a comment; blank lines are ignored.

std::vector<SampleBox> parse_annotations(std::istream& in);
std::vector<SampleBox> parse_annotations_file(const std::string& path);

/// Concatenates the pixels of every box into per-label populations.
/// Boxes are visited in input order, rows top to bottom, columns left to
/// right, so the result is deterministic. Throws ParseError for an unknown
/// image_id or a box that leaves the image.
SampleSet extract_samples(const std::map<std::string, RgbImage>& images,
                          const std::vector<SampleBox>& boxes);

} // namespace tea
