#include "tea/image.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tea/error.hpp"

namespace tea {

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height),
      data_(3 * static_cast<std::size_t>(width) * height, 0) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be >= 1");
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be >= 1");
    if (data_.size() != 3 * static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("pixel buffer size does not match dimensions");
}

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, 0) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("mask dimensions must be >= 1");
}

PixelMatrix pixels_to_matrix(const std::vector<Pixel>& pixels) {
    PixelMatrix m(static_cast<Eigen::Index>(pixels.size()), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = pixels[static_cast<std::size_t>(i)].r;
        m(i, 1) = pixels[static_cast<std::size_t>(i)].g;
        m(i, 2) = pixels[static_cast<std::size_t>(i)].b;
    }
    return m;
}

namespace {

// Reads one whitespace-separated header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            // skip
        } else {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    // Leave the terminator in the stream: the byte after the last header
    // token separates header from raster and must not be consumed here.
    if (c != EOF) in.unget();
    return tok;
}

int parse_positive_int(const std::string& tok, const char* what) {
    if (tok.empty()) throw ParseError(std::string("missing ") + what);
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(std::string("malformed ") + what + ": '" + tok + "'");
    }
    if (pos != tok.size() || v < 1)
        throw ParseError(std::string("malformed ") + what + ": '" + tok + "'");
    return v;
}

void read_netpbm_header(std::istream& in, const char* magic, int& width, int& height) {
    const std::string m = next_token(in);
    if (m.empty()) throw ParseError("empty stream, expected netpbm header");
    if (m != magic)
        throw ParseError("unsupported magic '" + m + "', expected " + magic);
    width = parse_positive_int(next_token(in), "width");
    height = parse_positive_int(next_token(in), "height");
    const std::string maxval = next_token(in);
    if (maxval != "255")
        throw ParseError("unsupported maxval '" + maxval + "', only 255 is accepted");
    // Exactly one whitespace byte separates the header from the raster.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw ParseError("missing whitespace after maxval");
}

} // namespace

RgbImage read_ppm(std::istream& in) {
    int w = 0, h = 0;
    read_netpbm_header(in, "P6", w, h);
    std::vector<std::uint8_t> data(3 * static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size())
        throw ParseError("truncated pixel data: expected " + std::to_string(data.size()) +
                         " bytes, got " + std::to_string(in.gcount()));
    return RgbImage(w, h, std::move(data));
}

void write_ppm(const RgbImage& img, std::ostream& out) {
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.data().size()));
    if (!out) throw IoError("failed writing PPM stream");
}

BinaryMask read_pgm(std::istream& in) {
    int w = 0, h = 0;
    read_netpbm_header(in, "P5", w, h);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size())
        throw ParseError("truncated pixel data: expected " + std::to_string(data.size()) +
                         " bytes, got " + std::to_string(in.gcount()));
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t v = data[static_cast<std::size_t>(y) * w + x];
            if (v != 0 && v != 255)
                throw ParseError("mask value " + std::to_string(v) + " is not 0 or 255");
            mask.set(x, y, v == 255);
        }
    }
    return mask;
}

void write_mask(const BinaryMask& mask, std::ostream& out) {
    out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.data().data()),
              static_cast<std::streamsize>(mask.data().size()));
    if (!out) throw IoError("failed writing PGM stream");
}

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

RgbImage read_ppm_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_ppm(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_ppm_file(const RgbImage& img, const std::string& path) {
    auto out = open_output(path);
    write_ppm(img, out);
}

BinaryMask read_pgm_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_pgm(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_mask_file(const BinaryMask& mask, const std::string& path) {
    auto out = open_output(path);
    write_mask(mask, out);
}

std::vector<SampleBox> parse_annotations(std::istream& in) {
    std::vector<SampleBox> boxes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        SampleBox box;
        std::string label;
        if (!(ls >> box.image_id)) continue; // blank line
        if (!(ls >> label >> box.x0 >> box.y0 >> box.width >> box.height))
            throw ParseError("annotation line " + std::to_string(lineno) +
                             ": expected '<image_id> <leaf|background> <x0> <y0> <w> <h>'");
        std::string extra;
        if (ls >> extra)
            throw ParseError("annotation line " + std::to_string(lineno) +
                             ": trailing token '" + extra + "'");
        if (label == "leaf") {
            box.label = BoxLabel::Leaf;
        } else if (label == "background") {
            box.label = BoxLabel::Background;
        } else {
            throw ParseError("annotation line " + std::to_string(lineno) +
                             ": unknown label '" + label + "'");
        }
        if (box.width < 1 || box.height < 1)
            throw ParseError("annotation line " + std::to_string(lineno) +
                             ": box size must be >= 1");
        boxes.push_back(std::move(box));
    }
    return boxes;
}

std::vector<SampleBox> parse_annotations_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return parse_annotations(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

SampleSet extract_samples(const std::map<std::string, RgbImage>& images,
                          const std::vector<SampleBox>& boxes) {
    std::vector<Pixel> leaf;
    std::vector<Pixel> background;
    for (const SampleBox& box : boxes) {
        const auto it = images.find(box.image_id);
        if (it == images.end())
            throw ParseError("unknown image_id '" + box.image_id + "'");
        const RgbImage& img = it->second;
        if (box.x0 < 0 || box.y0 < 0 || box.width < 1 || box.height < 1 ||
            box.x0 + box.width > img.width() || box.y0 + box.height > img.height())
            throw ParseError("box on '" + box.image_id + "' at (" + std::to_string(box.x0) +
                             ", " + std::to_string(box.y0) + ") size " +
                             std::to_string(box.width) + "x" + std::to_string(box.height) +
                             " leaves the image");
        auto& dst = box.label == BoxLabel::Leaf ? leaf : background;
        for (int y = box.y0; y < box.y0 + box.height; ++y)
            for (int x = box.x0; x < box.x0 + box.width; ++x)
                dst.push_back(img.at(x, y));
    }
    return SampleSet{pixels_to_matrix(leaf), pixels_to_matrix(background)};
}

} // namespace tea
