#include "tea/segmentation.hpp"

namespace tea {

BinaryMask binarize(const SegmentationParams& p, const RgbImage& img) {
    BinaryMask mask(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            mask.set(x, y, classify(p, img.at(x, y)));
    return mask;
}

} // namespace tea
