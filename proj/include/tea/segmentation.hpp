#pragma once

#include <Eigen/Dense>

#include "tea/image.hpp"

namespace tea {

/// Linear color index x*r + y*g + z*b with decision threshold t.
struct SegmentationParams {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double t = 0.0;

    Eigen::Vector3d coefficients() const { return {x, y, z}; }

    friend bool operator==(const SegmentationParams&, const SegmentationParams&) = default;
};

inline double score(const SegmentationParams& p, Pixel q) {
    return p.x * q.r + p.y * q.g + p.z * q.b;
}

/// Index scores for a whole pixel population at once.
inline Eigen::VectorXd scores(const SegmentationParams& p, const PixelMatrix& pixels) {
    return pixels * p.coefficients();
}

/// Foreground iff score >= t. The comparison is inclusive.
inline bool classify(const SegmentationParams& p, Pixel q) {
    return score(p, q) >= p.t;
}

/// Pointwise binarization: 255 where classify says foreground, 0 elsewhere.
BinaryMask binarize(const SegmentationParams& p, const RgbImage& img);

/// Excess green index 2g - r - b.
inline double exg_index(Pixel q) {
    return 2.0 * q.g - q.r - q.b;
}

} // namespace tea
