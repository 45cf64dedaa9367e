#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tea/image.hpp"

namespace tea {

struct Rect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    bool contains(double px, double py) const {
        return px >= x0 && px < x0 + width && py >= y0 && py < y0 + height;
    }
};

/// One 8-connected foreground component of a mask.
struct Region {
    long pixel_count = 0;
    Rect bounding_box;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
};

struct GroundTruth {
    std::vector<Rect> leaf_boxes;
};

struct EvalReport {
    long n_identified = 0;
    long m_misidentified = 0;
    long n_actual = 0;
    double r_i = 0.0; // identification accuracy, percent
    double r_m = 0.0; // misidentification rate, percent
};

/// Maximal 8-connected foreground components with pixel_count >= min_area,
/// ordered by bounding-box (y0, x0). Components below min_area are dropped
/// as noise; pass min_area = 1 to keep everything.
std::vector<Region> connected_components(const BinaryMask& mask, long min_area);

struct MatchCounts {
    long matched = 0;       // n
    long misidentified = 0; // m

    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Greedy one-to-one matching: regions are scanned in order, a region whose
/// centroid lies in a still-unmatched truth box consumes it and counts toward
/// n; every other region counts toward m.
MatchCounts match_regions(const std::vector<Region>& regions, const GroundTruth& truth);

EvalReport evaluate(const BinaryMask& mask, const GroundTruth& truth, long min_area);

/// Mean of R_i and R_m across reports, counts summed.
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

/// Table-shaped evaluation report: one row per labeled image plus an
/// average row, percentages with 2 decimals.
std::string format_eval_report(const std::vector<std::string>& labels,
                               const std::vector<EvalReport>& reports,
                               std::uint64_t seed);

} // namespace tea
