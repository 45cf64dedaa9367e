#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tea/image.hpp"
#include "tea/segmentation.hpp"

namespace tea {

enum class FitMode { FirstFound, Best };

/// Search ranges and acceptance fractions for the grid fitter.
///
/// Grid values are generated from integer step indices (value = min + i*step)
/// so the grid is exactly reproducible; endpoints are inclusive when the step
/// divides the range. At the defaults each coefficient axis has 121 points
/// and the threshold axis has 511.
struct FitConfig {
    double coeff_min = -3.0;
    double coeff_max = 3.0;
    double coeff_step = 0.05;
    double t_min = 0.0;
    double t_max = 255.0;
    double t_step = 0.5;
    double leaf_fraction = 0.98;       // require n > leaf_fraction * N (strict)
    double background_fraction = 0.02; // require m < background_fraction * M (strict)
    FitMode mode = FitMode::FirstFound;
    int threads = 1;

    void validate() const; // throws std::invalid_argument

    int coeff_grid_size() const;
    int t_grid_size() const;
    double coeff_value(int i) const { return coeff_min + i * coeff_step; }
    double t_value(int i) const { return t_min + i * t_step; }
};

struct Counts {
    long leaf = 0;       // n
    long background = 0; // m

    friend bool operator==(const Counts&, const Counts&) = default;
};

struct FitResult {
    SegmentationParams params;
    long n = 0;
    long m = 0;
    bool satisfied = false;
};

/// Counts of leaf / background sample pixels whose index score is >= t.
Counts count_satisfying(const SegmentationParams& params, const SampleSet& samples);

/// Per-threshold counts for one fixed coefficient triple, computed with a
/// single score pass: scores are sorted once and each threshold's counts are
/// found by rank lookup. Equal to count_satisfying at every grid threshold.
struct ThresholdSweep {
    std::vector<double> thresholds;
    std::vector<long> leaf_counts;
    std::vector<long> background_counts;
};

ThresholdSweep sweep_thresholds(double x, double y, double z,
                                const SampleSet& samples, const FitConfig& config);

/// Grid search over (x, y, z, t) in lexicographic order, each axis ascending.
///
/// FirstFound returns the first grid point whose counts satisfy the
/// acceptance fractions, or nullopt when none does. Best scans the whole
/// grid and returns the point maximizing n/N - m/M, ties broken
/// lexicographically; its `satisfied` flag reports whether the fractions
/// hold there. The result is identical for any thread count.
std::optional<FitResult> fit_image(const SampleSet& samples, const FitConfig& config);

/// Component-wise arithmetic mean. Throws std::invalid_argument when empty.
SegmentationParams average_params(const std::vector<SegmentationParams>& results);

struct DatasetFit {
    std::vector<std::optional<FitResult>> per_image;
    std::optional<SegmentationParams> average; // nullopt when no image fit
};

DatasetFit fit_dataset(const std::vector<SampleSet>& per_image_samples,
                       const FitConfig& config);

/// Table-shaped fit report: one row per image plus an average row,
/// coefficients with 3 decimals, threshold with 1.
std::string format_fit_report(const std::vector<std::string>& image_ids,
                              const DatasetFit& fit, std::uint64_t seed);

} // namespace tea
