#include <doctest.h>

#include <optional>
#include <vector>

#include "tea/fitting.hpp"
#include "tea/rng.hpp"

using namespace tea;

namespace {

SampleSet make_set(const std::vector<Pixel>& leaf, const std::vector<Pixel>& background) {
    return SampleSet{pixels_to_matrix(leaf), pixels_to_matrix(background)};
}

std::vector<Pixel> random_pixels(Rng& rng, int count) {
    std::vector<Pixel> v;
    v.reserve(count);
    for (int i = 0; i < count; ++i)
        v.push_back(Pixel{static_cast<std::uint8_t>(rng.next_u64() % 256),
                          static_cast<std::uint8_t>(rng.next_u64() % 256),
                          static_cast<std::uint8_t>(rng.next_u64() % 256)});
    return v;
}

/// Pixels clustered around a base color, clamped to [0, 255].
std::vector<Pixel> clustered_pixels(Rng& rng, int count, Pixel base, int spread) {
    std::vector<Pixel> v;
    v.reserve(count);
    auto jitter = [&](int c) {
        const int d = static_cast<int>(rng.next_u64() % (2 * spread + 1)) - spread;
        return static_cast<std::uint8_t>(std::clamp(c + d, 0, 255));
    };
    for (int i = 0; i < count; ++i)
        v.push_back(Pixel{jitter(base.r), jitter(base.g), jitter(base.b)});
    return v;
}

/// Independent oracle: plain double loop over pixels.
Counts naive_counts(const SegmentationParams& p, const SampleSet& s) {
    Counts c;
    for (Eigen::Index i = 0; i < s.leaf_count(); ++i)
        if (p.x * s.leaf(i, 0) + p.y * s.leaf(i, 1) + p.z * s.leaf(i, 2) >= p.t) ++c.leaf;
    for (Eigen::Index i = 0; i < s.background_count(); ++i)
        if (p.x * s.background(i, 0) + p.y * s.background(i, 1) + p.z * s.background(i, 2) >=
            p.t)
            ++c.background;
    return c;
}

/// Independent oracle: exhaustive sequential lexicographic scan.
std::optional<FitResult> exhaustive_first_found(const SampleSet& s, const FitConfig& cfg) {
    const long N = s.leaf_count();
    const long M = s.background_count();
    for (int ix = 0; ix < cfg.coeff_grid_size(); ++ix)
        for (int iy = 0; iy < cfg.coeff_grid_size(); ++iy)
            for (int iz = 0; iz < cfg.coeff_grid_size(); ++iz)
                for (int it = 0; it < cfg.t_grid_size(); ++it) {
                    const SegmentationParams p{cfg.coeff_value(ix), cfg.coeff_value(iy),
                                               cfg.coeff_value(iz), cfg.t_value(it)};
                    const Counts c = naive_counts(p, s);
                    if (static_cast<double>(c.leaf) > cfg.leaf_fraction * N &&
                        static_cast<double>(c.background) < cfg.background_fraction * M)
                        return FitResult{p, c.leaf, c.background, true};
                }
    return std::nullopt;
}

const SegmentationParams kFitted{0.764, 0.392, -1.157, 90.3};

} // namespace

TEST_CASE("default grids have 121 coefficient points and 511 thresholds") {
    const FitConfig cfg;
    CHECK(cfg.coeff_grid_size() == 121);
    CHECK(cfg.t_grid_size() == 511);
    CHECK(cfg.coeff_value(0) == -3.0);
    CHECK(cfg.coeff_value(120) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(cfg.t_value(510) == doctest::Approx(255.0).epsilon(1e-12));
}

TEST_CASE("count_satisfying") {
    const SampleSet s = make_set({Pixel{200, 180, 40}}, {Pixel{0, 0, 0}});
    CHECK(count_satisfying(kFitted, s) == Counts{1, 0});

    SegmentationParams high = kFitted;
    high.t = 1e6;
    CHECK(count_satisfying(high, s) == Counts{0, 0});

    CHECK_THROWS_AS(count_satisfying(kFitted, SampleSet{}), std::invalid_argument);
}

TEST_CASE("count_satisfying matches the naive oracle on random data") {
    Rng rng(17);
    const SampleSet s = make_set(random_pixels(rng, 500), random_pixels(rng, 500));
    for (int i = 0; i < 100; ++i) {
        const SegmentationParams p{rng.next_range(-3, 3), rng.next_range(-3, 3),
                                   rng.next_range(-3, 3), rng.next_range(0, 255)};
        CHECK(count_satisfying(p, s) == naive_counts(p, s));
    }
}

TEST_CASE("sweep_thresholds equals count_satisfying at every grid threshold") {
    Rng rng(23);
    const FitConfig cfg;
    const SampleSet s = make_set(random_pixels(rng, 250), random_pixels(rng, 250));
    for (int trial = 0; trial < 5; ++trial) {
        const double x = rng.next_range(-3, 3);
        const double y = rng.next_range(-3, 3);
        const double z = rng.next_range(-3, 3);
        const ThresholdSweep sweep = sweep_thresholds(x, y, z, s, cfg);
        REQUIRE(sweep.thresholds.size() == 511);
        for (std::size_t i = 0; i < sweep.thresholds.size(); ++i) {
            const Counts c =
                count_satisfying(SegmentationParams{x, y, z, sweep.thresholds[i]}, s);
            CHECK(sweep.leaf_counts[i] == c.leaf);
            CHECK(sweep.background_counts[i] == c.background);
        }
    }
}

TEST_CASE("sweep counts are step functions, non-increasing in T") {
    const FitConfig cfg;
    const SampleSet single = make_set({Pixel{100, 100, 100}}, {Pixel{1, 1, 1}});
    const ThresholdSweep sweep = sweep_thresholds(1.0, 0.0, 0.0, single, cfg);
    for (std::size_t i = 0; i < sweep.thresholds.size(); ++i) {
        CHECK(sweep.leaf_counts[i] == (sweep.thresholds[i] <= 100.0 ? 1 : 0));
        if (i > 0) {
            CHECK(sweep.leaf_counts[i] <= sweep.leaf_counts[i - 1]);
            CHECK(sweep.background_counts[i] <= sweep.background_counts[i - 1]);
        }
    }
}

TEST_CASE("fit_image finds a separating plane for separable populations") {
    Rng rng(5);
    const SampleSet s = make_set(std::vector<Pixel>(200, Pixel{200, 180, 40}),
                                 std::vector<Pixel>(200, Pixel{60, 80, 50}));
    FitConfig cfg;
    cfg.coeff_step = 0.5; // coarse grid keeps the test quick
    cfg.t_step = 16.0;
    const auto result = fit_image(s, cfg);
    REQUIRE(result.has_value());
    CHECK(result->satisfied);
    CHECK(result->n == 200);
    CHECK(result->m == 0);
}

TEST_CASE("identical populations are unsatisfiable") {
    const std::vector<Pixel> same(50, Pixel{120, 140, 60});
    FitConfig cfg;
    cfg.coeff_step = 0.5;
    cfg.t_step = 16.0;
    CHECK_FALSE(fit_image(make_set(same, same), cfg).has_value());
}

TEST_CASE("fit_image FirstFound equals the exhaustive lexicographic oracle") {
    FitConfig cfg;
    cfg.coeff_step = 1.0;
    cfg.t_step = 64.0;
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const SampleSet s =
            make_set(clustered_pixels(rng, 60, Pixel{190, 185, 45}, 25),
                     clustered_pixels(rng, 60, Pixel{70, 90, 55}, 25));
        const auto got = fit_image(s, cfg);
        const auto expect = exhaustive_first_found(s, cfg);
        REQUIRE(got.has_value() == expect.has_value());
        if (got) {
            CHECK(got->params == expect->params);
            CHECK(got->n == expect->n);
            CHECK(got->m == expect->m);
        }
    }
}

TEST_CASE("fit_image is identical across thread counts") {
    Rng rng(41);
    const SampleSet s = make_set(clustered_pixels(rng, 80, Pixel{190, 185, 45}, 30),
                                 clustered_pixels(rng, 80, Pixel{70, 90, 55}, 30));
    for (FitMode mode : {FitMode::FirstFound, FitMode::Best}) {
        FitConfig cfg;
        cfg.coeff_step = 0.5;
        cfg.t_step = 16.0;
        cfg.mode = mode;
        cfg.threads = 1;
        const auto sequential = fit_image(s, cfg);
        for (int threads : {2, 4, 7}) {
            cfg.threads = threads;
            const auto parallel = fit_image(s, cfg);
            REQUIRE(sequential.has_value() == parallel.has_value());
            if (sequential) {
                CHECK(sequential->params == parallel->params);
                CHECK(sequential->n == parallel->n);
                CHECK(sequential->m == parallel->m);
            }
        }
    }
}

TEST_CASE("Best mode maximizes n/N - m/M and reports satisfaction") {
    Rng rng(53);
    const SampleSet s = make_set(std::vector<Pixel>(100, Pixel{200, 180, 40}),
                                 std::vector<Pixel>(100, Pixel{60, 80, 50}));
    FitConfig cfg;
    cfg.coeff_step = 0.5;
    cfg.t_step = 16.0;
    cfg.mode = FitMode::Best;
    const auto best = fit_image(s, cfg);
    REQUIRE(best.has_value());
    CHECK(best->satisfied);
    CHECK(best->n == 100); // perfect separation exists, so the optimum attains it
    CHECK(best->m == 0);
}

TEST_CASE("average_params reproduces the ten-image average") {
    const std::vector<SegmentationParams> rows{
        {1.62, -0.31, -1.73, 74}, {0.81, 0.61, -1.17, 126}, {0.38, 0.48, -1.04, 82},
        {0.48, 0.66, -1.18, 72},  {0.76, 0.40, -0.99, 88},  {0.89, 0.52, -1.05, 132},
        {0.74, 0.49, -1.04, 94},  {0.67, 0.44, -1.41, 64},  {1.03, 0.05, -0.92, 92},
        {0.26, 0.58, -1.04, 79}};
    const SegmentationParams avg = average_params(rows);
    CHECK(avg.x == doctest::Approx(0.764).epsilon(1e-12));
    CHECK(avg.y == doctest::Approx(0.392).epsilon(1e-12));
    CHECK(avg.z == doctest::Approx(-1.157).epsilon(1e-12));
    CHECK(avg.t == doctest::Approx(90.3).epsilon(1e-12));
}

TEST_CASE("average_params edge cases") {
    const SegmentationParams p{1.5, -0.5, 2.0, 100.0};
    const SegmentationParams avg = average_params({p});
    CHECK(avg == p);

    const SegmentationParams neg{-1.5, 0.5, -2.0, -100.0};
    const SegmentationParams zero = average_params({p, neg});
    CHECK(zero.x == 0.0);
    CHECK(zero.y == 0.0);
    CHECK(zero.z == 0.0);
    CHECK(zero.t == 0.0);

    CHECK_THROWS_AS(average_params({}), std::invalid_argument);
}

TEST_CASE("fit_dataset averages the satisfied fits") {
    FitConfig cfg;
    cfg.coeff_step = 0.5;
    cfg.t_step = 16.0;
    std::vector<SampleSet> sets;
    for (int i = 0; i < 3; ++i)
        sets.push_back(make_set(std::vector<Pixel>(40, Pixel{200, 180, 40}),
                                std::vector<Pixel>(40, Pixel{60, 80, 50})));

    SUBCASE("all satisfied") {
        const DatasetFit fit = fit_dataset(sets, cfg);
        CHECK(fit.per_image.size() == 3);
        REQUIRE(fit.average.has_value());
        for (const auto& r : fit.per_image) {
            REQUIRE(r.has_value());
            CHECK(r->satisfied);
        }
    }
    SUBCASE("one unsatisfiable image is skipped in the average") {
        const std::vector<Pixel> same(40, Pixel{120, 120, 120});
        sets.push_back(make_set(same, same));
        const DatasetFit fit = fit_dataset(sets, cfg);
        CHECK(fit.per_image.size() == 4);
        CHECK_FALSE(fit.per_image[3].has_value());
        REQUIRE(fit.average.has_value());
        CHECK(fit.average->x == fit.per_image[0]->params.x);
    }
    SUBCASE("all unsatisfiable yields no average") {
        const std::vector<Pixel> same(40, Pixel{120, 120, 120});
        const DatasetFit fit = fit_dataset({make_set(same, same)}, cfg);
        CHECK_FALSE(fit.average.has_value());
    }
    SUBCASE("empty dataset is an error") {
        CHECK_THROWS_AS(fit_dataset({}, cfg), std::invalid_argument);
    }
}

TEST_CASE("satisfied results honor the strict inequalities") {
    Rng rng(61);
    FitConfig cfg;
    cfg.coeff_step = 0.5;
    cfg.t_step = 16.0;
    for (int trial = 0; trial < 5; ++trial) {
        const SampleSet s =
            make_set(clustered_pixels(rng, 100, Pixel{190, 185, 45}, 20),
                     clustered_pixels(rng, 100, Pixel{70, 90, 55}, 20));
        const auto result = fit_image(s, cfg);
        if (!result) continue;
        CHECK(static_cast<double>(result->n) >
              cfg.leaf_fraction * static_cast<double>(s.leaf_count()));
        CHECK(static_cast<double>(result->m) <
              cfg.background_fraction * static_cast<double>(s.background_count()));
    }
}

TEST_CASE("fit report formatting") {
    DatasetFit fit;
    fit.per_image.push_back(FitResult{{1.62, -0.31, -1.73, 74.0}, 99, 0, true});
    fit.per_image.push_back(std::nullopt);
    fit.average = SegmentationParams{0.764, 0.392, -1.157, 90.3};
    const std::string report = format_fit_report({"one.ppm", "two.ppm"}, fit, 42);
    CHECK(report == "# seed 42\n# image x y z T\n"
                    "one.ppm 1.620 -0.310 -1.730 74.0\n"
                    "two.ppm NOT_FOUND\n"
                    "average 0.764 0.392 -1.157 90.3\n");
}
