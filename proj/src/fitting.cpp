#include "tea/fitting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace tea {

void FitConfig::validate() const {
    if (!(coeff_min < coeff_max)) throw std::invalid_argument("coeff_min must be < coeff_max");
    if (!(t_min < t_max)) throw std::invalid_argument("t_min must be < t_max");
    if (!(coeff_step > 0.0) || !(t_step > 0.0)) throw std::invalid_argument("steps must be > 0");
    if (!(background_fraction > 0.0) || !(leaf_fraction < 1.0) ||
        !(background_fraction < leaf_fraction))
        throw std::invalid_argument("fractions must satisfy 0 < background < leaf < 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

namespace {

int grid_size(double min, double max, double step) {
    // Small slack so an exactly-dividing step keeps both endpoints.
    return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

void require_populations(const SampleSet& samples) {
    if (samples.leaf_count() < 1 || samples.background_count() < 1)
        throw std::invalid_argument("both sample populations must be non-empty");
}

long count_at_least(const Eigen::VectorXd& scores, double t) {
    long c = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        if (scores[i] >= t) ++c;
    return c;
}

/// Smallest integer k with (double)k > bound.
long min_count_above(double bound) {
    return static_cast<long>(std::floor(bound)) + 1;
}

/// Largest integer j with (double)j < bound.
long max_count_below(double bound) {
    return static_cast<long>(std::ceil(bound)) - 1;
}

/// k-th largest element (k in [1, size]).
double kth_largest(std::vector<double>& buf, long k) {
    const auto nth = buf.begin() + (static_cast<long>(buf.size()) - k);
    std::nth_element(buf.begin(), nth, buf.end());
    return *nth;
}

struct Candidate {
    double objective = -std::numeric_limits<double>::infinity();
    int iy = 0, iz = 0, it = 0;
    long n = 0, m = 0;
    bool valid = false;
};

} // namespace

int FitConfig::coeff_grid_size() const { return grid_size(coeff_min, coeff_max, coeff_step); }
int FitConfig::t_grid_size() const { return grid_size(t_min, t_max, t_step); }

Counts count_satisfying(const SegmentationParams& params, const SampleSet& samples) {
    require_populations(samples);
    const Eigen::VectorXd leaf = scores(params, samples.leaf);
    const Eigen::VectorXd background = scores(params, samples.background);
    return {count_at_least(leaf, params.t), count_at_least(background, params.t)};
}

ThresholdSweep sweep_thresholds(double x, double y, double z,
                                const SampleSet& samples, const FitConfig& config) {
    config.validate();
    require_populations(samples);
    const SegmentationParams p{x, y, z, 0.0};
    Eigen::VectorXd leaf = scores(p, samples.leaf);
    Eigen::VectorXd background = scores(p, samples.background);
    std::vector<double> leaf_sorted(leaf.data(), leaf.data() + leaf.size());
    std::vector<double> bg_sorted(background.data(), background.data() + background.size());
    std::sort(leaf_sorted.begin(), leaf_sorted.end());
    std::sort(bg_sorted.begin(), bg_sorted.end());

    ThresholdSweep sweep;
    const int nt = config.t_grid_size();
    sweep.thresholds.reserve(nt);
    sweep.leaf_counts.reserve(nt);
    sweep.background_counts.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        const double t = config.t_value(i);
        // count >= t by rank lookup in the sorted scores
        const auto lit = std::lower_bound(leaf_sorted.begin(), leaf_sorted.end(), t);
        const auto bit = std::lower_bound(bg_sorted.begin(), bg_sorted.end(), t);
        sweep.thresholds.push_back(t);
        sweep.leaf_counts.push_back(static_cast<long>(leaf_sorted.end() - lit));
        sweep.background_counts.push_back(static_cast<long>(bg_sorted.end() - bit));
    }
    return sweep;
}

std::optional<FitResult> fit_image(const SampleSet& samples, const FitConfig& config) {
    config.validate();
    require_populations(samples);

    const long N = samples.leaf_count();
    const long M = samples.background_count();
    const long k_min = min_count_above(config.leaf_fraction * static_cast<double>(N));
    const long m_max = max_count_below(config.background_fraction * static_cast<double>(M));
    const int nc = config.coeff_grid_size();
    const int nt = config.t_grid_size();
    if (k_min > N || m_max < 0) return std::nullopt; // acceptance fractions unattainable

    const Eigen::VectorXd leaf_r = samples.leaf.col(0);
    const Eigen::VectorXd leaf_g = samples.leaf.col(1);
    const Eigen::VectorXd leaf_b = samples.leaf.col(2);
    const Eigen::VectorXd bg_r = samples.background.col(0);
    const Eigen::VectorXd bg_g = samples.background.col(1);
    const Eigen::VectorXd bg_b = samples.background.col(2);

    const bool first_found = config.mode == FitMode::FirstFound;
    std::vector<Candidate> per_x(static_cast<std::size_t>(nc));
    std::atomic<int> next_x{0};
    std::atomic<int> found_x{std::numeric_limits<int>::max()};

    auto worker = [&]() {
        Eigen::VectorXd leaf_xy(N), bg_xy(M), leaf_s(N), bg_s(M);
        std::vector<double> leaf_buf(static_cast<std::size_t>(N));
        std::vector<double> bg_buf(static_cast<std::size_t>(M));
        for (;;) {
            const int ix = next_x.fetch_add(1);
            if (ix >= nc) return;
            // A satisfying point at a smaller x already wins; skip larger x.
            if (first_found && ix > found_x.load()) continue;
            const double x = config.coeff_value(ix);
            Candidate best;
            bool done = false;
            for (int iy = 0; iy < nc && !done; ++iy) {
                const double y = config.coeff_value(iy);
                leaf_xy = x * leaf_r + y * leaf_g;
                bg_xy = x * bg_r + y * bg_g;
                for (int iz = 0; iz < nc && !done; ++iz) {
                    const double z = config.coeff_value(iz);
                    leaf_s = leaf_xy + z * leaf_b;
                    bg_s = bg_xy + z * bg_b;
                    if (first_found) {
                        // n(t) >= k_min  <=>  t <= k_min-th largest leaf score.
                        // m(t) <= m_max  <=>  t >  (m_max+1)-th largest background score.
                        std::copy(leaf_s.data(), leaf_s.data() + N, leaf_buf.begin());
                        const double t_hi = kth_largest(leaf_buf, k_min);
                        double t_lo = -std::numeric_limits<double>::infinity();
                        if (m_max + 1 <= M) {
                            std::copy(bg_s.data(), bg_s.data() + M, bg_buf.begin());
                            t_lo = kth_largest(bg_buf, m_max + 1);
                        }
                        if (!(t_lo < t_hi)) continue;
                        // Smallest grid threshold strictly above t_lo.
                        long it = 0;
                        if (t_lo >= config.t_min) {
                            const double d = (t_lo - config.t_min) / config.t_step;
                            if (d >= static_cast<double>(nt)) continue;
                            it = std::max<long>(0, static_cast<long>(std::floor(d)));
                            while (it < nt && config.t_value(static_cast<int>(it)) <= t_lo) ++it;
                        }
                        if (it >= nt) continue;
                        const double t = config.t_value(static_cast<int>(it));
                        if (t > t_hi) continue;
                        best.iy = iy;
                        best.iz = iz;
                        best.it = static_cast<int>(it);
                        best.n = count_at_least(leaf_s, t);
                        best.m = count_at_least(bg_s, t);
                        best.valid = true;
                        done = true;
                    } else {
                        std::copy(leaf_s.data(), leaf_s.data() + N, leaf_buf.begin());
                        std::copy(bg_s.data(), bg_s.data() + M, bg_buf.begin());
                        std::sort(leaf_buf.begin(), leaf_buf.end());
                        std::sort(bg_buf.begin(), bg_buf.end());
                        for (int it = 0; it < nt; ++it) {
                            const double t = config.t_value(it);
                            const long n = static_cast<long>(
                                leaf_buf.end() -
                                std::lower_bound(leaf_buf.begin(), leaf_buf.end(), t));
                            const long m = static_cast<long>(
                                bg_buf.end() -
                                std::lower_bound(bg_buf.begin(), bg_buf.end(), t));
                            const double obj = static_cast<double>(n) / static_cast<double>(N) -
                                               static_cast<double>(m) / static_cast<double>(M);
                            if (obj > best.objective) {
                                best = Candidate{obj, iy, iz, it, n, m, true};
                            }
                        }
                    }
                }
            }
            if (best.valid) {
                per_x[static_cast<std::size_t>(ix)] = best;
                if (first_found) {
                    int cur = found_x.load();
                    while (ix < cur && !found_x.compare_exchange_weak(cur, ix)) {
                    }
                }
            }
        }
    };

    const int threads = std::min(config.threads, nc);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int best_ix = -1;
    if (first_found) {
        for (int i = 0; i < nc; ++i) {
            if (per_x[static_cast<std::size_t>(i)].valid) {
                best_ix = i;
                break;
            }
        }
    } else {
        for (int i = 0; i < nc; ++i) {
            const Candidate& c = per_x[static_cast<std::size_t>(i)];
            if (!c.valid) continue;
            if (best_ix < 0 ||
                c.objective > per_x[static_cast<std::size_t>(best_ix)].objective)
                best_ix = i;
        }
    }
    if (best_ix < 0) return std::nullopt;

    const Candidate& c = per_x[static_cast<std::size_t>(best_ix)];
    FitResult result;
    result.params = SegmentationParams{config.coeff_value(best_ix), config.coeff_value(c.iy),
                                       config.coeff_value(c.iz), config.t_value(c.it)};
    result.n = c.n;
    result.m = c.m;
    result.satisfied = static_cast<double>(c.n) > config.leaf_fraction * static_cast<double>(N) &&
                       static_cast<double>(c.m) < config.background_fraction * static_cast<double>(M);
    return result;
}

SegmentationParams average_params(const std::vector<SegmentationParams>& results) {
    if (results.empty()) throw std::invalid_argument("average_params: empty list");
    SegmentationParams avg;
    for (const auto& p : results) {
        avg.x += p.x;
        avg.y += p.y;
        avg.z += p.z;
        avg.t += p.t;
    }
    const double k = static_cast<double>(results.size());
    avg.x /= k;
    avg.y /= k;
    avg.z /= k;
    avg.t /= k;
    return avg;
}

DatasetFit fit_dataset(const std::vector<SampleSet>& per_image_samples,
                       const FitConfig& config) {
    if (per_image_samples.empty())
        throw std::invalid_argument("fit_dataset: empty dataset");
    DatasetFit fit;
    fit.per_image.reserve(per_image_samples.size());
    std::vector<SegmentationParams> satisfied;
    for (const SampleSet& samples : per_image_samples) {
        auto result = fit_image(samples, config);
        if (result && result->satisfied) satisfied.push_back(result->params);
        fit.per_image.push_back(std::move(result));
    }
    if (!satisfied.empty()) fit.average = average_params(satisfied);
    return fit;
}

std::string format_fit_report(const std::vector<std::string>& image_ids,
                              const DatasetFit& fit, std::uint64_t seed) {
    std::ostringstream out;
    out << "# seed " << seed << "\n";
    out << "# image x y z T\n";
    char row[128];
    for (std::size_t i = 0; i < fit.per_image.size(); ++i) {
        const std::string& id = i < image_ids.size() ? image_ids[i] : std::to_string(i + 1);
        const auto& r = fit.per_image[i];
        if (r && r->satisfied) {
            std::snprintf(row, sizeof row, "%s %.3f %.3f %.3f %.1f\n", id.c_str(),
                          r->params.x, r->params.y, r->params.z, r->params.t);
            out << row;
        } else {
            out << id << " NOT_FOUND\n";
        }
    }
    if (fit.average) {
        std::snprintf(row, sizeof row, "average %.3f %.3f %.3f %.1f\n", fit.average->x,
                      fit.average->y, fit.average->z, fit.average->t);
        out << row;
    } else {
        out << "average NOT_FOUND\n";
    }
    return out.str();
}

} // namespace tea
