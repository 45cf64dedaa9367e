#include "tea/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tea {

std::vector<Region> connected_components(const BinaryMask& mask, long min_area) {
    if (min_area < 1) throw std::invalid_argument("min_area must be >= 1");
    const int w = mask.width();
    const int h = mask.height();
    std::vector<bool> visited(static_cast<std::size_t>(w) * h, false);
    std::vector<Region> regions;
    std::vector<std::pair<int, int>> stack;

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
            if (visited[si] || mask.at(sx, sy) == 0) continue;
            // flood fill one 8-connected component
            long count = 0;
            long sum_x = 0, sum_y = 0;
            int min_x = sx, max_x = sx, min_y = sy, max_y = sy;
            visited[si] = true;
            stack.push_back({sx, sy});
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++count;
                sum_x += x;
                sum_y += y;
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (visited[ni] || mask.at(nx, ny) == 0) continue;
                        visited[ni] = true;
                        stack.push_back({nx, ny});
                    }
                }
            }
            if (count < min_area) continue;
            Region r;
            r.pixel_count = count;
            r.bounding_box = Rect{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
            r.centroid_x = static_cast<double>(sum_x) / static_cast<double>(count);
            r.centroid_y = static_cast<double>(sum_y) / static_cast<double>(count);
            regions.push_back(r);
        }
    }
    std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        if (a.bounding_box.y0 != b.bounding_box.y0)
            return a.bounding_box.y0 < b.bounding_box.y0;
        return a.bounding_box.x0 < b.bounding_box.x0;
    });
    return regions;
}

MatchCounts match_regions(const std::vector<Region>& regions, const GroundTruth& truth) {
    std::vector<bool> consumed(truth.leaf_boxes.size(), false);
    MatchCounts counts;
    for (const Region& r : regions) {
        bool matched = false;
        for (std::size_t i = 0; i < truth.leaf_boxes.size(); ++i) {
            if (consumed[i]) continue;
            if (truth.leaf_boxes[i].contains(r.centroid_x, r.centroid_y)) {
                consumed[i] = true;
                matched = true;
                break;
            }
        }
        if (matched)
            ++counts.matched;
        else
            ++counts.misidentified;
    }
    return counts;
}

EvalReport evaluate(const BinaryMask& mask, const GroundTruth& truth, long min_area) {
    if (truth.leaf_boxes.empty())
        throw std::invalid_argument("evaluate: ground truth has no leaf boxes");
    const auto regions = connected_components(mask, min_area);
    const auto counts = match_regions(regions, truth);
    EvalReport report;
    report.n_identified = counts.matched;
    report.m_misidentified = counts.misidentified;
    report.n_actual = static_cast<long>(truth.leaf_boxes.size());
    report.r_i = 100.0 * static_cast<double>(counts.matched) /
                 static_cast<double>(report.n_actual);
    report.r_m = 100.0 * static_cast<double>(counts.misidentified) /
                 static_cast<double>(report.n_actual);
    return report;
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_reports: empty list");
    EvalReport agg;
    for (const EvalReport& r : reports) {
        agg.n_identified += r.n_identified;
        agg.m_misidentified += r.m_misidentified;
        agg.n_actual += r.n_actual;
        agg.r_i += r.r_i;
        agg.r_m += r.r_m;
    }
    const double k = static_cast<double>(reports.size());
    agg.r_i /= k;
    agg.r_m /= k;
    return agg;
}

std::string format_eval_report(const std::vector<std::string>& labels,
                               const std::vector<EvalReport>& reports,
                               std::uint64_t seed) {
    std::ostringstream out;
    out << "# seed " << seed << "\n";
    out << "# image R_i R_m\n";
    char row[160];
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string& label = i < labels.size() ? labels[i] : std::to_string(i + 1);
        std::snprintf(row, sizeof row, "%s %.2f %.2f\n", label.c_str(), reports[i].r_i,
                      reports[i].r_m);
        out << row;
    }
    const EvalReport avg = aggregate_reports(reports);
    std::snprintf(row, sizeof row, "Average %.2f %.2f\n", avg.r_i, avg.r_m);
    out << row;
    return out.str();
}

} // namespace tea
