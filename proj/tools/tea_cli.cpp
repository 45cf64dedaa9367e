// Command-line front end: fit, segment, evaluate, simulate.
//
// Every command is a pure function of its inputs, flags, and --seed, so
// re-runs produce byte-identical outputs. Exit codes: 0 success, 2 parse
// error, 3 fit not found, 4 I/O failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tea/error.hpp"
#include "tea/evaluation.hpp"
#include "tea/fitting.hpp"
#include "tea/image.hpp"
#include "tea/plucker.hpp"
#include "tea/segmentation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitParseError = 2;
constexpr int kExitNotFound = 3;
constexpr int kExitIoError = 4;
constexpr std::uint64_t kDefaultSeed = 42;

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tea::IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw tea::IoError("failed writing '" + path + "'");
}

tea::SegmentationParams read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tea::IoError("cannot open '" + path + "' for reading");
    tea::SegmentationParams p;
    if (!(in >> p.x >> p.y >> p.z >> p.t))
        throw tea::ParseError(path + ": expected four reals 'x y z T'");
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.t))
        throw tea::ParseError(path + ": parameters must be finite");
    return p;
}

int run_fit(const std::string& annotations_path, const std::string& images_dir,
            const std::string& out_dir, const tea::FitConfig& config, std::uint64_t seed) {
    const auto boxes = tea::parse_annotations_file(annotations_path);
    if (boxes.empty()) throw tea::ParseError(annotations_path + ": no annotation boxes");

    // Group boxes per image, keeping first-appearance order.
    std::vector<std::string> image_ids;
    std::map<std::string, std::vector<tea::SampleBox>> per_image_boxes;
    for (const auto& box : boxes) {
        if (per_image_boxes.find(box.image_id) == per_image_boxes.end())
            image_ids.push_back(box.image_id);
        per_image_boxes[box.image_id].push_back(box);
    }

    std::vector<tea::SampleSet> sample_sets;
    sample_sets.reserve(image_ids.size());
    for (const std::string& id : image_ids) {
        std::map<std::string, tea::RgbImage> images;
        images.emplace(id, tea::read_ppm_file((fs::path(images_dir) / id).string()));
        sample_sets.push_back(tea::extract_samples(images, per_image_boxes[id]));
    }

    const tea::DatasetFit fit = tea::fit_dataset(sample_sets, config);
    const std::string report = tea::format_fit_report(image_ids, fit, seed);
    std::cout << report;
    if (!fit.average) {
        std::ostringstream msg;
        msg << "no parameters satisfied the acceptance fractions; scanned x,y,z in ["
            << config.coeff_min << ", " << config.coeff_max << "] step " << config.coeff_step
            << " and T in [" << config.t_min << ", " << config.t_max << "] step "
            << config.t_step << "; rerun with wider ranges";
        throw NotFoundError(msg.str());
    }

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "fit_report.txt").string(), report);
    char params_line[128];
    std::snprintf(params_line, sizeof params_line, "%.17g %.17g %.17g %.17g\n",
                  fit.average->x, fit.average->y, fit.average->z, fit.average->t);
    write_text_file((fs::path(out_dir) / "params.txt").string(), params_line);
    return 0;
}

int run_segment(const std::string& params_path, const std::string& image_path,
                const std::string& out_path) {
    const tea::SegmentationParams params = read_params_file(params_path);
    const tea::RgbImage img = tea::read_ppm_file(image_path);
    tea::write_mask_file(tea::binarize(params, img), out_path);
    return 0;
}

tea::GroundTruth truth_for_mask(const std::string& truth_path, const std::string& mask_id) {
    std::ifstream in(truth_path);
    if (!in) throw tea::IoError("cannot open '" + truth_path + "' for reading");
    tea::GroundTruth truth;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string id;
        tea::Rect box;
        if (!(ls >> id)) continue;
        if (!(ls >> box.x0 >> box.y0 >> box.width >> box.height))
            throw tea::ParseError(truth_path + ": line " + std::to_string(lineno) +
                                  ": expected '<mask_id> <x0> <y0> <w> <h>'");
        if (id == mask_id) truth.leaf_boxes.push_back(box);
    }
    return truth;
}

int run_evaluate(const std::vector<std::string>& mask_paths, const std::string& truth_path,
                 long min_area, const std::string& out_path, std::uint64_t seed) {
    std::vector<std::string> labels;
    std::vector<tea::EvalReport> reports;
    for (const std::string& path : mask_paths) {
        const std::string id = fs::path(path).filename().string();
        const tea::BinaryMask mask = tea::read_pgm_file(path);
        const tea::GroundTruth truth = truth_for_mask(truth_path, id);
        if (truth.leaf_boxes.empty())
            throw tea::ParseError(truth_path + ": no ground-truth boxes for '" + id + "'");
        labels.push_back(id);
        reports.push_back(tea::evaluate(mask, truth, min_area));
    }
    if (reports.empty()) throw tea::ParseError("no masks given");
    const std::string report = tea::format_eval_report(labels, reports, seed);
    std::cout << report;
    if (!out_path.empty()) write_text_file(out_path, report);
    return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir, bool trace,
                 bool seed_overridden, std::uint64_t seed_flag) {
    tea::pluck::Scenario scenario = tea::pluck::parse_scenario_file(scenario_path);
    if (seed_overridden) scenario.seed = seed_flag;
    const auto stems = scenario.make_stems();
    const tea::pluck::CampaignReport report =
        tea::pluck::run_campaign(stems, scenario.config, scenario.faults, scenario.seed);
    const std::string summary = tea::pluck::format_campaign_report(report, scenario.seed);
    std::cout << summary;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "campaign_report.txt").string(), summary);
        if (trace) {
            for (std::size_t i = 0; i < stems.size(); ++i) {
                // Re-run with the identical per-trial seed to record the trace.
                std::vector<tea::pluck::TraceSample> samples;
                tea::Rng fault_rng(tea::derive_seed(scenario.seed, 2 * i));
                const tea::pluck::SimConfig trial =
                    tea::pluck::apply_faults(scenario.config, scenario.faults, fault_rng);
                tea::pluck::run_trial(stems[i], trial, tea::derive_seed(scenario.seed, 2 * i + 1),
                                      &samples);
                write_text_file(
                    (fs::path(out_dir) / ("trial_" + std::to_string(i) + ".trace")).string(),
                    tea::pluck::format_trace(samples));
            }
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tender-leaf segmentation fitting and plucking-finger simulation"};
    app.require_subcommand(1);

    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
    app.add_option("--seed", seed, "Seed for every stochastic component")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (never changes results)")
        ->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit segmentation parameters from annotated images");
    std::string annotations, images_dir, fit_out = "out";
    std::string mode = "first";
    tea::FitConfig fit_config;
    fit->add_option("annotations", annotations, "Annotation file")->required();
    fit->add_option("images", images_dir, "Directory of PPM images")->required();
    fit->add_option("--out", fit_out, "Output directory")->capture_default_str();
    fit->add_option("--mode", mode, "first|best")->capture_default_str();
    fit->add_option("--coeff-min", fit_config.coeff_min)->capture_default_str();
    fit->add_option("--coeff-max", fit_config.coeff_max)->capture_default_str();
    fit->add_option("--coeff-step", fit_config.coeff_step)->capture_default_str();
    fit->add_option("--t-min", fit_config.t_min)->capture_default_str();
    fit->add_option("--t-max", fit_config.t_max)->capture_default_str();
    fit->add_option("--t-step", fit_config.t_step)->capture_default_str();
    fit->add_option("--leaf-fraction", fit_config.leaf_fraction)->capture_default_str();
    fit->add_option("--background-fraction", fit_config.background_fraction)
        ->capture_default_str();

    // segment
    auto* segment = app.add_subcommand("segment", "Binarize an image with fitted parameters");
    std::string params_path, image_path, mask_out = "mask.pgm";
    segment->add_option("params", params_path, "Params file 'x y z T'")->required();
    segment->add_option("image", image_path, "Input PPM image")->required();
    segment->add_option("--out", mask_out, "Output PGM mask")->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score masks against ground-truth boxes");
    std::vector<std::string> mask_paths;
    std::string truth_path, eval_out;
    long min_area = 50;
    evaluate->add_option("masks", mask_paths, "PGM mask files")->required();
    evaluate->add_option("--truth", truth_path, "Ground-truth box file")->required();
    evaluate->add_option("--min-area", min_area, "Minimum region area in pixels")
        ->capture_default_str();
    evaluate->add_option("--out", eval_out, "Report file (also printed to stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a plucking campaign from a scenario");
    std::string scenario_path, sim_out;
    bool trace = false;
    simulate->add_option("scenario", scenario_path, "Scenario config file")->required();
    simulate->add_option("--out", sim_out, "Output directory");
    simulate->add_flag("--trace", trace, "Write a per-trial tick trace");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            if (mode == "first") fit_config.mode = tea::FitMode::FirstFound;
            else if (mode == "best") fit_config.mode = tea::FitMode::Best;
            else throw tea::ParseError("--mode must be 'first' or 'best'");
            fit_config.threads = threads;
            return run_fit(annotations, images_dir, fit_out, fit_config, seed);
        }
        if (segment->parsed()) return run_segment(params_path, image_path, mask_out);
        if (evaluate->parsed())
            return run_evaluate(mask_paths, truth_path, min_area, eval_out, seed);
        if (simulate->parsed())
            return run_simulate(scenario_path, sim_out, trace,
                                app.count("--seed") > 0, seed);
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const tea::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    } catch (const tea::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
