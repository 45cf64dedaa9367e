#include "tea/plucker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tea/error.hpp"

namespace tea::pluck {

double gripper_deflection(double force_n, const GripperModel& model) {
    if (force_n < 0.0) throw std::domain_error("gripper force must be >= 0");
    return force_n / model.stiffness_n_per_mm();
}

ContactForces contact_forces(double clamp_force_n, const GripperModel& model) {
    const double scale = clamp_force_n / model.calibration_force_n;
    return {model.f1_n * scale, model.f2_n * scale};
}

SenseResult sense_force(double true_force_n, const BridgeSensor& sensor, Rng& rng) {
    if (true_force_n < 0.0) throw std::domain_error("sensed force must be >= 0");
    double voltage = sensor.gain_v_per_n * true_force_n + sensor.bias_v;
    if (sensor.noise_sigma_v != 0.0) voltage += sensor.noise_sigma_v * rng.next_gauss();
    const double span = static_cast<double>(sensor.adc_max());
    // round half up, saturating
    const double code = std::floor(voltage / sensor.full_scale_v * span + 0.5);
    const int adc = static_cast<int>(std::clamp(code, 0.0, span));
    const double measured = static_cast<double>(adc) / span * sensor.full_scale_v /
                            sensor.gain_v_per_n;
    return {measured, adc};
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "Idle";
        case Phase::Closing: return "Closing";
        case Phase::Clamped: return "Clamped";
        case Phase::Pulling: return "Pulling";
        case Phase::Opening: return "Opening";
        case Phase::Reset: return "Reset";
    }
    return "?";
}

const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Success: return "Success";
        case OutcomeKind::Slip: return "Slip";
        case OutcomeKind::Crush: return "Crush";
        case OutcomeKind::Incomplete: return "Incomplete";
    }
    return "?";
}

PluckerState initial_state(const SimConfig& config) {
    PluckerState s;
    s.upper_gap_mm = config.initial_gap_mm;
    s.lower_gap_mm = config.initial_gap_mm;
    s.delay_left = config.motor_stop_delay_ticks;
    return s;
}

namespace {

/// Contact force of one gripper pair at the given jaw gap. Both pairs share
/// the same angle to the mandrel, so the same expression holds for each.
double pair_contact_force(double gap_mm, const StemSpec& stem, const SimConfig& config) {
    if (!config.stem_captured) return 0.0;
    const double overlap = std::max(0.0, stem.diameter_mm - gap_mm);
    return config.gripper.stiffness_n_per_mm() * overlap;
}

/// ADC read followed by the configured moving-average filter.
double read_filtered(PluckerState& s, double true_force, const SimConfig& config, Rng& rng) {
    const double raw = sense_force(true_force, config.sensor, rng).measured_n;
    const std::size_t window = static_cast<std::size_t>(std::max(1, config.sensor.filter_window));
    s.filter_buf.push_back(raw);
    if (s.filter_buf.size() > window)
        s.filter_buf.erase(s.filter_buf.begin());
    const double sum = std::accumulate(s.filter_buf.begin(), s.filter_buf.end(), 0.0);
    return sum / static_cast<double>(s.filter_buf.size());
}

} // namespace

PluckerState step_machine(PluckerState s, const StemSpec& stem, const SimConfig& config,
                          Rng& rng) {
    if (s.outcome) throw std::logic_error("step_machine called on a terminal state");
    ++s.tick;
    const double travel = config.motor.travel_per_tick_mm();

    switch (s.phase) {
        case Phase::Idle:
            s.phase = Phase::Closing;
            break;

        case Phase::Closing: {
            s.upper_gap_mm = std::max(0.0, s.upper_gap_mm - travel);
            s.lower_gap_mm = std::max(0.0, s.lower_gap_mm - travel);
            s.true_clamp_n = pair_contact_force(s.upper_gap_mm, stem, config);
            s.measured_clamp_n = read_filtered(s, s.true_clamp_n, config, rng);
            if (s.true_clamp_n > stem.crush_limit_n) {
                s.outcome = OutcomeKind::Crush;
                break;
            }
            if (s.measured_clamp_n >= config.gripper.clamp_target_n) {
                if (s.delay_left > 0) {
                    --s.delay_left; // late motor stop keeps the jaws moving
                } else {
                    s.phase = Phase::Clamped;
                }
            }
            break;
        }

        case Phase::Clamped:
            // The lower switching motor stops; the two point-A motors take
            // over at equal angular velocity, so the clamp angle is frozen.
            s.measured_clamp_n = read_filtered(s, s.true_clamp_n, config, rng);
            s.phase = Phase::Pulling;
            break;

        case Phase::Pulling: {
            // Clamp angle unchanged during the pull: true force is held.
            s.measured_clamp_n = read_filtered(s, s.true_clamp_n, config, rng);
            if (s.true_clamp_n > stem.crush_limit_n) {
                s.outcome = OutcomeKind::Crush;
                break;
            }
            const double effective_clamp = s.true_clamp_n * (1.0 - config.clamp_derating);
            if (effective_clamp < stem.slip_threshold_n) {
                s.outcome = OutcomeKind::Slip;
                break;
            }
            s.pull_mm += travel;
            const double tension = config.stem_captured ? config.tension_per_mm_n * s.pull_mm : 0.0;
            if (tension >= stem.break_tension_n) {
                s.stem_broken = true;
                s.phase = Phase::Opening;
            } else if (s.pull_mm > config.stroke_budget_mm) {
                s.outcome = OutcomeKind::Incomplete;
            }
            break;
        }

        case Phase::Opening: {
            s.upper_gap_mm += travel;
            s.lower_gap_mm += travel;
            s.true_clamp_n = pair_contact_force(s.upper_gap_mm, stem, config);
            s.measured_clamp_n = read_filtered(s, s.true_clamp_n, config, rng);
            if (s.measured_clamp_n <= 0.0) s.phase = Phase::Reset;
            break;
        }

        case Phase::Reset:
            s.phase = Phase::Idle;
            s.outcome = OutcomeKind::Success;
            break;
    }

    s.peak_clamp_n = std::max(s.peak_clamp_n, s.true_clamp_n);
    return s;
}

PluckOutcome run_trial(const StemSpec& stem, const SimConfig& config, std::uint64_t seed,
                       std::vector<TraceSample>* trace) {
    if (config.tick_budget <= 0) throw std::invalid_argument("tick budget must be > 0");
    Rng rng(seed);
    PluckerState s = initial_state(config);
    while (!s.outcome && s.tick < config.tick_budget) {
        s = step_machine(s, stem, config, rng);
        if (trace)
            trace->push_back(TraceSample{s.tick, s.phase, s.upper_gap_mm, s.lower_gap_mm,
                                         s.true_clamp_n, s.measured_clamp_n, s.pull_mm});
    }
    PluckOutcome outcome;
    outcome.kind = s.outcome.value_or(OutcomeKind::Incomplete);
    outcome.ticks_elapsed = s.tick;
    outcome.peak_clamp_n = s.peak_clamp_n;
    return outcome;
}

SimConfig apply_faults(SimConfig config, const FaultConfig& faults, Rng& rng) {
    if (rng.next_bernoulli(faults.sensor_bias_rate))
        config.sensor.bias_v += faults.sensor_bias_v;
    if (rng.next_bernoulli(faults.sensor_noise_rate))
        config.sensor.noise_sigma_v = faults.sensor_noise_sigma_v;
    if (rng.next_bernoulli(faults.motor_delay_rate))
        config.motor_stop_delay_ticks = faults.motor_delay_ticks;
    if (rng.next_bernoulli(faults.derating_rate))
        config.clamp_derating = faults.derating;
    if (rng.next_bernoulli(faults.capture_miss_rate))
        config.stem_captured = false;
    return config;
}

CampaignReport run_campaign(const std::vector<StemSpec>& stems, const SimConfig& config,
                            const FaultConfig& faults, std::uint64_t seed) {
    if (stems.empty()) throw std::invalid_argument("run_campaign: empty stem list");
    CampaignReport report;
    report.sample_size = static_cast<long>(stems.size());
    for (std::size_t i = 0; i < stems.size(); ++i) {
        Rng fault_rng(derive_seed(seed, 2 * i));
        const SimConfig trial = apply_faults(config, faults, fault_rng);
        const PluckOutcome outcome = run_trial(stems[i], trial, derive_seed(seed, 2 * i + 1));
        switch (outcome.kind) {
            case OutcomeKind::Success: ++report.success; break;
            case OutcomeKind::Slip: ++report.slipped; break;
            case OutcomeKind::Crush: ++report.crushed; break;
            case OutcomeKind::Incomplete: ++report.incomplete; break;
        }
    }
    return report;
}

std::string format_trace(const std::vector<TraceSample>& samples) {
    std::ostringstream out;
    out << "# tick phase upper_gap lower_gap true_force measured_force pull\n";
    char row[192];
    for (const TraceSample& t : samples) {
        std::snprintf(row, sizeof row, "%ld %s %.4f %.4f %.4f %.4f %.4f\n", t.tick,
                      to_string(t.phase), t.upper_gap_mm, t.lower_gap_mm, t.true_clamp_n,
                      t.measured_clamp_n, t.pull_mm);
        out << row;
    }
    return out.str();
}

std::string format_campaign_report(const CampaignReport& r, std::uint64_t seed) {
    std::ostringstream out;
    out << "# seed " << seed << "\n";
    out << "# sample_size crushed slipped incomplete success success_rate\n";
    char row[128];
    std::snprintf(row, sizeof row, "%ld %ld %ld %ld %ld %.1f%%\n", r.sample_size, r.crushed,
                  r.slipped, r.incomplete, r.success, r.success_rate_percent());
    out << row;
    return out.str();
}

std::vector<StemSpec> Scenario::make_stems() const {
    std::vector<StemSpec> stems(static_cast<std::size_t>(trials), stem);
    for (long i = 0; i < trials; ++i) {
        const double f = trials > 1 ? static_cast<double>(i) / static_cast<double>(trials - 1)
                                    : 0.0;
        stems[static_cast<std::size_t>(i)].diameter_mm =
            stem_diameter_min_mm + f * (stem_diameter_max_mm - stem_diameter_min_mm);
    }
    return stems;
}

Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key)) continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw ParseError("scenario line " + std::to_string(lineno) +
                             ": expected '<key> = <value>'");
        try {
            if (key == "trials") sc.trials = std::stol(value);
            else if (key == "seed") sc.seed = std::stoull(value);
            else if (key == "tick_budget") sc.config.tick_budget = std::stol(value);
            else if (key == "initial_gap_mm") sc.config.initial_gap_mm = std::stod(value);
            else if (key == "displacement_per_step_mm")
                sc.config.motor.displacement_per_step_mm = std::stod(value);
            else if (key == "steps_per_tick") sc.config.motor.steps_per_tick = std::stoi(value);
            else if (key == "stroke_budget_mm") sc.config.stroke_budget_mm = std::stod(value);
            else if (key == "tension_per_mm_n") sc.config.tension_per_mm_n = std::stod(value);
            else if (key == "clamp_target_n") sc.config.gripper.clamp_target_n = std::stod(value);
            else if (key == "stem_diameter_min_mm") sc.stem_diameter_min_mm = std::stod(value);
            else if (key == "stem_diameter_max_mm") sc.stem_diameter_max_mm = std::stod(value);
            else if (key == "stem_break_tension_n") sc.stem.break_tension_n = std::stod(value);
            else if (key == "stem_slip_threshold_n") sc.stem.slip_threshold_n = std::stod(value);
            else if (key == "stem_crush_limit_n") sc.stem.crush_limit_n = std::stod(value);
            else if (key == "adc_bits") sc.config.sensor.adc_bits = std::stoi(value);
            else if (key == "gain_v_per_n") sc.config.sensor.gain_v_per_n = std::stod(value);
            else if (key == "full_scale_v") sc.config.sensor.full_scale_v = std::stod(value);
            else if (key == "noise_sigma_v") sc.config.sensor.noise_sigma_v = std::stod(value);
            else if (key == "bias_v") sc.config.sensor.bias_v = std::stod(value);
            else if (key == "filter_window") sc.config.sensor.filter_window = std::stoi(value);
            else if (key == "fault_sensor_bias_rate") sc.faults.sensor_bias_rate = std::stod(value);
            else if (key == "fault_sensor_bias_v") sc.faults.sensor_bias_v = std::stod(value);
            else if (key == "fault_sensor_noise_rate")
                sc.faults.sensor_noise_rate = std::stod(value);
            else if (key == "fault_sensor_noise_sigma_v")
                sc.faults.sensor_noise_sigma_v = std::stod(value);
            else if (key == "fault_motor_delay_rate") sc.faults.motor_delay_rate = std::stod(value);
            else if (key == "fault_motor_delay_ticks")
                sc.faults.motor_delay_ticks = std::stol(value);
            else if (key == "fault_derating_rate") sc.faults.derating_rate = std::stod(value);
            else if (key == "fault_derating") sc.faults.derating = std::stod(value);
            else if (key == "fault_capture_miss_rate")
                sc.faults.capture_miss_rate = std::stod(value);
            else
                throw ParseError("scenario line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("scenario line " + std::to_string(lineno) + ": bad value '" +
                             value + "' for key '" + key + "'");
        }
    }
    if (sc.trials < 1) throw ParseError("scenario: trials must be >= 1");
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return parse_scenario(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace tea::pluck
