#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tea/rng.hpp"

namespace tea::pluck {

/// Linear-elastic gripper pair, calibrated to the published deflection of
/// the aluminium finger at its 4 N working point.
struct GripperModel {
    double calibration_force_n = 4.0;
    double max_deflection_mm = 0.027; // deflection at the calibration force
    double cross_section_mm = 3.0;    // square beam side
    double clamp_target_n = 4.0;
    double band_min_n = 3.0;
    double band_max_n = 4.0;
    double f1_n = 3.57; // contact-force components at the 4 N working point
    double f2_n = 2.41;

    double stiffness_n_per_mm() const { return calibration_force_n / max_deflection_mm; }
};

/// Deflection of one gripper under a clamp force. Throws std::domain_error
/// for negative force.
double gripper_deflection(double force_n, const GripperModel& model);

/// F1/F2 contact components scaled linearly with the clamp force.
struct ContactForces {
    double f1_n = 0.0;
    double f2_n = 0.0;
};
ContactForces contact_forces(double clamp_force_n, const GripperModel& model);

/// Strain-gauge bridge plus ADC. The bridge excitation, gauge factor and
/// amplifier gain are folded into one force-to-voltage gain.
struct BridgeSensor {
    double gain_v_per_n = 0.5;
    int adc_bits = 12;
    double full_scale_v = 5.0;
    double noise_sigma_v = 0.0;
    double bias_v = 0.0;    // fault injection: offset added to the bridge output
    int filter_window = 1;  // moving average over this many samples; 1 = none

    int adc_max() const { return (1 << adc_bits) - 1; }
    double lsb_force_n() const { return full_scale_v / adc_max() / gain_v_per_n; }
};

struct SenseResult {
    double measured_n = 0.0;
    int adc = 0;
};

/// voltage = gain*force + bias + noise; ADC rounds half-up and saturates;
/// the measured force is the ADC code mapped back through the gain.
SenseResult sense_force(double true_force_n, const BridgeSensor& sensor, Rng& rng);

/// A simulated tea stem.
struct StemSpec {
    double diameter_mm = 2.0;
    double break_tension_n = 2.0;
    double slip_threshold_n = 3.0; // minimum clamp force that resists the pull
    double crush_limit_n = 6.0;    // clamp force above which the stem is crushed
};

struct MotorModel {
    double step_angle_deg = 1.8;
    double displacement_per_step_mm = 0.002; // via the sleeve linkage
    int steps_per_tick = 1;

    double travel_per_tick_mm() const { return displacement_per_step_mm * steps_per_tick; }
};

enum class Phase { Idle, Closing, Clamped, Pulling, Opening, Reset };
enum class OutcomeKind { Success, Slip, Crush, Incomplete };

const char* to_string(Phase p);
const char* to_string(OutcomeKind k);

struct SimConfig {
    GripperModel gripper;
    BridgeSensor sensor;
    MotorModel motor;
    double initial_gap_mm = 4.0;
    double tension_per_mm_n = 0.5; // stem tension per mm of pull
    double stroke_budget_mm = 20.0;
    long tick_budget = 50000;
    // Per-trial fault state (set by the campaign's fault sampler):
    bool stem_captured = true;     // gatherer missed the stem when false
    double clamp_derating = 0.0;   // misalignment: fraction of clamp force lost at the stem
    long motor_stop_delay_ticks = 0;
};

struct PluckerState {
    Phase phase = Phase::Idle;
    double upper_gap_mm = 0.0;
    double lower_gap_mm = 0.0;
    double true_clamp_n = 0.0;
    double measured_clamp_n = 0.0;
    double pull_mm = 0.0;
    long tick = 0;
    bool stem_broken = false;
    double peak_clamp_n = 0.0;
    long delay_left = 0;
    std::vector<double> filter_buf; // recent measured samples, oldest first
    std::optional<OutcomeKind> outcome;
};

PluckerState initial_state(const SimConfig& config);

/// Advances the machine by one control tick: read the bridge, decide, step
/// the motors. Throws std::logic_error if called on a terminal state.
PluckerState step_machine(PluckerState state, const StemSpec& stem,
                          const SimConfig& config, Rng& rng);

struct PluckOutcome {
    OutcomeKind kind = OutcomeKind::Incomplete;
    long ticks_elapsed = 0;
    double peak_clamp_n = 0.0;
};

struct TraceSample {
    long tick = 0;
    Phase phase = Phase::Idle;
    double upper_gap_mm = 0.0;
    double lower_gap_mm = 0.0;
    double true_clamp_n = 0.0;
    double measured_clamp_n = 0.0;
    double pull_mm = 0.0;
};

/// Runs step_machine to a terminal outcome, or Incomplete when the tick
/// budget runs out. Deterministic for a given seed. When trace is non-null
/// one sample per tick is appended.
PluckOutcome run_trial(const StemSpec& stem, const SimConfig& config,
                       std::uint64_t seed, std::vector<TraceSample>* trace = nullptr);

/// Independent, seedable fault injections mirroring the failure modes seen
/// in hardware: biased force sensing, noisy sensing, late motor stop, and
/// mechanical misalignment. Rates are per-trial probabilities.
struct FaultConfig {
    double sensor_bias_rate = 0.0;
    double sensor_bias_v = 2.0; // reads ~4 N at zero contact with default gain
    double sensor_noise_rate = 0.0;
    double sensor_noise_sigma_v = 0.05;
    double motor_delay_rate = 0.0;
    long motor_delay_ticks = 10;
    double derating_rate = 0.0;
    double derating = 0.5;
    double capture_miss_rate = 0.0;
};

/// Draws each injection independently from the rng and returns the
/// per-trial config.
SimConfig apply_faults(SimConfig config, const FaultConfig& faults, Rng& rng);

struct CampaignReport {
    long sample_size = 0;
    long crushed = 0;
    long slipped = 0;
    long incomplete = 0;
    long success = 0;

    double success_rate_percent() const {
        return sample_size == 0 ? 0.0 : 100.0 * success / sample_size;
    }
};

/// One trial per stem; per-trial seeds and fault draws derive from the
/// master seed so the tally is identical regardless of execution order.
CampaignReport run_campaign(const std::vector<StemSpec>& stems, const SimConfig& config,
                            const FaultConfig& faults, std::uint64_t seed);

std::string format_trace(const std::vector<TraceSample>& samples);
std::string format_campaign_report(const CampaignReport& report, std::uint64_t seed);

/// A full simulate run parsed from a `key = value` scenario file.
struct Scenario {
    long trials = 1;
    std::uint64_t seed = 42;
    double stem_diameter_min_mm = 2.0;
    double stem_diameter_max_mm = 2.0;
    StemSpec stem;
    SimConfig config;
    FaultConfig faults;

    /// Stem diameters spread linearly across [min, max], one per trial.
    std::vector<StemSpec> make_stems() const;
};

Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_file(const std::string& path);

} // namespace tea::pluck
