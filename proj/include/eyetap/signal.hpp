#pragma once

// Acoustic selection channel: RMS level metering, threshold binarization and
// run-length pulse detection, ambient calibration and a synthetic test signal.

#include "eyetap/common.hpp"
#include "eyetap/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eyetap {

struct AudioFrame {
    Millis t_start = 0;
    int sample_rate = 16000;
    std::vector<float> samples;  // mono, each in [-1, +1]

    Millis duration_ms() const;
    void validate() const;
};

struct DetectorConfig {
    double threshold_dbfs = -40.0;
    Millis frame_ms = 10;
    Millis min_pulse_ms = 20;
    Millis max_pulse_ms = 400;
    Millis refractory_ms = 150;
    double level_floor_dbfs = -120.0;
    /// Modeled SPL = dBFS + spl_offset_db.
    double spl_offset_db = 110.0;

    friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;

    void validate() const;
    double to_spl(double dbfs) const { return dbfs + spl_offset_db; }
    double to_dbfs(double spl) const { return spl - spl_offset_db; }
};

/// One analysis window: level of the samples in [t, t + frame_ms).
struct LevelSample {
    Millis t = 0;
    double dbfs = -120.0;

    friend bool operator==(const LevelSample&, const LevelSample&) = default;
};

struct PulseEvent {
    Millis t_onset = 0;
    Millis t_offset = 0;
    double peak_level_dbfs = 0.0;

    friend bool operator==(const PulseEvent&, const PulseEvent&) = default;
    Millis duration() const { return t_offset - t_onset; }
};

/// 20*log10(rms) clamped below at floor_dbfs. Throws InvalidInput on empty input.
double rms_level(std::span<const float> samples, double floor_dbfs);
double rms_level(const AudioFrame& frame, double floor_dbfs);

/**
 * Re-chunks an audio stream into fixed analysis windows of frame_ms and
 * reports one LevelSample per complete window. Window boundaries are aligned
 * to the first frame's t_start, so any segmentation of the same contiguous
 * samples yields the same windows.
 */
class LevelMeter {
public:
    LevelMeter(Millis frame_ms, double floor_dbfs);

    std::vector<LevelSample> push(const AudioFrame& frame);

private:
    Millis frame_ms_;
    double floor_dbfs_;
    int sample_rate_ = 0;
    Millis origin_ = 0;
    std::int64_t consumed_ = 0;  // samples already assigned to emitted windows
    std::vector<float> pending_;
};

/**
 * Incremental threshold detector.
 *
 * Each level is binarized (>= threshold is 1). A maximal run of 1s becomes a
 * PulseEvent when it closes, provided its duration lies in
 * [min_pulse_ms, max_pulse_ms]. Run duration is (last supra-threshold t +
 * frame_ms) - onset. A run that grows past max_pulse_ms is discarded at that
 * point. Levels with t < last event offset + refractory_ms are ignored.
 */
class PulseDetector {
public:
    explicit PulseDetector(DetectorConfig cfg);

    /// Throws ProtocolError if t does not increase.
    std::optional<PulseEvent> push(LevelSample level);
    /// Closes a run still open at end of stream.
    std::optional<PulseEvent> flush();

    const DetectorConfig& config() const { return cfg_; }
    void set_threshold(double dbfs);

private:
    std::optional<PulseEvent> close_run();

    DetectorConfig cfg_;
    std::optional<Millis> last_t_;
    bool in_run_ = false;
    bool run_overlong_ = false;
    Millis run_onset_ = 0;
    Millis run_last_ = 0;
    double run_peak_ = 0.0;
    std::optional<Millis> refractory_until_;
};

/// Batch form of PulseDetector, including the end-of-stream flush.
std::vector<PulseEvent> detect_pulses(std::span<const LevelSample> levels, const DetectorConfig& cfg);

std::vector<LevelSample> measure_levels(std::span<const AudioFrame> frames, Millis frame_ms,
                                        double floor_dbfs);

/// 95th-percentile (nearest rank) ambient window level plus margin_db.
/// Needs at least one second of audio.
double calibrate_threshold(std::span<const AudioFrame> ambient, double margin_db, Millis frame_ms = 10,
                           double floor_dbfs = -120.0);

struct ScheduledPulse {
    Millis t_onset = 0;
    Millis duration_ms = 60;
};

struct AudioScenario {
    std::vector<ScheduledPulse> pulses;
    double pulse_dbfs = -10.0;    // RMS of the tone burst at full envelope
    double ambient_dbfs = -40.0;  // RMS of the white-noise bed
    int sample_rate = 16000;
    Millis duration_ms = 1000;
    Millis chunk_ms = 10;
    double tone_hz = 1000.0;
    Millis ramp_ms = 5;
};

/**
 * Streaming generator behind synth_audio. Pulses can be scheduled while
 * generating, which is how the simulated participant's mouth clicks enter
 * the session.
 */
class AudioSynth {
public:
    AudioSynth(double ambient_dbfs, int sample_rate, std::uint64_t seed, double tone_hz = 1000.0,
               Millis ramp_ms = 5);

    /// Throws InvalidInput if the pulse overlaps one already scheduled.
    void schedule(ScheduledPulse pulse, double level_dbfs);
    /// Drops scheduled pulses with onset after t (the speaker changed plans).
    void cancel_from(Millis t);
    AudioFrame next(Millis chunk_ms);
    Millis now() const;

private:
    struct Burst {
        ScheduledPulse pulse;
        double amplitude;
    };

    double ambient_rms_;
    int sample_rate_;
    double tone_hz_;
    Millis ramp_ms_;
    std::int64_t sample_index_ = 0;
    std::vector<Burst> bursts_;
    Rng rng_;
};

std::vector<AudioFrame> synth_audio(const AudioScenario& scenario, std::uint64_t seed);

// 32-bit float mono WAV I/O.
std::vector<AudioFrame> read_wav(const std::string& path, Millis chunk_ms = 10);
void write_wav(const std::string& path, std::span<const AudioFrame> frames);

}  // namespace eyetap
