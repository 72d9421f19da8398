#include "eyetap/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eyetap {

Millis AudioFrame::duration_ms() const {
    if (sample_rate <= 0) return 0;
    return static_cast<Millis>(samples.size()) * 1000 / sample_rate;
}

void AudioFrame::validate() const {
    if (sample_rate <= 0) throw InvalidInput("audio frame sample_rate must be positive");
    for (float s : samples) {
        if (!(s >= -1.0f && s <= 1.0f)) throw InvalidInput("audio sample outside [-1, 1]");
    }
}

void DetectorConfig::validate() const {
    if (frame_ms <= 0) throw InvalidSpec("detector frame_ms must be positive");
    if (min_pulse_ms > max_pulse_ms) throw InvalidSpec("detector min_pulse_ms exceeds max_pulse_ms");
    if (refractory_ms < 0) throw InvalidSpec("detector refractory_ms must be >= 0");
    if (!(threshold_dbfs > level_floor_dbfs))
        throw InvalidSpec("detector threshold_dbfs must lie above level_floor_dbfs");
}

double rms_level(std::span<const float> samples, double floor_dbfs) {
    if (samples.empty()) throw InvalidInput("rms_level: empty frame");
    double acc = 0.0;
    for (float s : samples) acc += static_cast<double>(s) * s;
    const double rms = std::sqrt(acc / static_cast<double>(samples.size()));
    if (rms <= 0.0) return floor_dbfs;
    return std::max(20.0 * std::log10(rms), floor_dbfs);
}

double rms_level(const AudioFrame& frame, double floor_dbfs) {
    return rms_level(std::span<const float>(frame.samples), floor_dbfs);
}

// ---------------------------------------------------------------------------

LevelMeter::LevelMeter(Millis frame_ms, double floor_dbfs) : frame_ms_(frame_ms), floor_dbfs_(floor_dbfs) {
    if (frame_ms <= 0) throw InvalidInput("LevelMeter: frame_ms must be positive");
}

std::vector<LevelSample> LevelMeter::push(const AudioFrame& frame) {
    frame.validate();
    if (sample_rate_ == 0) {
        sample_rate_ = frame.sample_rate;
        origin_ = frame.t_start;
    } else if (frame.sample_rate != sample_rate_) {
        throw InvalidInput("LevelMeter: sample rate changed mid-stream");
    }
    pending_.insert(pending_.end(), frame.samples.begin(), frame.samples.end());

    const auto window =
        static_cast<std::size_t>(std::max<std::int64_t>(1, frame_ms_ * sample_rate_ / 1000));
    std::vector<LevelSample> out;
    std::size_t pos = 0;
    while (pending_.size() - pos >= window) {
        const Millis t = origin_ + consumed_ * 1000 / sample_rate_;
        out.push_back({t, rms_level(std::span<const float>(pending_.data() + pos, window), floor_dbfs_)});
        pos += window;
        consumed_ += static_cast<std::int64_t>(window);
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
    return out;
}

// ---------------------------------------------------------------------------

PulseDetector::PulseDetector(DetectorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PulseDetector::set_threshold(double dbfs) {
    DetectorConfig next = cfg_;
    next.threshold_dbfs = dbfs;
    next.validate();
    cfg_ = next;
}

std::optional<PulseEvent> PulseDetector::push(LevelSample level) {
    if (last_t_ && level.t <= *last_t_) {
        throw ProtocolError("pulse detector: level timestamp " + std::to_string(level.t) +
                            " does not follow " + std::to_string(*last_t_));
    }
    last_t_ = level.t;
    if (refractory_until_ && level.t < *refractory_until_) return std::nullopt;

    if (level.dbfs >= cfg_.threshold_dbfs) {
        if (!in_run_) {
            in_run_ = true;
            run_overlong_ = false;
            run_onset_ = level.t;
            run_peak_ = level.dbfs;
        }
        run_last_ = level.t;
        run_peak_ = std::max(run_peak_, level.dbfs);
        if (run_last_ + cfg_.frame_ms - run_onset_ > cfg_.max_pulse_ms) run_overlong_ = true;
        return std::nullopt;
    }
    if (in_run_) return close_run();
    return std::nullopt;
}

std::optional<PulseEvent> PulseDetector::flush() {
    if (in_run_) return close_run();
    return std::nullopt;
}

std::optional<PulseEvent> PulseDetector::close_run() {
    in_run_ = false;
    if (run_overlong_) return std::nullopt;
    const Millis offset = run_last_ + cfg_.frame_ms;
    if (offset - run_onset_ < cfg_.min_pulse_ms) return std::nullopt;
    refractory_until_ = offset + cfg_.refractory_ms;
    return PulseEvent{run_onset_, offset, run_peak_};
}

std::vector<PulseEvent> detect_pulses(std::span<const LevelSample> levels, const DetectorConfig& cfg) {
    PulseDetector detector(cfg);
    std::vector<PulseEvent> out;
    for (const auto& level : levels) {
        if (auto ev = detector.push(level)) out.push_back(*ev);
    }
    if (auto ev = detector.flush()) out.push_back(*ev);
    return out;
}

std::vector<LevelSample> measure_levels(std::span<const AudioFrame> frames, Millis frame_ms,
                                        double floor_dbfs) {
    LevelMeter meter(frame_ms, floor_dbfs);
    std::vector<LevelSample> out;
    for (const auto& f : frames) {
        auto levels = meter.push(f);
        out.insert(out.end(), levels.begin(), levels.end());
    }
    return out;
}

double calibrate_threshold(std::span<const AudioFrame> ambient, double margin_db, Millis frame_ms,
                           double floor_dbfs) {
    Millis total = 0;
    for (const auto& f : ambient) total += f.duration_ms();
    if (total < 1000) throw InvalidInput("calibrate_threshold: need at least 1 s of ambient audio");

    auto levels = measure_levels(ambient, frame_ms, floor_dbfs);
    if (levels.empty()) throw InvalidInput("calibrate_threshold: no complete analysis window");
    std::vector<double> db;
    db.reserve(levels.size());
    for (const auto& l : levels) db.push_back(l.dbfs);
    std::sort(db.begin(), db.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(db.size())));
    return db[std::max<std::size_t>(rank, 1) - 1] + margin_db;
}

// ---------------------------------------------------------------------------

AudioSynth::AudioSynth(double ambient_dbfs, int sample_rate, std::uint64_t seed, double tone_hz,
                       Millis ramp_ms)
    : ambient_rms_(std::pow(10.0, ambient_dbfs / 20.0)),
      sample_rate_(sample_rate),
      tone_hz_(tone_hz),
      ramp_ms_(ramp_ms),
      rng_(seed) {
    if (sample_rate <= 0) throw InvalidInput("AudioSynth: sample_rate must be positive");
}

Millis AudioSynth::now() const { return sample_index_ * 1000 / sample_rate_; }

void AudioSynth::schedule(ScheduledPulse pulse, double level_dbfs) {
    if (pulse.duration_ms <= 0) throw InvalidInput("scheduled pulse must have positive duration");
    for (const auto& b : bursts_) {
        const bool disjoint = pulse.t_onset + pulse.duration_ms <= b.pulse.t_onset ||
                              b.pulse.t_onset + b.pulse.duration_ms <= pulse.t_onset;
        if (!disjoint) throw InvalidInput("scheduled pulses overlap");
    }
    bursts_.push_back({pulse, std::sqrt(2.0) * std::pow(10.0, level_dbfs / 20.0)});
}

void AudioSynth::cancel_from(Millis t) {
    std::erase_if(bursts_, [t](const Burst& b) { return b.pulse.t_onset > t; });
}

AudioFrame AudioSynth::next(Millis chunk_ms) {
    const auto count = static_cast<std::size_t>(chunk_ms * sample_rate_ / 1000);
    AudioFrame frame;
    frame.t_start = now();
    frame.sample_rate = sample_rate_;
    frame.samples.resize(count);

    const double sr = sample_rate_;
    for (std::size_t k = 0; k < count; ++k, ++sample_index_) {
        double v = ambient_rms_ > 0.0 ? ambient_rms_ * rng_.normal() : 0.0;
        const double t_ms = static_cast<double>(sample_index_) * 1000.0 / sr;
        for (const auto& b : bursts_) {
            const double rel = t_ms - static_cast<double>(b.pulse.t_onset);
            const double dur = static_cast<double>(b.pulse.duration_ms);
            if (rel < 0.0 || rel >= dur) continue;
            double env = 1.0;
            const double ramp = std::min(static_cast<double>(ramp_ms_), dur / 2.0);
            if (ramp > 0.0) {
                const double edge = std::min(rel, dur - rel);
                if (edge < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * edge / ramp);
            }
            v += env * b.amplitude * std::sin(2.0 * std::numbers::pi * tone_hz_ * rel / 1000.0);
        }
        frame.samples[k] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
    const Millis t_now = now();
    std::erase_if(bursts_, [&](const Burst& b) { return b.pulse.t_onset + b.pulse.duration_ms < t_now; });
    return frame;
}

std::vector<AudioFrame> synth_audio(const AudioScenario& scenario, std::uint64_t seed) {
    if (scenario.chunk_ms <= 0) throw InvalidInput("synth_audio: chunk_ms must be positive");
    AudioSynth synth(scenario.ambient_dbfs, scenario.sample_rate, seed, scenario.tone_hz, scenario.ramp_ms);
    for (const auto& p : scenario.pulses) synth.schedule(p, scenario.pulse_dbfs);

    std::vector<AudioFrame> frames;
    while (synth.now() < scenario.duration_ms) {
        frames.push_back(synth.next(std::min(scenario.chunk_ms, scenario.duration_ms - synth.now())));
        if (frames.back().samples.empty()) {
            frames.pop_back();
            break;
        }
    }
    return frames;
}

}  // namespace eyetap
