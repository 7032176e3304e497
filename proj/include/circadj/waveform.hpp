#pragma once

#include <variant>

namespace circadj {

struct DcWave {
    double level = 0.0;
    bool operator==(const DcWave&) const = default;
};

/// amplitude * sin(2*pi*frequency*t + phase)
struct SineWave {
    double amplitude = 0.0;
    double frequency = 1.0;
    double phase = 0.0;
    bool operator==(const SineWave&) const = default;
};

/// Trapezoidal pulse train. Within each period (shifted by `delay`) the
/// signal ramps low->high over `rise`, stays high until `duty*period`
/// (measured from the start of the rise), then ramps back over `fall`.
struct PwmWave {
    double period = 1.0;
    double duty = 0.5;
    double rise = 0.0;
    double fall = 0.0;
    double high = 1.0;
    double low = 0.0;
    double delay = 0.0;
    bool operator==(const PwmWave&) const = default;
};

using Waveform = std::variant<DcWave, SineWave, PwmWave>;

[[nodiscard]] double evaluate(const Waveform& w, double t);

/// Fraction in [0, 1] of the way from `low` to `high` at time t.
[[nodiscard]] double pwm_level(const PwmWave& w, double t);

/// Throws InputError if the waveform parameters are out of range.
void validate(const Waveform& w);

}  // namespace circadj
