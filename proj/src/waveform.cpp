#include "circadj/waveform.hpp"

#include "circadj/errors.hpp"

#include <cmath>
#include <numbers>

namespace circadj {

double pwm_level(const PwmWave& w, double t) {
    double local = std::fmod(t - w.delay, w.period);
    if (local < 0.0) local += w.period;
    const double on_end = w.duty * w.period;
    if (w.duty <= 0.0) return 0.0;
    if (local < w.rise) return local / w.rise;
    if (local < on_end) return 1.0;
    if (w.duty >= 1.0) return 1.0;
    if (local < on_end + w.fall) return 1.0 - (local - on_end) / w.fall;
    return 0.0;
}

double evaluate(const Waveform& w, double t) {
    struct Visitor {
        double t;
        double operator()(const DcWave& d) const { return d.level; }
        double operator()(const SineWave& s) const {
            return s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
        }
        double operator()(const PwmWave& p) const { return p.low + (p.high - p.low) * pwm_level(p, t); }
    };
    return std::visit(Visitor{t}, w);
}

void validate(const Waveform& w) {
    if (const auto* s = std::get_if<SineWave>(&w)) {
        if (!(s->frequency > 0.0)) throw InputError("sine frequency must be > 0");
    } else if (const auto* p = std::get_if<PwmWave>(&w)) {
        if (!(p->period > 0.0)) throw InputError("PWM period must be > 0");
        if (!(p->duty >= 0.0 && p->duty <= 1.0)) throw InputError("PWM duty must lie in [0, 1]");
        if (!(p->rise >= 0.0) || !(p->fall >= 0.0)) throw InputError("PWM rise/fall must be >= 0");
        if (p->rise + p->fall > p->period)
            throw InputError("PWM rise + fall exceeds the period");
    }
}

}  // namespace circadj
