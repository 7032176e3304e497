#include "circadj/spectral.hpp"

#include "circadj/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace circadj {

namespace {

// FFTW planning is not thread-safe; execution with a finished plan is.
std::mutex planner_mutex;

struct RealFft {
    explicit RealFft(std::size_t n)
        : n(n),
          in(fftw_alloc_real(n)),
          out(fftw_alloc_complex(n / 2 + 1)) {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    ~RealFft() {
        {
            std::lock_guard lock(planner_mutex);
            fftw_destroy_plan(plan);
        }
        fftw_free(in);
        fftw_free(out);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t n;
    double* in;
    fftw_complex* out;
    fftw_plan plan{};
};

}  // namespace

Spectrum welch_psd(std::span<const double> x, double dt, const WelchOptions& opt) {
    const std::size_t len = opt.segment;
    if (len < 2) throw InputError("Welch segment must hold at least 2 samples");
    if (!(dt > 0.0)) throw InputError("sample spacing must be > 0");
    if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw InputError("Welch overlap must lie in [0, 1)");
    if (x.size() < len)
        throw InputError("series of " + std::to_string(x.size()) + " samples is shorter than the Welch segment (" +
                         std::to_string(len) + ")");
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len * (1.0 - opt.overlap))));

    std::vector<double> window(len);
    double power = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        // periodic Hann, the usual choice for spectral estimation
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
        power += window[i] * window[i];
    }

    const std::size_t bins = len / 2 + 1;
    const double fs = 1.0 / dt;
    Spectrum s;
    s.psd.assign(bins, 0.0);
    s.freqs.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) s.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(len);

    RealFft fft(len);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + len <= x.size(); start += hop, ++segments) {
        double mean = 0.0;
        for (std::size_t i = 0; i < len; ++i) mean += x[start + i];
        mean /= static_cast<double>(len);
        for (std::size_t i = 0; i < len; ++i) fft.in[i] = (x[start + i] - mean) * window[i];
        fftw_execute(fft.plan);
        for (std::size_t k = 0; k < bins; ++k) {
            const double re = fft.out[k][0];
            const double im = fft.out[k][1];
            s.psd[k] += re * re + im * im;
        }
    }
    const double scale = 1.0 / (fs * power * static_cast<double>(segments));
    for (std::size_t k = 0; k < bins; ++k) {
        const bool unpaired = k == 0 || (len % 2 == 0 && k == bins - 1);
        s.psd[k] *= unpaired ? scale : 2.0 * scale;
    }
    return s;
}

PowerSpectrum series_spectrum(const SensitivitySeries& series, const std::vector<std::size_t>& params,
                              const WelchOptions& opt) {
    if (series.times.size() < 2) throw InputError("a spectrum needs at least two instants");
    const double dt = series.times[1] - series.times[0];
    PowerSpectrum out;
    for (std::size_t c = 0; c < params.size(); ++c) {
        const auto p = params[c];
        if (p >= series.params.size()) throw InputError("unknown parameter id " + std::to_string(p));
        const Vector row = series.values.col(static_cast<Eigen::Index>(p));
        const auto s = welch_psd(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), dt, opt);
        if (c == 0) {
            out.freqs = s.freqs;
            out.psd.resize(static_cast<Eigen::Index>(s.psd.size()), static_cast<Eigen::Index>(params.size()));
        }
        out.names.push_back(series.params[p].name);
        for (std::size_t k = 0; k < s.psd.size(); ++k)
            out.psd(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = s.psd[k];
    }
    return out;
}

PowerSpectrum normalize_per_bin(const PowerSpectrum& spectrum) {
    PowerSpectrum out = spectrum;
    for (Eigen::Index k = 0; k < out.psd.rows(); ++k) {
        const double total = out.psd.row(k).sum();
        if (total > 0.0) out.psd.row(k) /= total;
    }
    return out;
}

std::vector<RankedParameter> rank_parameters(const SensitivitySeries& series, std::size_t k) {
    std::vector<RankedParameter> out;
    const auto m = series.values.rows();
    for (std::size_t p = 0; p < series.params.size(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        const double nominal = std::abs(series.params[p].nominal);
        double score = 0.0;
        if (m == 1) {
            score = std::abs(series.values(0, col)) * nominal;
        } else {
            for (Eigen::Index r = 1; r < m; ++r) {
                const double width = series.times[static_cast<std::size_t>(r)] - series.times[static_cast<std::size_t>(r - 1)];
                score += 0.5 * width * (std::abs(series.values(r, col)) + std::abs(series.values(r - 1, col)));
            }
            score *= nominal;
        }
        out.push_back({p, series.params[p].name, score});
    }
    std::sort(out.begin(), out.end(), [](const RankedParameter& a, const RankedParameter& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.name < b.name;
    });
    out.resize(std::min(k, out.size()));
    return out;
}

RelativeShares normalize_relative(const SensitivitySeries& series, const std::vector<std::size_t>& selected) {
    if (selected.empty()) throw InputError("normalize_relative needs at least one parameter");
    for (auto p : selected)
        if (p >= series.params.size()) throw InputError("unknown parameter id " + std::to_string(p));
    RelativeShares out;
    out.params = selected;
    const auto m = series.values.rows();
    const auto s = static_cast<Eigen::Index>(selected.size());
    out.fractions.resize(m, s);
    out.uniform_split.assign(static_cast<std::size_t>(m), false);
    for (Eigen::Index r = 0; r < m; ++r) {
        double total = 0.0;
        for (Eigen::Index c = 0; c < s; ++c) {
            const auto p = selected[static_cast<std::size_t>(c)];
            const double v = std::abs(series.values(r, static_cast<Eigen::Index>(p)) * series.params[p].nominal);
            out.fractions(r, c) = v;
            total += v;
        }
        if (total > 0.0 && std::isfinite(total)) {
            out.fractions.row(r) /= total;
        } else {
            out.fractions.row(r).setConstant(1.0 / static_cast<double>(s));
            out.uniform_split[static_cast<std::size_t>(r)] = true;
        }
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("pearson: length mismatch");
    if (a.empty()) return 0.0;
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace circadj
