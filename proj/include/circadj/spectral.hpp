#pragma once

#include "circadj/adjoint.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace circadj {

struct WelchOptions {
    std::size_t segment = 256;  // samples per segment, also the FFT length
    double overlap = 0.5;       // fraction of a segment shared with the next one
};

/// One-sided Welch estimate: Hann window, mean removed per segment,
/// density scaling so that sum(psd) * df approximates the variance.
struct Spectrum {
    std::vector<double> freqs;  // Hz, 0..fs/2
    std::vector<double> psd;    // (unit of x)^2 / Hz
};

/// Throws InputError when the series is shorter than one segment.
[[nodiscard]] Spectrum welch_psd(std::span<const double> x, double dt, const WelchOptions& opt = {});

/// Welch spectra of several channels sharing one frequency axis.
struct PowerSpectrum {
    std::vector<double> freqs;
    std::vector<std::string> names;
    DenseMatrix psd;  // bins x channels
};

/// Spectra of the selected parameter rows of a series (uniform instants).
[[nodiscard]] PowerSpectrum series_spectrum(const SensitivitySeries& series, const std::vector<std::size_t>& params,
                                            const WelchOptions& opt = {});

/// Divides every bin by the sum over channels at that bin (0/0 stays 0).
[[nodiscard]] PowerSpectrum normalize_per_bin(const PowerSpectrum& spectrum);

struct RankedParameter {
    std::size_t param = 0;
    std::string name;
    double score = 0.0;
};

/// score_i = integral over the window of |dU/dp_i| |p_i| (trapezoidal in
/// t_m; a single instant scores |dU/dp_i p_i|). Descending, ties by name.
/// Returns min(k, P) entries.
[[nodiscard]] std::vector<RankedParameter> rank_parameters(const SensitivitySeries& series, std::size_t k);

struct RelativeShares {
    std::vector<std::size_t> params;
    DenseMatrix fractions;          // instants x selected
    std::vector<bool> uniform_split;  // instants where every selected value was 0
};

/// fraction_i(t_m) = |dU/dp_i p_i| / sum over the selection, so each row
/// sums to one.
[[nodiscard]] RelativeShares normalize_relative(const SensitivitySeries& series,
                                                const std::vector<std::size_t>& selected);

/// Pearson correlation; 0 when either input is constant.
[[nodiscard]] double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace circadj
