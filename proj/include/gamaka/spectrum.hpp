// Copyright 2026 The Gamaka Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GAMAKA_SPECTRUM_HPP
#define GAMAKA_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include <fftw3.h>

#include <gamaka/error.hpp>

namespace gamaka
{

enum class WindowShape { rectangular, hann };

/// Analysis window: size W and shift w, both in milliseconds.
struct WindowConfig {
    WindowShape shape = WindowShape::hann;
    double size_ms = 40.0;
    double shift_ms = 10.0;

    WindowConfig() = default;
    WindowConfig(WindowShape s, double size, double shift) : shape(s), size_ms(size), shift_ms(shift)
    {
        if (!(size_ms > 0.0) || !(shift_ms > 0.0)) {
            throw InvalidArgument("window size and shift must be positive");
        }
    }
};

/// Symmetric window of length n.
inline std::vector<double> make_window(WindowShape shape, std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (shape == WindowShape::hann && n > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
        }
    }
    return w;
}

/// Null-to-null main-lobe width in radians per sample for an n-sample window.
inline double main_lobe_width(WindowShape shape, std::size_t n)
{
    if (n == 0) {
        throw InvalidArgument("window length must be positive");
    }
    const double k = shape == WindowShape::hann ? 8.0 : 4.0;
    return k * std::numbers::pi / static_cast<double>(n);
}

/// True when the main lobe is no wider than 2*pi*f0*Ts, i.e. a tone at f0 is cleanly resolvable.
inline bool resolves_pitch(const WindowConfig &cfg, double f0_hz, int sample_rate)
{
    const auto n = static_cast<std::size_t>(std::lround(cfg.size_ms / 1000.0 * sample_rate));
    return main_lobe_width(cfg.shape, n) <= 2.0 * std::numbers::pi * f0_hz / sample_rate;
}

inline std::size_t next_pow2(std::size_t n) noexcept
{
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

namespace detail
{

struct FftwFree {
    void operator()(void *p) const noexcept { fftw_free(p); }
};

struct FftwPlanDeleter {
    void operator()(fftw_plan p) const noexcept { fftw_destroy_plan(p); }
};

} // namespace detail

/// Real-input DFT of `x` zero-padded to `nfft`; returns nfft/2 + 1 bins.
inline std::vector<std::complex<double>> real_dft(std::span<const double> x, std::size_t nfft)
{
    if (nfft < x.size()) {
        throw InvalidArgument("transform length shorter than input");
    }
    const std::size_t nbins = nfft / 2 + 1;
    std::unique_ptr<double, detail::FftwFree> in(static_cast<double *>(fftw_malloc(sizeof(double) * nfft)));
    std::unique_ptr<fftw_complex, detail::FftwFree> out(
        static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * nbins)));
    if (!in || !out) {
        throw std::bad_alloc();
    }
    std::unique_ptr<std::remove_pointer_t<fftw_plan>, detail::FftwPlanDeleter> plan(
        fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(), out.get(), FFTW_ESTIMATE));
    for (std::size_t i = 0; i < nfft; ++i) {
        in.get()[i] = i < x.size() ? x[i] : 0.0;
    }
    fftw_execute(plan.get());
    std::vector<std::complex<double>> result(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        result[k] = {out.get()[k][0], out.get()[k][1]};
    }
    return result;
}

/// Magnitude spectrum of the windowed frame. `nfft` of 0 picks the next power of two.
inline std::vector<double> stft_frame(std::span<const double> frame, WindowShape shape, std::size_t nfft = 0)
{
    if (frame.empty()) {
        throw InvalidArgument("cannot transform an empty frame");
    }
    if (nfft == 0) {
        nfft = next_pow2(frame.size());
    }
    const auto w = make_window(shape, frame.size());
    std::vector<double> xw(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        xw[i] = frame[i] * w[i];
    }
    const auto bins = real_dft(xw, nfft);
    std::vector<double> mag(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        mag[k] = std::abs(bins[k]);
    }
    return mag;
}

inline double bin_frequency(std::size_t k, std::size_t nfft, int sample_rate) noexcept
{
    return static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
}

/// Indices of local maxima whose magnitude is at least `floor_ratio` of the global maximum.
inline std::vector<std::size_t> spectral_peaks(std::span<const double> mag, double floor_ratio)
{
    std::vector<std::size_t> peaks;
    if (mag.size() < 3) {
        return peaks;
    }
    double top = 0.0;
    for (double m : mag) {
        top = std::max(top, m);
    }
    for (std::size_t k = 1; k + 1 < mag.size(); ++k) {
        if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] >= floor_ratio * top && mag[k] > 0.0) {
            peaks.push_back(k);
        }
    }
    return peaks;
}

} // namespace gamaka

#endif
