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

#ifndef GAMAKA_AUDIO_IO_HPP
#define GAMAKA_AUDIO_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <gamaka/error.hpp>

namespace gamaka
{

/// Mono signal in the normalized amplitude domain.
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 0;

    AudioBuffer() = default;
    AudioBuffer(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate)
    {
        if (sample_rate <= 0) {
            throw InvalidArgument("sample rate must be positive, got " + std::to_string(sample_rate));
        }
        for (double v : samples) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("audio buffer contains a non-finite sample");
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
    [[nodiscard]] double duration_s() const noexcept
    {
        return static_cast<double>(samples.size()) / sample_rate;
    }
    [[nodiscard]] std::span<const double> view() const noexcept { return samples; }
};

/// Non-overlapping, contiguous frames; the trailing partial frame is dropped.
struct FrameGrid {
    std::size_t frame_len_samples = 0;
    std::size_t n_frames = 0;
    double frame_ms = 0.0;

    [[nodiscard]] std::size_t begin(std::size_t l) const noexcept { return l * frame_len_samples; }
    [[nodiscard]] std::size_t end(std::size_t l) const noexcept { return (l + 1) * frame_len_samples; }
    [[nodiscard]] std::size_t aligned_samples() const noexcept { return n_frames * frame_len_samples; }
};

inline constexpr double default_frame_ms = 32.0;

inline std::size_t frame_length(double frame_ms, int sample_rate)
{
    if (!(frame_ms > 0.0)) {
        throw InvalidArgument("frame length must be positive");
    }
    const auto len = static_cast<std::size_t>(std::lround(frame_ms / 1000.0 * sample_rate));
    if (len == 0) {
        throw InvalidArgument("frame length rounds to zero samples");
    }
    return len;
}

inline FrameGrid frame_grid(const AudioBuffer &buf, double frame_ms = default_frame_ms)
{
    const std::size_t len = frame_length(frame_ms, buf.sample_rate);
    if (buf.size() < len) {
        throw InvalidArgument("buffer of " + std::to_string(buf.size()) + " samples is shorter than one "
                              + std::to_string(len) + "-sample frame");
    }
    return FrameGrid{len, buf.size() / len, frame_ms};
}

inline std::span<const double> frame_samples(const AudioBuffer &buf, const FrameGrid &grid, std::size_t l)
{
    if (l >= grid.n_frames || grid.end(l) > buf.size()) {
        throw OutOfRange("frame index " + std::to_string(l) + " out of range");
    }
    return buf.view().subspan(grid.begin(l), grid.frame_len_samples);
}

inline double rms(std::span<const double> x) noexcept
{
    if (x.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (double v : x) {
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double frame_rms(const AudioBuffer &buf, const FrameGrid &grid, std::size_t l)
{
    return rms(frame_samples(buf, grid, l));
}

inline std::vector<double> frame_energies(const AudioBuffer &buf, const FrameGrid &grid)
{
    std::vector<double> out(grid.n_frames);
    for (std::size_t l = 0; l < grid.n_frames; ++l) {
        out[l] = frame_rms(buf, grid, l);
    }
    return out;
}

/// The first n_frames * frame_len samples of the buffer.
inline AudioBuffer frame_aligned_prefix(const AudioBuffer &buf, const FrameGrid &grid)
{
    return AudioBuffer(std::vector<double>(buf.samples.begin(),
                                           buf.samples.begin() + static_cast<std::ptrdiff_t>(grid.aligned_samples())),
                       buf.sample_rate);
}

inline std::int16_t to_pcm16(double v) noexcept
{
    v = std::clamp(v, -1.0, 1.0);
    const long q = std::lround(v * 32768.0);
    return static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
}

/// What a sample reads back as after a 16-bit write.
inline double quantize16(double v) noexcept
{
    return to_pcm16(v) / 32768.0;
}

namespace detail
{

inline std::uint32_t le32(const unsigned char *p) noexcept
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8)
           | (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char *p) noexcept
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put32(std::vector<unsigned char> &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
    }
}

inline void put16(std::vector<unsigned char> &out, std::uint16_t v)
{
    out.push_back(static_cast<unsigned char>(v & 0xffu));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

inline constexpr std::uint16_t wave_format_pcm = 1;
inline constexpr std::uint16_t wave_format_float = 3;
inline constexpr std::uint16_t wave_format_extensible = 0xFFFE;

} // namespace detail

/// Parses a RIFF/WAVE image held in memory. `origin` only feeds error messages.
inline AudioBuffer decode_wav(std::span<const unsigned char> bytes, const std::string &origin = "<memory>")
{
    using detail::le16;
    using detail::le32;

    if (bytes.size() < 12) {
        throw TruncatedWav(origin + ": file too short for a RIFF header");
    }
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw UnsupportedWav(origin + ": not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t pos = 12;
    while (true) {
        if (pos + 8 > bytes.size()) {
            throw TruncatedWav(origin + ": no data chunk before end of file");
        }
        const unsigned char *hdr = bytes.data() + pos;
        const std::uint32_t chunk_size = le32(hdr + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16 || body + chunk_size > bytes.size()) {
                throw TruncatedWav(origin + ": truncated fmt chunk");
            }
            const unsigned char *f = bytes.data() + body;
            format = le16(f);
            channels = le16(f + 2);
            rate = le32(f + 4);
            bits = le16(f + 14);
            if (format == detail::wave_format_extensible) {
                if (chunk_size < 40) {
                    throw TruncatedWav(origin + ": truncated extensible fmt chunk");
                }
                // First two bytes of the sub-format GUID carry the plain format tag.
                format = le16(f + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            if (!have_fmt) {
                throw UnsupportedWav(origin + ": data chunk precedes fmt chunk");
            }
            const bool pcm16 = format == detail::wave_format_pcm && bits == 16;
            const bool float32 = format == detail::wave_format_float && bits == 32;
            if (!pcm16 && !float32) {
                throw UnsupportedWav(origin + ": unsupported encoding (format " + std::to_string(format) + ", "
                                     + std::to_string(bits) + " bits); only PCM16 and float32 are read");
            }
            if (channels != 1 && channels != 2) {
                throw UnsupportedWav(origin + ": " + std::to_string(channels) + " channels; only mono and stereo are read");
            }
            if (rate == 0) {
                throw UnsupportedWav(origin + ": zero sample rate");
            }
            if (body + chunk_size > bytes.size()) {
                throw TruncatedWav(origin + ": data chunk declares " + std::to_string(chunk_size) + " bytes but only "
                                   + std::to_string(bytes.size() - body) + " remain");
            }
            const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * channels;
            const std::size_t n = chunk_size / frame_bytes;
            std::vector<double> out(n);
            const unsigned char *d = bytes.data() + body;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t c = 0; c < channels; ++c) {
                    const unsigned char *s = d + i * frame_bytes + c * (bits / 8);
                    if (pcm16) {
                        acc += static_cast<std::int16_t>(le16(s)) / 32768.0;
                    } else {
                        const std::uint32_t raw = le32(s);
                        float f;
                        std::memcpy(&f, &raw, sizeof f);
                        acc += std::clamp(static_cast<double>(f), -1.0, 1.0);
                    }
                }
                out[i] = acc / channels;
            }
            return AudioBuffer(std::move(out), static_cast<int>(rate));
        }
        pos = body + chunk_size + (chunk_size & 1u);
    }
}

inline AudioBuffer read_wav(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path + " for reading");
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes, path);
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer &buf)
{
    using detail::put16;
    using detail::put32;

    const auto data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(out, 16);
    put16(out, detail::wave_format_pcm);
    put16(out, 1);
    put32(out, static_cast<std::uint32_t>(buf.sample_rate));
    put32(out, static_cast<std::uint32_t>(buf.sample_rate) * 2);
    put16(out, 2);
    put16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put32(out, data_bytes);
    for (double v : buf.samples) {
        put16(out, static_cast<std::uint16_t>(to_pcm16(v)));
    }
    return out;
}

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1] before quantization.
inline void write_wav(const std::string &path, const AudioBuffer &buf)
{
    if (buf.empty()) {
        throw InvalidArgument("refusing to write an empty buffer to " + path);
    }
    const auto bytes = encode_wav(buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

} // namespace gamaka

#endif
