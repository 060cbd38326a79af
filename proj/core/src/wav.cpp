#include "mfspeak/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mfspeak/errors.hpp"

namespace mfspeak {

namespace {

// All I/O below assumes a little-endian host, which covers every
// platform this project targets.

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void fail_unreadable(const std::string& path, const std::string& why) {
    throw WavError(WavError::Kind::Unreadable, path + ": " + why);
}

}  // namespace

TimeSeries load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_unreadable(path, "cannot open file");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12) fail_unreadable(path, "truncated RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        fail_unreadable(path, "not a RIFF/WAVE file");
    }

    std::uint16_t format_tag = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        std::uint32_t chunk_size = read_u32(chunk + 4);
        std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) fail_unreadable(path, "truncated chunk");
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) fail_unreadable(path, "fmt chunk too small");
            format_tag = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            if (format_tag == 0xFFFE) {
                // WAVE_FORMAT_EXTENSIBLE: the real format is the first
                // two bytes of the subformat GUID
                if (chunk_size < 40) fail_unreadable(path, "extensible fmt chunk too small");
                format_tag = read_u16(bytes.data() + body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr) fail_unreadable(path, "missing fmt or data chunk");
    if (channels == 0 || sample_rate == 0) fail_unreadable(path, "invalid fmt fields");

    const bool is_pcm = format_tag == 1;
    const bool is_float = format_tag == 3;
    if (!is_pcm && !is_float) {
        throw WavError(WavError::Kind::UnsupportedEncoding,
                       path + ": unsupported format tag " + std::to_string(format_tag));
    }
    if (is_pcm && bits != 8 && bits != 16 && bits != 24 && bits != 32) {
        throw WavError(WavError::Kind::UnsupportedEncoding,
                       path + ": unsupported PCM bit depth " + std::to_string(bits));
    }
    if (is_float && bits != 32 && bits != 64) {
        throw WavError(WavError::Kind::UnsupportedEncoding,
                       path + ": unsupported float bit depth " + std::to_string(bits));
    }

    const std::size_t bytes_per_sample = bits / 8u;
    const std::size_t frame_size = bytes_per_sample * channels;
    const std::size_t frames = frame_size == 0 ? 0 : data_size / frame_size;
    if (frames == 0) {
        throw WavError(WavError::Kind::EmptyAudio, path + ": zero-length audio");
    }

    TimeSeries out;
    out.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + f * frame_size + c * bytes_per_sample;
            double v = 0.0;
            if (is_pcm) {
                switch (bits) {
                    case 8:
                        v = (static_cast<int>(p[0]) - 128) / 128.0;
                        break;
                    case 16: {
                        auto raw = static_cast<std::int16_t>(read_u16(p));
                        v = raw / 32768.0;
                        break;
                    }
                    case 24: {
                        std::int32_t raw = static_cast<std::int32_t>(
                            p[0] | (p[1] << 8) | (p[2] << 16));
                        if (raw & 0x800000) raw |= ~0xFFFFFF;  // sign-extend
                        v = raw / 8388608.0;
                        break;
                    }
                    case 32: {
                        auto raw = static_cast<std::int32_t>(read_u32(p));
                        v = raw / 2147483648.0;
                        break;
                    }
                    default:
                        break;
                }
            } else {
                if (bits == 32) {
                    float fv;
                    std::memcpy(&fv, p, 4);
                    v = fv;
                } else {
                    double dv;
                    std::memcpy(&dv, p, 8);
                    v = dv;
                }
            }
            acc += v;
        }
        out.samples[f] = acc / channels;
    }
    out.sample_rate = sample_rate;
    out.source_id = path;
    return out;
}

void write_wav16(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");

    const std::uint32_t n = static_cast<std::uint32_t>(ts.samples.size());
    const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(ts.sample_rate));
    const std::uint32_t data_size = n * 2;

    auto put_u32 = [&out](std::uint32_t v) {
        std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
        out.write(b.data(), 4);
    };
    auto put_u16 = [&out](std::uint16_t v) {
        std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
        out.write(b.data(), 2);
    };

    out.write("RIFF", 4);
    put_u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);          // PCM
    put_u16(1);          // mono
    put_u32(rate);
    put_u32(rate * 2);   // byte rate
    put_u16(2);          // block align
    put_u16(16);         // bits
    out.write("data", 4);
    put_u32(data_size);
    for (double v : ts.samples) {
        double clamped = std::clamp(v, -1.0, 1.0);
        long code = std::lround(clamped * 32768.0);
        code = std::clamp(code, -32768L, 32767L);
        put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
    }
    if (!out) throw IoError(path + ": write failed");
}

namespace {
constexpr char kRawMagic[8] = {'M', 'F', 'S', 'P', 'K', 'R', 'A', 'W'};
constexpr std::uint32_t kRawVersion = 1;
}  // namespace

TimeSeries load_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kRawMagic, 8) != 0) {
        throw IoError(path + ": not an mfraw file");
    }
    std::uint32_t version = 0;
    double rate = 0.0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&rate), sizeof rate);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || version != kRawVersion) {
        throw IoError(path + ": unsupported mfraw version");
    }
    TimeSeries out;
    out.samples.resize(count);
    in.read(reinterpret_cast<char*>(out.samples.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError(path + ": truncated mfraw payload");
    out.sample_rate = rate;
    out.source_id = path;
    return out;
}

void write_raw(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(kRawMagic, 8);
    std::uint32_t version = kRawVersion;
    std::uint64_t count = ts.samples.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&ts.sample_rate), sizeof ts.sample_rate);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(ts.samples.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace mfspeak
