#ifndef MFSPEAK_WAV_HPP
#define MFSPEAK_WAV_HPP

#include <string>

#include "mfspeak/time_series.hpp"

namespace mfspeak {

/// Reads a RIFF/WAVE file into a mono TimeSeries.
///
/// Accepted encodings: PCM 8/16/24/32-bit integer and IEEE float
/// 32/64-bit, plus the WAVE_FORMAT_EXTENSIBLE wrappers of both.
/// Multi-channel audio is downmixed by arithmetic mean. Samples are
/// scaled to [-1, 1] (16-bit divides by 2^15, and so on).
///
/// Throws WavError with kind Unreadable (missing/truncated/malformed),
/// UnsupportedEncoding (e.g. ADPCM), or EmptyAudio (no frames).
TimeSeries load_wav(const std::string& path);

/// Writes a mono 16-bit PCM WAV. Samples are clamped to [-1, 1] and
/// rounded to the nearest 16-bit code.
void write_wav16(const std::string& path, const TimeSeries& ts);

/// Lossless raw series container ("MFSPKRAW" magic, version, sample
/// rate, count, little-endian float64 payload). Used for synthetic
/// clips whose dynamic range a 16-bit WAV would destroy.
TimeSeries load_raw(const std::string& path);
void write_raw(const std::string& path, const TimeSeries& ts);

}  // namespace mfspeak

#endif  // MFSPEAK_WAV_HPP
