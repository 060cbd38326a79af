#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>

#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"
#include "mfspeak/time_series.hpp"
#include "mfspeak/wav.hpp"
#include "support/oracles.hpp"

using namespace mfspeak;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    auto dir = fs::temp_directory_path() / "mfspeak_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("segment: identity window returns the series element-wise") {
    TimeSeries ts{{0.1, -0.2, 0.3, 0.4}, 2.0, "x"};
    auto out = segment(ts, 0.0, 2.0);
    REQUIRE(out.samples.size() == ts.samples.size());
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        CHECK(out.samples[i] == ts.samples[i]);
    }
    CHECK(out.sample_rate == ts.sample_rate);
}

TEST_CASE("segment: window beyond the end is rejected") {
    TimeSeries ts;
    ts.samples.assign(220500, 0.25);
    ts.sample_rate = 22050.0;
    CHECK_THROWS_AS(segment(ts, 5.0, 10.0), InvalidArgument);
}

TEST_CASE("segment: index arithmetic from seconds") {
    TimeSeries ts;
    ts.samples.resize(220500);
    std::iota(ts.samples.begin(), ts.samples.end(), 0.0);
    for (double& v : ts.samples) v /= 220500.0;
    ts.sample_rate = 22050.0;

    auto full = segment(ts, 0.0, 10.0);
    CHECK(full.samples.size() == 220500);
    CHECK(full.samples.front() == ts.samples.front());

    auto two = segment(ts, 0.0, 2.0);
    CHECK(two.samples.size() == 44100);

    auto mid = segment(ts, 1.0, 2.0);
    CHECK(mid.samples.size() == 44100);
    CHECK(mid.samples.front() == ts.samples[22050]);
}

TEST_CASE("binomial cascade: closed-form values for small levels") {
    auto one = gen_binomial_cascade({1, 0.75});
    REQUIRE(one.samples.size() == 2);
    CHECK(one.samples[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(one.samples[1] == doctest::Approx(0.75).epsilon(1e-15));

    auto two = gen_binomial_cascade({2, 0.75});
    REQUIRE(two.samples.size() == 4);
    CHECK(two.samples[0] == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(two.samples[1] == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK(two.samples[2] == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK(two.samples[3] == doctest::Approx(0.5625).epsilon(1e-15));
}

TEST_CASE("binomial cascade: positive, normalized, reproducible") {
    SplitMix64 rng(99);
    for (int rep = 0; rep < 8; ++rep) {
        int levels = 1 + static_cast<int>(rng.next_u64() % 14);
        double a = 0.55 + 0.4 * rng.next_unit();
        auto ts = gen_binomial_cascade({levels, a});
        REQUIRE(ts.samples.size() == (std::size_t{1} << levels));
        double sum = 0.0;
        for (double v : ts.samples) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        auto again = gen_binomial_cascade({levels, a});
        CHECK(again.samples == ts.samples);
    }
}

TEST_CASE("binomial cascade: multiplier outside (0.5, 1) is rejected") {
    CHECK_THROWS_AS(gen_binomial_cascade({4, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(gen_binomial_cascade({4, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(gen_binomial_cascade({4, 1.3}), InvalidArgument);
    CHECK_THROWS_AS(gen_binomial_cascade({0, 0.75}), InvalidArgument);
}

TEST_CASE("white noise: determinism and moments") {
    auto a = gen_white_noise(8, 42);
    auto b = gen_white_noise(8, 42);
    CHECK(a.samples == b.samples);
    CHECK(gen_white_noise(8, 43).samples != a.samples);

    auto big = gen_white_noise(std::size_t{1} << 16, 1);
    double mean = 0.0;
    for (double v : big.samples) mean += v;
    mean /= static_cast<double>(big.samples.size());
    double var = 0.0;
    for (double v : big.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(big.samples.size());
    CHECK(mean > -0.05);
    CHECK(mean < 0.05);
    CHECK(var > 0.9);
    CHECK(var < 1.1);

    CHECK_THROWS_AS(gen_white_noise(1, 0), InvalidArgument);
}

TEST_CASE("load_wav: 16-bit scaling against hand-built bytes") {
    auto path = temp_file("pcm16.wav");
    oracles::ref_wav_writer_pcm16(path.string(), {0, 16384, -16384}, 22050);
    auto ts = load_wav(path.string());
    REQUIRE(ts.samples.size() == 3);
    CHECK(ts.samples[0] == 0.0);
    CHECK(ts.samples[1] == 0.5);
    CHECK(ts.samples[2] == -0.5);
    CHECK(ts.sample_rate == 22050.0);
    CHECK(ts.source_id == path.string());
}

TEST_CASE("load_wav: 8/24/32-bit PCM normalization") {
    auto p8 = temp_file("pcm8.wav");
    oracles::ref_wav_writer_pcm_width(p8.string(), {-128, 0, 127}, 1, 8000);
    auto t8 = load_wav(p8.string());
    CHECK(t8.samples[0] == -1.0);
    CHECK(t8.samples[1] == 0.0);
    CHECK(t8.samples[2] == doctest::Approx(127.0 / 128.0).epsilon(1e-15));

    auto p24 = temp_file("pcm24.wav");
    oracles::ref_wav_writer_pcm_width(p24.string(), {-(1 << 23), 0, (1 << 22)}, 3, 8000);
    auto t24 = load_wav(p24.string());
    CHECK(t24.samples[0] == -1.0);
    CHECK(t24.samples[1] == 0.0);
    CHECK(t24.samples[2] == 0.5);

    auto p32 = temp_file("pcm32.wav");
    oracles::ref_wav_writer_pcm_width(
        p32.string(), {std::numeric_limits<std::int32_t>::min(), 0, 1 << 30}, 4, 8000);
    auto t32 = load_wav(p32.string());
    CHECK(t32.samples[0] == -1.0);
    CHECK(t32.samples[1] == 0.0);
    CHECK(t32.samples[2] == 0.5);
}

TEST_CASE("load_wav: stereo downmix is the channel mean") {
    auto path = temp_file("stereo.wav");
    oracles::ref_wav_writer_float32(path.string(), {1.0f, 0.0f}, 22050, 2);
    auto ts = load_wav(path.string());
    REQUIRE(ts.samples.size() == 1);
    CHECK(ts.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("load_wav: a 10-second file at 22050 Hz has 220500 samples") {
    auto path = temp_file("tensec.wav");
    std::vector<std::int16_t> codes(220500);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        codes[i] = static_cast<std::int16_t>(8000.0 * std::sin(0.01 * static_cast<double>(i)));
    }
    oracles::ref_wav_writer_pcm16(path.string(), codes, 22050);
    auto ts = load_wav(path.string());
    CHECK(ts.samples.size() == 220500);
    CHECK(ts.duration_seconds() == doctest::Approx(10.0));
}

TEST_CASE("load_wav: error kinds are distinct") {
    CHECK_THROWS_AS(load_wav("/nonexistent/file.wav"), WavError);
    try {
        load_wav("/nonexistent/file.wav");
    } catch (const WavError& e) {
        CHECK(e.kind() == WavError::Kind::Unreadable);
    }

    auto adpcm = temp_file("adpcm.wav");
    oracles::ref_wav_writer_adpcm_stub(adpcm.string());
    try {
        load_wav(adpcm.string());
        FAIL("expected WavError");
    } catch (const WavError& e) {
        CHECK(e.kind() == WavError::Kind::UnsupportedEncoding);
    }

    auto empty = temp_file("empty.wav");
    oracles::ref_wav_writer_empty(empty.string());
    try {
        load_wav(empty.string());
        FAIL("expected WavError");
    } catch (const WavError& e) {
        CHECK(e.kind() == WavError::Kind::EmptyAudio);
    }
}

TEST_CASE("wav round-trip stays within 16-bit quantization error") {
    TimeSeries ts;
    SplitMix64 rng(7);
    ts.samples.resize(4096);
    for (double& v : ts.samples) v = 2.0 * rng.next_unit() - 1.0;
    ts.sample_rate = 22050.0;

    auto path = temp_file("roundtrip.wav");
    write_wav16(path.string(), ts);
    auto back = load_wav(path.string());
    REQUIRE(back.samples.size() == ts.samples.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        max_err = std::max(max_err, std::abs(back.samples[i] - ts.samples[i]));
    }
    CHECK(max_err <= std::pow(2.0, -15.0));

    // same bound through the independent byte-level writer
    std::vector<std::int16_t> codes;
    for (double v : ts.samples) {
        long code = std::lround(v * 32768.0);
        codes.push_back(static_cast<std::int16_t>(std::clamp(code, -32768L, 32767L)));
    }
    auto ref_path = temp_file("roundtrip_ref.wav");
    oracles::ref_wav_writer_pcm16(ref_path.string(), codes, 22050);
    auto ref_back = load_wav(ref_path.string());
    max_err = 0.0;
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        max_err = std::max(max_err, std::abs(ref_back.samples[i] - ts.samples[i]));
    }
    CHECK(max_err <= std::pow(2.0, -15.0));
}

TEST_CASE("raw container round-trips exactly") {
    auto ts = gen_binomial_cascade({10, 0.7});
    auto path = temp_file("clip.mfraw");
    write_raw(path.string(), ts);
    auto back = load_raw(path.string());
    CHECK(back.samples == ts.samples);
    CHECK(back.sample_rate == ts.sample_rate);

    CHECK_THROWS_AS(load_raw("/nonexistent/clip.mfraw"), IoError);
}

TEST_CASE("validate rejects degenerate series") {
    CHECK_THROWS_AS(validate(TimeSeries{{1.0}, 1.0, ""}), InvalidArgument);
    CHECK_THROWS_AS(validate(TimeSeries{{1.0, 2.0}, 0.0, ""}), InvalidArgument);
    TimeSeries nan_series{{1.0, std::nan("")}, 1.0, ""};
    CHECK_THROWS_AS(validate(nan_series), InvalidArgument);
}
