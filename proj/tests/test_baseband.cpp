#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "gnss/baseband.hpp"
#include "gnss/errors.hpp"

using namespace gnss;
using namespace gnss::baseband;
using gnss::constants::kCaCodeLength;

namespace {

// chip-domain circular correlation, the brute-force oracle
int circular_corr(const CaCode& a, const CaCode& b, int lag) {
  int acc = 0;
  for (int i = 0; i < kCaCodeLength; ++i) {
    acc += a.chips[i] * b.chips[(i + lag) % kCaCodeLength];
  }
  return acc;
}

}  // namespace

TEST_CASE("C/A codes are balanced 1023-chip sequences") {
  for (int prn = 1; prn <= 32; ++prn) {
    const CaCode code = generate_ca_code(prn);
    int plus = 0;
    for (int chip : code.chips) {
      CHECK((chip == 1 || chip == -1));
      if (chip == 1) ++plus;
    }
    // 512 of one polarity, 511 of the other
    CHECK((plus == 511 || plus == 512));
  }
  CHECK_THROWS_AS(generate_ca_code(0), UnknownPrn);
  CHECK_THROWS_AS(generate_ca_code(33), UnknownPrn);
}

TEST_CASE("autocorrelation is three-valued off peak") {
  for (int prn : {1, 7, 19, 32}) {
    const CaCode code = generate_ca_code(prn);
    CHECK(circular_corr(code, code, 0) == kCaCodeLength);
    for (int lag = 1; lag < kCaCodeLength; ++lag) {
      const int v = circular_corr(code, code, lag);
      CHECK((v == -65 || v == -1 || v == 63));
    }
  }
}

TEST_CASE("distinct codes stay below the Gold cross-correlation bound") {
  for (int a : {1, 13, 27}) {
    for (int b : {4, 22, 31}) {
      if (a == b) continue;
      const CaCode ca = generate_ca_code(a);
      const CaCode cb = generate_ca_code(b);
      for (int lag = 0; lag < kCaCodeLength; ++lag) {
        CHECK(std::abs(circular_corr(ca, cb, lag)) <= 65);
      }
    }
  }
}

TEST_CASE("spread_bits sample counts and polarity") {
  const CaCode code = generate_ca_code(5);
  const IqBuffer one = spread_bits({0}, code, 2.046e6);
  CHECK(one.samples.size() == 40920);  // 2 samples per chip, 20 periods

  const IqBuffer flipped = spread_bits({1}, code, 2.046e6);
  for (size_t i = 0; i < one.samples.size(); ++i) {
    CHECK(flipped.samples[i] == -one.samples[i]);
  }
}

TEST_CASE("despreading recovers the bit sequence") {
  const CaCode code = generate_ca_code(9);
  const std::vector<int> bits{0, 1, 1, 0, 1};
  const IqBuffer buf = spread_bits(bits, code, 4e6);
  const BitStream out = stream_bits(buf, code, 9, 0);
  REQUIRE(out.bits.size() == bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    CHECK(out.bits[i].value == bits[i]);
    CHECK(!out.bits[i].low_confidence);
    // one bit period per emitted bit, no subframe wait
    CHECK(out.bits[i].timestamp_s == doctest::Approx(i * 0.020).epsilon(1e-12));
  }
}

TEST_CASE("polarity-inverted buffer inverts the streamed bits") {
  const CaCode code = generate_ca_code(3);
  const std::vector<int> bits{0, 1, 0};
  IqBuffer buf = spread_bits(bits, code, 4e6);
  for (auto& s : buf.samples) s = -s;
  const BitStream out = stream_bits(buf, code, 3, 0);
  for (size_t i = 0; i < bits.size(); ++i) CHECK(out.bits[i].value == 1 - bits[i]);
}

TEST_CASE("apply_sample_delay composition and identity") {
  const CaCode code = generate_ca_code(2);
  const IqBuffer buf = spread_bits({0}, code, 4e6);

  const IqBuffer same = apply_sample_delay(buf, 0);
  CHECK(same.samples == buf.samples);

  const IqBuffer once = apply_sample_delay(apply_sample_delay(buf, 100), 23);
  const IqBuffer direct = apply_sample_delay(buf, 123);
  CHECK(once.samples == direct.samples);
}

TEST_CASE("correlate recovers injected delays") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<long> delay(0, 5000);
  const CaCode code = generate_ca_code(17);
  for (double fs : {4e6, 10e6}) {
    const IqBuffer clean = spread_bits({0, 0}, code, fs);
    for (int i = 0; i < 20; ++i) {
      const long d = delay(rng);
      const auto r = correlate(apply_sample_delay(clean, d), code, 17, 6000);
      CHECK(r.peak_lag == d);
    }
  }
}

TEST_CASE("parallel and serial correlators agree") {
  std::mt19937 rng(32);
  std::uniform_int_distribution<long> delay(0, 2000);
  const CaCode code = generate_ca_code(21);
  const IqBuffer clean = spread_bits({0, 1}, code, 4e6);
  for (int i = 0; i < 10; ++i) {
    const IqBuffer buf = apply_sample_delay(clean, delay(rng));
    const auto a = correlate(buf, code, 21, 3000);
    const auto b = correlate_serial(buf, code, 21, 3000);
    CHECK(a.peak_lag == b.peak_lag);
    CHECK(a.peak_magnitude == doctest::Approx(b.peak_magnitude).epsilon(1e-12));
  }
}

TEST_CASE("fft and time-domain correlation agree on large searches") {
  const CaCode code = generate_ca_code(11);
  const IqBuffer clean = spread_bits({0, 0, 0}, code, 4e6);
  const long d = 61237;
  const IqBuffer buf = apply_sample_delay(clean, d);
  // window large enough to force the FFT route
  const auto fast = correlate(buf, code, 11, 70000);
  const auto slow = correlate_serial(buf, code, 11, 70000);
  CHECK(fast.peak_lag == d);
  CHECK(slow.peak_lag == d);
  CHECK(fast.peak_magnitude == doctest::Approx(slow.peak_magnitude).epsilon(1e-9));
}

TEST_CASE("zero buffer has no peak") {
  const CaCode code = generate_ca_code(6);
  IqBuffer zeros;
  zeros.sample_rate_hz = 4e6;
  zeros.samples.assign(20000, 0.0f);
  CHECK_THROWS_AS(correlate(zeros, code, 6, 5000), NoPeak);
}

TEST_CASE("combine identity, cancellation and rate checks") {
  const CaCode code = generate_ca_code(8);
  const IqBuffer buf = spread_bits({0}, code, 4e6);

  const IqBuffer same = combine({buf}, {1.0});
  CHECK(same.samples == buf.samples);

  const IqBuffer zero = combine({buf, buf}, {1.0, -1.0});
  for (float s : zero.samples) CHECK(s == 0.0f);

  IqBuffer other = buf;
  other.sample_rate_hz = 10e6;
  CHECK_THROWS_AS(combine({buf, other}, {1.0, 1.0}), RateMismatch);
}

TEST_CASE("six combined satellites keep their injected lags") {
  const double fs = 4e6;
  const std::vector<int> prns{1, 5, 9, 14, 22, 30};
  const std::vector<long> delays{0, 137, 500, 1499, 2750, 3999};
  std::vector<IqBuffer> parts;
  std::vector<double> gains(prns.size(), 1.0);
  for (size_t i = 0; i < prns.size(); ++i) {
    parts.push_back(apply_sample_delay(
        spread_bits({0, 0}, generate_ca_code(prns[i]), fs), delays[i]));
  }
  const IqBuffer mix = combine(parts, gains);
  for (size_t i = 0; i < prns.size(); ++i) {
    CHECK(correlate(mix, generate_ca_code(prns[i]), prns[i], 5000).peak_lag == delays[i]);
  }
}

TEST_CASE("measure_relative_offsets on constructed delays") {
  const double fs = 4e6;
  const std::vector<int> prns{2, 11, 25};
  std::vector<long> delays{0, 10, 25};
  std::vector<IqBuffer> parts;
  std::vector<CaCode> codes;
  for (size_t i = 0; i < prns.size(); ++i) {
    codes.push_back(generate_ca_code(prns[i]));
    parts.push_back(apply_sample_delay(spread_bits({0, 0}, codes[i], fs), delays[i]));
  }
  const IqBuffer mix = combine(parts, {1.0, 1.0, 1.0});
  auto offsets = measure_relative_offsets(mix, codes, 5000);
  CHECK(offsets.at(2) == 0.0);
  CHECK(offsets.at(11) == doctest::Approx(2.5e-6).epsilon(1e-12));
  CHECK(offsets.at(25) == doctest::Approx(6.25e-6).epsilon(1e-12));

  // invariant to a common extra delay
  std::vector<IqBuffer> shifted;
  for (size_t i = 0; i < prns.size(); ++i) {
    shifted.push_back(
        apply_sample_delay(spread_bits({0, 0}, codes[i], fs), delays[i] + 800));
  }
  auto offsets2 = measure_relative_offsets(combine(shifted, {1.0, 1.0, 1.0}), codes, 6000);
  for (const auto& [prn, off] : offsets) {
    CHECK(offsets2.at(prn) == doctest::Approx(off).epsilon(1e-12));
  }
}

TEST_CASE("iq file round trip, both sample layouts") {
  const CaCode code = generate_ca_code(4);
  IqBuffer buf = spread_bits({0, 1}, code, 2.046e6);
  buf.origin_time_s = 12.5;

  for (bool iq : {false, true}) {
    const std::string path = iq ? "roundtrip_iq.bin" : "roundtrip_real.bin";
    write_iq(buf, path, iq);
    const IqBuffer back = read_iq(path);
    CHECK(back.sample_rate_hz == buf.sample_rate_hz);
    CHECK(back.origin_time_s == buf.origin_time_s);
    CHECK(back.samples == buf.samples);
    std::remove(path.c_str());
    std::remove((path + ".hdr").c_str());
  }
}
