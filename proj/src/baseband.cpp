#include "gnss/baseband.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>

#include <fftw3.h>
#include <nlohmann/json.hpp>

#include "gnss/errors.hpp"

namespace gnss::baseband {

using constants::kCaCodeLength;
using json = nlohmann::json;

CaCode generate_ca_code(int prn) {
  if (prn < 1 || prn > 32) throw UnknownPrn("generate_ca_code: PRN " + std::to_string(prn));

  // G2 output delay (chips) per PRN, standard C/A assignment.
  static constexpr int kG2Delay[32] = {
      5,   6,   7,   8,   17,  18,  139, 140, 141, 251, 252, 254, 255, 256, 257, 258,
      469, 470, 471, 472, 473, 474, 509, 512, 513, 514, 515, 516, 859, 860, 861, 862};

  int g1[kCaCodeLength], g2[kCaCodeLength];
  int r1[10], r2[10];
  std::fill_n(r1, 10, 1);
  std::fill_n(r2, 10, 1);

  for (int i = 0; i < kCaCodeLength; ++i) {
    g1[i] = r1[9];
    g2[i] = r2[9];
    const int f1 = r1[2] ^ r1[9];
    const int f2 = r2[1] ^ r2[2] ^ r2[5] ^ r2[7] ^ r2[8] ^ r2[9];
    for (int j = 9; j > 0; --j) {
      r1[j] = r1[j - 1];
      r2[j] = r2[j - 1];
    }
    r1[0] = f1;
    r2[0] = f2;
  }

  CaCode code;
  code.prn = prn;
  const int delay = kG2Delay[prn - 1];
  for (int i = 0; i < kCaCodeLength; ++i) {
    const int chip = g1[i] ^ g2[(i + kCaCodeLength - delay) % kCaCodeLength];
    code.chips[i] = chip ? -1 : 1;
  }
  return code;
}

namespace {

// Chip value of the repeating code at sample index k.
inline int chip_at(const CaCode& code, long k, double sample_rate_hz, double chip_rate_hz) {
  const long chip = static_cast<long>(std::floor(static_cast<double>(k) * chip_rate_hz /
                                                 sample_rate_hz)) %
                    kCaCodeLength;
  return code.chips[chip];
}

long samples_per_code_period(double sample_rate_hz, double chip_rate_hz) {
  return std::llround(sample_rate_hz * kCaCodeLength / chip_rate_hz);
}

}  // namespace

IqBuffer spread_bits(const std::vector<int>& bits, const CaCode& code,
                     double sample_rate_hz, double chip_rate_hz, int code_periods_per_bit) {
  const double bit_period = code_periods_per_bit * kCaCodeLength / chip_rate_hz;
  const long samples_per_bit = std::llround(sample_rate_hz * bit_period);

  IqBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  buf.samples.resize(samples_per_bit * bits.size());
  for (size_t b = 0; b < bits.size(); ++b) {
    const float polarity = bits[b] ? -1.0f : 1.0f;
    for (long k = 0; k < samples_per_bit; ++k) {
      const long idx = static_cast<long>(b) * samples_per_bit + k;
      buf.samples[idx] = polarity * chip_at(code, idx, sample_rate_hz, chip_rate_hz);
    }
  }
  return buf;
}

IqBuffer apply_sample_delay(const IqBuffer& buf, long n) {
  IqBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.origin_time_s = buf.origin_time_s;
  out.samples.assign(buf.samples.size() + n, 0.0f);
  std::copy(buf.samples.begin(), buf.samples.end(), out.samples.begin() + n);
  return out;
}

IqBuffer combine(const std::vector<IqBuffer>& buffers, const std::vector<double>& gains) {
  if (buffers.empty()) throw RateMismatch("combine: no buffers");
  size_t longest = 0;
  for (const auto& b : buffers) {
    if (b.sample_rate_hz != buffers.front().sample_rate_hz) {
      throw RateMismatch("combine: sample rates differ");
    }
    longest = std::max(longest, b.samples.size());
  }
  IqBuffer out;
  out.sample_rate_hz = buffers.front().sample_rate_hz;
  out.origin_time_s = buffers.front().origin_time_s;
  out.samples.assign(longest, 0.0f);
  for (size_t i = 0; i < buffers.size(); ++i) {
    const float g = static_cast<float>(i < gains.size() ? gains[i] : 1.0);
    for (size_t k = 0; k < buffers[i].samples.size(); ++k) {
      out.samples[k] += g * buffers[i].samples[k];
    }
  }
  return out;
}

namespace {

std::vector<float> replica(const CaCode& code, double sample_rate_hz, double chip_rate_hz) {
  const long n = samples_per_code_period(sample_rate_hz, chip_rate_hz);
  std::vector<float> rep(n);
  for (long k = 0; k < n; ++k) {
    rep[k] = static_cast<float>(chip_at(code, k, sample_rate_hz, chip_rate_hz));
  }
  return rep;
}

double lag_correlation(const IqBuffer& buf, const std::vector<float>& rep, long lag) {
  const long n = std::min<long>(static_cast<long>(rep.size()),
                                static_cast<long>(buf.samples.size()) - lag);
  double acc = 0.0;
  for (long k = 0; k < n; ++k) acc += buf.samples[lag + k] * rep[k];
  return acc;
}

CorrelationResult pick_peak(const IqBuffer& buf, const CaCode& code, int prn,
                            std::vector<double>& mags) {
  long best_lag =
      std::max_element(mags.begin(), mags.end()) - mags.begin();
  // A repeating code produces period-spaced peaks of near-equal energy (they
  // differ only by cross-correlation noise from other signals in the buffer),
  // and the earliest one marks the true delay: one period before it the
  // signal's own contribution is zero. Walk down in whole periods while a
  // comparable peak exists there.
  const long period = samples_per_code_period(buf.sample_rate_hz, constants::kGpsChipRate);
  while (best_lag - period >= 0 && mags[best_lag - period] >= 0.5 * mags[best_lag]) {
    best_lag -= period;
    // Re-centre on the local maximum; at rates where the period is not an
    // integer number of samples the ghost peaks drift by a sample.
    for (long l = std::max<long>(0, best_lag - 2);
         l <= std::min<long>(mags.size() - 1, best_lag + 2); ++l) {
      if (mags[l] > mags[best_lag]) best_lag = l;
    }
  }
  const double peak = mags[best_lag];

  std::vector<double> off(mags);
  off.erase(off.begin() + best_lag);
  double median = 0.0;
  if (!off.empty()) {
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    median = off[off.size() / 2];
  }
  if (peak <= 0.0 || peak < 3.0 * median) {
    throw NoPeak("correlate: no peak for PRN " + std::to_string(prn));
  }

  CorrelationResult r;
  r.prn = prn;
  r.peak_lag = best_lag;
  r.peak_magnitude = peak;
  r.code_phase_chips = std::fmod(best_lag * constants::kGpsChipRate / buf.sample_rate_hz,
                                 static_cast<double>(kCaCodeLength));
  return r;
}

}  // namespace

CorrelationResult correlate_serial(const IqBuffer& buf, const CaCode& code, int prn,
                                   long search_window) {
  const auto rep = replica(code, buf.sample_rate_hz, constants::kGpsChipRate);
  if (static_cast<long>(buf.samples.size()) < static_cast<long>(rep.size())) {
    throw NoPeak("correlate: buffer shorter than one code period");
  }
  const long lags = std::min<long>(search_window + 1, static_cast<long>(buf.samples.size()));
  std::vector<double> mags(lags);
  for (long l = 0; l < lags; ++l) mags[l] = std::abs(lag_correlation(buf, rep, l));
  return pick_peak(buf, code, prn, mags);
}

namespace {

// FFT cross-correlation for large lag searches; exact up to double rounding,
// which the epsilon tie-break in pick_peak absorbs.
std::vector<double> fft_correlation_mags(const IqBuffer& buf, const std::vector<float>& rep,
                                         long lags) {
  static std::mutex planner_mutex;
  const size_t need = buf.samples.size() + rep.size();
  size_t n = 1;
  while (n < need) n <<= 1;

  std::vector<fftw_complex> a(n), b(n), spec(n);
  for (size_t k = 0; k < n; ++k) {
    a[k][0] = k < buf.samples.size() ? buf.samples[k] : 0.0;
    a[k][1] = 0.0;
    b[k][0] = k < rep.size() ? rep[k] : 0.0;
    b[k][1] = 0.0;
  }

  fftw_plan pa, pb, pc;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    pa = fftw_plan_dft_1d(static_cast<int>(n), a.data(), a.data(), FFTW_FORWARD,
                          FFTW_ESTIMATE);
    pb = fftw_plan_dft_1d(static_cast<int>(n), b.data(), b.data(), FFTW_FORWARD,
                          FFTW_ESTIMATE);
    pc = fftw_plan_dft_1d(static_cast<int>(n), spec.data(), spec.data(), FFTW_BACKWARD,
                          FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(pb);
  for (size_t k = 0; k < n; ++k) {
    // A * conj(B)
    spec[k][0] = a[k][0] * b[k][0] + a[k][1] * b[k][1];
    spec[k][1] = a[k][1] * b[k][0] - a[k][0] * b[k][1];
  }
  fftw_execute(pc);

  std::vector<double> mags(lags);
  for (long l = 0; l < lags; ++l) {
    mags[l] = std::abs(spec[l][0] / static_cast<double>(n));
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pc);
  }
  return mags;
}

}  // namespace

CorrelationResult correlate(const IqBuffer& buf, const CaCode& code, int prn,
                            long search_window) {
  const auto rep = replica(code, buf.sample_rate_hz, constants::kGpsChipRate);
  if (static_cast<long>(buf.samples.size()) < static_cast<long>(rep.size())) {
    throw NoPeak("correlate: buffer shorter than one code period");
  }
  const long lags = std::min<long>(search_window + 1, static_cast<long>(buf.samples.size()));

  std::vector<double> mags;
  if (static_cast<double>(lags) * rep.size() > 2e8) {
    mags = fft_correlation_mags(buf, rep, lags);
  } else {
    mags.resize(lags);
#pragma omp parallel for schedule(static)
    for (long l = 0; l < lags; ++l) mags[l] = std::abs(lag_correlation(buf, rep, l));
  }
  return pick_peak(buf, code, prn, mags);
}

BitStream stream_bits(const IqBuffer& buf, const CaCode& code, int prn,
                      long start_offset_samples, double chip_rate_hz,
                      int code_periods_per_bit) {
  const double bit_period = code_periods_per_bit * kCaCodeLength / chip_rate_hz;
  const long samples_per_bit = std::llround(buf.sample_rate_hz * bit_period);

  BitStream out;
  out.prn = prn;
  const long available = static_cast<long>(buf.samples.size()) - start_offset_samples;
  const long n_bits = available / samples_per_bit;
  for (long b = 0; b < n_bits; ++b) {
    double integral = 0.0;
    for (long k = 0; k < samples_per_bit; ++k) {
      const long local = b * samples_per_bit + k;
      integral += buf.samples[start_offset_samples + local] *
                  chip_at(code, local, buf.sample_rate_hz, chip_rate_hz);
    }
    BitStream::Bit bit;
    bit.index = b;
    bit.value = integral < 0.0 ? 1 : 0;
    bit.timestamp_s = buf.origin_time_s +
                      (start_offset_samples + b * samples_per_bit) / buf.sample_rate_hz;
    bit.low_confidence = std::abs(integral) < 0.5 * samples_per_bit;
    out.bits.push_back(bit);
  }
  return out;
}

std::map<int, double> measure_relative_offsets(const IqBuffer& buf,
                                               const std::vector<CaCode>& codes,
                                               long search_window) {
  std::map<int, long> lags;
  for (const auto& code : codes) {
    lags[code.prn] = correlate(buf, code, code.prn, search_window).peak_lag;
  }
  long min_lag = std::numeric_limits<long>::max();
  for (const auto& [prn, lag] : lags) min_lag = std::min(min_lag, lag);

  std::map<int, double> out;
  for (const auto& [prn, lag] : lags) {
    out[prn] = static_cast<double>(lag - min_lag) / buf.sample_rate_hz;
  }
  return out;
}

void write_iq(const IqBuffer& buf, const std::string& path, bool interleaved_iq) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("write_iq: cannot open " + path);
  if (interleaved_iq) {
    for (float s : buf.samples) {
      const float pair[2] = {s, 0.0f};
      bin.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
  } else {
    bin.write(reinterpret_cast<const char*>(buf.samples.data()),
              buf.samples.size() * sizeof(float));
  }

  json hdr;
  hdr["sample_rate_hz"] = buf.sample_rate_hz;
  hdr["origin_time_s"] = buf.origin_time_s;
  hdr["format"] = interleaved_iq ? "iq32" : "real32";
  std::ofstream side(path + ".hdr");
  side << hdr.dump(2) << '\n';
}

IqBuffer read_iq(const std::string& path) {
  std::ifstream side(path + ".hdr");
  if (!side) throw std::runtime_error("read_iq: missing sidecar header for " + path);
  const json hdr = json::parse(side);

  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("read_iq: cannot open " + path);
  bin.seekg(0, std::ios::end);
  const auto bytes = static_cast<size_t>(bin.tellg());
  bin.seekg(0);
  std::vector<float> floats(bytes / sizeof(float));
  bin.read(reinterpret_cast<char*>(floats.data()), floats.size() * sizeof(float));

  IqBuffer buf;
  buf.sample_rate_hz = hdr.at("sample_rate_hz").get<double>();
  buf.origin_time_s = hdr.at("origin_time_s").get<double>();
  if (hdr.at("format").get<std::string>() == "iq32") {
    buf.samples.resize(floats.size() / 2);
    for (size_t i = 0; i < buf.samples.size(); ++i) buf.samples[i] = floats[2 * i];
  } else {
    buf.samples = std::move(floats);
  }
  return buf;
}

}  // namespace gnss::baseband
