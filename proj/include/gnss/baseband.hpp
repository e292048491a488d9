#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gnss/constants.hpp"

namespace gnss::baseband {

/// One period of a GPS C/A spreading code, chips in {+1, -1}.
struct CaCode {
  int prn = 0;
  std::array<std::int8_t, constants::kCaCodeLength> chips{};
};

/// Real-valued baseband sample buffer (no carrier).
struct IqBuffer {
  std::vector<float> samples;
  double sample_rate_hz = 0.0;
  double origin_time_s = 0.0;
};

struct CorrelationResult {
  int prn = 0;
  long peak_lag = 0;          // samples
  double peak_magnitude = 0.0;
  double code_phase_chips = 0.0;
};

struct BitStream {
  struct Bit {
    long index = 0;
    int value = 0;  // {0, 1}
    double timestamp_s = 0.0;
    bool low_confidence = false;
  };
  int prn = 0;
  std::vector<Bit> bits;
};

/// Gold code from the two standard 10-stage LFSRs, all-ones start, G2 output
/// phase per the published C/A assignment. Chips mapped 0 -> +1, 1 -> -1.
CaCode generate_ca_code(int prn);

/// BPSK spreading: each bit covers code_periods_per_bit code periods at the
/// given chip rate, sampled at sample_rate. No carrier, no filtering.
IqBuffer spread_bits(const std::vector<int>& bits, const CaCode& code,
                     double sample_rate_hz,
                     double chip_rate_hz = constants::kGpsChipRate,
                     int code_periods_per_bit = constants::kGpsCodePeriodsPerBit);

/// Integer-sample delay: zero-fill front, length grows by n.
IqBuffer apply_sample_delay(const IqBuffer& buf, long n);

/// Sample-wise weighted sum; shorter buffers zero-padded to the longest.
IqBuffer combine(const std::vector<IqBuffer>& buffers, const std::vector<double>& gains);

/// Matched-filter search over lags [0, search_window]. Ties resolved toward
/// the lowest lag. Throws NoPeak when the peak is below 3x the median
/// off-peak magnitude. OpenMP-parallel over lags when available.
CorrelationResult correlate(const IqBuffer& buf, const CaCode& code, int prn,
                            long search_window);

/// Serial reference kernel for the correlator; identical results, used by
/// tests and the benchmark.
CorrelationResult correlate_serial(const IqBuffer& buf, const CaCode& code, int prn,
                                   long search_window);

/// Despread-and-integrate per bit window starting at the given sample offset;
/// emits one bit per window without waiting for subframe boundaries.
BitStream stream_bits(const IqBuffer& buf, const CaCode& code, int prn,
                      long start_offset_samples,
                      double chip_rate_hz = constants::kGpsChipRate,
                      int code_periods_per_bit = constants::kGpsCodePeriodsPerBit);

/// Per-PRN arrival offsets relative to the earliest, seconds.
std::map<int, double> measure_relative_offsets(const IqBuffer& buf,
                                               const std::vector<CaCode>& codes,
                                               long search_window);

/// IQ file I/O: little-endian float32 samples plus a sidecar `<path>.hdr`
/// JSON header with sample_rate, origin_time and real/interleaved mode.
void write_iq(const IqBuffer& buf, const std::string& path, bool interleaved_iq = false);
IqBuffer read_iq(const std::string& path);

}  // namespace gnss::baseband
