// Benchmark comparing the OpenMP correlator kernel against the serial
// reference over a range of sampling rates and search windows.

#include <chrono>
#include <cstdio>

#include "gnss/baseband.hpp"

using namespace gnss::baseband;

namespace {

double time_ms(const IqBuffer& buf, const CaCode& code, long window, bool parallel) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = parallel ? correlate(buf, code, code.prn, window)
                          : correlate_serial(buf, code, code.prn, window);
  const auto stop = std::chrono::steady_clock::now();
  if (r.peak_lag < 0) std::printf("unexpected peak\n");
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main() {
  std::printf("%10s %10s %12s %12s %8s\n", "fs (MHz)", "window", "serial (ms)",
              "parallel", "speedup");
  const CaCode code = generate_ca_code(7);
  for (double fs : {4e6, 10e6, 25e6}) {
    const IqBuffer buf = apply_sample_delay(spread_bits({0, 0}, code, fs), 1234);
    for (long window : {2000L, 5000L, 20000L}) {
      const double serial = time_ms(buf, code, window, false);
      const double parallel = time_ms(buf, code, window, true);
      std::printf("%10.0f %10ld %12.2f %12.2f %7.2fx\n", fs / 1e6, window, serial,
                  parallel, serial / parallel);
    }
  }
  return 0;
}
