#pragma once

#include <stdexcept>
#include <string>

namespace gnss {

struct NearSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewSatellites : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotCommonlyVisible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewCommonSatellites : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VisibilityLost : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonMonotonicTimes : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RateMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoPeak : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownPrn : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gnss
