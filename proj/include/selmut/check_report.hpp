#pragma once

#include <map>
#include <string>

namespace selmut {

// Outcome of one verification check.  `worst_margin` is the signed slack of
// the tightest inequality the check examined (>= 0 means satisfied);
// `worst_location` names where it occurred (e.g. {"time":..., "trait":...}).
struct CheckReport {
  std::string check_id;
  bool passed = false;
  double worst_margin = 0.0;
  std::map<std::string, double> worst_location;
  double tolerance = 0.0;
};

}  // namespace selmut
