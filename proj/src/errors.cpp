#include "matsim/errors.hpp"

#include <cmath>
#include <sstream>

namespace matsim {

namespace {

std::string describe(const std::string& which, double location, const std::string& detail) {
  std::ostringstream os;
  os << "hypothesis violated: " << which;
  if (!std::isnan(location)) os << " at " << location;
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

}  // namespace

HypothesisViolation::HypothesisViolation(std::string which, double location, std::string detail)
    : Error(describe(which, location, detail)),
      which_(std::move(which)),
      location_(location),
      detail_(std::move(detail)) {}

}  // namespace matsim
