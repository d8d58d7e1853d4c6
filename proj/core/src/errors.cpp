#include "strainsim/errors.hpp"

namespace strainsim {

namespace {

std::string format_violations(const std::vector<ConfigViolation>& violations) {
  std::string out = "invalid device config (" + std::to_string(violations.size()) + " violation" +
                    (violations.size() == 1 ? "" : "s") + ")";
  for (const auto& v : violations) {
    out += "\n  ";
    out += v.pointer.empty() ? std::string("/") : v.pointer;
    out += ": ";
    out += v.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : Error(ErrorKind::config, format_violations(violations)), violations_(std::move(violations)) {}

}  // namespace strainsim
