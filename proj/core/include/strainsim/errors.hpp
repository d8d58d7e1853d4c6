#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace strainsim {

/// Coarse error category; the CLI maps these onto process exit codes.
enum class ErrorKind { usage, config, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define STRAINSIM_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  }

// crystal-frames
STRAINSIM_DEFINE_ERROR(PerpendicularityError, numerical);
STRAINSIM_DEFINE_ERROR(DegenerateDirectionError, numerical);
STRAINSIM_DEFINE_ERROR(UnsupportedOrientationError, numerical);
STRAINSIM_DEFINE_ERROR(StrainRangeError, numerical);

// snv-hamiltonian
STRAINSIM_DEFINE_ERROR(FrameMismatchError, numerical);
STRAINSIM_DEFINE_ERROR(NumericalHermiticityError, numerical);
STRAINSIM_DEFINE_ERROR(DegenerateQubitError, numerical);
STRAINSIM_DEFINE_ERROR(ParameterError, numerical);

// nems-actuator
STRAINSIM_DEFINE_ERROR(SiteNotFoundError, numerical);
STRAINSIM_DEFINE_ERROR(VoltageRangeError, numerical);

// spectroscopy
STRAINSIM_DEFINE_ERROR(BesselDomainError, numerical);
STRAINSIM_DEFINE_ERROR(FlatSpectrumError, numerical);
STRAINSIM_DEFINE_ERROR(UnresolvedSidebandError, numerical);
STRAINSIM_DEFINE_ERROR(AmbiguousWidthError, numerical);
STRAINSIM_DEFINE_ERROR(DegenerateAbscissaError, numerical);
STRAINSIM_DEFINE_ERROR(DivisionDomainError, numerical);
STRAINSIM_DEFINE_ERROR(SpectrumFormatError, numerical);

// spin-control
STRAINSIM_DEFINE_ERROR(SequenceOrderError, numerical);

// photonic-routing
STRAINSIM_DEFINE_ERROR(RatioDomainError, numerical);
STRAINSIM_DEFINE_ERROR(OptimizationShortfallError, numerical);
STRAINSIM_DEFINE_ERROR(TopologyError, numerical);
STRAINSIM_DEFINE_ERROR(StatisticsError, numerical);

// scenario-cli
STRAINSIM_DEFINE_ERROR(UsageError, usage);
STRAINSIM_DEFINE_ERROR(VersionError, config);

#undef STRAINSIM_DEFINE_ERROR

/// A nonlinear fit that did not converge. Carries the best parameters seen.
class FitDivergedError : public Error {
 public:
  FitDivergedError(const std::string& what, std::vector<double> best_params, double best_cost)
      : Error(ErrorKind::numerical, what), best_params_(std::move(best_params)), best_cost_(best_cost) {}

  const std::vector<double>& best_params() const noexcept { return best_params_; }
  double best_cost() const noexcept { return best_cost_; }

 private:
  std::vector<double> best_params_;
  double best_cost_;
};

/// One schema violation, addressed by a JSON pointer into the config document.
struct ConfigViolation {
  std::string pointer;
  std::string message;
};

/// Every violation found while validating a config, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> violations);

  const std::vector<ConfigViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

}  // namespace strainsim
