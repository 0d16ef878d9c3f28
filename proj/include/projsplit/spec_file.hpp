#pragma once

// JSON problem specs:
//
//   {
//     "name": "lasso-50",
//     "generator": "lasso",
//     "params": {"d": 50, "m": 100, "lambda": 0.5},
//     "seed": 7,
//     "config": {"gamma": 1, "beta": 1, "rho": [1, 0.1], "sigma": 0, "delta": 0,
//                "max_iters": 2000, "pi_tolerance": 1e-24, "error_mode": "none"},
//     "certificates": ["fejer", "ergodic_gap"]
//   }
//
// Omitted config fields take the solver defaults; an omitted rho means the default
// stepsize for every operator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "projsplit/errors.hpp"
#include "projsplit/operators.hpp"
#include "projsplit/problems.hpp"
#include "projsplit/solver.hpp"

namespace projsplit {

// Malformed or invalid spec; line/column are 1-based and 0 when unknown.
class SpecError : public ConfigError {
 public:
  SpecError(const std::string& source, std::size_t line, std::size_t column,
            const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ConfigSpec {
  double gamma = 1.0;
  double beta = 1.0;
  std::optional<std::vector<double>> rho;
  double sigma = 0.0;
  double delta = 0.0;
  std::size_t max_iters = 1000;
  double pi_tolerance = 1e-24;
  ErrorMode error_mode = ErrorMode::kNone;

  bool operator==(const ConfigSpec&) const = default;
};

struct ProblemSpecFile {
  std::string name;
  std::string generator;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  ConfigSpec config;
  std::vector<std::string> certificates;

  bool operator==(const ProblemSpecFile&) const = default;
};

const std::vector<std::string>& generator_names();

ProblemSpecFile parse_spec(const std::string& text, const std::string& source = "<spec>");
ProblemSpecFile load_spec(const std::string& path);
nlohmann::json spec_to_json(const ProblemSpecFile& spec);
std::string serialize_spec(const ProblemSpecFile& spec);

// Builds the instance named by the spec (oracle expressed in the spec's gamma). Error
// injectors are attached to backward slots when error_mode is not "none".
ProblemInstance build_instance(const ProblemSpecFile& spec);
SolverConfig build_config(const ProblemSpecFile& spec);

}  // namespace projsplit
