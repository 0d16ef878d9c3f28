#pragma once

// Subcommands behind the projsplit executable. Each returns a process exit code:
//   0  success (all requested certificates pass)
//   1  at least one certificate failed
//   2  spec parse or validation error
//   3  runtime error

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace projsplit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCertificateFailed = 1,
  kExitInvalid = 2,
  kExitRuntime = 3,
};

struct SolveOptions {
  std::string out_dir = ".";
  std::size_t stride = 1;  // CSV thinning; certificates always use every iteration
  bool quiet = false;
  // Overrides the spec's seed (PROJSPLIT_SEED is read by the executable).
  std::optional<std::uint64_t> seed_override;
};

int cmd_solve(const std::string& spec_path, const SolveOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_verify(const std::string& spec_path, const SolveOptions& options, std::ostream& out,
               std::ostream& err);

struct EquivOptions {
  std::string kind;  // "prox-point" or "extragradient"
  std::size_t steps = 100;
  std::optional<double> rho;  // default 1 (prox-point) or 0.25 (extragradient)
  double beta = 1.0;
  std::optional<double> z1;   // every coordinate of the start point
  double scale = 0.0;         // T = scale * I; default 1 (prox-point) or 2 (extragradient)
  std::size_t dim = 1;
  // Use a seeded random monotone affine operator of this dimension instead of scale * I.
  std::size_t affine_dim = 0;
  // Draw rho_k uniformly from [0.5, 2] (prox-point only).
  bool random_rho = false;
  std::uint64_t seed = 0;
  bool quiet = false;
};

int cmd_equiv(const EquivOptions& options, std::ostream& out, std::ostream& err);

// Parses a PROJSPLIT_SEED value; nullopt for malformed input.
std::optional<std::uint64_t> parse_seed(const std::string& text);

}  // namespace projsplit::cli
