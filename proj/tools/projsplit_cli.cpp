// projsplit: solve / verify / equiv front end.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "projsplit/commands.hpp"

namespace cli = projsplit::cli;

int main(int argc, char** argv) {
  CLI::App app{"Projective splitting solver with per-run rate certificates"};
  app.require_subcommand(1);

  cli::SolveOptions solve_opts;
  std::string spec_path;
  auto* solve = app.add_subcommand("solve", "Run a problem spec, write trace.csv and report.json");
  solve->add_option("spec", spec_path, "problem spec (JSON)")->required();
  solve->add_option("--out", solve_opts.out_dir, "output directory");
  solve->add_option("--stride", solve_opts.stride, "keep every stride-th trace row")
      ->check(CLI::PositiveNumber);
  solve->add_flag("--quiet", solve_opts.quiet, "no summary on stdout");

  std::string verify_path;
  bool verify_quiet = false;
  auto* verify = app.add_subcommand("verify", "Validate a spec and print its rate constants");
  verify->add_option("spec", verify_path, "problem spec (JSON)")->required();
  verify->add_flag("--quiet", verify_quiet, "constants table only");

  cli::EquivOptions eq;
  double rho = 0.0;
  double z1 = 0.0;
  auto* equiv = app.add_subcommand("equiv", "Compare n=1 iterates with their closed forms");
  equiv->add_option("kind", eq.kind, "prox-point or extragradient")
      ->required()
      ->check(CLI::IsMember({"prox-point", "extragradient"}));
  equiv->add_option("--steps", eq.steps, "iterations");
  auto* rho_opt = equiv->add_option("--rho", rho, "stepsize");
  equiv->add_option("--beta", eq.beta, "relaxation");
  auto* z1_opt = equiv->add_option("--z1", z1, "start value (every coordinate)");
  equiv->add_option("--scale", eq.scale, "T = scale * I");
  equiv->add_option("--dim", eq.dim, "dimension for scale * I");
  equiv->add_option("--affine", eq.affine_dim, "random monotone affine operator of this dimension");
  equiv->add_flag("--random-rho", eq.random_rho, "rho_k drawn from [0.5, 2]");
  equiv->add_option("--seed", eq.seed, "seed for --affine / --random-rho");
  equiv->add_flag("--quiet", eq.quiet, "deviation only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitInvalid;
  }

  if (const char* env = std::getenv("PROJSPLIT_SEED"); env && *env) {
    const auto seed = cli::parse_seed(env);
    if (!seed) {
      fmt::print(stderr, "error: PROJSPLIT_SEED must be a non-negative integer, got '{}'\n", env);
      return cli::kExitInvalid;
    }
    solve_opts.seed_override = seed;
  }

  if (*solve) return cli::cmd_solve(spec_path, solve_opts, std::cout, std::cerr);
  if (*verify) {
    cli::SolveOptions opts = solve_opts;
    opts.quiet = verify_quiet;
    return cli::cmd_verify(verify_path, opts, std::cout, std::cerr);
  }
  if (*rho_opt) eq.rho = rho;
  if (*z1_opt) eq.z1 = z1;
  return cli::cmd_equiv(eq, std::cout, std::cerr);
}
