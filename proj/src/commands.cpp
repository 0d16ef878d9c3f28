#include "projsplit/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "projsplit/errors.hpp"
#include "projsplit/problems.hpp"
#include "projsplit/rates.hpp"
#include "projsplit/solver.hpp"
#include "projsplit/spec_file.hpp"

namespace projsplit::cli {

using nlohmann::json;

namespace {

struct Prepared {
  ProblemSpecFile spec;
  ProblemInstance instance;
  SolverConfig config;
  ProductPoint start;
  RateConstants constants;
  std::vector<CertificateKind> certificates;
};

// Everything that can be rejected before iterating. Throws projsplit::Error.
Prepared prepare(const std::string& spec_path, const SolveOptions& options) {
  Prepared p;
  p.spec = load_spec(spec_path);
  if (options.seed_override) p.spec.seed = *options.seed_override;
  try {
    p.instance = build_instance(p.spec);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: invalid generator parameters ({})", spec_path, e.what()));
  }
  p.config = resolve_config(p.instance.slots, build_config(p.spec));
  p.start = p.instance.zero_start(p.config.gamma);
  p.constants = compute_constants(p.instance.meta, p.config, p.start);
  for (const auto& name : p.spec.certificates) {
    const CertificateKind kind = *certificate_kind_from_string(name);
    require_certificate_inputs(kind, p.instance.meta, p.constants);
    p.certificates.push_back(kind);
  }
  return p;
}

json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_list(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(optional_number(v));
  return out;
}

json constants_json(const RateConstants& c) {
  return json{{"xi1", c.xi1},
              {"xi2", c.xi2},
              {"tau", c.tau},
              {"alpha_lb", c.alpha_lb},
              {"E1", c.e1},
              {"E2", c.e2},
              {"E3", optional_number(c.e3)},
              {"E4", optional_number(c.e4)},
              {"E5", optional_number(c.e5)},
              {"Bx", optional_number(c.bx)},
              {"By", optional_number(c.by)},
              {"radius", optional_number(c.radius)},
              {"p_star_norm", optional_number(c.p_star_norm)},
              {"rho_lo", c.rho_lo},
              {"rho_hi", c.rho_hi},
              {"rho_n", c.rho_n},
              {"L_bar", c.l_bar},
              {"strong_rate_factor", c.strong_rate_factor},
              {"contraction_factor", optional_number(c.contraction_factor)}};
}

json instance_json(const ProblemInstance& inst) {
  const ProblemMeta& m = inst.meta;
  json kinds = json::array();
  for (SlotKind k : m.kinds) kinds.push_back(k == SlotKind::kForward ? "forward" : "backward");
  json operators = json::array();
  for (const auto& s : inst.slots) operators.push_back(s.op->name());
  json out{{"description", inst.description},
           {"n", inst.n()},
           {"dim", inst.dim()},
           {"operators", operators},
           {"kinds", kinds},
           {"lipschitz", optional_list(m.lipschitz)},
           {"cocoercivity", optional_list(m.cocoercivity)},
           {"ball_lipschitz", optional_list(m.ball_lipschitz)},
           {"mu", optional_number(m.mu)},
           {"strong_operator", m.strong_index ? json(*m.strong_index + 1) : json(nullptr)},
           {"f_star", optional_number(m.f_star)},
           {"single_point_rate_applicable", m.single_point_rate_applicable}};
  if (m.oracle) {
    json w = json::array();
    for (const auto& v : m.oracle->w()) w.push_back(v.values());
    out["oracle"] = json{{"z", m.oracle->z().values()}, {"w", w}};
  } else {
    out["oracle"] = nullptr;
  }
  return out;
}

json config_json(const Prepared& p) {
  json rho = json::array();
  for (const auto& r : p.config.rho) rho.push_back(r.upper());
  return json{{"gamma", p.config.gamma},
              {"beta", p.config.beta.upper()},
              {"rho", rho},
              {"sigma", p.config.sigma},
              {"delta", p.config.delta},
              {"max_iters", p.config.max_iters},
              {"pi_tolerance", p.config.pi_tolerance},
              {"error_mode", to_string(p.spec.config.error_mode)}};
}

std::string cell(double v) { return fmt::format("{:.17g}", v); }
std::string cell(const std::optional<double>& v) {
  return v ? cell(*v) : std::string("nan");
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows,
                     std::size_t stride, bool with_caps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  out << "k,phi,pi,alpha,norm_grad_gamma,dist_p_to_pstar_gamma,dist_z_to_zstar,F_gap,"
         "fejer_residual";
  if (with_caps)
    for (const auto& name : ledger_column_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool last = i + 1 == rows.size();
    if (i % stride != 0 && !last) continue;
    const TraceRow& r = rows[i];
    out << r.k << ',' << cell(r.phi) << ',' << cell(r.pi) << ',' << cell(r.alpha) << ','
        << cell(r.norm_grad_gamma) << ',' << cell(r.dist_p_to_pstar_gamma) << ','
        << cell(r.dist_z_to_zstar) << ',' << cell(r.f_gap) << ',' << cell(r.fejer_residual);
    if (with_caps) {
      if (r.caps) {
        const LedgerResiduals& c = *r.caps;
        for (double v : {c.dz, c.dw, c.zx, c.wy, c.phi, c.wtz, c.zx_step, c.wy_step})
          out << ',' << cell(v);
      } else {
        for (std::size_t j = 0; j < ledger_column_names().size(); ++j) out << ",nan";
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error(fmt::format("failed while writing {}", path));
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error(fmt::format("failed while writing {}", path));
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.10g}", *v) : std::string("n/a");
}

void print_constants(std::ostream& out, const RateConstants& c) {
  fmt::print(out, "{:<10} {:.10g}\n", "xi1", c.xi1);
  fmt::print(out, "{:<10} {:.10g}\n", "xi2", c.xi2);
  fmt::print(out, "{:<10} {:.10g}\n", "tau", c.tau);
  fmt::print(out, "{:<10} {:.10g}\n", "alpha_lb", c.alpha_lb);
  fmt::print(out, "{:<10} {:.10g}\n", "E1", c.e1);
  fmt::print(out, "{:<10} {:.10g}\n", "E2", c.e2);
  fmt::print(out, "{:<10} {}\n", "E3", fmt_opt(c.e3));
  fmt::print(out, "{:<10} {}\n", "E4", fmt_opt(c.e4));
  fmt::print(out, "{:<10} {}\n", "E5", fmt_opt(c.e5));
  fmt::print(out, "{:<10} {}\n", "Bx", fmt_opt(c.bx));
  fmt::print(out, "{:<10} {}\n", "By", fmt_opt(c.by));
}

}  // namespace

std::optional<std::uint64_t> parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) return std::nullopt;
  return v;
}

int cmd_solve(const std::string& spec_path, const SolveOptions& options, std::ostream& out,
              std::ostream& err) {
  if (options.stride == 0) {
    fmt::print(err, "error: --stride must be >= 1\n");
    return kExitInvalid;
  }
  Prepared p;
  try {
    p = prepare(spec_path, options);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalid;
  }

  try {
    const SolveOutcome outcome = solve(p.instance.slots, p.config, p.start);
    const bool with_caps = std::find(p.certificates.begin(), p.certificates.end(),
                                     CertificateKind::kSummability) != p.certificates.end();

    CertificateInputs inputs{&outcome.trace, &p.instance.slots, &p.instance.meta, &p.constants,
                             &p.config};
    json verdicts = json::object();
    bool all_pass = true;
    std::vector<Certificate> results;
    if (outcome.status != SolveStatus::kError) {
      for (CertificateKind kind : p.certificates) {
        Certificate c = run_certificate(kind, inputs);
        all_pass = all_pass && c.pass;
        verdicts[to_string(kind)] = json{{"verdict", c.pass ? "pass" : "fail"},
                                         {"violation", finite_or_null(c.violation)},
                                         {"worst_k", c.worst_k},
                                         {"tolerance", c.tolerance},
                                         {"checks", c.checked},
                                         {"detail", c.detail}};
        results.push_back(std::move(c));
      }
    }

    const std::vector<TraceRow> rows =
        trace_metrics(outcome.trace, p.instance.slots, p.instance.meta, p.constants, with_caps);

    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path dir(options.out_dir);
    write_trace_csv((dir / "trace.csv").string(), rows, options.stride, with_caps);

    json report{{"name", p.spec.name},
                {"generator", p.spec.generator},
                {"seed", p.spec.seed},
                {"status", to_string(outcome.status)},
                {"iterations", outcome.iterations},
                {"message", outcome.message},
                {"instance", instance_json(p.instance)},
                {"config", config_json(p)},
                {"constants", constants_json(p.constants)},
                {"certificates", verdicts},
                {"final", json{{"z", outcome.point.z().values()}}}};
    write_json((dir / "report.json").string(), report);

    if (!options.quiet) {
      fmt::print(out, "{} ({}): {} after {} iterations\n",
                 p.spec.name.empty() ? p.spec.generator : p.spec.name, p.instance.description,
                 to_string(outcome.status), outcome.iterations);
      if (p.instance.meta.oracle)
        fmt::print(out, "  |z - z*| = {:.3e}\n",
                   std::sqrt(dist_sq(outcome.point.z(), p.instance.meta.oracle->z())));
      for (const auto& c : results)
        fmt::print(out, "  {:<20} {}  ({})\n", to_string(c.kind), c.pass ? "pass" : "FAIL",
                   c.detail);
      fmt::print(out, "  wrote {} and {}\n", (dir / "trace.csv").string(),
                 (dir / "report.json").string());
    }
    if (outcome.status == SolveStatus::kError) {
      fmt::print(err, "error: {}\n", outcome.message);
      return kExitRuntime;
    }
    return all_pass ? kExitOk : kExitCertificateFailed;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRuntime;
  }
}

int cmd_verify(const std::string& spec_path, const SolveOptions& options, std::ostream& out,
               std::ostream& err) {
  Prepared p;
  try {
    p = prepare(spec_path, options);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalid;
  }
  if (!options.quiet) {
    fmt::print(out, "{}: n={} dim={} (stepsizes and error bounds valid)\n",
               p.instance.description, p.instance.n(), p.instance.dim());
  }
  print_constants(out, p.constants);
  return kExitOk;
}

// ---- equivalence demos -------------------------------------------------------------------

int cmd_equiv(const EquivOptions& o, std::ostream& out, std::ostream& err) {
  const bool prox = o.kind == "prox-point";
  if (!prox && o.kind != "extragradient") {
    fmt::print(err, "error: unknown equivalence '{}' (expected prox-point or extragradient)\n",
               o.kind);
    return kExitInvalid;
  }
  try {
    OperatorPtr op;
    std::size_t dim = o.dim;
    if (o.affine_dim > 0) {
      dim = o.affine_dim;
      const ProblemInstance inst = make_strongly_monotone_affine(
          dim, 1, 0.1, o.seed, {prox ? SlotKind::kBackward : SlotKind::kForward});
      op = inst.slots[0].op;
    } else {
      const double scale = o.scale > 0.0 ? o.scale : (prox ? 1.0 : 2.0);
      op = make_scaled_identity(dim, scale);
    }

    double rho_value = 0.0;
    if (o.rho)
      rho_value = *o.rho;
    else if (prox)
      rho_value = 1.0;
    else
      rho_value = o.affine_dim > 0 ? 0.9 / *op->meta().lipschitz : 0.25;

    ParameterRule rho = ParameterRule::constant(rho_value);
    if (o.random_rho) {
      if (!prox) {
        fmt::print(err, "error: --random-rho applies to prox-point only\n");
        return kExitInvalid;
      }
      std::mt19937_64 rng(o.seed);
      std::uniform_real_distribution<double> u(0.5, 2.0);
      std::vector<double> values(o.steps + 1);
      for (double& v : values) v = u(rng);
      rho = ParameterRule::sequence(0.5, 2.0, [values](std::size_t k) {
        return values[std::min(k, values.size() - 1)];
      });
    }
    const ParameterRule beta = ParameterRule::constant(o.beta);
    const Vector z1(dim, o.z1.value_or(prox ? 2.0 : 1.0));

    SolverConfig config;
    config.beta = beta;
    config.rho = {rho};
    config.max_iters = o.steps;
    config.pi_tolerance = 0.0;
    std::vector<OperatorSlot> slots = {prox ? OperatorSlot::backward(op) : OperatorSlot::forward(op)};

    std::vector<Vector> reference =
        prox ? proximal_point_reference(*op, rho, beta, z1, o.steps)
             : extragradient_reference(*op, rho, beta, z1, o.steps);
    const SolveOutcome outcome = solve(slots, config, ProductPoint(z1, {}, 1.0));
    if (outcome.status == SolveStatus::kError) {
      fmt::print(err, "error: {}\n", outcome.message);
      return kExitRuntime;
    }

    std::vector<Vector> iterates = {z1};
    for (const auto& r : outcome.trace) iterates.push_back(r.p_after.z());

    double deviation = 0.0;
    const std::size_t common = std::min(iterates.size(), reference.size());
    for (std::size_t k = 0; k < common; ++k)
      for (std::size_t j = 0; j < dim; ++j)
        deviation = std::max(deviation, std::abs(iterates[k][j] - reference[k][j]));
    if (iterates.size() != reference.size()) deviation = std::numeric_limits<double>::infinity();

    if (!o.quiet) {
      fmt::print(out, "{}: {} on {} (dim {}), {} steps\n", o.kind,
                 prox ? "relaxed proximal point" : "extragradient", op->name(), dim,
                 iterates.size() - 1);
      if (iterates.size() > 1) fmt::print(out, "  z^2[0] = {:.17g}\n", iterates[1][0]);
    }
    fmt::print(out, "max deviation {:.3e}\n", deviation);
    return deviation <= 1e-12 ? kExitOk : kExitCertificateFailed;
  } catch (const StepsizeError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalid;
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRuntime;
  }
}

}  // namespace projsplit::cli
