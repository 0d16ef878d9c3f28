#include "projsplit/spec_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace projsplit {

using nlohmann::json;

SpecError::SpecError(const std::string& source, std::size_t line, std::size_t column,
                     const std::string& message)
    : ConfigError(line > 0 ? fmt::format("{}:{}:{}: {}", source, line, column, message)
                           : fmt::format("{}: {}", source, message)),
      line_(line),
      column_(column) {}

namespace {

enum class ParamType { kUInt, kNumber, kVector, kMatrix, kVectorList, kMatrixList, kKinds };

struct ParamSpec {
  const char* name;
  ParamType type;
  bool required;
};

struct GeneratorSpec {
  const char* name;
  std::vector<ParamSpec> params;
};

const std::vector<GeneratorSpec>& generators() {
  static const std::vector<GeneratorSpec> table = {
      {"lasso",
       {{"d", ParamType::kUInt, true},
        {"m", ParamType::kUInt, false},
        {"lambda", ParamType::kNumber, true}}},
      {"lasso_data",
       {{"A", ParamType::kMatrix, true},
        {"b", ParamType::kVector, true},
        {"lambda", ParamType::kNumber, true}}},
      {"strongly_monotone_affine",
       {{"d", ParamType::kUInt, true},
        {"n", ParamType::kUInt, true},
        {"mu", ParamType::kNumber, true},
        {"kinds", ParamType::kKinds, false}}},
      {"cocoercive_strong",
       {{"d", ParamType::kUInt, true},
        {"n", ParamType::kUInt, true},
        {"mu", ParamType::kNumber, true},
        {"kinds", ParamType::kKinds, false}}},
      {"affine",
       {{"A", ParamType::kMatrixList, true},
        {"b", ParamType::kVectorList, true},
        {"kinds", ParamType::kKinds, true},
        {"strong_operator", ParamType::kUInt, false}}},
      {"two_set_feasibility", {{"d", ParamType::kUInt, true}}},
      {"two_box_feasibility",
       {{"lo1", ParamType::kVector, true},
        {"hi1", ParamType::kVector, true},
        {"lo2", ParamType::kVector, true},
        {"hi2", ParamType::kVector, true}}},
  };
  return table;
}

const GeneratorSpec* find_generator(const std::string& name) {
  for (const auto& g : generators())
    if (name == g.name) return &g;
  return nullptr;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

// Maps JSON paths back to offsets in the raw text for diagnostics.
class Locator {
 public:
  Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  // Offset of `"key"` used as an object key at or after `from`; npos when absent.
  std::size_t key(const std::string& name, std::size_t from = 0) const {
    const std::string quoted = "\"" + name + "\"";
    std::size_t pos = from == std::string::npos ? 0 : from;
    while ((pos = text_.find(quoted, pos)) != std::string::npos) {
      std::size_t after = pos + quoted.size();
      while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after])))
        ++after;
      if (after < text_.size() && text_[after] == ':') return pos;
      pos += quoted.size();
    }
    return std::string::npos;
  }

  // Offset of the value that follows the key at `key_pos`.
  std::size_t value_of(std::size_t key_pos) const {
    if (key_pos == std::string::npos) return key_pos;
    std::size_t p = text_.find(':', key_pos);
    if (p == std::string::npos) return key_pos;
    ++p;
    while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    return p;
  }

  std::size_t string_literal(const std::string& value, std::size_t from) const {
    if (from == std::string::npos) return from;
    return text_.find("\"" + value + "\"", from);
  }

  [[noreturn]] void fail(std::size_t offset, const std::string& message) const {
    if (offset == std::string::npos || offset > text_.size())
      throw SpecError(source_, 0, 0, message);
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(source_, line, col, message);
  }

  [[noreturn]] void fail_byte(std::size_t byte, const std::string& message) const {
    fail(byte > 0 ? byte - 1 : 0, message);
  }

 private:
  const std::string& text_;
  std::string source_;
};

bool is_vector(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  return std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); });
}

bool is_matrix(const json& j) {
  if (!j.is_array() || j.empty() || !is_vector(j.front())) return false;
  const std::size_t cols = j.front().size();
  return std::all_of(j.begin(), j.end(),
                     [cols](const json& r) { return is_vector(r) && r.size() == cols; });
}

bool param_ok(const json& j, ParamType type) {
  switch (type) {
    case ParamType::kUInt:
      return j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0);
    case ParamType::kNumber:
      return j.is_number();
    case ParamType::kVector:
      return is_vector(j);
    case ParamType::kMatrix:
      return is_matrix(j);
    case ParamType::kVectorList:
      return j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), is_vector);
    case ParamType::kMatrixList:
      return j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), is_matrix);
    case ParamType::kKinds:
      return j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), [](const json& v) {
               return v.is_string() &&
                      (v.get<std::string>() == "backward" || v.get<std::string>() == "forward");
             });
  }
  return false;
}

const char* describe(ParamType type) {
  switch (type) {
    case ParamType::kUInt:
      return "a nonnegative integer";
    case ParamType::kNumber:
      return "a number";
    case ParamType::kVector:
      return "a nonempty array of numbers";
    case ParamType::kMatrix:
      return "a nonempty array of equal-length number arrays";
    case ParamType::kVectorList:
      return "an array of vectors";
    case ParamType::kMatrixList:
      return "an array of matrices";
    case ParamType::kKinds:
      return "an array of \"backward\"/\"forward\"";
  }
  return "";
}

double number_field(const json& obj, const char* name, double fallback, const Locator& loc,
                    std::size_t scope) {
  if (!obj.contains(name)) return fallback;
  const json& v = obj.at(name);
  if (!v.is_number())
    loc.fail(loc.value_of(loc.key(name, scope)), fmt::format("'{}' must be a number", name));
  return v.get<double>();
}

std::uint64_t uint_field(const json& obj, const char* name, std::uint64_t fallback,
                         const Locator& loc, std::size_t scope) {
  if (!obj.contains(name)) return fallback;
  const json& v = obj.at(name);
  if (!param_ok(v, ParamType::kUInt))
    loc.fail(loc.value_of(loc.key(name, scope)),
             fmt::format("'{}' must be a nonnegative integer", name));
  return v.get<std::uint64_t>();
}

ConfigSpec parse_config(const json& cfg, const Locator& loc, std::size_t scope) {
  static const std::vector<std::string> allowed = {"gamma", "beta",     "rho",
                                                   "sigma", "delta",    "max_iters",
                                                   "pi_tolerance", "error_mode"};
  ConfigSpec c;
  if (!cfg.is_object()) loc.fail(loc.value_of(scope), "'config' must be an object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      loc.fail(loc.key(it.key(), scope), fmt::format("unknown config field '{}' (known: {})",
                                                    it.key(), join(allowed)));
  c.gamma = number_field(cfg, "gamma", c.gamma, loc, scope);
  c.beta = number_field(cfg, "beta", c.beta, loc, scope);
  c.sigma = number_field(cfg, "sigma", c.sigma, loc, scope);
  c.delta = number_field(cfg, "delta", c.delta, loc, scope);
  c.pi_tolerance = number_field(cfg, "pi_tolerance", c.pi_tolerance, loc, scope);
  c.max_iters = uint_field(cfg, "max_iters", c.max_iters, loc, scope);
  if (cfg.contains("rho") && !cfg.at("rho").is_null()) {
    const json& r = cfg.at("rho");
    if (!is_vector(r))
      loc.fail(loc.value_of(loc.key("rho", scope)),
               "'rho' must be an array with one stepsize per operator");
    c.rho = r.get<std::vector<double>>();
  }
  if (cfg.contains("error_mode")) {
    const json& m = cfg.at("error_mode");
    const std::size_t at = loc.value_of(loc.key("error_mode", scope));
    if (!m.is_string()) loc.fail(at, "'error_mode' must be a string");
    try {
      c.error_mode = error_mode_from_string(m.get<std::string>());
    } catch (const ConfigError& e) {
      loc.fail(at, e.what());
    }
  }
  return c;
}

void check_params(const GeneratorSpec& gen, const json& params, const Locator& loc,
                  std::size_t scope) {
  if (!params.is_object()) loc.fail(loc.value_of(scope), "'params' must be an object");
  for (auto it = params.begin(); it != params.end(); ++it) {
    const auto match = std::find_if(gen.params.begin(), gen.params.end(),
                                    [&](const ParamSpec& p) { return it.key() == p.name; });
    if (match == gen.params.end()) {
      std::vector<std::string> known;
      for (const auto& p : gen.params) known.emplace_back(p.name);
      loc.fail(loc.key(it.key(), scope),
               fmt::format("unknown parameter '{}' for generator '{}' (known: {})", it.key(),
                           gen.name, join(known)));
    }
    if (!param_ok(it.value(), match->type))
      loc.fail(loc.value_of(loc.key(it.key(), scope)),
               fmt::format("parameter '{}' must be {}", it.key(), describe(match->type)));
  }
  for (const auto& p : gen.params)
    if (p.required && !params.contains(p.name))
      loc.fail(scope == std::string::npos ? std::string::npos : loc.value_of(scope),
               fmt::format("generator '{}' requires parameter '{}'", gen.name, p.name));
}

Vector to_vector(const json& j) { return Vector(j.get<std::vector<double>>()); }

DenseMatrix to_matrix(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& r : j)
    for (const auto& v : r) values.push_back(v.get<double>());
  return DenseMatrix(rows, cols, std::move(values));
}

std::vector<SlotKind> to_kinds(const json& j) {
  std::vector<SlotKind> kinds;
  for (const auto& v : j)
    kinds.push_back(v.get<std::string>() == "forward" ? SlotKind::kForward : SlotKind::kBackward);
  return kinds;
}

std::size_t as_size(const json& params, const char* name) {
  return params.at(name).get<std::size_t>();
}

}  // namespace

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& g : generators()) v.emplace_back(g.name);
    return v;
  }();
  return names;
}

ProblemSpecFile parse_spec(const std::string& text, const std::string& source) {
  const Locator loc(text, source);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    loc.fail_byte(e.byte, fmt::format("malformed JSON ({})", e.what()));
  }
  if (!root.is_object()) loc.fail(0, "spec must be a JSON object");

  static const std::vector<std::string> allowed = {"name",   "generator", "params",
                                                   "seed",   "config",    "certificates"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      loc.fail(loc.key(it.key()),
               fmt::format("unknown field '{}' (known: {})", it.key(), join(allowed)));

  ProblemSpecFile spec;
  if (root.contains("name")) {
    if (!root.at("name").is_string()) loc.fail(loc.value_of(loc.key("name")), "'name' must be a string");
    spec.name = root.at("name").get<std::string>();
  }

  if (!root.contains("generator")) loc.fail(0, "missing required field 'generator'");
  const std::size_t gen_at = loc.value_of(loc.key("generator"));
  if (!root.at("generator").is_string()) loc.fail(gen_at, "'generator' must be a string");
  spec.generator = root.at("generator").get<std::string>();
  const GeneratorSpec* gen = find_generator(spec.generator);
  if (!gen)
    loc.fail(gen_at, fmt::format("unknown generator '{}' (known: {})", spec.generator,
                                 join(generator_names())));

  const std::size_t params_at = loc.key("params");
  if (root.contains("params")) spec.params = root.at("params");
  check_params(*gen, spec.params, loc, params_at);

  spec.seed = uint_field(root, "seed", 0, loc, 0);

  if (root.contains("config")) spec.config = parse_config(root.at("config"), loc, loc.key("config"));

  if (root.contains("certificates")) {
    const std::size_t cert_key = loc.key("certificates");
    const json& certs = root.at("certificates");
    if (!certs.is_array()) loc.fail(loc.value_of(cert_key), "'certificates' must be an array");
    std::size_t cursor = loc.value_of(cert_key);
    for (const auto& c : certs) {
      if (!c.is_string()) loc.fail(cursor, "certificate names must be strings");
      const std::string name = c.get<std::string>();
      const std::size_t at = loc.string_literal(name, cursor);
      if (!certificate_kind_from_string(name))
        loc.fail(at, fmt::format("unknown certificate '{}' (known: {})", name,
                                 join(certificate_names())));
      if (at != std::string::npos) cursor = at + name.size() + 2;
      spec.certificates.push_back(name);
    }
  }
  return spec;
}

ProblemSpecFile load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError(path, 0, 0, "cannot read spec file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), path);
}

json spec_to_json(const ProblemSpecFile& spec) {
  json cfg = {{"gamma", spec.config.gamma},
              {"beta", spec.config.beta},
              {"sigma", spec.config.sigma},
              {"delta", spec.config.delta},
              {"max_iters", spec.config.max_iters},
              {"pi_tolerance", spec.config.pi_tolerance},
              {"error_mode", to_string(spec.config.error_mode)}};
  if (spec.config.rho) cfg["rho"] = *spec.config.rho;
  return json{{"name", spec.name},     {"generator", spec.generator},
              {"params", spec.params}, {"seed", spec.seed},
              {"config", cfg},         {"certificates", spec.certificates}};
}

std::string serialize_spec(const ProblemSpecFile& spec) { return spec_to_json(spec).dump(2); }

SolverConfig build_config(const ProblemSpecFile& spec) {
  SolverConfig c;
  c.gamma = spec.config.gamma;
  c.beta = ParameterRule::constant(spec.config.beta);
  if (spec.config.rho)
    for (double r : *spec.config.rho) c.rho.push_back(ParameterRule::constant(r));
  c.sigma = spec.config.sigma;
  c.delta = spec.config.delta;
  c.max_iters = spec.config.max_iters;
  c.pi_tolerance = spec.config.pi_tolerance;
  return c;
}

ProblemInstance build_instance(const ProblemSpecFile& spec) {
  const json& p = spec.params;
  const std::string& g = spec.generator;
  ProblemInstance inst;
  if (g == "lasso") {
    const std::size_t d = as_size(p, "d");
    const std::size_t m = p.contains("m") ? as_size(p, "m") : 2 * d;
    inst = make_lasso(d, m, p.at("lambda").get<double>(), spec.seed);
  } else if (g == "lasso_data") {
    inst = make_lasso_from_data(to_matrix(p.at("A")), to_vector(p.at("b")),
                                p.at("lambda").get<double>());
  } else if (g == "strongly_monotone_affine" || g == "cocoercive_strong") {
    std::vector<SlotKind> kinds;
    if (p.contains("kinds")) kinds = to_kinds(p.at("kinds"));
    const std::size_t d = as_size(p, "d");
    const std::size_t n = as_size(p, "n");
    if (!kinds.empty() && kinds.size() != n)
      throw ConfigError(fmt::format("'kinds' lists {} operators but n = {}", kinds.size(), n));
    const double mu = p.at("mu").get<double>();
    inst = g == "cocoercive_strong" ? make_cocoercive_strong(d, n, mu, spec.seed, kinds)
                                    : make_strongly_monotone_affine(d, n, mu, spec.seed, kinds);
  } else if (g == "affine") {
    std::vector<DenseMatrix> a;
    for (const auto& m : p.at("A")) a.push_back(to_matrix(m));
    std::vector<Vector> b;
    for (const auto& v : p.at("b")) b.push_back(to_vector(v));
    std::optional<std::size_t> strong;
    if (p.contains("strong_operator")) {
      const std::size_t s = as_size(p, "strong_operator");
      if (s == 0) throw ConfigError("'strong_operator' is 1-based");
      strong = s - 1;
    }
    inst = make_affine_instance(std::move(a), std::move(b), to_kinds(p.at("kinds")), strong);
  } else if (g == "two_set_feasibility") {
    inst = make_two_set_feasibility(as_size(p, "d"), spec.seed);
  } else if (g == "two_box_feasibility") {
    inst = make_two_box_feasibility(to_vector(p.at("lo1")), to_vector(p.at("hi1")),
                                    to_vector(p.at("lo2")), to_vector(p.at("hi2")));
  } else {
    throw ConfigError(fmt::format("unknown generator '{}'", g));
  }
  inst.seed = spec.seed;
  inst.set_gamma(spec.config.gamma);

  if (spec.config.error_mode != ErrorMode::kNone) {
    for (std::size_t i = 0; i < inst.slots.size(); ++i) {
      OperatorSlot& slot = inst.slots[i];
      if (slot.is_forward()) continue;
      const std::uint64_t s = spec.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1));
      slot.injector = ErrorInjector(spec.config.error_mode, spec.config.sigma, spec.config.delta, s);
    }
  }
  return inst;
}

}  // namespace projsplit
