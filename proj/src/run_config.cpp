#include "finslerkit/run_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace finslerkit {

namespace {

const char* kKnownCommands[] = {"validate-norm", "smooth", "check-hilbert", "quotient", "distance"};

MeasureSpec::Density density_from(const std::string& s) {
  if (s == "none") return MeasureSpec::Density::none;
  if (s == "uniform") return MeasureSpec::Density::uniform;
  if (s == "smooth") return MeasureSpec::Density::smooth;
  throw InputError("config: unknown measure density '" + s + "'");
}

}  // namespace

std::optional<MinkowskiNorm> builtin_norm(const std::string& name, int dim) {
  if (dim < 1) throw InputError("config: 'dim' must be positive");
  if (name == "euclidean" || name == "l2") return MinkowskiNorm::euclidean(dim);
  if (name == "l1") return MinkowskiNorm::lp(dim, 1.0);
  if (name == "l4") return MinkowskiNorm::lp(dim, 4.0);
  if (name == "quartic_blend") return MinkowskiNorm::quartic_blend(dim, 0.5);
  if (name == "degenerate") {
    if (dim != 2) throw InputError("config: the 'degenerate' norm exists in dim 2 only");
    std::vector<double> h(256);
    for (size_t j = 0; j < h.size(); ++j) h[j] = std::abs(std::cos(2.0 * std::numbers::pi * j / h.size()));
    return MinkowskiNorm::custom_table(std::move(h));
  }
  return std::nullopt;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::string& command,
                          std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg = from_json(std::move(doc), command, seed, std::move(out));
  cfg.source_dir = path.parent_path();
  return cfg;
}

RunConfig RunConfig::from_json(nlohmann::json doc, const std::string& command, std::optional<std::uint64_t> seed,
                               std::optional<std::filesystem::path> out) {
  if (!doc.is_object()) throw InputError("config: top level must be an object");
  bool known = false;
  for (const char* c : kKnownCommands) known = known || command == c;
  if (!known) throw InputError("unknown command '" + command + "'");
  RunConfig cfg;
  cfg.command = command;
  try {
    if (doc.contains("command") && doc["command"].get<std::string>() != command)
      throw InputError("config: written for command '" + doc["command"].get<std::string>() + "', run as '" + command +
                       "'");
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    if (doc.contains("parameters") && !doc["parameters"].is_object())
      throw InputError("config: 'parameters' must be an object");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  cfg.doc = std::move(doc);
  return cfg;
}

const nlohmann::json& RunConfig::require(const char* key) const {
  if (!doc.contains(key)) throw InputError(std::string("config: missing key '") + key + "'");
  return doc.at(key);
}

MinkowskiNorm RunConfig::resolve_norm(const nlohmann::json& ref) const {
  if (ref.is_string()) {
    const auto name = ref.get<std::string>();
    if (doc.contains("norms") && doc["norms"].contains(name)) return norm_from_json(doc["norms"][name]);
    if (auto n = builtin_norm(name, doc.value("dim", 2))) return *n;
    throw InputError("config: unknown norm '" + name + "'");
  }
  return norm_from_json(ref);
}

MinkowskiNorm RunConfig::norm() const { return resolve_norm(require("norm")); }

ManifoldSpec RunConfig::manifold() const {
  nlohmann::json m = require("manifold");
  if (m.is_string()) m = nlohmann::json{{"kind", m}};
  // Resolve norm names here so built-ins and the config library both work.
  if (m.is_object() && m.contains("norm")) m["norm"] = to_json(resolve_norm(m["norm"]));
  else if (m.is_object() && m.value("kind", "") == "euclidean" && doc.contains("norm")) m["norm"] = to_json(norm());
  return manifold_from_json(m);
}

MeasureSpec RunConfig::measure(const ManifoldSpec& spec) const {
  MeasureSpec mu;
  if (!doc.contains("measure")) return mu;
  const auto& m = doc["measure"];
  try {
    if (!m.is_object()) throw InputError("config: 'measure' must be an object");
    mu.density = density_from(m.value("density", std::string("uniform")));
    mu.amplitude = m.value("amplitude", mu.amplitude);
    mu.mass = m.value("mass", mu.mass);
    if (!(mu.mass >= 0.0) || !std::isfinite(mu.mass)) throw InputError("config: measure mass must be >= 0");
    if (!(std::abs(mu.amplitude) < 1.0)) throw InputError("config: measure amplitude must lie in (-1, 1)");
    if (m.contains("atoms")) {
      const auto& a = m["atoms"];
      if (a.is_array()) {
        for (const auto& atom : a) {
          const auto p = atom.at("point").get<std::vector<double>>();
          Vec x = Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
          if (x.size() != spec.ambient_dim()) throw InputError("config: atom point has the wrong dimension");
          const double w = atom.at("mass").get<double>();
          if (!(w > 0.0)) throw InputError("config: atom mass must be positive");
          mu.atoms.push_back(Atom{spec.normalize_point(x), w});
        }
      } else if (a.is_object()) {
        const int count = a.at("count").get<int>();
        const double mass = a.value("mass", 1.0);
        if (count < 1 || !(mass > 0.0)) throw InputError("config: atoms need count >= 1 and mass > 0");
        for (const Vec& x : sample_points(spec, count, a.value("seed", seed + 7919)))
          mu.atoms.push_back(Atom{x, mass / count});
      } else {
        throw InputError("config: 'atoms' must be a list or {count, mass, seed}");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: measure: ") + e.what());
  }
  return mu;
}

int RunConfig::sample_count(int fallback) const {
  const int n = doc.contains("samples") ? doc["samples"].value("n", fallback) : fallback;
  if (n < 2) throw InputError("config: samples.n must be at least 2");
  return n;
}

int RunConfig::neighbor_count() const {
  const int k = doc.contains("samples") ? doc["samples"].value("k", 12) : 12;
  if (k < 1) throw InputError("config: samples.k must be positive");
  return k;
}

const nlohmann::json& RunConfig::parameters() const {
  static const nlohmann::json empty = nlohmann::json::object();
  return doc.contains("parameters") ? doc["parameters"] : empty;
}

double RunConfig::positive(const char* key, double fallback) const {
  double v = fallback;
  try {
    v = parameters().value(key, fallback);
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("config: parameters.") + key + " must be a number");
  }
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("config: parameters.") + key + " must be positive");
  return v;
}

double RunConfig::fraction(const char* key, double fallback) const {
  const double v = positive(key, fallback);
  if (v > 1.0) throw InputError(std::string("config: parameters.") + key + " must not exceed 1");
  return v;
}

int RunConfig::positive_int(const char* key, int fallback) const {
  int v = fallback;
  try {
    v = parameters().value(key, fallback);
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("config: parameters.") + key + " must be an integer");
  }
  if (v < 1) throw InputError(std::string("config: parameters.") + key + " must be positive");
  return v;
}

bool RunConfig::flag(const char* key, bool fallback) const {
  try {
    return parameters().value(key, fallback);
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("config: parameters.") + key + " must be a boolean");
  }
}

}  // namespace finslerkit
