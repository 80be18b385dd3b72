#pragma once

#include "finslerkit/manifold.hpp"
#include "finslerkit/metric_graph.hpp"
#include "finslerkit/minkowski.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace finslerkit {

/// One run, read from a JSON document:
///
///   command     optional; must agree with the command line when present
///   seed        base seed (the --seed flag overrides it)
///   out         output directory (the --out flag overrides it)
///   norms       library of named norm specs, referable by name
///   norm        a norm spec or name (validate-norm, euclidean manifolds)
///   dim         dimension for built-in norm names (default 2)
///   manifold    manifold spec (kind, ...)
///   samples     {n, k}
///   measure     {density: none|uniform|smooth, amplitude, mass,
///                atoms: [{point, mass}] or {count, mass, seed}}
///   parameters  command-specific numbers (delta, eps, lambda, tolerances)
///
/// Built-in norm names: euclidean, l1, l2, l4, quartic_blend (theta 1/2),
/// degenerate (|v_1|, dim 2).
struct RunConfig {
  std::string command;
  nlohmann::json doc;
  std::filesystem::path source_dir;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";

  static RunConfig load(const std::filesystem::path& path, const std::string& command,
                        std::optional<std::uint64_t> seed = std::nullopt,
                        std::optional<std::filesystem::path> out = std::nullopt);
  static RunConfig from_json(nlohmann::json doc, const std::string& command,
                             std::optional<std::uint64_t> seed = std::nullopt,
                             std::optional<std::filesystem::path> out = std::nullopt);

  bool has(const char* key) const { return doc.contains(key); }
  const nlohmann::json& require(const char* key) const;

  MinkowskiNorm norm() const;
  MinkowskiNorm resolve_norm(const nlohmann::json& ref) const;
  ManifoldSpec manifold() const;
  MeasureSpec measure(const ManifoldSpec& spec) const;
  int sample_count(int fallback) const;
  int neighbor_count() const;

  /// parameters.<key>, required to be finite and > 0.
  double positive(const char* key, double fallback) const;
  double fraction(const char* key, double fallback) const;  // in (0, 1]
  int positive_int(const char* key, int fallback) const;
  bool flag(const char* key, bool fallback) const;
  const nlohmann::json& parameters() const;
};

/// A built-in norm by name, or nullopt.
std::optional<MinkowskiNorm> builtin_norm(const std::string& name, int dim);

}  // namespace finslerkit
