#include "finslerkit/test_functions.hpp"

#include <cmath>
#include <numbers>

namespace finslerkit {

namespace {

Vec vec_param(const nlohmann::json& doc, const char* key, const Vec& fallback) {
  if (!doc.contains(key)) return fallback;
  const auto xs = doc.at(key).get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void require_dim(const Vec& v, int dim, const std::string& what) {
  if (v.size() != dim) throw InputError("test function '" + what + "': expected " + std::to_string(dim) + " components");
}

}  // namespace

ScalarField::Function make_test_function(const nlohmann::json& spec, const ManifoldSpec& manifold) {
  const nlohmann::json params = spec.is_string() ? nlohmann::json::object() : spec;
  std::string name;
  try {
    name = spec.is_string() ? spec.get<std::string>() : spec.at("name").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("test function: missing key 'name'");
  }
  const int dim = manifold.ambient_dim();
  try {
    if (name == "zero") return [](const Vec&) { return 0.0; };
    if (name == "constant") {
      const double c = params.value("value", 1.0);
      return [c](const Vec&) { return c; };
    }
    if (name == "coordinate") {
      const int i = params.value("index", 0);
      if (i < 0 || i >= dim) throw InputError("test function 'coordinate': index out of range");
      return [i](const Vec& x) { return x[i]; };
    }
    if (name == "linear") {
      const Vec a = vec_param(params, "a", Vec::Ones(dim));
      require_dim(a, dim, name);
      const double b = params.value("b", 0.0);
      return [a, b](const Vec& x) { return a.dot(x) + b; };
    }
    if (name == "cone") {
      const Vec c = vec_param(params, "center", Vec::Zero(dim));
      require_dim(c, dim, name);
      const double radius = params.value("radius", 1.0);
      if (!(radius > 0.0)) throw InputError("test function 'cone': radius must be positive");
      return [c, radius](const Vec& x) { return std::max(0.0, 1.0 - (x - c).norm() / radius); };
    }
    if (name == "truncated_distance") {
      Vec north = Vec::Zero(dim);
      north[dim - 1] = manifold.kind() == ManifoldKind::sphere2 ? manifold.radius() : 0.0;
      const Vec pole = manifold.normalize_point(vec_param(params, "pole", north));
      require_dim(pole, dim, name);
      const double radius = params.value("radius", 1.0);
      if (manifold.kind() == ManifoldKind::sphere2) {
        const double R = manifold.radius();
        return [pole, radius, R](const Vec& x) {
          const double c = std::clamp(x.dot(pole) / (x.norm() * R), -1.0, 1.0);
          return std::max(0.0, radius - R * std::acos(c));
        };
      }
      return [pole, radius, manifold](const Vec& x) { return std::max(0.0, radius - manifold.distance(pole, x)); };
    }
    if (name == "half_square") return [](const Vec& x) { return 0.5 * x.squaredNorm(); };
    if (name == "wave") {
      const Vec m = vec_param(params, "frequencies", Vec::Ones(dim));
      require_dim(m, dim, name);
      Vec scale = m * 2.0 * std::numbers::pi;
      if (manifold.kind() == ManifoldKind::flat_torus2) scale = scale.cwiseQuotient(manifold.periods());
      const double phase = params.value("phase", 0.0);
      return [scale, phase](const Vec& x) { return std::sin(scale.dot(x) + phase); };
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("test function '" + name + "': " + e.what());
  }
  throw InputError("unknown test function '" + name + "'");
}

ScalarField sample_test_function(const SampledManifold& graph, const nlohmann::json& spec) {
  auto fn = make_test_function(spec, graph.spec());
  const std::string name = spec.is_string() ? spec.get<std::string>() : spec.value("name", std::string("f"));
  return ScalarField::from_function(graph, std::move(fn), name);
}

}  // namespace finslerkit
