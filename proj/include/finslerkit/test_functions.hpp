#pragma once

#include "finslerkit/manifold.hpp"
#include "finslerkit/metric_graph.hpp"

#include <nlohmann/json.hpp>

namespace finslerkit {

/// Named closed-form scalar functions used by the experiments:
///   zero | constant{value} | coordinate{index} | linear{a, b} |
///   cone{center, radius}: max(0, 1 - |x - c|_2 / radius) |
///   truncated_distance{pole, radius}: max(0, radius - d(x, pole)) |
///   half_square: |x|_2^2 / 2 |
///   wave{frequencies, phase}: sin(2 pi sum_i m_i x_i / p_i + phase), p the torus periods (1 elsewhere).
/// A spec is either a bare name or an object {"name": ..., params...}.
ScalarField::Function make_test_function(const nlohmann::json& spec, const ManifoldSpec& manifold);
ScalarField sample_test_function(const SampledManifold& graph, const nlohmann::json& spec);

}  // namespace finslerkit
