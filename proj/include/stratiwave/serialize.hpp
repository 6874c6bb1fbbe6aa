#pragma once

#include <nlohmann/json.hpp>

#include "stratiwave/bifurcation.hpp"
#include "stratiwave/config.hpp"

namespace stratiwave {

// JSON round-trip of bifurcation results.  Mode labels are serialized
// 1-based; in-memory they are 0-based indices into the eigenvalue ordering.
nlohmann::json point_to_json(const BifurcationPoint& p);
BifurcationPoint point_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const VerificationReport& r);

nlohmann::json two_layer_to_json(const TwoLayerReport& r);

// Full pipeline output: accepted points with their verification reports (and
// tension-rescue data when present) plus the rejected crossings.
nlohmann::json pipeline_to_json(const PipelineResult& res, const FluidStack& fs,
                                const Lattice& lat);

} // namespace stratiwave
