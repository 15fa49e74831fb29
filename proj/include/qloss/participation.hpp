#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qloss/fieldsolve.hpp"

// Participation ratios: the fraction of the total electric energy stored in
// each dielectric region. Two routes are provided. Direct meshing of the
// thin oxide layers is the authoritative one; a first-order surface
// integral over the bare (layer-free) solution serves as a fast path and
// cross-check.

namespace qloss {

struct ParticipationReport {
    std::string geometry_id;
    std::string method;  // "direct" or "surface-approximation"
    std::vector<std::pair<std::string, double>> ratios;

    double get(const std::string& region) const;  // 0 if absent
    double sum() const;
};

ParticipationReport participation_ratios(const FieldSolution& sol,
                                         const std::string& geometry_id = "");

enum class SurfaceKind { MetalAir, SubstrateAir };

struct ThinLayerSpec {
    SurfaceKind kind = SurfaceKind::MetalAir;
    double thickness_nm = 5.0;
    double permittivity = 5.0;
};

// First-order estimate of a thin layer's participation from a solution
// computed WITHOUT the layer meshed. Tangential E is continuous across the
// layer and normal D is continuous; on metal the tangential component
// vanishes. Faces within the mesh's edge band of a metal corner are
// skipped, mirroring the direct route's edge-band tagging.
double thin_layer_participation(const FieldSolution& bare,
                                const ThinLayerSpec& layer);

}  // namespace qloss
