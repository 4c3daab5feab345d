#pragma once

#include "tactskin/chain.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactskin {

/// Concatenates meshes without welding.
TriMesh merge_meshes(std::span<const TriMesh> meshes);

/// Closed cylinder through the shell wall under a nodule: from `depth` below
/// the nodule position (against its normal) up to the position itself.
TriMesh nodule_cylinder(const Nodule& nodule, double depth, int segments = 24);

/// Closed prism of the given diameter around every leg of a polyline.
TriMesh trace_tube(std::span<const Vec3> polyline, double diameter, int sides = 8);

/// All shell solids as one mesh.
TriMesh body_mesh(std::span<const SkinShell> shells);

/// Nodule cylinders plus trace tubes. They overlap the body on purpose;
/// multi-material slicers resolve the overlap.
TriMesh conductive_mesh(std::span<const SkinShell> shells, const NoduleLayout& layout,
                        std::span<const ChainDesign> chains, double trace_diameter);

/// Table of the characterization columns for one skin unit.
struct Characterization {
    std::string unit;
    std::size_t nodules = 0;
    double volume_cm3 = 0.0;
    double total_resistance_kohm = 0.0;
    double average_radius_mm = 0.0;
};

/// Reads the nodule count, total resistance and radii from a manifest and
/// the volume from the exported body STL.
Characterization characterize(std::string_view manifest_json, std::string_view body_stl);
std::string format_characterization(const Characterization& c);

} // namespace tactskin
