#pragma once

#include "tactskin/mesh.hpp"

namespace tactskin::primitives {

/// Flat rectangle in z = 0 spanning [0, size_x] x [0, size_y], counter-
/// clockwise seen from +z, split into nx * ny quads.
TriMesh grid_plate(double size_x, double size_y, int nx, int ny);

/// Axis-aligned cube [0, s]^3 with outward winding. Every face diagonal runs
/// through corner (0,0,0) or (s,s,s), so those two corners see the same
/// incident area on each of their three faces.
TriMesh cube(double size);

TriMesh icosphere(double radius, int subdivisions);

/// Convex cylindrical patch of radius r around the z axis, covering
/// `angle` radians and `length` along z, outward (radial) winding.
TriMesh cylinder_patch(double radius, double angle, double length, int n_around, int n_along);

/// Flat annulus in z = 0.
TriMesh annulus(double inner_radius, double outer_radius, int n_radial, int n_around);

/// Concave V-groove running along x with its crease on the x axis. The two
/// walls each extend `wall_width` from the crease and open upward (+z) with
/// the given full opening angle; winding faces into the groove.
TriMesh v_groove(double wall_width, double length, int rows, int cols, double opening_angle_rad);

} // namespace tactskin::primitives
