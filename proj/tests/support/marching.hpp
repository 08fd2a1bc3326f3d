#pragma once

#include <invertlab/surface_mesh.hpp>

#include <functional>

namespace invertlab::testing {

/// Zero set of g on a uniform n^3 grid over [-half, half]^3 by marching
/// tetrahedra (six per cube). Edge crossings are polished by bisection.
/// Triangles are oriented with grad g.
SurfaceMesh march_zero_set(const std::function<double(const Eigen::Vector3d&)>& g, double half, int n);

}  // namespace invertlab::testing
