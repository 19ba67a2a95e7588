#pragma once

#include <vector>

#include <Eigen/Core>

namespace rangeface::detail {

using Vec2 = Eigen::Vector2d;

struct Triangle {
    int v[3];  // indices into the input point set
};

/// Twice the signed area of (a, b, c); positive for counter-clockwise turns.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// True when p lies strictly inside the circumcircle of (a, b, c),
/// independent of the triangle's winding.
bool circumcircle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p);

/// Delaunay triangulation by incremental insertion with walking point
/// location. Points must be pairwise distinct; exact duplicates are skipped.
/// Returns no triangles when all points are collinear.
std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points);

}  // namespace rangeface::detail
