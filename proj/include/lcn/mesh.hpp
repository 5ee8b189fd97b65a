#pragma once

#include <Eigen/Core>
#include <array>
#include <iosfwd>
#include <vector>

#include "lcn/errors.hpp"

namespace lcn {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangle [xmin,xmax] x [ymin,ymax].
struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
};

/// Interior edge with its two adjacent triangles. The unit normal points from
/// the left triangle to the right one, fixed at construction.
struct InteriorEdge {
  int v0, v1;      // endpoint vertex indices, v0 < v1
  int left, right; // adjacent triangle indices
  double length;
  Vec2 normal;
  bool crease = false;
};

struct BoundaryEdge {
  int v0, v1;
  int tri;
};

/// Line segments forming the folding set Gamma.
struct CreaseSpec {
  std::vector<std::pair<Vec2, Vec2>> segments;
};

enum class Pattern { SingleDiagonal, CrissCross };

/// Conforming triangulation of a polygonal domain with full interior-edge
/// adjacency. Immutable after construction; safe for shared read-only access.
class TriMesh {
 public:
  /// Empty mesh; fill via build().
  TriMesh() = default;

  /// Builds adjacency and geometric data from raw vertices/triangles and
  /// validates all invariants. `domain_area` is the exact polygon area used
  /// for the area-sum check.
  static TriMesh build(std::vector<Vec2> vertices,
                       std::vector<std::array<int, 3>> triangles,
                       double domain_area);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<InteriorEdge>& interior_edges() const { return interior_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  double h_max() const { return h_max_; }
  double area(int t) const { return areas_[t]; }
  double total_area() const { return total_area_; }
  Vec2 barycenter(int t) const { return barycenters_[t]; }

  /// Gradients of the three P1 shape functions on triangle t, one row per
  /// local node (same order as triangles()[t]).
  const Eigen::Matrix<double, 3, 2>& shape_gradients(int t) const {
    return shape_grads_[t];
  }

  /// Subdomain label of triangle t (0 everywhere when no creases declared).
  int subdomain(int t) const { return subdomains_[t]; }
  int num_subdomains() const { return num_subdomains_; }

  /// Marks interior edges covered by the crease segments and labels the
  /// triangles of each subdomain by flood fill. Throws UnfittedCreaseError
  /// if a segment is not covered by mesh edges.
  void fit_creases(const CreaseSpec& creases);

  /// Plain-text listing: one vertex per line "x y", then one triangle per
  /// line "i j k" (0-based).
  void dump(std::ostream& os) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<InteriorEdge> interior_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<double> areas_;
  std::vector<Vec2> barycenters_;
  std::vector<Eigen::Matrix<double, 3, 2>> shape_grads_;
  std::vector<int> subdomains_;
  int num_subdomains_ = 1;
  double h_max_ = 0.0;
  double total_area_ = 0.0;
};

/// Uniform triangulation of a rectangle with n x n cells. SingleDiagonal
/// splits each cell along its main diagonal (2 triangles per cell);
/// CrissCross adds the cell center (4 triangles per cell).
TriMesh structured_square(int n, const Rect& domain,
                          Pattern pattern = Pattern::SingleDiagonal);

/// CrissCross mesh whose edge set covers the crease segments; crease flags
/// and subdomain labels are set. Throws UnfittedCreaseError when a segment
/// is not representable by mesh edges at this n.
TriMesh crease_fitted_square(int n, const Rect& domain,
                             const CreaseSpec& creases);

/// True for each triangle whose barycenter lies within distance d of Gamma.
std::vector<bool> crease_strip_mask(const TriMesh& mesh,
                                    const CreaseSpec& creases, double d);

/// Distance from a point to the union of crease segments.
double distance_to_creases(const CreaseSpec& creases, const Vec2& p);

/// Both diagonals of a rectangle as a crease set.
CreaseSpec diagonal_creases(const Rect& domain);

}  // namespace lcn
