#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etale/types.hpp"

namespace etale {

// Points and tangent vectors live in R^3; flat R^2 uses z = 0.
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

enum class GeometryKind { Flat, Sphere };

class Geometry {
 public:
  static Geometry flat(int dim);  // dim 2 or 3
  static Geometry sphere();       // unit 2-sphere in R^3

  GeometryKind kind() const { return kind_; }
  int dim() const { return dim_; }  // ambient coordinates actually used
  std::string describe() const;

  double distance(const Vec& x, const Vec& y) const;
  Vec exp(const Vec& x, const Vec& v) const;
  Vec log(const Vec& x, const Vec& y) const;
  // Parallel transport of v from T_x to T_y along the minimizing geodesic.
  Vec transport(const Vec& x, const Vec& y, const Vec& v) const;
  Vec project_tangent(const Vec& x, const Vec& v) const;
  bool contains(const Vec& x, double tol = 1e-9) const;
  double convexity_radius() const {
    return kind_ == GeometryKind::Flat ? std::numeric_limits<double>::infinity() : 1.5707963267948966;
  }
  // Orthonormal basis of T_x (dim() - 1 vectors on the sphere).
  std::vector<Vec> tangent_basis(const Vec& x) const;

 private:
  GeometryKind kind_ = GeometryKind::Flat;
  int dim_ = 2;
};

// x -> A x + b; on the sphere b = 0 and A is orthogonal.
struct IsometryElement {
  Mat linear = Mat::Identity();
  Vec translation = Vec::Zero();
  std::string word = "e";

  Vec apply(const Vec& x) const { return linear * x + translation; }
  Vec differential(const Vec& v) const { return linear * v; }
  IsometryElement compose(const IsometryElement& inner) const;  // this o inner
  IsometryElement inverse() const;
  bool approx_equal(const IsometryElement& other, double tol = 1e-9) const;
  bool is_identity(double tol = 1e-9) const;
};
// Throws unless the linear part is orthogonal (1e-9) and fits the geometry.
void check_isometry(const Geometry& g, const IsometryElement& e);

IsometryElement translation(const Vec& b);
IsometryElement rotation_z(double angle);

struct IsometryGroup {
  Geometry geometry;
  std::vector<IsometryElement> generators;
  std::vector<std::string> names;  // generator letters
  int word_bound = 0;
  std::vector<IsometryElement> elements;  // identity first, then by word length

  int find(const IsometryElement& e) const;  // -1 when absent
};

// Breadth-first over words in the generators and their inverses, deduplicated.
IsometryGroup enumerate_isometries(const Geometry& geometry, const std::vector<IsometryElement>& generators,
                                   int word_bound, std::vector<std::string> names = {});

// Parses words like "a^3*b^-1" or "e"; letters index the generators.
IsometryElement parse_word(const std::string& word, const std::vector<IsometryElement>& generators,
                           const std::vector<std::string>& names);

}  // namespace etale
