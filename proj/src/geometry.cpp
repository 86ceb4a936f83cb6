#include "etale/geometry.hpp"

#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <tuple>

namespace etale {

Geometry Geometry::flat(int dim) {
  if (dim != 2 && dim != 3) throw Error("flat geometry needs dimension 2 or 3");
  Geometry g;
  g.kind_ = GeometryKind::Flat;
  g.dim_ = dim;
  return g;
}

Geometry Geometry::sphere() {
  Geometry g;
  g.kind_ = GeometryKind::Sphere;
  g.dim_ = 3;
  return g;
}

std::string Geometry::describe() const {
  return kind_ == GeometryKind::Sphere ? "sphere" : "flat" + std::to_string(dim_);
}

double Geometry::distance(const Vec& x, const Vec& y) const {
  if (kind_ == GeometryKind::Flat) return (y - x).norm();
  return std::atan2(x.cross(y).norm(), x.dot(y));
}

Vec Geometry::exp(const Vec& x, const Vec& v) const {
  if (kind_ == GeometryKind::Flat) return x + v;
  const double n = v.norm();
  if (n < 1e-300) return x;
  Vec y = std::cos(n) * x + (std::sin(n) / n) * v;
  return y / y.norm();
}

Vec Geometry::log(const Vec& x, const Vec& y) const {
  if (kind_ == GeometryKind::Flat) return y - x;
  Vec w = y - x.dot(y) * x;
  const double wn = w.norm();
  if (wn < 1e-300) return Vec::Zero();  // y = x; antipodes are outside every chart we use
  return (distance(x, y) / wn) * w;
}

Vec Geometry::transport(const Vec& x, const Vec& y, const Vec& v) const {
  if (kind_ == GeometryKind::Flat) return v;
  return v - (y.dot(v) / (1.0 + x.dot(y))) * (x + y);
}

Vec Geometry::project_tangent(const Vec& x, const Vec& v) const {
  if (kind_ == GeometryKind::Flat) {
    Vec w = v;
    if (dim_ == 2) w.z() = 0.0;
    return w;
  }
  return v - v.dot(x) * x;
}

bool Geometry::contains(const Vec& x, double tol) const {
  if (!x.allFinite()) return false;
  if (kind_ == GeometryKind::Flat) return dim_ == 3 || std::abs(x.z()) <= tol;
  return std::abs(x.norm() - 1.0) <= tol;
}

std::vector<Vec> Geometry::tangent_basis(const Vec& x) const {
  if (kind_ == GeometryKind::Flat) {
    std::vector<Vec> out{Vec::UnitX(), Vec::UnitY()};
    if (dim_ == 3) out.push_back(Vec::UnitZ());
    return out;
  }
  Vec seed = std::abs(x.x()) < 0.9 ? Vec::UnitX() : Vec::UnitY();
  Vec e1 = (seed - seed.dot(x) * x).normalized();
  return {e1, x.cross(e1)};
}

// ---------------------------------------------------------------- isometries

IsometryElement IsometryElement::compose(const IsometryElement& inner) const {
  IsometryElement out;
  out.linear = linear * inner.linear;
  out.translation = linear * inner.translation + translation;
  out.word = word == "e" ? inner.word : inner.word == "e" ? word : word + "*" + inner.word;
  return out;
}

IsometryElement IsometryElement::inverse() const {
  IsometryElement out;
  out.linear = linear.transpose();
  out.translation = -(out.linear * translation);
  out.word = word == "e" ? "e" : "(" + word + ")^-1";
  return out;
}

bool IsometryElement::approx_equal(const IsometryElement& other, double tol) const {
  return (linear - other.linear).cwiseAbs().maxCoeff() <= tol &&
         (translation - other.translation).cwiseAbs().maxCoeff() <= tol;
}

bool IsometryElement::is_identity(double tol) const { return approx_equal(IsometryElement{}, tol); }

void check_isometry(const Geometry& g, const IsometryElement& e) {
  if (!e.linear.allFinite() || !e.translation.allFinite()) throw Error("isometry " + e.word + " is not finite");
  if ((e.linear.transpose() * e.linear - Mat::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw Error("isometry " + e.word + " has a non-orthogonal linear part");
  if (g.kind() == GeometryKind::Sphere && e.translation.norm() > 1e-9)
    throw Error("isometry " + e.word + " of the sphere must fix the origin");
  if (g.kind() == GeometryKind::Flat && g.dim() == 2) {
    if (std::abs(e.translation.z()) > 1e-9 || std::abs(e.linear(2, 2) - 1.0) > 1e-9)
      throw Error("isometry " + e.word + " does not preserve the plane");
  }
}

IsometryElement translation(const Vec& b) {
  IsometryElement e;
  e.translation = b;
  return e;
}

IsometryElement rotation_z(double angle) {
  IsometryElement e;
  e.linear = Eigen::AngleAxisd(angle, Vec::UnitZ()).toRotationMatrix();
  return e;
}

namespace {

// Coarse grid key; candidates sharing a key are confirmed at 1e-9.
std::vector<long long> grid_key(const IsometryElement& e) {
  std::vector<long long> k;
  k.reserve(12);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k.push_back(std::llround(e.linear(i, j) * 1e6));
  for (int i = 0; i < 3; ++i) k.push_back(std::llround(e.translation(i) * 1e6));
  return k;
}

std::string default_name(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('a' + i));
  return "g" + std::to_string(i);
}

// Letters as (generator, exponent) runs, rendered "a^3*b^-1".
std::string render_word(const std::vector<std::pair<int, int>>& runs, const std::vector<std::string>& names) {
  if (runs.empty()) return "e";
  std::string out;
  for (const auto& [g, k] : runs) {
    if (!out.empty()) out += "*";
    out += names[g];
    if (k != 1) out += "^" + std::to_string(k);
  }
  return out;
}

}  // namespace

int IsometryGroup::find(const IsometryElement& e) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i].approx_equal(e)) return static_cast<int>(i);
  return -1;
}

IsometryGroup enumerate_isometries(const Geometry& geometry, const std::vector<IsometryElement>& generators,
                                   int word_bound, std::vector<std::string> names) {
  if (word_bound < 0) throw Error("word bound must be non-negative");
  if (names.empty())
    for (std::size_t i = 0; i < generators.size(); ++i) names.push_back(default_name(i));
  if (names.size() != generators.size()) throw Error("one name per generator is required");
  for (const auto& g : generators) check_isometry(geometry, g);

  IsometryGroup out{geometry, generators, names, word_bound, {}};
  std::map<std::vector<long long>, std::vector<int>> seen;
  std::vector<std::vector<std::pair<int, int>>> runs;
  auto insert = [&](IsometryElement e, std::vector<std::pair<int, int>> r) {
    auto& bucket = seen[grid_key(e)];
    for (int i : bucket)
      if (out.elements[i].approx_equal(e)) return false;
    e.word = render_word(r, names);
    bucket.push_back(static_cast<int>(out.elements.size()));
    out.elements.push_back(std::move(e));
    runs.push_back(std::move(r));
    return true;
  };
  insert(IsometryElement{}, {});
  std::vector<IsometryElement> inverses;
  for (const auto& g : generators) inverses.push_back(g.inverse());

  std::size_t level_begin = 0;
  for (int len = 1; len <= word_bound; ++len) {
    const std::size_t level_end = out.elements.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (std::size_t g = 0; g < generators.size(); ++g) {
        for (int sign : {1, -1}) {
          const IsometryElement& step = sign > 0 ? generators[g] : inverses[g];
          IsometryElement e = out.elements[i].compose(step);
          auto r = runs[i];
          if (!r.empty() && r.back().first == static_cast<int>(g)) {
            r.back().second += sign;
            if (r.back().second == 0) r.pop_back();
          } else {
            r.push_back({static_cast<int>(g), sign});
          }
          insert(std::move(e), std::move(r));
        }
      }
    }
    level_begin = level_end;
    if (level_begin == out.elements.size()) break;
  }
  return out;
}

IsometryElement parse_word(const std::string& word, const std::vector<IsometryElement>& generators,
                           const std::vector<std::string>& names_in) {
  std::vector<std::string> names = names_in;
  if (names.empty())
    for (std::size_t i = 0; i < generators.size(); ++i) names.push_back(default_name(i));
  std::string w;
  for (char c : word)
    if (!std::isspace(static_cast<unsigned char>(c))) w += c;
  if (w.empty() || w == "e" || w == "1" || w == "id") return IsometryElement{};

  IsometryElement out;
  std::vector<std::pair<int, int>> runs;
  std::size_t pos = 0;
  while (pos <= w.size()) {
    std::size_t end = w.find('*', pos);
    if (end == std::string::npos) end = w.size();
    std::string factor = w.substr(pos, end - pos);
    std::string name = factor;
    int exponent = 1;
    if (auto caret = factor.find('^'); caret != std::string::npos) {
      name = factor.substr(0, caret);
      std::string ex = factor.substr(caret + 1);
      std::size_t used = 0;
      try {
        exponent = std::stoi(ex, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (ex.empty() || used != ex.size()) throw Error("bad exponent in word '" + word + "'");
    }
    int g = -1;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) g = static_cast<int>(i);
    if (g < 0) throw Error("unknown generator '" + name + "' in word '" + word + "'");
    IsometryElement step = exponent >= 0 ? generators[g] : generators[g].inverse();
    for (int k = 0; k < std::abs(exponent); ++k) out = out.compose(step);
    if (exponent != 0) runs.push_back({g, exponent});
    pos = end + 1;
  }
  out.word = render_word(runs, names);
  return out;
}

}  // namespace etale
