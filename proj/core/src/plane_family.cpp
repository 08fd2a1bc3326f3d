#include "invertlab/section.hpp"

#include <cmath>
#include <map>
#include <set>

namespace invertlab {

namespace {

void icosahedron(std::vector<Eigen::Vector3d>& v, std::vector<Triangle>& f) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
       {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
       {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
       {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
}

void subdivide(std::vector<Eigen::Vector3d>& v, std::vector<Triangle>& f) {
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
    const int id = static_cast<int>(v.size()) - 1;
    mid.emplace(key, id);
    return id;
  };
  std::vector<Triangle> out;
  for (const auto& t : f) {
    const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    out.push_back({t[0], ab, ca});
    out.push_back({ab, t[1], bc});
    out.push_back({ca, bc, t[2]});
    out.push_back({ab, bc, ca});
  }
  f.swap(out);
}

std::vector<std::pair<int, int>> edges_of(const std::vector<Triangle>& faces) {
  std::set<std::pair<int, int>> e;
  for (const auto& t : faces) {
    for (int k = 0; k < 3; ++k) e.insert(std::minmax(t[k], t[(k + 1) % 3]));
  }
  return {e.begin(), e.end()};
}

}  // namespace

std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Icosphere: return "icosphere";
    case FamilyKind::Rp1: return "rp1";
    case FamilyKind::Explicit: return "explicit";
  }
  return "unknown";
}

PlaneFamily sample_tangent_planes(int level, int n) {
  if (level < 0 || level > 4) throw PreconditionError("icosphere level must be in [0, 4]");
  if (n < 3) throw PreconditionError("tangent-plane family needs n >= 3");
  std::vector<Eigen::Vector3d> v;
  std::vector<Triangle> f;
  icosahedron(v, f);
  for (int l = 0; l < level; ++l) subdivide(v, f);

  PlaneFamily fam;
  fam.kind = FamilyKind::Icosphere;
  fam.level = level;
  fam.faces = f;
  fam.edges = edges_of(f);
  for (const auto& p : v) {
    Eigen::Vector3d c = p;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(c[i]) > 1e-12) {
        if (c[i] < 0) c = -c;
        break;
      }
    }
    const Eigen::Vector3d ref = std::abs(c[2]) > 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitZ();
    const Eigen::Vector3d u1 = (ref - ref.dot(c) * c).normalized();
    const Eigen::Vector3d u2 = c.cross(u1);

    Plane pl;
    pl.base = Point::Zero(n);
    pl.tangent = Matrix::Zero(n, 2);
    pl.tangent.block(0, 0, 3, 1) = u1;
    pl.tangent.block(0, 1, 3, 1) = u2;
    pl.normal = Matrix::Zero(n, n - 2);
    pl.normal.block(0, 0, 3, 1) = c;
    for (int i = 3; i < n; ++i) pl.normal(i, i - 2) = 1.0;
    Point s = Point::Zero(n);
    s.head<3>() = p;
    fam.samples.push_back(s);
    fam.planes.push_back(std::move(pl));
  }
  return fam;
}

PlaneFamily rp1_family(std::size_t count) {
  if (count < 3) throw PreconditionError("rp1 family needs at least three lines");
  PlaneFamily fam;
  fam.kind = FamilyKind::Rp1;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = M_PI * static_cast<double>(k) / static_cast<double>(count);
    fam.samples.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    Matrix span = Matrix::Zero(4, 2);
    span(0, 0) = std::cos(t);
    span(2, 0) = std::sin(t);
    span(1, 1) = std::cos(t);
    span(3, 1) = std::sin(t);
    fam.planes.push_back(Plane::from_span(Point::Zero(4), span));
    fam.edges.emplace_back(static_cast<int>(k), static_cast<int>((k + 1) % count));
  }
  return fam;
}

PlaneFamily explicit_family(std::vector<Plane> planes, bool cyclic) {
  PlaneFamily fam;
  fam.kind = FamilyKind::Explicit;
  const int n = static_cast<int>(planes.size());
  for (int k = 0; k < n; ++k) {
    fam.samples.push_back(Point::Constant(1, k));
    if (k + 1 < n) fam.edges.emplace_back(k, k + 1);
  }
  if (cyclic && n > 2) fam.edges.emplace_back(n - 1, 0);
  fam.planes = std::move(planes);
  return fam;
}

}  // namespace invertlab
