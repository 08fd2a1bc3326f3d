#include "invertlab/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace invertlab {

namespace {

constexpr double kDeg = M_PI / 180.0;

std::string describe(const Point& x) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

// ccw angle in [0, 2pi) from u to v, both 2-vectors.
double ccw_angle(const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
  double a = std::atan2(u.x() * v.y() - u.y() * v.x(), u.dot(v));
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

class SpatialHash {
 public:
  explicit SpatialHash(double cell) : cell_(cell) {}

  void insert(int id, const Point& x) { cells_[key(coords(x))].push_back(id); }

  void remove(int id, const Point& x) {
    auto& bucket = cells_[key(coords(x))];
    bucket.erase(std::remove(bucket.begin(), bucket.end(), id), bucket.end());
  }

  // Ids whose cell is within one cell of x (radius up to `cell`).
  template <typename Fn>
  void visit_near(const Point& x, Fn&& fn) const {
    const std::vector<long> c = coords(x);
    const int n = static_cast<int>(c.size());
    std::vector<long> probe(c);
    std::vector<int> offset(static_cast<std::size_t>(n), -1);
    while (true) {
      for (int i = 0; i < n; ++i) probe[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] + offset[static_cast<std::size_t>(i)];
      auto it = cells_.find(key(probe));
      if (it != cells_.end()) {
        for (int id : it->second) fn(id);
      }
      int i = 0;
      while (i < n && offset[static_cast<std::size_t>(i)] == 1) offset[static_cast<std::size_t>(i++)] = -1;
      if (i == n) break;
      ++offset[static_cast<std::size_t>(i)];
    }
  }

 private:
  std::vector<long> coords(const Point& x) const {
    std::vector<long> c(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) c[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(x[i] / cell_));
    return c;
  }
  static std::uint64_t key(const std::vector<long>& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (long v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

// Drops all but the largest triangle fan at vertices where the clipped
// mesh pinches.
void remove_pinches(std::vector<Triangle>& tris, std::size_t nv) {
  for (int round = 0; round < 20; ++round) {
    std::vector<std::vector<int>> vt(nv);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int v : tris[t]) vt[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
    }
    std::vector<bool> drop(tris.size(), false);
    bool any = false;
    for (std::size_t v = 0; v < nv; ++v) {
      const auto& fan = vt[v];
      if (fan.size() < 2) continue;
      // Group incident triangles that share an edge through v.
      std::vector<int> group(fan.size(), -1);
      int groups = 0;
      for (std::size_t s = 0; s < fan.size(); ++s) {
        if (group[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        group[s] = groups;
        while (!stack.empty()) {
          const std::size_t cur = stack.back();
          stack.pop_back();
          const auto& tc = tris[static_cast<std::size_t>(fan[cur])];
          for (std::size_t o = 0; o < fan.size(); ++o) {
            if (group[o] >= 0) continue;
            const auto& to = tris[static_cast<std::size_t>(fan[o])];
            int shared = 0;
            for (int a : tc) {
              if (a == static_cast<int>(v)) continue;
              for (int b : to) shared += (a == b);
            }
            if (shared > 0) {
              group[o] = groups;
              stack.push_back(o);
            }
          }
        }
        ++groups;
      }
      if (groups < 2) continue;
      std::vector<int> size(static_cast<std::size_t>(groups), 0);
      for (int g : group) ++size[static_cast<std::size_t>(g)];
      const int keep = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
      for (std::size_t s = 0; s < fan.size(); ++s) {
        if (group[s] != keep) {
          drop[static_cast<std::size_t>(fan[s])] = true;
          any = true;
        }
      }
    }
    if (!any) return;
    std::vector<Triangle> next;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!drop[t]) next.push_back(tris[t]);
    }
    tris.swap(next);
  }
}


class FrontTracer {
 public:
  FrontTracer(const PreimageConstraint& c, double R, double h, const TraceOptions& opt)
      : c_(c), R_(R), h_(h), opt_(opt), hash_(1.6 * h), proj_tol_(std::min(1e-10, 0.01 * opt.tol)) {}

  void seed(const std::vector<Point>& seeds) {
    for (const auto& s : seeds) {
      const int sv = add_vertex(s);
      fixed_[static_cast<std::size_t>(sv)] = true;
      seed_ids_.push_back(sv);
    }
    for (int sv : seed_ids_) {
      const Point s = x_[static_cast<std::size_t>(sv)];
      const Matrix t = t_[static_cast<std::size_t>(sv)];
      std::vector<int> ring;
      for (int k = 0; k < 6; ++k) {
        const double th = k * M_PI / 3.0;
        ring.push_back(place(s, t * Eigen::Vector2d(std::cos(th), std::sin(th)), h_));
      }
      for (int k = 0; k < 6; ++k) tris_.push_back({sv, ring[static_cast<std::size_t>(k)], ring[static_cast<std::size_t>((k + 1) % 6)]});
      std::vector<int> ids;
      for (int v : ring) ids.push_back(new_node(v));
      for (int k = 0; k < 6; ++k) link(ids[static_cast<std::size_t>(k)], ids[static_cast<std::size_t>((k + 1) % 6)]);
      for (int id : ids) update(id);
    }
  }

  void run() {
    while (true) {
      const int p = select();
      if (p < 0) break;
      if (x_.size() > opt_.max_vertices) {
        throw NumericalError("trace_preimage: vertex budget exhausted near " + describe(x_[static_cast<std::size_t>(node(p).v)]));
      }
      step(p);
    }
  }

  SurfaceMesh finish(const std::vector<std::string>& labels) {
    improve();
    return clip(labels);
  }

 private:
  struct Node {
    int v = -1;
    int prev = -1;
    int next = -1;
    bool alive = false;
    double angle = 0.0;
  };

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Point& pos(int v) const { return x_[static_cast<std::size_t>(v)]; }

  int add_vertex(const Point& x) {
    const int id = static_cast<int>(x_.size());
    x_.push_back(x);
    t_.push_back(c_.tangent_frame(x));
    on_front_.push_back(0);
    fixed_.push_back(false);
    frozen_.push_back(x.norm() > R_ + 1.5 * h_);
    hash_.insert(id, x);
    return id;
  }

  // New vertex at distance ~len from `from` along `dir` (unit, tangent),
  // with local refinement of the step when the corrector misbehaves.
  int place(const Point& from, const Point& dir, double len) {
    for (double l = len; l >= len / 8.0; l *= 0.5) {
      auto y = c_.project(from + l * dir, proj_tol_, 0.5 * l);
      if (y) return add_vertex(*y);
    }
    throw NumericalError("trace_preimage: corrector diverged near " + describe(from));
  }

  int new_node(int v) {
    Node nd;
    nd.v = v;
    nd.alive = true;
    nodes_.push_back(nd);
    ++on_front_[static_cast<std::size_t>(v)];
    const int id = static_cast<int>(nodes_.size()) - 1;
    active_.push_back(id);
    vertex_nodes_[v].push_back(id);
    return id;
  }

  void kill(int id) {
    Node& nd = node(id);
    if (!nd.alive) return;
    nd.alive = false;
    --on_front_[static_cast<std::size_t>(nd.v)];
    auto& vn = vertex_nodes_[nd.v];
    vn.erase(std::remove(vn.begin(), vn.end(), id), vn.end());
  }

  void link(int a, int b) {
    node(a).next = b;
    node(b).prev = a;
  }

  Eigen::Vector2d local(int at_vertex, const Point& d) const {
    return t_[static_cast<std::size_t>(at_vertex)].transpose() * d;
  }

  void update(int id) {
    Node& nd = node(id);
    const int a = node(nd.prev).v;
    const int b = node(nd.next).v;
    const Point& p = pos(nd.v);
    nd.angle = ccw_angle(local(nd.v, pos(a) - p), local(nd.v, pos(b) - p));
    if (a == b) nd.angle = 0.0;
  }

  int select() {
    int best = -1;
    double best_angle = std::numeric_limits<double>::infinity();
    std::size_t w = 0;
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const int id = active_[i];
      if (!node(id).alive) continue;
      active_[w++] = id;
      if (frozen_[static_cast<std::size_t>(node(id).v)]) continue;
      if (node(id).angle < best_angle) {
        best_angle = node(id).angle;
        best = id;
      }
    }
    active_.resize(w);
    return best;
  }

  void add_triangle(int a, int b, int c) {
    if (a == b || b == c || a == c) return;
    tris_.push_back({a, b, c});
  }

  // Front vertex (on some other part of the front) facing p across the
  // unmeshed wedge, within `radius`.
  int find_collision(int pid, double radius) {
    const Node& P = node(pid);
    const int p = P.v, a = node(P.prev).v, b = node(P.next).v;
    const Eigen::Vector2d va = local(p, pos(a) - pos(p));
    const double margin = std::min(15.0 * kDeg, 0.25 * P.angle);
    int best = -1;
    double best_d = radius;
    hash_.visit_near(pos(p), [&](int c) {
      if (c == p || c == a || c == b || on_front_[static_cast<std::size_t>(c)] == 0) return;
      const double d = (pos(c) - pos(p)).norm();
      if (d >= best_d) return;
      const double th = ccw_angle(va, local(p, pos(c) - pos(p)));
      if (th <= margin || th >= P.angle - margin) return;
      for (int cid : vertex_nodes_[c]) {
        const Node& C = node(cid);
        const double thc = ccw_angle(local(c, pos(node(C.prev).v) - pos(c)), local(c, pos(p) - pos(c)));
        if (thc > 0.0 && thc < C.angle) {
          best = cid;
          best_d = d;
          break;
        }
      }
    });
    return best;
  }

  void bridge(int pid, int cid) {
    const int p_next = node(pid).next;
    const int c_next = node(cid).next;
    const int c2 = new_node(node(cid).v);
    const int p2 = new_node(node(pid).v);
    link(pid, c2);
    link(c2, c_next);
    link(cid, p2);
    link(p2, p_next);
    for (int id : {pid, c2, cid, p2}) update(id);
  }

  void close(int pid) {
    const Node P = node(pid);
    add_triangle(P.v, node(P.prev).v, node(P.next).v);
    link(P.prev, P.next);
    kill(pid);
    if (node(P.prev).next == P.prev) {
      kill(P.prev);
      return;
    }
    if (node(P.next).next == P.prev) {
      // Two nodes left: a degenerate sliver loop, nothing to fill.
      kill(P.prev);
      kill(P.next);
      return;
    }
    update(P.prev);
    update(P.next);
  }

  void step(int pid) {
    const Node P = node(pid);
    const int p = P.v, a = node(P.prev).v, b = node(P.next).v;

    if (node(node(P.next).next).next == pid && P.angle < M_PI) {
      add_triangle(p, a, b);
      const int n1 = P.next, n2 = node(P.next).next;
      kill(pid);
      kill(n1);
      kill(n2);
      return;
    }
    if (P.angle == 0.0) {  // a == b, folded front edge
      kill(pid);
      link(P.prev, P.next);
      return;
    }

    const int cid = find_collision(pid, 1.5 * h_);
    if (cid >= 0) {
      bridge(pid, cid);
      return;
    }

    const double ab = (pos(a) - pos(b)).norm();
    if (P.angle < 75.0 * kDeg || (P.angle < 100.0 * kDeg && ab < 1.6 * h_)) {
      close(pid);
      return;
    }

    const int nt = std::max(2, static_cast<int>(std::lround(P.angle / (60.0 * kDeg))));
    const double delta = P.angle / nt;
    const Eigen::Vector2d ua = local(p, pos(a) - pos(p)).normalized();
    const Eigen::Vector2d ub(-ua.y(), ua.x());
    const Matrix t = t_[static_cast<std::size_t>(p)];
    std::vector<int> fresh;
    for (int k = 1; k < nt; ++k) {
      const double th = k * delta;
      Point dir = t * (std::cos(th) * ua + std::sin(th) * ub);
      fresh.push_back(place(pos(p), dir.normalized(), h_));
    }
    int prev_v = a;
    for (int v : fresh) {
      add_triangle(p, prev_v, v);
      prev_v = v;
    }
    add_triangle(p, prev_v, b);

    int prev_id = P.prev;
    for (int v : fresh) {
      const int id = new_node(v);
      link(prev_id, id);
      prev_id = id;
    }
    link(prev_id, P.next);
    kill(pid);
    update(P.prev);
    update(P.next);
    for (int id = node(P.prev).next; id != P.next; id = node(id).next) update(id);
  }

  // --- post-processing -------------------------------------------------

  double tri_min_angle(int i, int j, int k) const {
    const Point* v[3] = {&pos(i), &pos(j), &pos(k)};
    double m = M_PI;
    for (int s = 0; s < 3; ++s) {
      const Point u = *v[(s + 1) % 3] - *v[s];
      const Point w = *v[(s + 2) % 3] - *v[s];
      m = std::min(m, std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0)));
    }
    return m;
  }

  double signed_area(int at, int i, int j, int k) const {
    const Eigen::Vector2d a = local(at, pos(i) - pos(at));
    const Eigen::Vector2d b = local(at, pos(j) - pos(at));
    const Eigen::Vector2d c = local(at, pos(k) - pos(at));
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  }

  double angle_at(int apex, int u, int w) const {
    const Point a = pos(u) - pos(apex);
    const Point b = pos(w) - pos(apex);
    return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
  }

  bool flip_pass() {
    std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      for (int s = 0; s < 3; ++s) edge_tris[edge_key(tris_[t][s], tris_[t][(s + 1) % 3])].push_back(static_cast<int>(t));
    }
    std::vector<bool> touched(tris_.size(), false);
    bool any = false;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      for (int s = 0; s < 3; ++s) {
        if (touched[t]) break;
        const int i = tris_[t][s], j = tris_[t][(s + 1) % 3], k = tris_[t][(s + 2) % 3];
        const auto& adj = edge_tris[edge_key(i, j)];
        if (adj.size() != 2) continue;
        const int u = adj[0] == static_cast<int>(t) ? adj[1] : adj[0];
        if (touched[static_cast<std::size_t>(u)]) continue;
        const auto& tu = tris_[static_cast<std::size_t>(u)];
        int l = -1;
        for (int r = 0; r < 3; ++r) {
          if (tu[r] == j && tu[(r + 1) % 3] == i) l = tu[(r + 2) % 3];
        }
        if (l < 0 || l == k) continue;
        if (angle_at(k, i, j) + angle_at(l, j, i) <= M_PI + 1e-9) continue;
        if (edge_tris.count(edge_key(k, l))) continue;
        // Quad i, l, j, k must stay convex in the local frame.
        if (signed_area(i, i, l, k) <= 0.0 || signed_area(j, l, j, k) <= 0.0) continue;
        const double before = std::min(tri_min_angle(i, j, k), tri_min_angle(j, i, l));
        const double after = std::min(tri_min_angle(i, l, k), tri_min_angle(l, j, k));
        if (after <= before) continue;
        tris_[t] = {i, l, k};
        tris_[static_cast<std::size_t>(u)] = {l, j, k};
        touched[t] = touched[static_cast<std::size_t>(u)] = true;
        any = true;
      }
    }
    return any;
  }

  void smooth_pass() {
    const std::size_t nv = x_.size();
    std::vector<std::vector<int>> vt(nv);
    std::vector<std::set<int>> nb(nv);
    std::unordered_map<std::uint64_t, int> use;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      for (int s = 0; s < 3; ++s) {
        const int a = tris_[t][s], b = tris_[t][(s + 1) % 3];
        vt[static_cast<std::size_t>(a)].push_back(static_cast<int>(t));
        nb[static_cast<std::size_t>(a)].insert(b);
        nb[static_cast<std::size_t>(b)].insert(a);
        ++use[edge_key(a, b)];
      }
    }
    std::vector<bool> border(nv, false);
    for (const auto& [key, n] : use) {
      if (n != 2) border[key >> 32] = border[key & 0xffffffffu] = true;
    }
    for (std::size_t v = 0; v < nv; ++v) {
      if (fixed_[v] || border[v] || on_front_[v] > 0 || nb[v].size() < 3) continue;
      Point centroid = Point::Zero(x_[v].size());
      for (int w : nb[v]) centroid += pos(w);
      centroid /= static_cast<double>(nb[v].size());
      const Matrix t = t_[v];
      const Point target = x_[v] + t * (t.transpose() * (centroid - x_[v]));
      auto y = c_.project(target, proj_tol_, h_);
      if (!y) continue;

      double before = M_PI;
      for (int tid : vt[v]) {
        const auto& tr = tris_[static_cast<std::size_t>(tid)];
        before = std::min(before, tri_min_angle(tr[0], tr[1], tr[2]));
      }
      const Point old = x_[v];
      const Matrix old_t = t_[v];
      x_[v] = *y;
      t_[v] = c_.tangent_frame(*y);
      double after = M_PI;
      bool flipped = false;
      for (int tid : vt[v]) {
        const auto& tr = tris_[static_cast<std::size_t>(tid)];
        after = std::min(after, tri_min_angle(tr[0], tr[1], tr[2]));
        if (signed_area(static_cast<int>(v), tr[0], tr[1], tr[2]) <= 0.0) flipped = true;
      }
      if (flipped || after < before) {
        x_[v] = old;
        t_[v] = old_t;
      }
    }
  }

  void improve() {
    for (int k = 0; k < 8 && flip_pass(); ++k) {
    }
    for (int s = 0; s < opt_.smoothing_passes; ++s) {
      smooth_pass();
      flip_pass();
    }
  }

  SurfaceMesh clip(const std::vector<std::string>& labels) {
    const std::size_t nv = x_.size();
    std::vector<bool> inside(nv);
    for (std::size_t v = 0; v < nv; ++v) inside[v] = x_[v].norm() <= R_;
    std::vector<Triangle> kept;
    for (const auto& t : tris_) {
      if (inside[static_cast<std::size_t>(t[0])] && inside[static_cast<std::size_t>(t[1])] && inside[static_cast<std::size_t>(t[2])]) {
        kept.push_back(t);
      }
    }
    remove_pinches(kept, nv);

    std::vector<int> remap(nv, -1);
    std::vector<Point> verts;
    for (const auto& t : kept) {
      for (int v : t) {
        if (remap[static_cast<std::size_t>(v)] < 0) {
          remap[static_cast<std::size_t>(v)] = static_cast<int>(verts.size());
          verts.push_back(x_[static_cast<std::size_t>(v)]);
        }
      }
    }
    for (auto& t : kept) {
      for (int& v : t) v = remap[static_cast<std::size_t>(v)];
    }
    MeshAttributes attrs;
    attrs.truncation_radius = R_;
    attrs.projector = make_preimage_projector(c_.map(), c_.plane(), opt_.tol);
    for (std::size_t i = 0; i < seed_ids_.size(); ++i) {
      const int v = remap[static_cast<std::size_t>(seed_ids_[i])];
      if (v < 0) throw PreconditionError("seed " + describe(x_[static_cast<std::size_t>(seed_ids_[i])]) + " lost by truncation at R");
      attrs.marked.push_back({labels[i], v});
    }
    return SurfaceMesh(c_.dimension(), std::move(verts), std::move(kept), std::move(attrs));
  }

  const PreimageConstraint& c_;
  double R_;
  double h_;
  TraceOptions opt_;
  SpatialHash hash_;
  double proj_tol_;

  std::vector<Point> x_;
  std::vector<Matrix> t_;
  std::vector<int> on_front_;
  std::vector<bool> fixed_;
  std::vector<bool> frozen_;
  std::vector<Triangle> tris_;
  std::vector<Node> nodes_;
  std::vector<int> active_;
  std::unordered_map<int, std::vector<int>> vertex_nodes_;
  std::vector<int> seed_ids_;
};

class PreimageProjector final : public SurfaceProjector {
 public:
  PreimageProjector(MapSpec map, Plane plane, double tol) : c_(std::move(map), std::move(plane)), tol_(tol) {}

  std::optional<Point> project(const Point& p, bool) const override {
    return c_.project(p, std::min(1e-10, 0.01 * tol_), std::numeric_limits<double>::infinity());
  }
  double residual(const Point& p) const override { return c_.residual_norm(p); }

 private:
  PreimageConstraint c_;
  double tol_;
};

}  // namespace

std::shared_ptr<const SurfaceProjector> make_preimage_projector(const MapSpec& map, const Plane& plane, double tol) {
  return std::make_shared<PreimageProjector>(map, plane, tol);
}

SurfaceMesh trace_preimage(const MapSpec& map, const Plane& plane, const std::vector<Point>& seeds, double R,
                           double h, const TraceOptions& options) {
  if (seeds.empty()) throw PreconditionError("trace_preimage needs at least one seed");
  if (!(R > 0.0)) throw PreconditionError("truncation radius must be positive");
  if (h <= 0.0) h = R / 64.0;
  const PreimageConstraint c(map, plane);
  for (const auto& s : seeds) {
    if (s.size() != map.dimension()) throw PreconditionError("seed dimension does not match map");
    const double r = c.residual_norm(s);
    if (!(r <= options.tol)) {
      throw PreconditionError("seed " + describe(s) + " has residual " + std::to_string(r) + " above tolerance");
    }
    if (s.norm() > R) throw PreconditionError("seed " + describe(s) + " lies outside the truncation ball");
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if ((seeds[i] - seeds[j]).norm() < 3.0 * h) {
        throw PreconditionError("seeds closer than 3h; decrease the edge length");
      }
    }
  }
  std::vector<std::string> labels = options.seed_labels;
  for (std::size_t i = labels.size(); i < seeds.size(); ++i) labels.push_back("p" + std::to_string(i + 1));

  FrontTracer tracer(c, R, h, options);
  tracer.seed(seeds);
  tracer.run();
  return tracer.finish(labels);
}

SurfaceMesh clip_to_ball(const SurfaceMesh& mesh, double R, std::vector<int>* remap) {
  std::vector<Triangle> kept;
  for (const auto& t : mesh.triangles()) {
    if (mesh.vertex(t[0]).norm() <= R && mesh.vertex(t[1]).norm() <= R && mesh.vertex(t[2]).norm() <= R) {
      kept.push_back(t);
    }
  }
  remove_pinches(kept, mesh.vertex_count());
  SurfaceMesh out = submesh(mesh, kept, remap);
  MeshAttributes attrs = out.attributes();
  attrs.truncation_radius = std::min(R, mesh.truncation_radius());
  return SurfaceMesh(out.dimension(), out.vertices(), out.triangles(), std::move(attrs));
}

SurfaceMesh refine(const SurfaceMesh& mesh, int factor) {
  if (factor < 2 || (factor & (factor - 1)) != 0) throw PreconditionError("refine factor must be a power of two");
  if (factor > 2) return refine(refine(mesh, 2), factor / 2);

  const auto& proj = mesh.projector();
  std::vector<Point> verts = mesh.vertices();
  std::unordered_map<std::uint64_t, int> mid;
  std::unordered_set<std::uint64_t> boundary_edges;
  for (const auto& loop : mesh.boundary_loops()) {
    for (std::size_t i = 0; i < loop.size(); ++i) boundary_edges.insert(edge_key(loop[i], loop[(i + 1) % loop.size()]));
  }
  auto midpoint = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    Point m = 0.5 * (mesh.vertex(a) + mesh.vertex(b));
    if (proj) {
      auto y = proj->project(m, boundary_edges.count(key) > 0);
      if (!y) throw NumericalError("refine: corrector failed near " + describe(m));
      m = *y;
    }
    const int id = static_cast<int>(verts.size());
    verts.push_back(m);
    mid.emplace(key, id);
    return id;
  };
  std::vector<Triangle> tris;
  tris.reserve(mesh.triangle_count() * 4);
  for (const auto& t : mesh.triangles()) {
    const int ab = midpoint(t[0], t[1]);
    const int bc = midpoint(t[1], t[2]);
    const int ca = midpoint(t[2], t[0]);
    tris.push_back({t[0], ab, ca});
    tris.push_back({ab, t[1], bc});
    tris.push_back({ca, bc, t[2]});
    tris.push_back({ab, bc, ca});
  }
  SurfaceMesh out(mesh.dimension(), std::move(verts), std::move(tris), mesh.attributes());

  const auto before = mesh_topology(mesh);
  const auto after = mesh_topology(out);
  if (before.component_count() != after.component_count() ||
      before.euler_characteristic() != after.euler_characteristic() ||
      before.boundary_loop_count() != after.boundary_loop_count()) {
    throw NumericalError("refine changed the mesh topology");
  }
  return out;
}

}  // namespace invertlab
