#include "wildannot/convex_hull.hpp"

#include <algorithm>
#include <limits>

#include "wildannot/predicates.hpp"

namespace wildannot {
namespace {

constexpr std::int32_t kNone = -1;

struct Face {
  std::array<PointIndex, 3> v{};
  std::array<std::int32_t, 3> nb{kNone, kNone, kNone};  // nb[k] shares edge v[k] -> v[k+1]
  Eigen::Vector3d cross = Eigen::Vector3d::Zero();  // (v1 - v0) x (v2 - v0), unnormalized
  Eigen::Vector3d permanent = Eigen::Vector3d::Zero();
  double inv_norm = 0.0;
  std::vector<PointIndex> outside;
  std::vector<PointIndex> coplanar;
  PointIndex furthest = 0;
  double furthest_distance = -std::numeric_limits<double>::infinity();
  bool alive = false;
};

class QuickHull {
 public:
  QuickHull(std::span<const Eigen::Vector3d> pts, double tolerance)
      : pts_(pts), tol_(tolerance) {}

  ConvexHull run();

 private:
  const Eigen::Vector3d& P(PointIndex i) const { return pts_[i]; }

  struct Side {
    double distance;  // float signed distance to the face plane
    double det;
    double bound;     // |det - exact| <= bound
  };
  Side side(const Face& f, PointIndex p) const {
    const Eigen::Vector3d e = P(p) - P(f.v[0]);
    const double det = f.cross.dot(e);
    return {det * f.inv_norm, det, kFilter * f.permanent.dot(e.cwiseAbs())};
  }
  int sign(const Face& f, PointIndex p, const Side& s) const {
    if (s.det > s.bound) return 1;
    if (-s.det > s.bound) return -1;
    return orient3d(P(f.v[0]), P(f.v[1]), P(f.v[2]), P(p));
  }
  bool above(const Face& f, PointIndex p) const { return sign(f, p, side(f, p)) > 0; }

  // Forward error bound of the float determinant relative to the permanent,
  // with a factor of two in hand.
  static constexpr double kFilter = 8.0 * std::numeric_limits<double>::epsilon();

  std::int32_t new_face(PointIndex a, PointIndex b, PointIndex c);
  void release_face(std::int32_t id);
  bool initial_simplex(std::array<PointIndex, 4>& simplex) const;
  void add_outside(std::int32_t id, PointIndex p, double d);
  // Assigns p to the best face in `candidates`: outside set if strictly above
  // one, coplanar set if within tolerance, otherwise drops it.
  void assign(PointIndex p, std::span<const std::int32_t> candidates, bool may_be_outside);
  void add_point(std::int32_t start);

  std::span<const Eigen::Vector3d> pts_;
  double tol_;
  std::vector<Face> faces_;
  std::vector<std::int32_t> free_;
  std::vector<std::int32_t> pending_;

  // Per-iteration scratch.
  std::vector<std::uint32_t> visit_epoch_;
  std::vector<std::uint8_t> visible_flag_;
  std::uint32_t epoch_ = 0;
  std::vector<std::int32_t> start_of_;  // horizon vertex -> new face starting there
  std::vector<std::int32_t> end_of_;    // horizon vertex -> new face ending there
  std::vector<std::int32_t> visible_;
  std::vector<std::pair<std::int32_t, int>> horizon_;
  std::vector<std::int32_t> created_;
  std::vector<PointIndex> dropped_vertices_;
  std::vector<PointIndex> moved_outside_;
  std::vector<PointIndex> moved_coplanar_;
};

std::int32_t QuickHull::new_face(PointIndex a, PointIndex b, PointIndex c) {
  std::int32_t id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<std::int32_t>(faces_.size());
    faces_.emplace_back();
    visit_epoch_.push_back(0);
    visible_flag_.push_back(0);
  }
  Face& f = faces_[static_cast<std::size_t>(id)];
  f.v = {a, b, c};
  f.nb = {kNone, kNone, kNone};
  f.outside.clear();
  f.coplanar.clear();
  f.furthest_distance = -std::numeric_limits<double>::infinity();
  f.alive = true;
  const Eigen::Vector3d e1 = P(b) - P(a), e2 = P(c) - P(a);
  f.cross = e1.cross(e2);
  f.permanent = Eigen::Vector3d(std::abs(e1.y() * e2.z()) + std::abs(e1.z() * e2.y()),
                                std::abs(e1.z() * e2.x()) + std::abs(e1.x() * e2.z()),
                                std::abs(e1.x() * e2.y()) + std::abs(e1.y() * e2.x()));
  const double len = f.cross.norm();
  f.inv_norm = len > 0.0 ? 1.0 / len : 0.0;
  return id;
}

void QuickHull::release_face(std::int32_t id) {
  Face& f = faces_[static_cast<std::size_t>(id)];
  f.alive = false;
  f.outside.clear();
  f.coplanar.clear();
  free_.push_back(id);
}

bool QuickHull::initial_simplex(std::array<PointIndex, 4>& s) const {
  const std::size_t n = pts_.size();
  std::array<PointIndex, 6> extremes{};
  for (int axis = 0; axis < 3; ++axis) {
    PointIndex lo = 0, hi = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (P(static_cast<PointIndex>(i))[axis] < P(lo)[axis]) lo = static_cast<PointIndex>(i);
      if (P(static_cast<PointIndex>(i))[axis] > P(hi)[axis]) hi = static_cast<PointIndex>(i);
    }
    extremes[static_cast<std::size_t>(2 * axis)] = lo;
    extremes[static_cast<std::size_t>(2 * axis + 1)] = hi;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      const double d = (P(extremes[i]) - P(extremes[j])).squaredNorm();
      if (d > best) {
        best = d;
        s[0] = extremes[i];
        s[1] = extremes[j];
      }
    }
  }
  if (best == 0.0) return false;

  const Eigen::Vector3d dir = (P(s[1]) - P(s[0])).normalized();
  best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d r = P(static_cast<PointIndex>(i)) - P(s[0]);
    const double d = (r - r.dot(dir) * dir).squaredNorm();
    if (d > best) {
      best = d;
      s[2] = static_cast<PointIndex>(i);
    }
  }
  if (best == 0.0) return false;

  const Eigen::Vector3d normal = (P(s[1]) - P(s[0])).cross(P(s[2]) - P(s[0])).normalized();
  best = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(normal.dot(P(static_cast<PointIndex>(i)) - P(s[0])));
    if (d > best && orient3d(P(s[0]), P(s[1]), P(s[2]), P(static_cast<PointIndex>(i))) != 0) {
      best = d;
      s[3] = static_cast<PointIndex>(i);
      found = true;
    }
  }
  if (!found) {
    // Float distances all rounded to zero; fall back to any exactly
    // non-coplanar point.
    for (std::size_t i = 0; i < n && !found; ++i) {
      if (orient3d(P(s[0]), P(s[1]), P(s[2]), P(static_cast<PointIndex>(i))) != 0) {
        s[3] = static_cast<PointIndex>(i);
        found = true;
      }
    }
  }
  return found;
}

void QuickHull::add_outside(std::int32_t id, PointIndex p, double d) {
  Face& f = faces_[static_cast<std::size_t>(id)];
  if (f.outside.empty()) pending_.push_back(id);
  f.outside.push_back(p);
  if (d > f.furthest_distance) {
    f.furthest_distance = d;
    f.furthest = p;
  }
}

void QuickHull::assign(PointIndex p, std::span<const std::int32_t> candidates, bool may_be_outside) {
  std::int32_t best_above = kNone;
  double best_above_d = -std::numeric_limits<double>::infinity();
  std::int32_t nearest = kNone;
  double nearest_d = -std::numeric_limits<double>::infinity();
  for (std::int32_t id : candidates) {
    const Face& f = faces_[static_cast<std::size_t>(id)];
    const Side s = side(f, p);
    if (s.distance > nearest_d) {
      nearest_d = s.distance;
      nearest = id;
    }
    if (may_be_outside && s.distance > best_above_d && sign(f, p, s) > 0) {
      best_above_d = s.distance;
      best_above = id;
    }
  }
  if (best_above != kNone) {
    add_outside(best_above, p, best_above_d);
  } else if (nearest != kNone && nearest_d >= -tol_) {
    faces_[static_cast<std::size_t>(nearest)].coplanar.push_back(p);
  }
}

void QuickHull::add_point(std::int32_t start) {
  const PointIndex eye = faces_[static_cast<std::size_t>(start)].furthest;
  ++epoch_;

  auto& visible = visible_;
  auto& horizon = horizon_;
  visible.assign(1, start);
  horizon.clear();
  visit_epoch_[static_cast<std::size_t>(start)] = epoch_;
  visible_flag_[static_cast<std::size_t>(start)] = 1;
  for (std::size_t at = 0; at < visible.size(); ++at) {
    const std::int32_t g = visible[at];
    for (int k = 0; k < 3; ++k) {
      const std::int32_t h = faces_[static_cast<std::size_t>(g)].nb[static_cast<std::size_t>(k)];
      const auto hs = static_cast<std::size_t>(h);
      if (visit_epoch_[hs] != epoch_) {
        visit_epoch_[hs] = epoch_;
        visible_flag_[hs] = above(faces_[hs], eye) ? 1 : 0;
        if (visible_flag_[hs]) visible.push_back(h);
      }
      if (!visible_flag_[hs]) horizon.emplace_back(g, k);
    }
  }

  // Cone of new faces from the horizon to the eye point.
  auto& created = created_;
  created.clear();
  for (const auto& [g, k] : horizon) {
    const Face& gf = faces_[static_cast<std::size_t>(g)];
    const PointIndex u = gf.v[static_cast<std::size_t>(k)];
    const PointIndex w = gf.v[static_cast<std::size_t>((k + 1) % 3)];
    const std::int32_t across = gf.nb[static_cast<std::size_t>(k)];
    const std::int32_t nf = new_face(u, w, eye);
    Face& nface = faces_[static_cast<std::size_t>(nf)];
    nface.nb[0] = across;
    Face& af = faces_[static_cast<std::size_t>(across)];
    for (int j = 0; j < 3; ++j) {
      if (af.v[static_cast<std::size_t>(j)] == w && af.v[static_cast<std::size_t>((j + 1) % 3)] == u) {
        af.nb[static_cast<std::size_t>(j)] = nf;
      }
    }
    start_of_[u] = nf;
    end_of_[w] = nf;
    created.push_back(nf);
  }
  for (std::int32_t nf : created) {
    Face& f = faces_[static_cast<std::size_t>(nf)];
    f.nb[1] = start_of_[f.v[1]];  // edge w -> eye
    f.nb[2] = end_of_[f.v[0]];    // edge eye -> u
  }

  // Horizon vertices stay on the hull; other vertices of the removed faces
  // (besides the eye) may now be interior and are re-tested as coplanar.
  auto& dropped_vertices = dropped_vertices_;
  dropped_vertices.clear();
  for (std::int32_t g : visible) {
    for (PointIndex v : faces_[static_cast<std::size_t>(g)].v) {
      if (start_of_[v] == kNone && v != eye) dropped_vertices.push_back(v);
    }
  }
  std::sort(dropped_vertices.begin(), dropped_vertices.end());
  dropped_vertices.erase(std::unique(dropped_vertices.begin(), dropped_vertices.end()),
                         dropped_vertices.end());

  auto& moved_outside = moved_outside_;
  auto& moved_coplanar = moved_coplanar_;
  moved_outside.clear();
  moved_coplanar.clear();
  for (std::int32_t g : visible) {
    Face& f = faces_[static_cast<std::size_t>(g)];
    for (PointIndex p : f.outside) {
      if (p != eye) moved_outside.push_back(p);
    }
    moved_coplanar.insert(moved_coplanar.end(), f.coplanar.begin(), f.coplanar.end());
  }
  for (std::int32_t g : visible) release_face(g);

  for (PointIndex p : moved_outside) assign(p, created, true);
  for (PointIndex p : moved_coplanar) assign(p, created, false);
  for (PointIndex p : dropped_vertices) assign(p, created, false);

  for (std::int32_t nf : created) {
    const Face& f = faces_[static_cast<std::size_t>(nf)];
    start_of_[f.v[0]] = kNone;
    end_of_[f.v[1]] = kNone;
  }
}

ConvexHull QuickHull::run() {
  ConvexHull out;
  const std::size_t n = pts_.size();
  out.on_hull.assign(n, 0);
  std::array<PointIndex, 4> s{};
  if (n < 4 || !initial_simplex(s)) {
    out.degenerate = true;
    return out;
  }
  start_of_.assign(n, kNone);
  end_of_.assign(n, kNone);

  if (orient3d(P(s[0]), P(s[1]), P(s[2]), P(s[3])) > 0) std::swap(s[1], s[2]);
  // Now s[3] lies beneath (s0, s1, s2); each face keeps the opposite vertex beneath.
  const std::array<std::array<PointIndex, 3>, 4> tets = {{{s[0], s[1], s[2]},
                                                          {s[0], s[3], s[1]},
                                                          {s[1], s[3], s[2]},
                                                          {s[2], s[3], s[0]}}};
  std::array<std::int32_t, 4> ids{};
  for (std::size_t i = 0; i < 4; ++i) ids[i] = new_face(tets[i][0], tets[i][1], tets[i][2]);
  for (std::size_t i = 0; i < 4; ++i) {
    Face& f = faces_[static_cast<std::size_t>(ids[i])];
    for (std::size_t k = 0; k < 3; ++k) {
      const PointIndex a = f.v[k], b = f.v[(k + 1) % 3];
      for (std::size_t j = 0; j < 4; ++j) {
        if (j == i) continue;
        const Face& g = faces_[static_cast<std::size_t>(ids[j])];
        for (std::size_t m = 0; m < 3; ++m) {
          if (g.v[m] == b && g.v[(m + 1) % 3] == a) f.nb[k] = ids[j];
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto p = static_cast<PointIndex>(i);
    if (p == s[0] || p == s[1] || p == s[2] || p == s[3]) continue;
    assign(p, ids, true);
  }

  while (!pending_.empty()) {
    const std::int32_t id = pending_.back();
    pending_.pop_back();
    const Face& f = faces_[static_cast<std::size_t>(id)];
    if (!f.alive || f.outside.empty()) continue;
    add_point(id);
  }

  for (const Face& f : faces_) {
    if (!f.alive) continue;
    out.facets.push_back(f.v);
    for (PointIndex v : f.v) out.on_hull[v] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.on_hull[i]) out.vertices.push_back(static_cast<PointIndex>(i));
  }
  for (const Face& f : faces_) {
    if (!f.alive) continue;
    for (PointIndex p : f.coplanar) out.on_hull[p] = 1;
  }
  return out;
}

}  // namespace

ConvexHull convex_hull(std::span<const Eigen::Vector3d> points, double coplanar_tolerance) {
  return QuickHull(points, coplanar_tolerance).run();
}

}  // namespace wildannot
