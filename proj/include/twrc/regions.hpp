#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "twrc/channel.hpp"

namespace twrc {

enum class Protocol { tdmh, mlnc, plnc };

struct DegenerateCapacityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Harmonic-mean effective end-to-end rates of the three protocols' time
// slots. All eight constants derive from one capacity set.
struct SigmaSet {
    double ab = 0.0;   // A->D->B forward pipeline
    double ba = 0.0;   // B->D->A backward pipeline
    double aa = 0.0;   // A->D->A loop (one-way forward bounded by broadcast to A)
    double bb = 0.0;   // B->D->B loop
    double abb = 0.0;  // symmetric MLNC corner when c_db <= c_da
    double aba = 0.0;  // PLNC corner, forward coordinate
    double bab = 0.0;  // PLNC corner, backward coordinate
    double min_sym = 0.0;  // symmetric MLNC pair rate (uses c_min broadcast)
};

inline SigmaSet sigma_set(const CapacitySet& caps) {
    if (!(caps.c_ad > 0.0) || !(caps.c_db > 0.0) || !(caps.c_bd > 0.0) || !(caps.c_da > 0.0))
        throw DegenerateCapacityError("sigma_set: all capacities must be > 0");
    SigmaSet s;
    s.ab = 1.0 / (1.0 / caps.c_ad + 1.0 / caps.c_db);
    s.ba = 1.0 / (1.0 / caps.c_bd + 1.0 / caps.c_da);
    s.aa = 1.0 / (1.0 / caps.c_ad + 1.0 / caps.c_da);
    s.bb = 1.0 / (1.0 / caps.c_bd + 1.0 / caps.c_db);
    s.abb = 1.0 / (1.0 / s.ab + 1.0 / caps.c_bd);
    s.aba = 1.0 / (1.0 / s.ab + caps.c_da / (caps.c_bd * caps.c_db));
    s.bab = 1.0 / (1.0 / s.ba + caps.c_db / (caps.c_ad * caps.c_da));
    s.min_sym = 1.0 / (1.0 / caps.c_ad + 1.0 / caps.c_bd + 1.0 / caps.c_min());
    return s;
}

struct RatePair {
    double r_ab = 0.0;
    double r_ba = 0.0;
};

// Convex polygon of achievable (forward, backward) end-to-end rate pairs.
// Vertices counterclockwise, starting at the origin, no duplicates.
struct RateRegion {
    std::vector<RatePair> vertices;

    double max_coord() const {
        double m = 0.0;
        for (const auto& v : vertices) m = std::max({m, v.r_ab, v.r_ba});
        return m;
    }
};

namespace detail {

inline double cross(const RatePair& o, const RatePair& a, const RatePair& b) {
    return (a.r_ab - o.r_ab) * (b.r_ba - o.r_ba) - (a.r_ba - o.r_ba) * (b.r_ab - o.r_ab);
}

// Monotone chain hull with strictly-convex turns (collinear points dropped).
// coord_tol deduplicates vertices; area_tol decides collinearity.
inline std::vector<RatePair> convex_hull(std::vector<RatePair> pts, double coord_tol,
                                         double area_tol) {
    std::sort(pts.begin(), pts.end(), [](const RatePair& a, const RatePair& b) {
        return a.r_ab < b.r_ab || (a.r_ab == b.r_ab && a.r_ba < b.r_ba);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [coord_tol](const RatePair& a, const RatePair& b) {
                              return std::abs(a.r_ab - b.r_ab) <= coord_tol &&
                                     std::abs(a.r_ba - b.r_ba) <= coord_tol;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<RatePair> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= area_tol) --k;
        h[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= area_tol) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

// Rotate so the origin (or the vertex closest to it) comes first.
inline void origin_first(std::vector<RatePair>& vs) {
    auto it = std::min_element(vs.begin(), vs.end(), [](const RatePair& a, const RatePair& b) {
        return a.r_ab * a.r_ab + a.r_ba * a.r_ba < b.r_ab * b.r_ab + b.r_ba * b.r_ba;
    });
    std::rotate(vs.begin(), it, vs.end());
}

}  // namespace detail

inline RateRegion make_region(std::vector<RatePair> candidate_vertices) {
    double m = 0.0;
    for (const auto& v : candidate_vertices) m = std::max({m, v.r_ab, v.r_ba});
    candidate_vertices.push_back({0.0, 0.0});
    const double scale = std::max(m, 1.0);
    auto hull = detail::convex_hull(std::move(candidate_vertices), 1e-12 * scale,
                                    1e-14 * scale * scale);
    detail::origin_first(hull);
    return RateRegion{std::move(hull)};
}

inline RateRegion region_tdmh(const SigmaSet& s) {
    return make_region({{s.ab, 0.0}, {0.0, s.ba}});
}

// The symmetric corner is the pair rate with broadcast at c_min; it equals
// (1/sigma_ab + 1/c_bd)^-1 when c_db <= c_da and mirrors otherwise.
inline RateRegion region_mlnc(const CapacitySet& caps) {
    const SigmaSet s = sigma_set(caps);
    if (caps.c_db <= caps.c_da)
        return make_region({{s.ab, 0.0}, {s.abb, s.abb}, {0.0, s.bb}});
    return make_region({{s.aa, 0.0}, {s.min_sym, s.min_sym}, {0.0, s.ba}});
}

inline RateRegion region_plnc(const CapacitySet& caps) {
    const SigmaSet s = sigma_set(caps);
    return make_region({{s.ab, 0.0}, {s.aba, s.bab}, {0.0, s.ba}});
}

inline RateRegion hull_tdmh_mlnc(const RateRegion& r1, const RateRegion& r2) {
    std::vector<RatePair> pts = r1.vertices;
    pts.insert(pts.end(), r2.vertices.begin(), r2.vertices.end());
    return make_region(std::move(pts));
}

// Half-plane containment test; tol is absolute on rate/max_coord coordinates.
inline bool contains(const RateRegion& region, RatePair p, double tol = 1e-9) {
    const auto& vs = region.vertices;
    if (vs.empty()) return false;
    const double scale = std::max(region.max_coord(), 1e-300);
    const double slack = tol * scale * scale;
    if (vs.size() == 1)
        return std::abs(p.r_ab - vs[0].r_ab) <= tol * scale &&
               std::abs(p.r_ba - vs[0].r_ba) <= tol * scale;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const auto& a = vs[i];
        const auto& b = vs[(i + 1) % vs.size()];
        if (detail::cross(a, b, p) < -slack) return false;
    }
    return true;
}

// Farthest point of the region along the ray r_ba = mu * r_ab.
inline RatePair boundary_on_ray(const RateRegion& region, double mu) {
    if (mu < 0.0) throw std::domain_error("boundary_on_ray: mu must be >= 0");
    const auto& vs = region.vertices;
    if (vs.size() < 2) return {0.0, 0.0};
    const double norm = std::hypot(1.0, mu);
    const double dx = 1.0 / norm;
    const double dy = mu / norm;
    double best_t = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const auto& a = vs[i];
        const auto& b = vs[(i + 1) % vs.size()];
        // Solve origin + t*d = a + u*(b-a).
        const double ex = b.r_ab - a.r_ab;
        const double ey = b.r_ba - a.r_ba;
        const double det = dx * (-ey) - dy * (-ex);
        if (std::abs(det) < 1e-300) continue;
        const double t = (a.r_ab * (-ey) - a.r_ba * (-ex)) / det;
        const double u = (dx * a.r_ba - dy * a.r_ab) / det;
        if (u >= -1e-12 && u <= 1.0 + 1e-12 && t > best_t) best_t = t;
    }
    return {best_t * dx, best_t * dy};
}

// Distance from a point to a convex polygon (0 inside).
inline double point_polygon_distance(const RateRegion& region, RatePair p) {
    if (contains(region, p, 0.0)) return 0.0;
    const auto& vs = region.vertices;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const auto& a = vs[i];
        const auto& b = vs[(i + 1) % vs.size()];
        const double ex = b.r_ab - a.r_ab;
        const double ey = b.r_ba - a.r_ba;
        const double len2 = ex * ex + ey * ey;
        double u = 0.0;
        if (len2 > 0.0)
            u = std::clamp(((p.r_ab - a.r_ab) * ex + (p.r_ba - a.r_ba) * ey) / len2, 0.0, 1.0);
        const double qx = a.r_ab + u * ex - p.r_ab;
        const double qy = a.r_ba + u * ey - p.r_ba;
        best = std::min(best, std::hypot(qx, qy));
    }
    return best;
}

// Hausdorff distance between two convex polygons. For convex sets the
// directed distance is attained at a vertex of the first polygon.
inline double polygon_hausdorff(const RateRegion& r1, const RateRegion& r2) {
    double d = 0.0;
    for (const auto& v : r1.vertices) d = std::max(d, point_polygon_distance(r2, v));
    for (const auto& v : r2.vertices) d = std::max(d, point_polygon_distance(r1, v));
    return d;
}

}  // namespace twrc
