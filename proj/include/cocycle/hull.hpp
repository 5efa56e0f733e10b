#pragma once

// Extreme points of small point clouds, computed in the cloud's own affine
// hull so that degenerate (e.g. determinant-constrained) clouds work.

#include <cocycle/matrix_core.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace cocycle {

/// Affine hull of a point cloud: center plus an orthonormal basis of the
/// directions along which the cloud has extent.
struct AffineFrame {
    Vector center;
    Matrix basis;  // d x r
    Index dimension() const { return basis.cols(); }

    Vector coordinates(const Vector& x) const { return basis.transpose() * (x - center); }
    /// Distance from x to the affine hull.
    double offset(const Vector& x) const {
        const Vector rel = x - center;
        return (rel - basis * (basis.transpose() * rel)).norm();
    }
};

inline AffineFrame affine_frame(const std::vector<Vector>& points, double rel_tol = 1e-9) {
    const Index d = points.front().size();
    AffineFrame frame;
    frame.center = Vector::Zero(d);
    for (const Vector& p : points) {
        frame.center += p;
    }
    frame.center /= static_cast<double>(points.size());
    Matrix centered(d, static_cast<Index>(points.size()));
    double scale = 1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        centered.col(static_cast<Index>(i)) = points[i] - frame.center;
        scale = std::max(scale, points[i].cwiseAbs().maxCoeff());
    }
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullU);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s[rank] > rel_tol * scale) {
        ++rank;
    }
    frame.basis = svd.matrixU().leftCols(rank);
    return frame;
}

namespace detail {

inline double cross2(const Vector& o, const Vector& a, const Vector& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Andrew's monotone chain; returns indices of the strict extreme points in
/// counter-clockwise order.
inline std::vector<std::size_t> hull_2d(const std::vector<Vector>& pts, double eps) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pts[a][0] < pts[b][0] || (pts[a][0] == pts[b][0] && pts[a][1] < pts[b][1]);
    });
    if (order.size() < 3) {
        return order;
    }
    std::vector<std::size_t> h(2 * order.size());
    std::size_t m = 0;
    for (std::size_t i : order) {
        while (m >= 2 && cross2(pts[h[m - 2]], pts[h[m - 1]], pts[i]) <= eps) {
            --m;
        }
        h[m++] = i;
    }
    const std::size_t lower = m + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
        while (m >= lower && cross2(pts[h[m - 2]], pts[h[m - 1]], pts[*it]) <= eps) {
            --m;
        }
        h[m++] = *it;
    }
    h.resize(m - 1);
    return h;
}

/// Extreme points in three dimensions by facet enumeration: a triple spans a
/// facet when every point lies on one side of its plane; the extreme points
/// of each facet's coplanar set are hull vertices.
inline std::vector<std::size_t> hull_3d(const std::vector<Vector>& pts, double eps) {
    const std::size_t m = pts.size();
    std::vector<bool> extreme(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t l = j + 1; l < m; ++l) {
                const Eigen::Vector3d a = pts[i].head<3>();
                const Eigen::Vector3d n = (pts[j].head<3>() - a).cross(pts[l].head<3>() - a);
                if (n.norm() <= eps) {
                    continue;
                }
                const Eigen::Vector3d u = n.normalized();
                bool above = false;
                bool below = false;
                std::vector<std::size_t> coplanar;
                for (std::size_t p = 0; p < m && !(above && below); ++p) {
                    const double side = u.dot(pts[p].head<3>() - a);
                    if (side > eps) {
                        above = true;
                    } else if (side < -eps) {
                        below = true;
                    } else {
                        coplanar.push_back(p);
                    }
                }
                if (above && below) {
                    continue;
                }
                // 2-D hull of the facet in an in-plane frame.
                const Eigen::Vector3d e1 = (pts[j].head<3>() - a).normalized();
                const Eigen::Vector3d e2 = u.cross(e1);
                std::vector<Vector> flat;
                for (std::size_t p : coplanar) {
                    const Eigen::Vector3d rel = pts[p].head<3>() - a;
                    Vector v(2);
                    v << rel.dot(e1), rel.dot(e2);
                    flat.push_back(v);
                }
                for (std::size_t idx : hull_2d(flat, eps)) {
                    extreme[coplanar[idx]] = true;
                }
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < m; ++p) {
        if (extreme[p]) {
            out.push_back(p);
        }
    }
    return out;
}

} // namespace detail

/// Largest affine dimension for which exact extreme points are computed.
inline constexpr Index max_exact_hull_dimension = 3;

/// Extreme points of the cloud (after merging duplicates within `eps`). For
/// affine dimension above three the deduplicated cloud is returned as is.
inline std::vector<Vector> hull_vertices(const std::vector<Vector>& cloud, double eps = 1e-10) {
    std::vector<Vector> unique;
    for (const Vector& p : cloud) {
        const bool seen = std::any_of(unique.begin(), unique.end(),
                                      [&](const Vector& u) { return (u - p).cwiseAbs().maxCoeff() <= eps; });
        if (!seen) {
            unique.push_back(p);
        }
    }
    if (unique.size() <= 1) {
        return unique;
    }
    const AffineFrame frame = affine_frame(unique);
    const Index r = frame.dimension();
    if (r > max_exact_hull_dimension) {
        return unique;
    }
    std::vector<Vector> local;
    local.reserve(unique.size());
    for (const Vector& p : unique) {
        local.push_back(frame.coordinates(p));
    }
    std::vector<std::size_t> picked;
    if (r == 0) {
        picked = {0};
    } else if (r == 1) {
        std::size_t lo = 0;
        std::size_t hi = 0;
        for (std::size_t i = 1; i < local.size(); ++i) {
            if (local[i][0] < local[lo][0]) {
                lo = i;
            }
            if (local[i][0] > local[hi][0]) {
                hi = i;
            }
        }
        picked = {lo, hi};
    } else if (r == 2) {
        picked = detail::hull_2d(local, eps);
    } else {
        picked = detail::hull_3d(local, eps);
    }
    std::sort(picked.begin(), picked.end());
    std::vector<Vector> out;
    for (std::size_t i : picked) {
        out.push_back(unique[i]);
    }
    return out;
}

} // namespace cocycle
