// Interior cell-centered grids with a facet-distance mask, the facet
// quadrature carrying the d(sigma) normalization (Euclidean measure divided
// by |a_k|_2, so that dh_k ^ dsigma = dmu), and exact moment integration of
// polynomial integrands over simplex decompositions. Supports n <= 3.
#ifndef ABREU_FORGE_QUADRATURE_HPP
#define ABREU_FORGE_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "polytope.hpp"

namespace abreu_forge {

// ---------------------------------------------------------------------------
// Interior grid
// ---------------------------------------------------------------------------

class Grid {
public:
    // Cell-centered lattice over the bounding box, resolution cells per axis;
    // a point survives iff delta_k >= h/2 for every facet (h = max spacing).
    Grid(const Polytope& P, int resolution) : poly_(&P), res_(resolution) {
        if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
        const int n = P.dim();
        P.bounding_box(lo_, hi_);
        h_ = Vec(n);
        for (int j = 0; j < n; ++j) h_[j] = (hi_[j] - lo_[j]) / resolution;
        h_ref_ = h_.maxCoeff();
        cell_weight_ = 1.0;
        for (int j = 0; j < n; ++j) cell_weight_ *= h_[j];

        std::size_t total = 1;
        for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(resolution);
        full_to_masked_.assign(total, -1);
        std::vector<int> idx(n, 0);
        // mask comparison softened so centers landing exactly on h/2 are kept
        const double thresh = 0.5 * h_ref_ * (1.0 - 1e-12);
        for (std::size_t lin = 0; lin < total; ++lin) {
            Vec xi(n);
            std::size_t rem = lin;
            for (int j = n - 1; j >= 0; --j) {
                idx[j] = static_cast<int>(rem % resolution);
                rem /= resolution;
            }
            for (int j = 0; j < n; ++j) xi[j] = lo_[j] + (idx[j] + 0.5) * h_[j];
            bool keep = true;
            for (int k = 0; k < P.facet_count() && keep; ++k)
                if (P.delta(k, xi) < thresh) keep = false;
            if (!keep) continue;
            full_to_masked_[lin] = static_cast<int>(points_.size());
            points_.push_back(xi);
            multi_index_.push_back(idx);
        }
        if (points_.empty())
            throw std::invalid_argument("resolution too small to produce interior points");
    }

    const Polytope& polytope() const { return *poly_; }
    int resolution() const { return res_; }
    int dim() const { return poly_->dim(); }
    std::size_t size() const { return points_.size(); }
    const std::vector<Vec>& points() const { return points_; }
    const Vec& point(std::size_t i) const { return points_[i]; }
    const Vec& spacing() const { return h_; }
    double spacing_ref() const { return h_ref_; }
    double cell_weight() const { return cell_weight_; }

    int lookup(const std::vector<int>& idx) const {
        std::size_t lin = 0;
        for (int j = 0; j < dim(); ++j) {
            if (idx[j] < 0 || idx[j] >= res_) return -1;
            lin = lin * static_cast<std::size_t>(res_) + static_cast<std::size_t>(idx[j]);
        }
        return full_to_masked_[lin];
    }

    // masked neighbor at multi-index +- step along axis; -1 when absent
    int neighbor(std::size_t i, int axis, int step) const {
        std::vector<int> idx = multi_index_[i];
        idx[axis] += step;
        return lookup(idx);
    }

    int diag_neighbor(std::size_t i, int axis_a, int step_a, int axis_b, int step_b) const {
        std::vector<int> idx = multi_index_[i];
        idx[axis_a] += step_a;
        idx[axis_b] += step_b;
        return lookup(idx);
    }

    // all +-1 axis neighbors and +-1/+-1 cross neighbors present
    bool has_full_stencil(std::size_t i) const {
        const int n = dim();
        for (int a = 0; a < n; ++a)
            for (int s : {-1, 1})
                if (neighbor(i, a, s) < 0) return false;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int sa : {-1, 1})
                    for (int sb : {-1, 1})
                        if (diag_neighbor(i, a, sa, b, sb) < 0) return false;
        return true;
    }

    // deterministic pairwise-tree quadrature of pointwise values
    double integrate(const std::vector<double>& values) const {
        if (values.size() != points_.size())
            throw std::invalid_argument("field/grid size mismatch");
        return cell_weight_ * pairwise_sum(values);
    }

    template <class F>
    double integrate_fn(F&& f) const {
        std::vector<double> vals(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) vals[i] = f(points_[i]);
        return integrate(vals);
    }

private:
    const Polytope* poly_;
    int res_;
    Vec lo_, hi_, h_;
    double h_ref_ = 0.0;
    double cell_weight_ = 0.0;
    std::vector<Vec> points_;
    std::vector<std::vector<int>> multi_index_;
    std::vector<int> full_to_masked_;
};

// ---------------------------------------------------------------------------
// Boundary quadrature
// ---------------------------------------------------------------------------

struct FacetQuadrature {
    int facet = -1;
    std::vector<Vec> points;
    std::vector<double> weights; // d(sigma) weights
    double total_weight = 0.0;
};

struct BoundaryQuadrature {
    std::vector<FacetQuadrature> facets;

    template <class F>
    double integrate_fn(F&& f) const {
        std::vector<double> terms;
        for (const auto& fq : facets)
            for (std::size_t i = 0; i < fq.points.size(); ++i)
                terms.push_back(fq.weights[i] * f(fq.points[i]));
        return pairwise_sum(terms);
    }
};

namespace detail {

// order polygon vertices angularly around their mean (exact enough in double
// for Delzant vertices)
inline std::vector<int> order_polygon(const std::vector<Vec>& pts, const Vec& u, const Vec& v) {
    Vec mean = Vec::Zero(pts[0].size());
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    std::vector<std::pair<double, int>> ang;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        Vec d = pts[i] - mean;
        ang.emplace_back(std::atan2(d.dot(v), d.dot(u)), i);
    }
    std::sort(ang.begin(), ang.end());
    std::vector<int> order;
    for (auto& a : ang) order.push_back(a.second);
    return order;
}

// orthonormal in-plane basis for a facet with conormal a (n = 3)
inline std::pair<Vec, Vec> facet_plane_basis(const Vec& a) {
    Vec t = Vec::Zero(3);
    int smallest = 0;
    for (int j = 1; j < 3; ++j)
        if (std::abs(a[j]) < std::abs(a[smallest])) smallest = j;
    t[smallest] = 1.0;
    Vec an = a.normalized();
    Vec u = (t - t.dot(an) * an).normalized();
    Vec v(3);
    v[0] = an[1] * u[2] - an[2] * u[1];
    v[1] = an[2] * u[0] - an[0] * u[2];
    v[2] = an[0] * u[1] - an[1] * u[0];
    return {u, v};
}

inline double triangle_area(const Vec& a, const Vec& b, const Vec& c) {
    Vec ab = b - a, ac = c - a;
    if (a.size() == 2) return 0.5 * std::abs(ab[0] * ac[1] - ab[1] * ac[0]);
    Vec cr(3);
    cr[0] = ab[1] * ac[2] - ab[2] * ac[1];
    cr[1] = ab[2] * ac[0] - ab[0] * ac[2];
    cr[2] = ab[0] * ac[1] - ab[1] * ac[0];
    return 0.5 * cr.norm();
}

// uniform refinement of a triangle into m^2 children, centroid rule
template <class Emit>
void subdivide_triangle(const Vec& A, const Vec& B, const Vec& C, int m, Emit&& emit) {
    const double area = triangle_area(A, B, C) / (m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m - i; ++j) {
            Vec up = A + ((i + 1.0 / 3.0) * (B - A) + (j + 1.0 / 3.0) * (C - A)) / m;
            emit(up, area);
            if (j < m - 1 - i) {
                Vec dn = A + ((i + 2.0 / 3.0) * (B - A) + (j + 2.0 / 3.0) * (C - A)) / m;
                emit(dn, area);
            }
        }
}

} // namespace detail

// Midpoint-type facet rule: resolution cells per facet edge dimension.
inline BoundaryQuadrature boundary_quadrature(const Polytope& P, int resolution) {
    if (resolution < 1) throw std::invalid_argument("boundary resolution must be >= 1");
    const int n = P.dim();
    if (n > 3) throw std::invalid_argument("boundary quadrature supports n <= 3");
    BoundaryQuadrature bq;
    for (int k = 0; k < P.facet_count(); ++k) {
        FacetQuadrature fq;
        fq.facet = k;
        const double anorm = P.normal_d(k).norm();
        auto verts = P.facet_vertices(k);
        if (n == 1) {
            // facet is the vertex itself; d(sigma) mass 1/|a|
            fq.points.push_back(P.vertices()[verts.at(0)].point);
            fq.weights.push_back(1.0 / anorm);
        } else if (n == 2) {
            if (verts.size() != 2)
                throw std::runtime_error("2-d facet without exactly two vertices");
            const Vec a = P.vertices()[verts[0]].point;
            const Vec b = P.vertices()[verts[1]].point;
            const double w = (b - a).norm() / resolution / anorm;
            for (int i = 0; i < resolution; ++i) {
                fq.points.push_back(a + (i + 0.5) / resolution * (b - a));
                fq.weights.push_back(w);
            }
        } else {
            if (verts.size() < 3) throw std::runtime_error("3-d facet with fewer than 3 vertices");
            std::vector<Vec> pts;
            for (int vi : verts) pts.push_back(P.vertices()[vi].point);
            auto [u, v] = detail::facet_plane_basis(P.normal_d(k));
            auto order = detail::order_polygon(pts, u, v);
            Vec centroid = Vec::Zero(3);
            for (const auto& p : pts) centroid += p;
            centroid /= static_cast<double>(pts.size());
            for (std::size_t e = 0; e < order.size(); ++e) {
                const Vec& A = pts[order[e]];
                const Vec& B = pts[order[(e + 1) % order.size()]];
                detail::subdivide_triangle(centroid, A, B, resolution,
                                           [&](const Vec& q, double area) {
                                               fq.points.push_back(q);
                                               fq.weights.push_back(area / anorm);
                                           });
            }
        }
        fq.total_weight = pairwise_sum(fq.weights);
        bq.facets.push_back(std::move(fq));
    }
    return bq;
}

// ---------------------------------------------------------------------------
// Exact polynomial moments (simplex decomposition + Gauss rules)
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration; exact for
// polynomial degree 2m-1.
inline void gauss_legendre_01(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double t_old, p0, p1, dp;
        int guard = 0;
        do {
            p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            t_old = t;
            t = t_old - p1 / dp;
        } while (std::abs(t - t_old) > 1e-15 && ++guard < 100);
        x[i] = 0.5 * (1.0 + t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
}

template <class F>
double gauss_segment(const Vec& a, const Vec& b, double measure, int deg, F&& f) {
    int m = deg / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre_01(m, x, w);
    std::vector<double> terms(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        terms[i] = w[i] * f(Vec(a + x[i] * (b - a)));
    return measure * pairwise_sum(terms);
}

// Duffy map of the unit square onto triangle (a,b,c); polynomial degree deg
// in xi becomes degree deg+1 in u, deg in v.
template <class F>
double gauss_triangle(const Vec& a, const Vec& b, const Vec& c, double measure, int deg, F&& f) {
    int mu = (deg + 1) / 2 + 1, mv = deg / 2 + 1;
    std::vector<double> xu, wu, xv, wv;
    gauss_legendre_01(mu, xu, wu);
    gauss_legendre_01(mv, xv, wv);
    std::vector<double> terms;
    for (int i = 0; i < mu; ++i)
        for (int j = 0; j < mv; ++j) {
            Vec q = a + xu[i] * ((b - a) + xv[j] * (c - b));
            terms.push_back(wu[i] * wv[j] * 2.0 * xu[i] * f(q));
        }
    return measure * pairwise_sum(terms);
}

template <class F>
double gauss_tetrahedron(const Vec& a, const Vec& b, const Vec& c, const Vec& d,
                         double volume, int deg, F&& f) {
    int mu = (deg + 2) / 2 + 1, mv = (deg + 1) / 2 + 1, mw = deg / 2 + 1;
    std::vector<double> xu, wu, xv, wv, xw, ww;
    gauss_legendre_01(mu, xu, wu);
    gauss_legendre_01(mv, xv, wv);
    gauss_legendre_01(mw, xw, ww);
    std::vector<double> terms;
    for (int i = 0; i < mu; ++i)
        for (int j = 0; j < mv; ++j)
            for (int k = 0; k < mw; ++k) {
                Vec q = a + xu[i] * ((b - a) + xv[j] * ((c - b) + xw[k] * (d - c)));
                terms.push_back(wu[i] * wv[j] * ww[k] * 6.0 * xu[i] * xu[i] * xv[j] * f(q));
            }
    return volume * pairwise_sum(terms);
}

inline double tet_volume(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
    Mat m(3, 3);
    m.col(0) = b - a;
    m.col(1) = c - a;
    m.col(2) = d - a;
    return std::abs(m.determinant()) / 6.0;
}

} // namespace detail

// Integral over the polytope of an integrand that is polynomial of total
// degree <= deg; exact up to rounding.
template <class F>
double integrate_polynomial_interior(const Polytope& P, int deg, F&& f) {
    const int n = P.dim();
    if (n == 1) {
        Vec lo, hi;
        P.bounding_box(lo, hi);
        Vec a(1), b(1);
        a[0] = lo[0];
        b[0] = hi[0];
        return detail::gauss_segment(a, b, hi[0] - lo[0], deg, f);
    }
    if (n == 2) {
        // fan of triangles around the vertex barycenter
        std::vector<Vec> pts;
        for (const auto& v : P.vertices()) pts.push_back(v.point);
        Vec e1 = Vec::Zero(2), e2 = Vec::Zero(2);
        e1[0] = 1.0;
        e2[1] = 1.0;
        auto order = detail::order_polygon(pts, e1, e2);
        Vec c = P.barycenter();
        std::vector<double> terms;
        for (std::size_t e = 0; e < order.size(); ++e) {
            const Vec& A = pts[order[e]];
            const Vec& B = pts[order[(e + 1) % order.size()]];
            double area = detail::triangle_area(c, A, B);
            if (area <= 0) continue;
            terms.push_back(detail::gauss_triangle(c, A, B, area, deg, f));
        }
        return pairwise_sum(terms);
    }
    if (n == 3) {
        Vec c = P.barycenter();
        std::vector<double> terms;
        for (int k = 0; k < P.facet_count(); ++k) {
            auto verts = P.facet_vertices(k);
            std::vector<Vec> pts;
            for (int vi : verts) pts.push_back(P.vertices()[vi].point);
            auto [u, v] = detail::facet_plane_basis(P.normal_d(k));
            auto order = detail::order_polygon(pts, u, v);
            Vec fc = Vec::Zero(3);
            for (const auto& p : pts) fc += p;
            fc /= static_cast<double>(pts.size());
            for (std::size_t e = 0; e < order.size(); ++e) {
                const Vec& A = pts[order[e]];
                const Vec& B = pts[order[(e + 1) % order.size()]];
                double vol = detail::tet_volume(c, fc, A, B);
                if (vol <= 0) continue;
                terms.push_back(detail::gauss_tetrahedron(c, fc, A, B, vol, deg, f));
            }
        }
        return pairwise_sum(terms);
    }
    throw std::invalid_argument("exact moments support n <= 3");
}

// Exact d(sigma) integral over one facet of a polynomial integrand.
template <class F>
double integrate_polynomial_facet(const Polytope& P, int k, int deg, F&& f) {
    const int n = P.dim();
    const double anorm = P.normal_d(k).norm();
    auto verts = P.facet_vertices(k);
    if (n == 1) return f(P.vertices()[verts.at(0)].point) / anorm;
    if (n == 2) {
        const Vec a = P.vertices()[verts.at(0)].point;
        const Vec b = P.vertices()[verts.at(1)].point;
        return detail::gauss_segment(a, b, (b - a).norm() / anorm, deg, f);
    }
    if (n == 3) {
        std::vector<Vec> pts;
        for (int vi : verts) pts.push_back(P.vertices()[vi].point);
        auto [u, v] = detail::facet_plane_basis(P.normal_d(k));
        auto order = detail::order_polygon(pts, u, v);
        Vec fc = Vec::Zero(3);
        for (const auto& p : pts) fc += p;
        fc /= static_cast<double>(pts.size());
        std::vector<double> terms;
        for (std::size_t e = 0; e < order.size(); ++e) {
            const Vec& A = pts[order[e]];
            const Vec& B = pts[order[(e + 1) % order.size()]];
            double area = detail::triangle_area(fc, A, B);
            if (area <= 0) continue;
            terms.push_back(detail::gauss_triangle(fc, A, B, area / anorm, deg, f));
        }
        return pairwise_sum(terms);
    }
    throw std::invalid_argument("exact moments support n <= 3");
}

template <class F>
double integrate_polynomial_boundary(const Polytope& P, int deg, F&& f) {
    std::vector<double> terms;
    for (int k = 0; k < P.facet_count(); ++k)
        terms.push_back(integrate_polynomial_facet(P, k, deg, f));
    return pairwise_sum(terms);
}

inline double exact_volume(const Polytope& P) {
    return integrate_polynomial_interior(P, 0, [](const Vec&) { return 1.0; });
}

} // namespace abreu_forge

#endif
