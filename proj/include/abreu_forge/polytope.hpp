// Delzant polytopes as exact facet data: conormals are primitive integer
// vectors, offsets exact rationals, vertices derived by solving facet
// subsystems. Field evaluation (facet distances, charts) runs in double.
#ifndef ABREU_FORGE_POLYTOPE_HPP
#define ABREU_FORGE_POLYTOPE_HPP

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "rational.hpp"

namespace abreu_forge {

struct Facet {
    std::vector<long long> normal; // conormal a_k, integer, primitive
    Rational offset;               // c_k; interior is <a_k, xi> - c_k > 0
};

using RVec = std::vector<Rational>;

namespace detail {

// Exact solve of A x = b by fraction-free Gaussian elimination on rationals.
// Returns nullopt when A is singular.
inline std::optional<RVec> solve_rational(std::vector<RVec> A, RVec b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (A[r][col].num != 0) { pivot = r; break; }
        if (pivot < 0) return std::nullopt;
        std::swap(A[col], A[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = 0; r < n; ++r) {
            if (r == col || A[r][col].num == 0) continue;
            Rational factor = A[r][col] / A[col][col];
            for (int c = col; c < n; ++c) A[r][c] = A[r][c] - factor * A[col][c];
            b[r] = b[r] - factor * b[col];
        }
    }
    RVec x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

inline int rank_rational(std::vector<RVec> A) {
    if (A.empty()) return 0;
    const int rows = static_cast<int>(A.size());
    const int cols = static_cast<int>(A[0].size());
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (A[r][col].num != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        std::swap(A[rank], A[pivot]);
        for (int r = rank + 1; r < rows; ++r) {
            if (A[r][col].num == 0) continue;
            Rational factor = A[r][col] / A[rank][col];
            for (int c = col; c < cols; ++c) A[r][c] = A[r][c] - factor * A[rank][c];
        }
        ++rank;
    }
    return rank;
}

inline long long integer_determinant(std::vector<std::vector<long long>> m) {
    // Bareiss, exact for the small integer matrices that occur at vertices.
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1;
    std::vector<std::vector<__int128>> a(n, std::vector<__int128>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    __int128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int swap_row = -1;
            for (int r = k + 1; r < n; ++r)
                if (a[r][k] != 0) { swap_row = r; break; }
            if (swap_row < 0) return 0;
            std::swap(a[k], a[swap_row]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return Rational::checked(sign * a[n - 1][n - 1]);
}

inline std::vector<std::vector<int>> subsets_of_size(int m, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k == 0) { out.push_back({}); return out; }
    if (k > m) return out;
    while (true) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

} // namespace detail

struct PolytopeVertex {
    RVec coords;                  // exact
    Vec point;                    // double cache
    std::vector<int> active;      // facet indices with delta_k = 0
};

struct DelzantVertexReport {
    int vertex = -1;
    int active_facets = 0;
    long long determinant = 0; // 0 when not exactly n facets meet
    bool ok = false;
};

struct ValidationReport {
    bool delzant = false;
    bool primitive = false;
    std::vector<DelzantVertexReport> vertices;
    std::vector<int> non_primitive_facets;
};

class Polytope {
public:
    static Polytope from_facets(int dim, std::vector<Facet> facets) {
        Polytope p;
        p.dim_ = dim;
        p.facets_ = std::move(facets);
        if (dim < 1) throw ParseError("dimension must be positive");
        for (const auto& f : p.facets_)
            if (static_cast<int>(f.normal.size()) != dim)
                throw ParseError("facet conormal has wrong length");
        p.enumerate_vertices();
        p.check_bounded();
        p.check_interior();
        p.cache_doubles();
        return p;
    }

    int dim() const { return dim_; }
    int facet_count() const { return static_cast<int>(facets_.size()); }
    const std::vector<Facet>& facets() const { return facets_; }
    const std::vector<PolytopeVertex>& vertices() const { return vertices_; }

    // delta_k(xi) = <a_k, xi> - c_k; positive in the interior.
    double delta(int k, const Vec& xi) const {
        return normals_d_[k].dot(xi) - offsets_d_[k];
    }
    const Vec& normal_d(int k) const { return normals_d_[k]; }
    double offset_d(int k) const { return offsets_d_[k]; }

    Rational delta_exact(int k, const RVec& xi) const {
        Rational s(0);
        for (int j = 0; j < dim_; ++j)
            s = s + Rational(facets_[k].normal[j]) * xi[j];
        return s - facets_[k].offset;
    }

    bool contains(const Vec& xi, double tol = 0.0) const {
        for (int k = 0; k < facet_count(); ++k)
            if (delta(k, xi) < -tol) return false;
        return true;
    }

    double min_facet_distance(const Vec& xi) const {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < facet_count(); ++k) m = std::min(m, delta(k, xi));
        return m;
    }

    // max pairwise vertex distance
    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            for (std::size_t j = i + 1; j < vertices_.size(); ++j)
                d = std::max(d, (vertices_[i].point - vertices_[j].point).norm());
        return d;
    }

    Vec barycenter() const {
        Vec b = Vec::Zero(dim_);
        for (const auto& v : vertices_) b += v.point;
        return b / static_cast<double>(vertices_.size());
    }

    void bounding_box(Vec& lo, Vec& hi) const {
        lo = Vec::Constant(dim_, std::numeric_limits<double>::infinity());
        hi = Vec::Constant(dim_, -std::numeric_limits<double>::infinity());
        for (const auto& v : vertices_)
            for (int j = 0; j < dim_; ++j) {
                lo[j] = std::min(lo[j], v.point[j]);
                hi[j] = std::max(hi[j], v.point[j]);
            }
    }

    // vertex indices lying on facet k
    std::vector<int> facet_vertices(int k) const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
            const auto& act = vertices_[i].active;
            if (std::find(act.begin(), act.end(), k) != act.end()) out.push_back(i);
        }
        return out;
    }

private:
    void enumerate_vertices() {
        const int m = facet_count();
        if (m < dim_ + 1) throw ParseError("too few facets to bound a polytope");
        for (const auto& sub : detail::subsets_of_size(m, dim_)) {
            std::vector<RVec> A(dim_, RVec(dim_));
            RVec b(dim_);
            for (int r = 0; r < dim_; ++r) {
                for (int c = 0; c < dim_; ++c) A[r][c] = Rational(facets_[sub[r]].normal[c]);
                b[r] = facets_[sub[r]].offset;
            }
            auto x = detail::solve_rational(A, b);
            if (!x) continue;
            bool feasible = true;
            for (int k = 0; k < m && feasible; ++k)
                if (delta_exact(k, *x).sign() < 0) feasible = false;
            if (!feasible) continue;
            bool dup = false;
            for (const auto& v : vertices_)
                if (v.coords == *x) { dup = true; break; }
            if (dup) continue;
            PolytopeVertex v;
            v.coords = *x;
            for (int k = 0; k < m; ++k)
                if (delta_exact(k, *x).sign() == 0) v.active.push_back(k);
            vertices_.push_back(std::move(v));
        }
        if (vertices_.empty()) throw ParseError("polytope has no vertices (empty interior)");
        // deterministic vertex order: lexicographic by exact coordinates
        std::sort(vertices_.begin(), vertices_.end(),
                  [](const PolytopeVertex& a, const PolytopeVertex& b) {
                      for (std::size_t i = 0; i < a.coords.size(); ++i) {
                          if (a.coords[i] < b.coords[i]) return true;
                          if (b.coords[i] < a.coords[i]) return false;
                      }
                      return false;
                  });
    }

    // Bounded iff the recession cone {d : A d >= 0} is {0}. With full row
    // rank the cone is pointed, so it is nontrivial only if some extreme ray
    // survives; extreme rays come from (n-1)-subsets with 1-d null space.
    void check_bounded() {
        std::vector<RVec> rows(facet_count(), RVec(dim_));
        for (int k = 0; k < facet_count(); ++k)
            for (int j = 0; j < dim_; ++j) rows[k][j] = Rational(facets_[k].normal[j]);
        if (detail::rank_rational(rows) < dim_)
            throw ParseError("polytope is unbounded (conormals do not span)");
        auto ray_feasible = [&](const RVec& d) {
            bool nonzero = false;
            for (const auto& c : d) nonzero = nonzero || c.num != 0;
            if (!nonzero) return false;
            for (int k = 0; k < facet_count(); ++k) {
                Rational s(0);
                for (int j = 0; j < dim_; ++j) s = s + Rational(facets_[k].normal[j]) * d[j];
                if (s.sign() < 0) return false;
            }
            return true;
        };
        for (const auto& sub : detail::subsets_of_size(facet_count(), dim_ - 1)) {
            auto d = null_direction(sub);
            if (!d) continue;
            RVec neg(dim_);
            for (int j = 0; j < dim_; ++j) neg[j] = -(*d)[j];
            if (ray_feasible(*d) || ray_feasible(neg))
                throw ParseError("polytope is unbounded (recession ray found)");
        }
    }

    // One-dimensional rational null space of the (n-1) selected conormals.
    std::optional<RVec> null_direction(const std::vector<int>& sub) const {
        std::vector<RVec> A;
        for (int k : sub) {
            RVec row(dim_);
            for (int j = 0; j < dim_; ++j) row[j] = Rational(facets_[k].normal[j]);
            A.push_back(std::move(row));
        }
        // Row reduce and read off a kernel vector from the free column.
        std::vector<int> pivot_col;
        int rank = 0;
        std::vector<RVec> R = A;
        for (int col = 0; col < dim_ && rank < static_cast<int>(R.size()); ++col) {
            int pivot = -1;
            for (int r = rank; r < static_cast<int>(R.size()); ++r)
                if (R[r][col].num != 0) { pivot = r; break; }
            if (pivot < 0) continue;
            std::swap(R[rank], R[pivot]);
            for (int r = 0; r < static_cast<int>(R.size()); ++r) {
                if (r == rank || R[r][col].num == 0) continue;
                Rational f = R[r][col] / R[rank][col];
                for (int c = col; c < dim_; ++c) R[r][c] = R[r][c] - f * R[rank][c];
            }
            pivot_col.push_back(col);
            ++rank;
        }
        if (rank != dim_ - 1) return std::nullopt; // kernel not 1-dimensional
        std::vector<bool> is_pivot(dim_, false);
        for (int c : pivot_col) is_pivot[c] = true;
        int free_col = 0;
        while (free_col < dim_ && is_pivot[free_col]) ++free_col;
        RVec d(dim_, Rational(0));
        d[free_col] = Rational(1);
        for (int r = 0; r < rank; ++r)
            d[pivot_col[r]] = -(R[r][free_col] / R[r][pivot_col[r]]);
        return d;
    }

    void check_interior() {
        RVec bary(dim_, Rational(0));
        Rational count(static_cast<long long>(vertices_.size()));
        for (const auto& v : vertices_)
            for (int j = 0; j < dim_; ++j) bary[j] = bary[j] + v.coords[j];
        for (int j = 0; j < dim_; ++j) bary[j] = bary[j] / count;
        for (int k = 0; k < facet_count(); ++k)
            if (delta_exact(k, bary).sign() <= 0)
                throw ParseError("polytope has empty interior");
    }

    void cache_doubles() {
        for (auto& f : facets_) {
            Vec a(dim_);
            for (int j = 0; j < dim_; ++j) a[j] = static_cast<double>(f.normal[j]);
            normals_d_.push_back(std::move(a));
            offsets_d_.push_back(f.offset.to_double());
        }
        for (auto& v : vertices_) {
            v.point = Vec(dim_);
            for (int j = 0; j < dim_; ++j) v.point[j] = v.coords[j].to_double();
        }
    }

    int dim_ = 0;
    std::vector<Facet> facets_;
    std::vector<PolytopeVertex> vertices_;
    std::vector<Vec> normals_d_;
    std::vector<double> offsets_d_;
};

inline bool is_primitive(const std::vector<long long>& a) {
    long long g = 0;
    for (long long c : a) g = std::gcd(g, c < 0 ? -c : c);
    return g == 1;
}

// Per-vertex conormal determinants; Delzant iff every vertex has exactly n
// facets whose conormals form a Z^n basis (det +-1) and conormals primitive.
inline ValidationReport validate_delzant(const Polytope& P) {
    ValidationReport rep;
    rep.primitive = true;
    for (int k = 0; k < P.facet_count(); ++k)
        if (!is_primitive(P.facets()[k].normal)) {
            rep.primitive = false;
            rep.non_primitive_facets.push_back(k);
        }
    rep.delzant = rep.primitive;
    for (int i = 0; i < static_cast<int>(P.vertices().size()); ++i) {
        const auto& v = P.vertices()[i];
        DelzantVertexReport vr;
        vr.vertex = i;
        vr.active_facets = static_cast<int>(v.active.size());
        if (vr.active_facets == P.dim()) {
            std::vector<std::vector<long long>> m;
            for (int k : v.active) m.push_back(P.facets()[k].normal);
            vr.determinant = detail::integer_determinant(m);
            vr.ok = (vr.determinant == 1 || vr.determinant == -1);
        }
        rep.delzant = rep.delzant && vr.ok;
        rep.vertices.push_back(vr);
    }
    return rep;
}

// Affine chart at a Delzant vertex: xi^p_k = delta_{j_k}(xi) for the n facets
// j_1..j_n meeting p. Maps p to 0, the adjacent facets to the coordinate
// hyperplanes, and the polytope into the closed positive orthant. The inverse
// linear part B has the edge directions at p as columns.
struct VertexChart {
    int vertex_index = -1;
    Vec vertex;                      // p
    Mat forward;                     // A, rows = conormals of active facets
    Vec forward_offset;              // c, xi^p = A xi - c
    Mat inverse;                     // B = A^{-1} (integer entries, |det A| = 1)
    std::vector<int> facet_indices;  // which facet gives each chart axis

    Vec to_chart(const Vec& xi) const { return forward * xi - forward_offset; }
    Vec from_chart(const Vec& xp) const { return inverse * (xp + forward_offset); }
    // edge direction along chart axis i
    Vec edge(int i) const { return inverse.col(i); }
    // row sums of B; <B 1, x> = sum_i x_p^i for the dual coordinates
    Vec edge_sum() const { return inverse * Vec::Ones(inverse.cols()); }
};

inline VertexChart vertex_chart(const Polytope& P, int vertex_index) {
    const auto& v = P.vertices().at(static_cast<std::size_t>(vertex_index));
    const int n = P.dim();
    if (static_cast<int>(v.active.size()) != n)
        throw std::invalid_argument("vertex is not simple; no Delzant chart");
    std::vector<std::vector<long long>> m;
    for (int k : v.active) m.push_back(P.facets()[k].normal);
    long long det = detail::integer_determinant(m);
    if (det != 1 && det != -1)
        throw std::invalid_argument("vertex fails the Delzant condition");
    VertexChart chart;
    chart.vertex_index = vertex_index;
    chart.vertex = v.point;
    chart.facet_indices = v.active;
    chart.forward = Mat(n, n);
    chart.forward_offset = Vec(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c)
            chart.forward(r, c) = static_cast<double>(m[r][c]);
        chart.forward_offset[r] = P.facets()[v.active[r]].offset.to_double();
    }
    // A is unimodular, so B = adj(A)/det is an integer matrix; the double
    // inverse is exact up to rounding of integer entries.
    chart.inverse = chart.forward.inverse();
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            chart.inverse(r, c) = std::round(chart.inverse(r, c));
    return chart;
}

inline std::vector<VertexChart> all_vertex_charts(const Polytope& P) {
    std::vector<VertexChart> charts;
    for (int i = 0; i < static_cast<int>(P.vertices().size()); ++i)
        charts.push_back(vertex_chart(P, i));
    return charts;
}

} // namespace abreu_forge

#endif
