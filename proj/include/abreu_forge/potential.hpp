// Symplectic potentials u = Guillemin term + polynomial correction + affine
// shift, with closed-form partial derivatives to order four. The Guillemin
// term sum_k delta_k log delta_k differentiates facet by facet, so no finite
// differences enter the fourth-order operators downstream.
#ifndef ABREU_FORGE_POTENTIAL_HPP
#define ABREU_FORGE_POTENTIAL_HPP

#include <cmath>
#include <mutex>
#include <optional>

#include "quadrature.hpp"

namespace abreu_forge {

struct Monomial {
    std::vector<int> exponents;
    double coeff = 0.0;
};

struct ConvexityError : std::runtime_error {
    Vec witness;
    double min_eigenvalue;
    ConvexityError(const Vec& w, double ev)
        : std::runtime_error("potential is not convex at a grid point"),
          witness(w), min_eigenvalue(ev) {}
};

// Pointwise jet of u together with its Legendre data. grad is the moment-dual
// coordinate x = grad u; legendre is f(x) = <x, xi> - u(xi).
struct Jet {
    double value = 0.0;
    Vec grad;
    Mat hess;
    Mat hess_inv;
    std::vector<double> d3; // n^3, index (i*n + j)*n + k
    std::vector<double> d4; // n^4
    double legendre = 0.0;

    double third(int n, int i, int j, int k) const { return d3[(i * n + j) * n + k]; }
    double fourth(int n, int i, int j, int k, int l) const {
        return d4[((i * n + j) * n + k) * n + l];
    }
};

class Potential {
public:
    static Potential guillemin(const Polytope& P) {
        Potential u;
        u.poly_ = &P;
        u.guillemin_ = true;
        return u;
    }

    static Potential zero(const Polytope& P) {
        Potential u;
        u.poly_ = &P;
        u.guillemin_ = false;
        return u;
    }

    Potential with_polynomial(std::vector<Monomial> terms) const {
        Potential u = *this;
        for (const auto& t : terms)
            if (static_cast<int>(t.exponents.size()) != poly_->dim())
                throw ParseError("monomial exponent list has wrong length");
        u.terms_ = std::move(terms);
        return u;
    }

    const Polytope& polytope() const { return *poly_; }
    bool has_guillemin() const { return guillemin_; }
    const std::vector<Monomial>& polynomial() const { return terms_; }
    const std::optional<Vec>& normalization_point() const { return norm_point_; }

    // value with the continuous boundary extension (delta log delta -> 0)
    double value_extended(const Vec& xi) const {
        double v = affine_value(xi);
        if (guillemin_)
            for (int k = 0; k < poly_->facet_count(); ++k) {
                double d = poly_->delta(k, xi);
                if (d > 0.0) v += d * std::log(d);
            }
        for (const auto& t : terms_) v += monomial_value(t, xi);
        return v;
    }

    double value(const Vec& xi) const { return value_extended(xi); }

    Vec gradient(const Vec& xi) const {
        const int n = poly_->dim();
        Vec g = Vec::Constant(n, 0.0);
        g -= affine_grad();
        if (guillemin_)
            for (int k = 0; k < poly_->facet_count(); ++k) {
                double d = require_interior(k, xi);
                g += (std::log(d) + 1.0) * poly_->normal_d(k);
            }
        for (const auto& t : terms_)
            for (int i = 0; i < n; ++i) g[i] += monomial_derivative(t, xi, {i});
        return g;
    }

    Mat hessian(const Vec& xi) const {
        const int n = poly_->dim();
        Mat h = Mat::Zero(n, n);
        if (guillemin_)
            for (int k = 0; k < poly_->facet_count(); ++k) {
                double d = require_interior(k, xi);
                h += poly_->normal_d(k) * poly_->normal_d(k).transpose() / d;
            }
        for (const auto& t : terms_)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) h(i, j) += monomial_derivative(t, xi, {i, j});
        return h;
    }

    // Full jet with Hessian inverse and Legendre value. Throws ConvexityError
    // when the Hessian is not positive definite at xi.
    Jet jet_at(const Vec& xi) const {
        const int n = poly_->dim();
        Jet J;
        J.value = value_extended(xi);
        J.grad = gradient(xi);
        J.hess = hessian(xi);
        J.d3.assign(static_cast<std::size_t>(n) * n * n, 0.0);
        J.d4.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
        if (guillemin_)
            for (int k = 0; k < poly_->facet_count(); ++k) {
                double d = require_interior(k, xi);
                const Vec& a = poly_->normal_d(k);
                double inv2 = 1.0 / (d * d), inv3 = inv2 / d;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int l = 0; l < n; ++l) {
                            J.d3[(i * n + j) * n + l] -= a[i] * a[j] * a[l] * inv2;
                            for (int m = 0; m < n; ++m)
                                J.d4[((i * n + j) * n + l) * n + m] +=
                                    2.0 * a[i] * a[j] * a[l] * a[m] * inv3;
                        }
            }
        for (const auto& t : terms_) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) {
                        J.d3[(i * n + j) * n + l] += monomial_derivative(t, xi, {i, j, l});
                        for (int m = 0; m < n; ++m)
                            J.d4[((i * n + j) * n + l) * n + m] +=
                                monomial_derivative(t, xi, {i, j, l, m});
                    }
        }
        Eigen::LDLT<Mat> ldlt(J.hess);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            ldlt.vectorD().minCoeff() <= 0.0) {
            Eigen::SelfAdjointEigenSolver<Mat> es(J.hess);
            throw ConvexityError(xi, es.eigenvalues().minCoeff());
        }
        J.hess_inv = ldlt.solve(Mat::Identity(n, n));
        J.legendre = J.grad.dot(xi) - J.value;
        return J;
    }

    // Subtract u(p0) + <grad u(p0), xi - p0>; value and gradient vanish at
    // p0 afterwards, the Hessian is untouched. Idempotent.
    Potential normalized_at(const Vec& p0) const {
        for (int k = 0; k < poly_->facet_count(); ++k)
            if (poly_->delta(k, p0) <= 0.0)
                throw std::invalid_argument("normalization point is not interior");
        Potential u = *this;
        Vec g = gradient(p0);
        double v = value_extended(p0);
        u.affine_const_ += v - g.dot(p0);
        if (u.affine_grad_shift_.size() == 0) u.affine_grad_shift_ = Vec::Zero(poly_->dim());
        u.affine_grad_shift_ += g;
        u.norm_point_ = p0;
        return u;
    }

private:
    double require_interior(int k, const Vec& xi) const {
        double d = poly_->delta(k, xi);
        if (d <= 0.0)
            throw std::domain_error("Guillemin term evaluated at delta_k <= 0");
        return d;
    }

    double affine_value(const Vec& xi) const {
        double v = -affine_const_;
        if (affine_grad_shift_.size()) v -= affine_grad_shift_.dot(xi);
        return v;
    }
    Vec affine_grad() const {
        if (affine_grad_shift_.size()) return affine_grad_shift_;
        return Vec::Zero(poly_->dim());
    }

    static double monomial_value(const Monomial& t, const Vec& xi) {
        double v = t.coeff;
        for (std::size_t i = 0; i < t.exponents.size(); ++i)
            v *= std::pow(xi[static_cast<int>(i)], t.exponents[i]);
        return v;
    }

    // partial derivative for the multiset of axes in "order"
    static double monomial_derivative(const Monomial& t, const Vec& xi,
                                      std::initializer_list<int> order) {
        std::vector<int> cnt(t.exponents.size(), 0);
        for (int axis : order) ++cnt[static_cast<std::size_t>(axis)];
        double v = t.coeff;
        for (std::size_t i = 0; i < t.exponents.size(); ++i) {
            int e = t.exponents[i], o = cnt[i];
            if (o > e) return 0.0;
            for (int f = e; f > e - o; --f) v *= f;
            v *= std::pow(xi[static_cast<int>(i)], e - o);
        }
        return v;
    }

    const Polytope* poly_ = nullptr;
    bool guillemin_ = false;
    std::vector<Monomial> terms_;
    double affine_const_ = 0.0;   // subtracted constant
    Vec affine_grad_shift_;       // subtracted gradient (empty = zero)
    std::optional<Vec> norm_point_;
};

inline Potential guillemin_potential(const Polytope& P) { return Potential::guillemin(P); }

// u = v + poly, convexity checked on the supplied grid; the witness in the
// error is the grid point with the most negative Hessian eigenvalue.
inline Potential perturbed_potential(const Polytope& P, std::vector<Monomial> poly,
                                     const Grid& check_grid) {
    Potential u = Potential::guillemin(P).with_polynomial(std::move(poly));
    double worst = std::numeric_limits<double>::infinity();
    Vec witness;
    for (std::size_t i = 0; i < check_grid.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Mat> es(u.hessian(check_grid.point(i)));
        double ev = es.eigenvalues().minCoeff();
        if (ev < worst) {
            worst = ev;
            witness = check_grid.point(i);
        }
    }
    if (worst <= 0.0) throw ConvexityError(witness, worst);
    return u;
}

struct JetField {
    const Grid* grid = nullptr;
    std::vector<Jet> pts;

    const Jet& operator[](std::size_t i) const { return pts[i]; }
    std::size_t size() const { return pts.size(); }
    int dim() const { return grid->dim(); }
};

inline JetField jets(const Potential& u, const Grid& G) {
    JetField f;
    f.grid = &G;
    f.pts.resize(G.size());
    std::mutex err_mutex;
    std::exception_ptr error;
    parallel_for(G.size(), [&](std::size_t i) {
        try {
            f.pts[i] = u.jet_at(G.point(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!error) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);
    return f;
}

} // namespace abreu_forge

#endif
