// The linear functional L_A(u) = int_bd u D dsigma - int A u D dmu, the
// Mabuchi functional F_A(u) = -int log det(u_ij) D dmu + L_A(u), and affine
// calibration of A. General potentials are integrated by the midpoint
// quadratures; the calibration system only sees polynomial integrands, so its
// moments are computed exactly over a simplex decomposition and the returned
// A annihilates affine functions to solver precision on any polytope.
#ifndef ABREU_FORGE_FUNCTIONALS_HPP
#define ABREU_FORGE_FUNCTIONALS_HPP

#include <functional>

#include "bundle.hpp"
#include "potential.hpp"

namespace abreu_forge {

struct AffineDensity {
    Vec coeffs; // (a_0, a_1 .. a_n): A(xi) = a_0 + sum a_i xi_i

    static AffineDensity constant(int dim, double a0) {
        AffineDensity A;
        A.coeffs = Vec::Zero(dim + 1);
        A.coeffs[0] = a0;
        return A;
    }

    double operator()(const Vec& xi) const {
        double v = coeffs[0];
        for (int i = 0; i < xi.size(); ++i) v += coeffs[i + 1] * xi[i];
        return v;
    }
};

struct FunctionalReport {
    double boundary = 0.0; // int_bd u D dsigma
    double interior = 0.0; // int A u D dmu
    double L_A = 0.0;      // boundary - interior
    double entropy = 0.0;  // -int log det(u_ij) D dmu
    double F_A = 0.0;      // entropy + L_A
    int resolution = 0;
};

using ScalarFn = std::function<double(const Vec&)>;

template <class U, class A>
FunctionalReport L_A_functional(U&& u, A&& density, const BundleData& B, const Grid& G,
                                const BoundaryQuadrature& bq) {
    FunctionalReport rep;
    rep.resolution = G.resolution();
    rep.boundary = bq.integrate_fn([&](const Vec& xi) { return u(xi) * B.weight_D(xi); });
    rep.interior = G.integrate_fn(
        [&](const Vec& xi) { return density(xi) * u(xi) * B.weight_D(xi); });
    rep.L_A = rep.boundary - rep.interior;
    return rep;
}

template <class A>
FunctionalReport mabuchi_F_A(const Potential& u, A&& density, const BundleData& B,
                             const Grid& G, const BoundaryQuadrature& bq) {
    FunctionalReport rep = L_A_functional([&](const Vec& xi) { return u.value_extended(xi); },
                                          density, B, G, bq);
    std::vector<double> logdet(G.size());
    std::mutex err_mutex;
    std::exception_ptr error;
    parallel_for(G.size(), [&](std::size_t i) {
        try {
            Mat H = u.hessian(G.point(i));
            Eigen::LLT<Mat> llt(H);
            double ld = 0.0;
            if (llt.info() != Eigen::Success)
                throw ConvexityError(G.point(i), 0.0);
            Mat L = llt.matrixL();
            for (int r = 0; r < H.rows(); ++r) ld += 2.0 * std::log(L(r, r));
            logdet[i] = ld * B.weight_D(G.point(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!error) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);
    rep.entropy = -G.integrate(logdet);
    rep.F_A = rep.entropy + rep.L_A;
    return rep;
}

// Exact value of L_A on a polynomial test function ell (degree ell_deg) for
// affine A: both integrals have polynomial integrands.
inline double L_A_exact_polynomial(const AffineDensity& A, const ScalarFn& ell, int ell_deg,
                                   const Polytope& P, const BundleData& B) {
    const int dD = B.degree();
    double boundary = integrate_polynomial_boundary(
        P, ell_deg + dD, [&](const Vec& xi) { return ell(xi) * B.weight_D(xi); });
    double interior = integrate_polynomial_interior(
        P, ell_deg + dD + 1, [&](const Vec& xi) { return A(xi) * ell(xi) * B.weight_D(xi); });
    return boundary - interior;
}

// Solve int A ell_i D dmu = int_bd ell_i D dsigma for ell_i in {1, xi_1..xi_n}.
// The Gram matrix int ell_i ell_j D dmu is symmetric positive definite.
inline AffineDensity calibrate_affine_A(const Polytope& P, const BundleData& B) {
    const int n = P.dim();
    const int dD = B.degree();
    auto ell = [&](int i, const Vec& xi) { return i == 0 ? 1.0 : xi[i - 1]; };
    Mat gram(n + 1, n + 1);
    Vec rhs(n + 1);
    for (int i = 0; i <= n; ++i) {
        rhs[i] = integrate_polynomial_boundary(
            P, 1 + dD, [&](const Vec& xi) { return ell(i, xi) * B.weight_D(xi); });
        for (int j = i; j <= n; ++j) {
            double g = integrate_polynomial_interior(P, 2 + dD, [&](const Vec& xi) {
                return ell(i, xi) * ell(j, xi) * B.weight_D(xi);
            });
            gram(i, j) = g;
            gram(j, i) = g;
        }
    }
    Eigen::LDLT<Mat> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw std::runtime_error("calibration Gram matrix not positive definite "
                                 "(quadrature failure)");
    AffineDensity A;
    A.coeffs = ldlt.solve(rhs);
    return A;
}

// Largest |L_A(ell)|/scale over the affine basis; the precondition gate for
// stability runs.
inline double affine_vanishing_residual(const AffineDensity& A, const Polytope& P,
                                        const BundleData& B) {
    const int n = P.dim();
    double scale = integrate_polynomial_boundary(
        P, B.degree(), [&](const Vec& xi) { return B.weight_D(xi); });
    double vertex_scale = 1.0;
    for (const auto& v : P.vertices()) vertex_scale = std::max(vertex_scale, v.point.cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        auto e = [&](const Vec& xi) { return i == 0 ? 1.0 : xi[i - 1]; };
        double denom = std::max(scale, 1.0) * (i == 0 ? 1.0 : vertex_scale);
        worst = std::max(worst, std::abs(L_A_exact_polynomial(A, e, 1, P, B)) / denom);
    }
    return worst;
}

} // namespace abreu_forge

#endif
