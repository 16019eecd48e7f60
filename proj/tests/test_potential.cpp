#include <catch2/catch.hpp>

#include "abreu_forge/fields.hpp"
#include "test_helpers.hpp"

using namespace abreu_forge;
using af_test::interval;
using af_test::simplex2;
using af_test::unit_square;

namespace {
Vec point1(double x) {
    Vec v(1);
    v << x;
    return v;
}
Vec point2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}
} // namespace

TEST_CASE("Guillemin values and derivatives on the interval") {
    auto P = interval();
    auto v = guillemin_potential(P);
    CHECK(v.value(point1(0.5)) == Approx(-std::log(2.0)));
    // v'' = 1/xi + 1/(1-xi)
    CHECK(v.hessian(point1(0.5))(0, 0) == Approx(4.0));
    CHECK(v.hessian(point1(0.25))(0, 0) == Approx(4.0 + 4.0 / 3.0));
    CHECK_THROWS_AS(v.gradient(point1(0.0)), std::domain_error);
    // boundary extension is continuous: delta log delta -> 0
    CHECK(v.value_extended(point1(0.0)) == Approx(0.0));
    CHECK(v.value_extended(point1(1.0)) == Approx(0.0));
}

TEST_CASE("Guillemin Hessian inverse on the simplex matches the closed form") {
    auto P = simplex2();
    auto v = guillemin_potential(P);
    Vec xi = point2(0.3, 0.45);
    Jet J = v.jet_at(xi);
    CHECK(J.hess_inv(0, 0) == Approx(0.3 * 0.7).epsilon(1e-12));
    CHECK(J.hess_inv(0, 1) == Approx(-0.3 * 0.45).epsilon(1e-12));
    CHECK(J.hess_inv(1, 1) == Approx(0.45 * 0.55).epsilon(1e-12));
}

TEST_CASE("perturbed potential accepts convex and rejects concave corrections") {
    auto P = interval();
    Grid G(P, 64);
    CHECK_NOTHROW(perturbed_potential(P, {{{2}, 1.0}}, G));
    try {
        perturbed_potential(P, {{{2}, -10.0}}, G);
        FAIL("expected ConvexityError");
    } catch (const ConvexityError& e) {
        // u'' = 1/xi + 1/(1-xi) - 20 is most negative at the center
        CHECK(std::abs(e.witness[0] - 0.5) < 0.02);
        CHECK(e.min_eigenvalue < 0.0);
    }
}

TEST_CASE("normalization at the midpoint adds log 2 and is idempotent") {
    auto P = interval();
    auto v = guillemin_potential(P);
    Vec p0 = point1(0.5);
    auto u = v.normalized_at(p0);
    CHECK(u.value(p0) == Approx(0.0).margin(1e-15));
    CHECK(u.gradient(p0)[0] == Approx(0.0).margin(1e-15));
    CHECK(u.value(point1(0.25)) - v.value(point1(0.25)) == Approx(std::log(2.0)));
    auto u2 = u.normalized_at(p0);
    CHECK(u2.value(point1(0.3)) == Approx(u.value(point1(0.3))));
    // Hessian untouched
    CHECK(u.hessian(point1(0.3))(0, 0) == Approx(v.hessian(point1(0.3))(0, 0)));
    CHECK_THROWS_AS(v.normalized_at(point1(1.5)), std::invalid_argument);
}

TEST_CASE("global nonnegativity of the normalized Guillemin potential on a grid") {
    auto P = unit_square();
    auto u = guillemin_potential(P).normalized_at(P.barycenter());
    Grid G(P, 32);
    for (std::size_t i = 0; i < G.size(); ++i)
        CHECK(u.value(G.point(i)) >= -1e-13);
}

TEST_CASE("Legendre data on the interval: x = log(xi/(1-xi)), f = log(1+e^x)") {
    auto P = interval();
    auto v = guillemin_potential(P);
    for (double t : {0.2, 0.5, 0.9}) {
        Jet J = v.jet_at(point1(t));
        CHECK(J.grad[0] == Approx(std::log(t / (1.0 - t))));
        CHECK(J.legendre == Approx(std::log(1.0 + std::exp(J.grad[0]))));
    }
    // f at x = 0 (xi = 1/2) equals log 2 exactly
    CHECK(v.jet_at(point1(0.5)).legendre == Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("quadratic potential is Legendre self-dual") {
    auto P = unit_square();
    auto u = Potential::zero(P).with_polynomial({{{2, 0}, 0.5}, {{0, 2}, 0.5}});
    Vec xi = point2(0.3, 0.8);
    Jet J = u.jet_at(xi);
    CHECK((J.grad - xi).norm() < 1e-14);
    CHECK(J.legendre == Approx(0.5 * xi.squaredNorm()));
}

TEST_CASE("Hessian duality and Legendre involution over a grid") {
    auto P = unit_square();
    auto u = perturbed_potential(P, {{{2, 2}, 0.05}}, Grid(P, 16));
    Grid G(P, 32);
    JetField j = jets(u, G);
    double rms = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Jet& J = j[i];
        // f_ij(x(xi)) u_jk(xi) = delta_ik
        Mat resid = J.hess_inv * J.hess - Mat::Identity(2, 2);
        CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);
        // involution: reconstruct u from (x, f, grad_x f = xi)
        double u_rec = G.point(i).dot(J.grad) - J.legendre;
        rms += (u_rec - J.value) * (u_rec - J.value);
    }
    rms = std::sqrt(rms / static_cast<double>(j.size()));
    CHECK(rms < 1e-8);
}

TEST_CASE("exact jets agree with finite differences at order 2") {
    auto P = interval();
    auto u = perturbed_potential(P, {{{3}, 0.25}}, Grid(P, 16));
    Vec xi = point1(0.4);
    Jet J = u.jet_at(xi);
    double prev[3] = {0, 0, 0};
    int step = 0;
    for (double h : {1e-2, 5e-3}) {
        double d1 = (u.value(point1(0.4 + h)) - u.value(point1(0.4 - h))) / (2 * h);
        double d2 = (u.value(point1(0.4 + h)) - 2 * u.value(xi) + u.value(point1(0.4 - h))) / (h * h);
        double d3 = (u.jet_at(point1(0.4 + h)).hess(0, 0) - u.jet_at(point1(0.4 - h)).hess(0, 0)) / (2 * h);
        double e1 = std::abs(d1 - J.grad[0]);
        double e2 = std::abs(d2 - J.hess(0, 0));
        double e3 = std::abs(d3 - J.third(1, 0, 0, 0));
        if (step == 1) {
            CHECK(e1 < 0.3 * prev[0]);
            CHECK(e2 < 0.3 * prev[1]);
            CHECK(e3 < 0.3 * prev[2]);
        }
        prev[0] = e1;
        prev[1] = e2;
        prev[2] = e3;
        ++step;
    }
}

TEST_CASE("F_Delta on the interval Guillemin is xi(1-xi)") {
    auto P = interval();
    auto v = guillemin_potential(P);
    Grid G(P, 16);
    JetField j = jets(v, G);
    DeterminantField det = determinant_fields(j, BundleData{}, all_vertex_charts(P));
    for (std::size_t i = 0; i < G.size(); ++i) {
        double xi = G.point(i)[0];
        CHECK(det.F_delta[i] == Approx(xi * (1.0 - xi)).epsilon(1e-12));
    }
}

TEST_CASE("F_p at the two interval vertices ((1-xi)^2 and xi^2)") {
    auto P = interval();
    auto v = guillemin_potential(P);
    Grid G(P, 16);
    JetField j = jets(v, G);
    auto charts = all_vertex_charts(P);
    DeterminantField det = determinant_fields(j, BundleData{}, charts);
    for (std::size_t c = 0; c < charts.size(); ++c) {
        const bool at_zero = std::abs(charts[c].vertex[0]) < 1e-14;
        for (std::size_t i = 0; i < G.size(); ++i) {
            double xi = G.point(i)[0];
            double expect = at_zero ? (1.0 - xi) * (1.0 - xi) : xi * xi;
            CHECK(det.F_p[c][i] == Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("face field with k=0 coincides with F_Delta") {
    auto P = unit_square();
    auto v = guillemin_potential(P);
    Grid G(P, 8);
    JetField j = jets(v, G);
    DeterminantField det = determinant_fields(j, BundleData{}, {}, 0);
    for (std::size_t i = 0; i < G.size(); ++i)
        CHECK(det.F_E[i] == Approx(det.F_delta[i]));
}

TEST_CASE("log F_p minus log F_Delta is affine in x (equal x-Hessians)") {
    auto P = unit_square();
    auto u = perturbed_potential(P, {{{2, 1}, 0.1}}, Grid(P, 16));
    Grid G(P, 24);
    JetField j = jets(u, G);
    auto charts = all_vertex_charts(P);
    DeterminantField det = determinant_fields(j, BundleData{}, charts);
    for (std::size_t i = 0; i < G.size(); i += 7) {
        Mat hd = x_hessian(j[i], det.log_F_delta.grad[i], det.log_F_delta.hess[i]);
        for (std::size_t c = 0; c < charts.size(); ++c) {
            Mat hp = x_hessian(j[i], det.log_F_p[c].grad[i], det.log_F_p[c].hess[i]);
            CHECK((hp - hd).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("F_p stays positive and bounded on refining grids near the vertex") {
    auto P = unit_square();
    auto v = guillemin_potential(P);
    auto charts = all_vertex_charts(P);
    double sup_prev = 0.0;
    for (int res : {16, 32, 64, 128}) {
        Grid G(P, res);
        JetField j = jets(v, G);
        DeterminantField det = determinant_fields(j, BundleData{}, charts);
        for (std::size_t c = 0; c < charts.size(); ++c) {
            double lo = 1e300, hi = 0.0;
            for (double f : det.F_p[c]) {
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
            CHECK(lo > 0.0);
            CHECK(hi < 1.1); // sup over the square of e^{-sum x_p} det is 1
            sup_prev = std::max(sup_prev, hi);
        }
    }
    CHECK(sup_prev > 0.5);
}
