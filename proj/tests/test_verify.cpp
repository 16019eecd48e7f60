#include <catch2/catch.hpp>

#include "abreu_forge/verify.hpp"
#include "test_helpers.hpp"

using namespace abreu_forge;
using af_test::interval;
using af_test::unit_square;

TEST_CASE("Psi on the interval Guillemin metric has the closed form") {
    auto P = interval();
    auto v = guillemin_potential(P);
    Grid G(P, 32);
    JetField j = jets(v, G);
    DeterminantField det = determinant_fields(j, BundleData{}, {});
    auto psi = psi_field(det.log_F_delta, j);
    for (std::size_t i = 0; i < G.size(); ++i) {
        double xi = G.point(i)[0];
        double expect = (1.0 - 2.0 * xi) * (1.0 - 2.0 * xi) / (xi * (1.0 - xi));
        CHECK(psi[i] == Approx(expect).epsilon(1e-10));
    }
    // spot value from the closed form: Psi(1/4) = (1/2)^2 / (3/16) = 4/3
    Vec q(1);
    q << 0.25;
    Jet J = v.jet_at(q);
    double vx = (1.0 - 2.0 * 0.25) / (0.25 * 0.75) * J.hess_inv(0, 0);
    CHECK(vx * vx * J.hess(0, 0) == Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("Psi vanishes for constant V and P follows the explicit formula") {
    std::vector<double> F{1.0, 2.0, 0.5};
    std::vector<double> psi{0.0, 2.0, 1.0};
    auto Pf = P_field(F, psi, 0.25, 1.0 / 3.0);
    CHECK(Pf[0] == 0.0);
    CHECK(Pf[1] == Approx(2.0 * std::exp(0.25 * std::pow(2.0, 1.0 / 3.0)) * std::sqrt(2.0)));
    // kappa = 1/4, a = 1/3, F = 1, Psi = 2 -> P = 2 e^{1/4}
    std::vector<double> F1{1.0}, psi1{2.0};
    CHECK(P_field(F1, psi1, 0.25, 1.0 / 3.0)[0] == Approx(2.0 * std::exp(0.25)));
}

TEST_CASE("Psi/P envelope and the kappa gate") {
    auto P = unit_square();
    auto v = guillemin_potential(P);
    Grid G(P, 32);
    JetField j = jets(v, G);
    auto charts = all_vertex_charts(P);
    DeterminantField det = determinant_fields(j, BundleData{}, charts);
    auto psi = psi_field(det.log_F_p[0], j);
    VerifyConfig cfg;
    auto gate = kappa_gate_report(det.F_p[0], cfg);
    CHECK(gate.pass);
    CHECK(gate.min_margin >= 0.0);
    double kappa = cfg.kappa_for(*std::max_element(det.F_p[0].begin(), det.F_p[0].end()));
    auto Pf = P_field(det.F_p[0], psi, kappa, cfg.exponent_a);
    auto env = psi_P_envelope_report(det.F_p[0], psi, Pf, cfg);
    CHECK(env.pass);

    VerifyConfig small;
    small.N_2 = 1e-3; // below sup F: hypothesis must fail
    auto gate2 = kappa_gate_report(det.F_p[0], small);
    CHECK(gate2.hypothesis_failed);
}

TEST_CASE("Psi is insensitive to multiplying F by a constant; P scales as stated") {
    auto P = unit_square();
    auto v = guillemin_potential(P);
    Grid G(P, 16);
    JetField j = jets(v, G);
    DeterminantField det = determinant_fields(j, BundleData{}, {});
    auto psi = psi_field(det.log_F_delta, j);
    // scaled field: log(cF) has the same derivatives
    ScalarJetField scaled = det.log_F_delta;
    const double c = 3.7;
    for (auto& val : scaled.value) val += std::log(c);
    auto psi2 = psi_field(scaled, j);
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(psi[i] == Approx(psi2[i]));
    std::vector<double> Fc(det.F_delta);
    for (auto& f : Fc) f *= c;
    auto P1 = P_field(det.F_delta, psi, 0.2, 1.0 / 3.0);
    auto P2 = P_field(Fc, psi, 0.2, 1.0 / 3.0);
    for (std::size_t i = 0; i < G.size(); ++i) {
        double f = det.F_delta[i];
        double expect = P1[i] * std::sqrt(c) *
                        std::exp(0.2 * (std::pow(c * f, 1.0 / 3.0) - std::pow(f, 1.0 / 3.0)));
        CHECK(P2[i] == Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("T and Q: identity comparison and Hessian ratios") {
    auto P = interval();
    auto v = guillemin_potential(P);
    Grid G(P, 64);
    JetField jf = jets(v, G);
    DeterminantField det = determinant_fields(jf, BundleData{}, all_vertex_charts(P));
    VerifyConfig cfg;
    auto tq = T_and_Q(jf, jf, det.F_p[0], cfg);
    for (std::size_t i = 0; i < G.size(); ++i) {
        CHECK(tq.T[i] == Approx(1.0));
        CHECK(tq.phi[i] == Approx(0.0).margin(1e-14));
        CHECK(tq.Q[i] == Approx(std::exp(-cfg.N_1) * std::sqrt(det.F_p[0][i])).epsilon(1e-10));
    }

    // u_g'' = 2 u_f'': T = 1/2 pointwise (x-Hessian halves)
    auto uf = Potential::zero(P).with_polynomial({{{2}, 0.5}});
    auto ug = Potential::zero(P).with_polynomial({{{2}, 1.0}});
    JetField jff = jets(uf, G), jgg = jets(ug, G);
    auto tq2 = T_and_Q(jff, jgg, det.F_p[0], cfg);
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(tq2.T[i] == Approx(0.5));
}

TEST_CASE("T respects the arithmetic-geometric inequality") {
    auto P = unit_square();
    auto uf = perturbed_potential(P, {{{2, 2}, 0.05}}, Grid(P, 16));
    auto ug = guillemin_potential(P);
    Grid G(P, 24);
    JetField jf = jets(uf, G), jg = jets(ug, G);
    DeterminantField det = determinant_fields(jf, BundleData{}, all_vertex_charts(P));
    VerifyConfig cfg;
    auto tq = T_and_Q(jf, jg, det.F_p[0], cfg);
    for (std::size_t i = 0; i < G.size(); ++i) {
        double det_ratio = jf[i].hess.determinant() / jg[i].hess.determinant();
        CHECK(tq.T[i] >= 2.0 * std::sqrt(det_ratio) - 1e-10);
    }
}

TEST_CASE("box f_p lower bound reports on the square and the far interval") {
    auto Pq = unit_square();
    auto rep = box_f_p_bound_report(Pq, BundleData{}, guillemin_potential(Pq), 32);
    CHECK(rep.pass);
    CHECK(rep.min_margin == Approx(2.0).epsilon(1e-9)); // D == 1: box f_p = n

    auto Pi = interval(3.0, 4.0);
    BundleData B(1, {{{1}, 1}}, Vec::Zero(1));
    auto rep2 = box_f_p_bound_report(Pi, B, guillemin_potential(Pi), 64);
    CHECK(rep2.pass);
    CHECK(rep2.min_margin >= 0.5);
    CHECK(rep2.min_margin == Approx(2.0 - 4.0 / (3.0 + 1.0 / 128.0)).epsilon(1e-6));
}

TEST_CASE("identity study: FD box of log F_p converges to -A_p at order ~2") {
    auto P = interval(3.0, 4.0);
    BundleData B(1, {{{1}, 1}}, Vec::Zero(1));
    VerifyConfig cfg;
    cfg.resolutions = {32, 64, 128};
    auto rep = A_p_identity_study(P, B, guillemin_potential(P), cfg);
    CHECK(rep.pass);
    CHECK(rep.observed_order >= 1.8);
}

TEST_CASE("lemma 6.1: positivity with the computed N on the square") {
    auto P = unit_square();
    auto rep = verify_lemma_6_1(P, BundleData{}, guillemin_potential(P), 32);
    CHECK(rep.pass);
    CHECK_FALSE(rep.hypothesis_failed);
    double N = 0, maxA = 0;
    for (auto& [k, v] : rep.notes) {
        if (k == "N") N = v;
        if (k == "max_A_p") maxA = v;
    }
    CHECK(maxA == Approx(4.0).epsilon(1e-8));
    CHECK(N == 5.0); // smallest integer with 4 < (n/2) N = N
    CHECK(rep.min_margin == Approx(-4.0 + 5.0 * 2.0).epsilon(1e-8));
}

TEST_CASE("lemma 6.1 on [3,4] with D = 2 xi passes; [1,2] routes to hypothesis failure") {
    BundleData B(1, {{{1}, 1}}, Vec::Zero(1));
    auto rep = verify_lemma_6_1(interval(3.0, 4.0), B, guillemin_potential(interval(3.0, 4.0)), 64);
    CHECK(rep.pass);
    CHECK(rep.min_margin > 0.0);

    auto bad = verify_lemma_6_1(interval(1.0, 2.0), B, guillemin_potential(interval(1.0, 2.0)), 64);
    CHECK(bad.hypothesis_failed);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("trace identity calibration study reaches order ~2") {
    auto P = af_test::shifted_square(1.0, 1.0);
    Vec sig(2);
    sig << 0.2, -0.1;
    BundleData B(2, {{{1, 0}, 1}, {{1, 1}, 2}}, sig);
    auto u = perturbed_potential(P, {{{2, 2}, 0.01}}, Grid(P, 16));
    VerifyConfig cfg;
    cfg.resolutions = {24, 48, 96};
    auto rep = trace_identity_study(P, B, u, cfg);
    CHECK(rep.pass);
    CHECK(rep.observed_order >= 1.8);
}

TEST_CASE("lemma 6.2 margins are produced with a passing calibration gate") {
    auto P = unit_square();
    auto u = guillemin_potential(P);
    VerifyConfig cfg;
    cfg.resolutions = {16, 32, 64};
    auto out = lemma_6_2_margin(P, BundleData{}, u, 0, cfg, 48);
    CHECK(out.report.pass); // calibration gate
    int valid = 0;
    for (char v : out.valid) valid += v;
    CHECK(valid > 100);
    CHECK(std::isfinite(out.report.min_margin));
}

TEST_CASE("lemma 6.2 margins with bundle data exercise the fiber block") {
    auto P = af_test::shifted_square(1.0, 1.0);
    Vec sig(2);
    sig << 0.1, -0.2;
    BundleData B(2, {{{1, 0}, 1}, {{1, 1}, 1}}, sig);
    auto u = guillemin_potential(P);
    VerifyConfig cfg;
    cfg.resolutions = {16, 32, 64};
    auto out = lemma_6_2_margin(P, B, u, 0, cfg, 32);
    CHECK(out.report.pass); // calibration gate with D != 1
    int valid = 0;
    for (std::size_t i = 0; i < out.valid.size(); ++i)
        if (out.valid[i]) {
            ++valid;
            CHECK(std::isfinite(out.lhs[i]));
            CHECK(std::isfinite(out.rhs[i]));
        }
    CHECK(valid > 50);
}

TEST_CASE("degenerate points with tiny Psi are excluded from lemma 6.2 margins") {
    auto P = unit_square();
    auto u = Potential::zero(P).with_polynomial({{{2, 0}, 0.5}, {{0, 2}, 0.5}});
    VerifyConfig cfg;
    cfg.resolutions = {16, 32};
    auto out = lemma_6_2_margin(P, BundleData{}, u, 0, cfg, 32);
    // V = log det + 0 is constant for the flat metric: Psi == 0 everywhere
    int valid = 0;
    for (char v : out.valid) valid += v;
    CHECK(valid == 0);
}

TEST_CASE("lemma 6.4 search achieves a positive constant for the Guillemin square") {
    auto P = unit_square();
    auto uf = perturbed_potential(P, {{{2, 2}, 0.05}}, Grid(P, 16));
    auto ug = guillemin_potential(P);
    VerifyConfig cfg;
    auto rep = lemma_6_4_search(P, BundleData{}, uf, ug, cfg, {0.5, 1.0, 2.0, 4.0}, 32);
    CHECK_FALSE(rep.hypothesis_failed);
    CHECK(rep.pass);
    CHECK(rep.min_margin > 0.0);

    VerifyConfig tight;
    tight.N_2 = 1e-4;
    auto rep2 = lemma_6_4_search(P, BundleData{}, uf, ug, tight, {1.0}, 24);
    CHECK(rep2.hypothesis_failed);

    CHECK_THROWS_AS(lemma_6_4_search(interval(), BundleData{}, guillemin_potential(interval()),
                                     guillemin_potential(interval()), cfg, {1.0}, 16),
                    std::invalid_argument);
}

TEST_CASE("observed order fits a clean h^2 sequence") {
    std::vector<ConvergenceRow> rows{{32, 1.0 / 32, 1e-2}, {64, 1.0 / 64, 2.5e-3},
                                     {128, 1.0 / 128, 6.25e-4}};
    CHECK(observed_order(rows) == Approx(2.0).epsilon(1e-6));
}
