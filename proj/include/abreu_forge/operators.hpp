// Fourth-order curvature operators on the moment polytope:
//
//   A(u) = -(1/D) sum_ij d2(D u^{ij})/dxi_i dxi_j          (xi route)
//   S    = A(u) + h_G
//   S    = -sum u_ij V_{x^i x^j} - sum u_kl (logD)_{x^k} V_{x^l} + h_G
//          with V = log F_Delta                             (x route)
//   Ric(S_j,S_k)       = -(1/4) V_{x^j x^k}
//   Ric(S_a,S_a)/mult  = -(1/4) sum u_kl (D_a)_{x^k} V_{x^l} + (1/4) <dD_a/dxi, sigma>
//   A_p  = S - sum_m dlogD/dxi_m (sigma_m - w_m),  w = sum of edge directions,
//          so that box(log F_p) = -A_p identically.
//
// All derivatives of u enter through exact jets; finite-difference variants
// exist as oracles only.
#ifndef ABREU_FORGE_OPERATORS_HPP
#define ABREU_FORGE_OPERATORS_HPP

#include "fields.hpp"

namespace abreu_forge {

// expansion of -(1/D) sum d2(D u^{ij}) at one point
inline double abreu_at(const Jet& J, const BundleData& B, const Vec& xi) {
    const int n = static_cast<int>(xi.size());
    const Mat& W = J.hess_inv;
    std::vector<Mat> d3(n, Mat(n, n));
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) d3[k](a, b) = J.third(n, a, b, k);

    double total = 0.0;
    // second derivatives of the inverse Hessian, contracted on its own indices
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat D4(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) D4(a, b) = J.fourth(n, a, b, i, j);
            Mat ddW = W * d3[i] * W * d3[j] * W + W * d3[j] * W * d3[i] * W - W * D4 * W;
            total += ddW(i, j);
        }
    if (!B.trivial()) {
        const Vec L = B.grad_log_D(xi);
        const Mat LH = B.hess_log_D(xi);
        total += ((LH + L * L.transpose()).cwiseProduct(W)).sum();
        for (int j = 0; j < n; ++j) {
            Mat dWj = -(W * d3[j] * W);
            total += 2.0 * L.dot(dWj.col(j));
        }
    }
    return -total;
}

inline std::vector<double> abreu_operator(const JetField& j, const BundleData& B) {
    std::vector<double> out(j.size());
    parallel_for(j.size(), [&](std::size_t i) {
        out[i] = abreu_at(j[i], B, j.grid->point(i));
    });
    return out;
}

inline std::vector<double> scalar_curvature_xi(const JetField& j, const BundleData& B) {
    std::vector<double> out = abreu_operator(j, B);
    if (!B.trivial())
        parallel_for(j.size(), [&](std::size_t i) { out[i] += B.h_G(j.grid->point(i)); });
    return out;
}

// x-route scalar curvature from a log F_Delta field; the field may carry
// exact jets (cross-check at roundoff level) or FD jets (the h^2 oracle).
inline MaskedField scalar_curvature_x(const JetField& j, const BundleData& B,
                                      const ScalarJetField& log_F_delta) {
    MaskedField out;
    out.value.assign(j.size(), 0.0);
    out.valid.assign(j.size(), 0);
    parallel_for(j.size(), [&](std::size_t i) {
        if (!log_F_delta.has_jets[i]) return;
        const Jet& J = j[i];
        const Vec& xi = j.grid->point(i);
        Mat Vxx = x_hessian(J, log_F_delta.grad[i], log_F_delta.hess[i]);
        Vec Vx = x_gradient(J, log_F_delta.grad[i]);
        double s = -J.hess.cwiseProduct(Vxx).sum();
        if (!B.trivial()) {
            Vec logD_x = x_gradient(J, B.grad_log_D(xi));
            s -= logD_x.transpose() * J.hess * Vx;
            s += B.h_G(xi);
        }
        out.value[i] = s;
        out.valid[i] = 1;
    });
    return out;
}

inline std::vector<Mat> ricci_toric(const JetField& j, const ScalarJetField& log_F_delta) {
    std::vector<Mat> out(j.size());
    parallel_for(j.size(), [&](std::size_t i) {
        out[i] = -0.25 * x_hessian(j[i], log_F_delta.grad[i], log_F_delta.hess[i]);
    });
    return out;
}

// per positive T-root (unit multiplicity; repeated roots scale linearly)
inline std::vector<std::vector<double>> ricci_alpha(const JetField& j, const BundleData& B,
                                                    const ScalarJetField& log_F_delta) {
    std::vector<std::vector<double>> out(B.root_count());
    for (auto& f : out) f.assign(j.size(), 0.0);
    parallel_for(j.size(), [&](std::size_t i) {
        const Jet& J = j[i];
        Vec Vx = x_gradient(J, log_F_delta.grad[i]);
        for (int a = 0; a < B.root_count(); ++a) {
            Vec Da_x = 2.0 * (J.hess_inv * B.root_vector(a));
            double val = -0.25 * Da_x.transpose() * J.hess * Vx;
            val += 0.25 * 2.0 * B.root_vector(a).dot(B.sigma());
            out[a][i] = val;
        }
    });
    return out;
}

// A_p in the invariant form; box(log F_p) + A_p = 0 pointwise.
inline std::vector<double> A_p_field(const VertexChart& chart, const JetField& j,
                                     const BundleData& B,
                                     const std::vector<double>& scalar_curv) {
    std::vector<double> out(scalar_curv);
    if (B.trivial()) return out;
    const Vec w = chart.edge_sum();
    parallel_for(j.size(), [&](std::size_t i) {
        const Vec& xi = j.grid->point(i);
        out[i] -= B.grad_log_D(xi).dot(B.sigma() - w);
    });
    return out;
}

struct CurvatureBundle {
    const Grid* grid = nullptr;
    std::vector<double> abreu;              // A(u)
    std::vector<double> scalar;             // S = A(u) + h_G
    std::vector<Mat> ric_toric;             // -(1/4) (log F_Delta)_{x x}
    std::vector<std::vector<double>> ric_alpha;
    std::vector<std::vector<double>> A_p;   // per vertex chart
};

inline CurvatureBundle curvature_fields(const JetField& j, const BundleData& B,
                                        const std::vector<VertexChart>& charts,
                                        const DeterminantField& det) {
    CurvatureBundle cb;
    cb.grid = j.grid;
    cb.abreu = abreu_operator(j, B);
    cb.scalar = cb.abreu;
    if (!B.trivial())
        parallel_for(j.size(), [&](std::size_t i) { cb.scalar[i] += B.h_G(j.grid->point(i)); });
    cb.ric_toric = ricci_toric(j, det.log_F_delta);
    cb.ric_alpha = ricci_alpha(j, B, det.log_F_delta);
    for (const auto& ch : charts) cb.A_p.push_back(A_p_field(ch, j, B, cb.scalar));
    return cb;
}

} // namespace abreu_forge

#endif
