// Scalar fields on the interior grid carrying first/second xi-derivatives,
// either exact (from potential jets) or by central differences; conversion of
// xi-jets to log-affine x-derivatives through the Legendre chain rule; and
// the determinant fields log F_Delta, log F_p, log F_E.
#ifndef ABREU_FORGE_FIELDS_HPP
#define ABREU_FORGE_FIELDS_HPP

#include "bundle.hpp"
#include "potential.hpp"

namespace abreu_forge {

struct ScalarJetField {
    const Grid* grid = nullptr;
    std::vector<double> value;
    std::vector<Vec> grad;      // d/d(xi)
    std::vector<Mat> hess;      // d2/d(xi)d(xi)
    std::vector<char> has_jets; // 0 where derivatives are unavailable

    std::size_t size() const { return value.size(); }
};

// Central differences on the masked grid; derivatives only where the full
// +-1 stencil (including diagonals) exists.
inline ScalarJetField fd_jets(const Grid& G, const std::vector<double>& values) {
    if (values.size() != G.size()) throw std::invalid_argument("field/grid size mismatch");
    const int n = G.dim();
    ScalarJetField f;
    f.grid = &G;
    f.value = values;
    f.grad.assign(G.size(), Vec::Zero(n));
    f.hess.assign(G.size(), Mat::Zero(n, n));
    f.has_jets.assign(G.size(), 0);
    const Vec& h = G.spacing();
    parallel_for(G.size(), [&](std::size_t i) {
        if (!G.has_full_stencil(i)) return;
        Vec g(n);
        Mat H(n, n);
        for (int a = 0; a < n; ++a) {
            const double vp = values[static_cast<std::size_t>(G.neighbor(i, a, +1))];
            const double vm = values[static_cast<std::size_t>(G.neighbor(i, a, -1))];
            g[a] = (vp - vm) / (2.0 * h[a]);
            H(a, a) = (vp - 2.0 * values[i] + vm) / (h[a] * h[a]);
            for (int b = a + 1; b < n; ++b) {
                const double vpp = values[static_cast<std::size_t>(G.diag_neighbor(i, a, 1, b, 1))];
                const double vpm = values[static_cast<std::size_t>(G.diag_neighbor(i, a, 1, b, -1))];
                const double vmp = values[static_cast<std::size_t>(G.diag_neighbor(i, a, -1, b, 1))];
                const double vmm = values[static_cast<std::size_t>(G.diag_neighbor(i, a, -1, b, -1))];
                H(a, b) = H(b, a) = (vpp - vpm - vmp + vmm) / (4.0 * h[a] * h[b]);
            }
        }
        f.grad[i] = g;
        f.hess[i] = H;
        f.has_jets[i] = 1;
    });
    return f;
}

// --- xi-jets -> x-jets through x = grad u --------------------------------
//
//   dF/dx^i      = sum_j u^{ij} dF/dxi_j
//   d2F/dx^i dx^j = sum_l u^{jl} [ sum_k dW_ik/dxi_l dF/dxi_k ] + (W Fxx W)_ij,
// with dW/dxi_l = -W (d3 u)_l W.

inline Vec x_gradient(const Jet& J, const Vec& grad_xi) {
    return J.hess_inv * grad_xi;
}

inline Mat x_hessian(const Jet& J, const Vec& grad_xi, const Mat& hess_xi) {
    const int n = static_cast<int>(grad_xi.size());
    const Mat& W = J.hess_inv;
    Mat result = W * hess_xi * W;
    Mat V(n, n); // column l: dW/dxi_l * grad_xi
    for (int l = 0; l < n; ++l) {
        Mat d3l(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) d3l(a, b) = J.third(n, a, b, l);
        V.col(l) = -(W * d3l * W) * grad_xi;
    }
    result += V * W; // sum_l vec_l outer W-row; W symmetric
    return result;
}

// Box operator of a scalar field F depending only on the toric coordinates:
//   box F = sum_ij u_ij F_{x^i x^j} + sum_j dlogD/dxi_j F_{x^j}.
inline double box_at(const Jet& J, const BundleData& B, const Vec& xi,
                     const Vec& grad_xi, const Mat& hess_xi) {
    Mat Fxx = x_hessian(J, grad_xi, hess_xi);
    Vec Fx = x_gradient(J, grad_xi);
    double val = J.hess.cwiseProduct(Fxx).sum();
    if (!B.trivial()) val += B.grad_log_D(xi).dot(Fx);
    return val;
}

struct MaskedField {
    std::vector<double> value;
    std::vector<char> valid;
};

inline MaskedField box_operator(const ScalarJetField& F, const JetField& j, const BundleData& B) {
    MaskedField out;
    out.value.assign(F.size(), 0.0);
    out.valid.assign(F.size(), 0);
    parallel_for(F.size(), [&](std::size_t i) {
        if (!F.has_jets[i]) return;
        out.value[i] = box_at(j[i], B, F.grid->point(i), F.grad[i], F.hess[i]);
        out.valid[i] = 1;
    });
    return out;
}

// --- determinant fields ----------------------------------------------------

// log det(u_ij) xi-jets from the potential jets
inline void log_det_hess_jets(const Jet& J, int n, double& val, Vec& grad, Mat& hess) {
    const Mat& W = J.hess_inv;
    Eigen::LLT<Mat> llt(J.hess);
    val = 0.0;
    Mat L = llt.matrixL();
    for (int i = 0; i < n; ++i) val += 2.0 * std::log(L(i, i));
    std::vector<Mat> d3(n, Mat(n, n));
    for (int l = 0; l < n; ++l)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) d3[l](a, b) = J.third(n, a, b, l);
    grad = Vec(n);
    for (int i = 0; i < n; ++i) grad[i] = (W.cwiseProduct(d3[i])).sum();
    hess = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Mat D4(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) D4(a, b) = J.fourth(n, a, b, i, j);
            double t = (W.cwiseProduct(D4)).sum() - (W * d3[i] * W * d3[j]).trace();
            hess(i, j) = t;
            hess(j, i) = t;
        }
}

struct DeterminantField {
    const Grid* grid = nullptr;
    ScalarJetField log_F_delta;              // log(det f_ij D) = log D - log det u_ij
    std::vector<double> F_delta;
    std::vector<ScalarJetField> log_F_p;     // one per vertex chart
    std::vector<std::vector<double>> F_p;
    ScalarJetField log_F_E;                  // face field, exponent over the first face_k axes
    std::vector<double> F_E;
    int face_k = 0;
};

// xi-jets of <w, x(xi)>: gradient U w, Hessian sum_m w_m u_(m..).
inline void linear_in_x_jets(const Jet& J, int n, const Vec& w, Vec& grad, Mat& hess) {
    grad = J.hess * w;
    hess = Mat::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        if (w[m] == 0.0) continue;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) hess(k, l) += w[m] * J.third(n, m, k, l);
    }
}

// F_Delta = det(f_ij) D; per vertex chart F_p = F_Delta e^{-sum_i x_p^i} with
// x_p = B^T x; F_E = F_Delta e^{-sum_{i<=k} x^i} for the face on the first k
// coordinate hyperplanes (requires the polytope positioned as in that chart).
inline DeterminantField determinant_fields(const JetField& j, const BundleData& B,
                                           const std::vector<VertexChart>& charts,
                                           int face_k = 0) {
    const Grid& G = *j.grid;
    const int n = G.dim();
    if (face_k < 0 || face_k > n) throw std::invalid_argument("face index out of range");
    DeterminantField out;
    out.grid = &G;
    out.face_k = face_k;

    auto alloc = [&](ScalarJetField& f) {
        f.grid = &G;
        f.value.assign(G.size(), 0.0);
        f.grad.assign(G.size(), Vec::Zero(n));
        f.hess.assign(G.size(), Mat::Zero(n, n));
        f.has_jets.assign(G.size(), 1);
    };
    alloc(out.log_F_delta);
    out.F_delta.assign(G.size(), 0.0);
    out.log_F_p.resize(charts.size());
    out.F_p.resize(charts.size());
    for (std::size_t c = 0; c < charts.size(); ++c) {
        alloc(out.log_F_p[c]);
        out.F_p[c].assign(G.size(), 0.0);
    }
    alloc(out.log_F_E);
    out.F_E.assign(G.size(), 0.0);

    std::vector<Vec> chart_w;
    for (const auto& ch : charts) chart_w.push_back(ch.edge_sum());
    Vec wE = Vec::Zero(n);
    for (int i = 0; i < face_k; ++i) wE[i] = 1.0;

    parallel_for(G.size(), [&](std::size_t i) {
        const Vec& xi = G.point(i);
        double logdet;
        Vec dlogdet;
        Mat hlogdet;
        log_det_hess_jets(j[i], n, logdet, dlogdet, hlogdet);

        double lD = 0.0;
        Vec gD = Vec::Zero(n);
        Mat hD = Mat::Zero(n, n);
        if (!B.trivial()) {
            lD = std::log(B.weight_D(xi));
            gD = B.grad_log_D(xi);
            hD = B.hess_log_D(xi);
        }
        out.log_F_delta.value[i] = lD - logdet;
        out.log_F_delta.grad[i] = gD - dlogdet;
        out.log_F_delta.hess[i] = hD - hlogdet;
        out.F_delta[i] = std::exp(out.log_F_delta.value[i]);

        for (std::size_t c = 0; c < charts.size(); ++c) {
            Vec gw;
            Mat hw;
            linear_in_x_jets(j[i], n, chart_w[c], gw, hw);
            const double xsum = chart_w[c].dot(j[i].grad);
            out.log_F_p[c].value[i] = out.log_F_delta.value[i] - xsum;
            out.log_F_p[c].grad[i] = out.log_F_delta.grad[i] - gw;
            out.log_F_p[c].hess[i] = out.log_F_delta.hess[i] - hw;
            out.F_p[c][i] = std::exp(out.log_F_p[c].value[i]);
        }

        Vec gE;
        Mat hE;
        linear_in_x_jets(j[i], n, wE, gE, hE);
        out.log_F_E.value[i] = out.log_F_delta.value[i] - wE.dot(j[i].grad);
        out.log_F_E.grad[i] = out.log_F_delta.grad[i] - gE;
        out.log_F_E.hess[i] = out.log_F_delta.hess[i] - hE;
        out.F_E[i] = std::exp(out.log_F_E.value[i]);
    });
    return out;
}

// xi-jets of f_p = f - <p, x> (p = 0 gives f itself); exact for any potential.
inline ScalarJetField f_p_jets(const JetField& j, const Vec& p) {
    const Grid& G = *j.grid;
    const int n = G.dim();
    ScalarJetField f;
    f.grid = &G;
    f.value.assign(G.size(), 0.0);
    f.grad.assign(G.size(), Vec::Zero(n));
    f.hess.assign(G.size(), Mat::Zero(n, n));
    f.has_jets.assign(G.size(), 1);
    parallel_for(G.size(), [&](std::size_t i) {
        const Vec& xi = G.point(i);
        const Jet& J = j[i];
        f.value[i] = J.legendre - p.dot(J.grad);
        Vec shifted = xi - p;
        f.grad[i] = J.hess * shifted;
        Mat H = J.hess;
        for (int m = 0; m < n; ++m)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) H(k, l) += shifted[m] * J.third(n, m, k, l);
        f.hess[i] = H;
    });
    return f;
}

} // namespace abreu_forge

#endif
