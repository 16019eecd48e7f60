// Weight data of the homogeneous bundle: positive T-root coefficient vectors
// M_alpha with multiplicities and the drift constants sigma. Everything
// derived from them (the density D, its log-derivatives, h_G) is affine
// algebra and is evaluated in closed form.
#ifndef ABREU_FORGE_BUNDLE_HPP
#define ABREU_FORGE_BUNDLE_HPP

#include <limits>
#include <vector>

#include "quadrature.hpp"

namespace abreu_forge {

struct BundleRoot {
    std::vector<long long> M; // nonnegative integer weights, sum > 0
    int multiplicity = 1;
};

class BundleData {
public:
    BundleData() = default; // pure toric: D == 1, h_G == 0

    BundleData(int dim, std::vector<BundleRoot> roots, Vec sigma)
        : dim_(dim), roots_(std::move(roots)), sigma_(std::move(sigma)) {
        if (sigma_.size() == 0) sigma_ = Vec::Zero(dim);
        if (sigma_.size() != dim) throw ParseError("sigma has wrong length");
        for (const auto& r : roots_) {
            if (static_cast<int>(r.M.size()) != dim)
                throw ParseError("root weight vector has wrong length");
            long long sum = 0;
            for (long long c : r.M) {
                if (c < 0) throw ParseError("root weights must be nonnegative");
                sum += c;
            }
            if (sum <= 0) throw ParseError("root weight vector must have positive sum");
            if (r.multiplicity < 1) throw ParseError("root multiplicity must be >= 1");
        }
        for (const auto& r : roots_) {
            Vec m(dim);
            for (int j = 0; j < dim; ++j) m[j] = static_cast<double>(r.M[j]);
            M_d_.push_back(std::move(m));
        }
    }

    int dim() const { return dim_; }
    bool trivial() const { return roots_.empty(); }
    int root_count() const { return static_cast<int>(roots_.size()); }
    const std::vector<BundleRoot>& roots() const { return roots_; }
    const Vec& root_vector(int a) const { return M_d_[a]; }
    int multiplicity(int a) const { return roots_[a].multiplicity; }
    const Vec& sigma() const { return sigma_; }

    // D_alpha = 2 <M_alpha, xi>
    double D_alpha(int a, const Vec& xi) const {
        double v = 2.0 * M_d_[a].dot(xi);
        if (v <= 0.0)
            throw std::domain_error("D_alpha <= 0: polytope not in the positive orthant");
        return v;
    }

    // D = prod_alpha D_alpha^{mult}
    double weight_D(const Vec& xi) const {
        double d = 1.0;
        for (int a = 0; a < root_count(); ++a) {
            double f = D_alpha(a, xi);
            for (int m = 0; m < roots_[a].multiplicity; ++m) d *= f;
        }
        return d;
    }

    // gradient of log D (sum over the root multiset of 2 M / D_alpha)
    Vec grad_log_D(const Vec& xi) const {
        Vec g = Vec::Zero(xi.size());
        for (int a = 0; a < root_count(); ++a)
            g += roots_[a].multiplicity * 2.0 / D_alpha(a, xi) * M_d_[a];
        return g;
    }

    Mat hess_log_D(const Vec& xi) const {
        Mat h = Mat::Zero(xi.size(), xi.size());
        for (int a = 0; a < root_count(); ++a) {
            double d = D_alpha(a, xi);
            h -= roots_[a].multiplicity * 4.0 / (d * d) * (M_d_[a] * M_d_[a].transpose());
        }
        return h;
    }

    // h_G = sum_i sigma_i d(log D)/d(xi_i)
    double h_G(const Vec& xi) const {
        return trivial() ? 0.0 : sigma_.dot(grad_log_D(xi));
    }

    int degree() const {
        int d = 0;
        for (const auto& r : roots_) d += r.multiplicity;
        return d;
    }

private:
    int dim_ = 0;
    std::vector<BundleRoot> roots_;
    std::vector<Vec> M_d_;
    Vec sigma_;
};

inline std::vector<double> h_G_field(const BundleData& B, const Grid& G) {
    std::vector<double> out(G.size());
    parallel_for(G.size(), [&](std::size_t i) { out[i] = B.h_G(G.point(i)); });
    return out;
}

// Position condition sum_alpha (sum_j M_alpha^j) diam(Delta) / min D_alpha
// < n/4; D_alpha affine, so the min over the closure is attained at a vertex.
struct PositionReport {
    double diameter = 0.0;
    double total = 0.0;
    double threshold = 0.0; // n/4
    bool pass = false;
    struct RootRatio {
        int root = -1;
        double min_D_alpha = 0.0;
        double ratio = 0.0; // per unit multiplicity
    };
    std::vector<RootRatio> per_root;
};

inline PositionReport check_position_condition(const Polytope& P, const BundleData& B) {
    PositionReport rep;
    rep.diameter = P.diameter();
    rep.threshold = P.dim() / 4.0;
    for (int a = 0; a < B.root_count(); ++a) {
        double min_d = std::numeric_limits<double>::infinity();
        for (const auto& v : P.vertices())
            min_d = std::min(min_d, 2.0 * B.root_vector(a).dot(v.point));
        if (min_d <= 0.0)
            throw std::domain_error("D_alpha <= 0 on the closed polytope");
        PositionReport::RootRatio rr;
        rr.root = a;
        rr.min_D_alpha = min_d;
        rr.ratio = B.root_vector(a).sum() * rep.diameter / min_d;
        rep.total += B.multiplicity(a) * rr.ratio;
        rep.per_root.push_back(rr);
    }
    rep.pass = rep.total < rep.threshold;
    return rep;
}

} // namespace abreu_forge

#endif
