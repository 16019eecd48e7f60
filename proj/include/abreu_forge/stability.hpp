// Sampling falsifier for uniform K-stability over the single-crease family
// u = max(0, <H, xi - q>), normalized at p_o. A nonpositive ratio certifies
// instability over the probe family; a positive minimum is a family-restricted
// lower estimate of the stability constant, not a proof.
#ifndef ABREU_FORGE_STABILITY_HPP
#define ABREU_FORGE_STABILITY_HPP

#include "functionals.hpp"

namespace abreu_forge {

// Fixed xoshiro256** generator: byte-identical streams on every platform,
// unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            // splitmix64 seeding
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_[4];
};

struct PLTestFunction {
    Vec slope;  // H
    Vec anchor; // q
    double operator()(const Vec& xi) const {
        return std::max(0.0, slope.dot(xi - anchor));
    }
};

// Membership gate for C_{p_o}: q in the closed polytope and u(p_o) = 0.
inline PLTestFunction make_pl_test(const Vec& H, const Vec& q, const Vec& p0,
                                   const Polytope& P) {
    if (!P.contains(q, 1e-12))
        throw std::invalid_argument("PL anchor q lies outside the closed polytope");
    if (H.dot(p0 - q) > 1e-12)
        throw std::invalid_argument("PL test function violates normalization u(p_o) = 0");
    return PLTestFunction{H, q};
}

struct CalibrationError : std::runtime_error {
    double residual;
    explicit CalibrationError(double r)
        : std::runtime_error("L_A does not vanish on affine functions; "
                             "calibrate A before testing stability"),
          residual(r) {}
};

// L_A(u) / int_bd u D dsigma on the crease-refined quadratures.
template <class A>
double stability_ratio(const PLTestFunction& u, A&& density, const BundleData& B,
                       const Grid& G, const BoundaryQuadrature& bq,
                       double denom_floor = 1e-12) {
    FunctionalReport rep = L_A_functional(u, density, B, G, bq);
    if (rep.boundary <= denom_floor)
        throw std::domain_error("degenerate PL test function: zero boundary mass");
    return rep.L_A / rep.boundary;
}

struct StabilityReport {
    std::uint64_t seed = 0;
    int samples = 0;          // accepted probe functions
    int excluded = 0;         // accepted but boundary mass below tolerance
    double lambda_hat = std::numeric_limits<double>::infinity();
    bool negative_found = false;
    Vec witness_H, witness_q;
    double witness_ratio = 0.0;
    Vec p0;
    int resolution = 0;
};

// Draw (H, q) uniformly, filter by the C_{p_o} normalization, report the
// minimum ratio and any nonpositive witness. The quadratures are built once
// at twice the requested resolution (the crease rule). Every reported
// quantity is invariant under scaling H, so the slope box half-width only
// affects the degenerate-slope rejection.
inline StabilityReport falsify_stability(const AffineDensity& A, const Polytope& P,
                                         const BundleData& B, const Vec& p0, int samples,
                                         std::uint64_t seed, int resolution,
                                         double slope_box = 1.0) {
    const double residual = affine_vanishing_residual(A, P, B);
    if (residual > 1e-8) throw CalibrationError(residual);
    if (slope_box <= 0.0) throw std::invalid_argument("slope box must be positive");

    Grid G(P, 2 * resolution);
    BoundaryQuadrature bq = boundary_quadrature(P, 2 * resolution);
    const int n = P.dim();
    Vec lo, hi;
    P.bounding_box(lo, hi);

    StabilityReport rep;
    rep.seed = seed;
    rep.p0 = p0;
    rep.resolution = resolution;
    Rng rng(seed);
    long long attempts = 0;
    const long long max_attempts = 1000LL * samples + 1000;
    while (rep.samples < samples && attempts < max_attempts) {
        ++attempts;
        Vec H(n), q(n);
        for (int j = 0; j < n; ++j) H[j] = rng.uniform(-slope_box, slope_box);
        for (int j = 0; j < n; ++j) q[j] = rng.uniform(lo[j], hi[j]);
        if (H.cwiseAbs().maxCoeff() < 1e-6 * slope_box) continue;
        if (!P.contains(q, 0.0)) continue;
        if (H.dot(p0 - q) > 0.0) continue;
        PLTestFunction u{H, q};
        ++rep.samples;
        FunctionalReport f = L_A_functional(u, A, B, G, bq);
        if (f.boundary <= 1e-12) {
            ++rep.excluded;
            continue;
        }
        double ratio = f.L_A / f.boundary;
        if (ratio <= 0.0) rep.negative_found = true;
        if (ratio < rep.lambda_hat) {
            rep.lambda_hat = ratio;
            rep.witness_H = H;
            rep.witness_q = q;
            rep.witness_ratio = ratio;
        }
    }
    if (rep.samples < samples)
        throw std::runtime_error("stability sampler could not draw enough admissible "
                                 "test functions");
    return rep;
}

} // namespace abreu_forge

#endif
