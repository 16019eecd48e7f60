// Shared fixtures: the polytopes every suite exercises.
#ifndef ABREU_FORGE_TEST_HELPERS_HPP
#define ABREU_FORGE_TEST_HELPERS_HPP

#include "abreu_forge/polytope.hpp"

namespace af_test {

using namespace abreu_forge;

inline Polytope interval(double lo = 0.0, double hi = 1.0) {
    std::vector<Facet> f;
    f.push_back({{1}, Rational::from_double(lo)});
    f.push_back({{-1}, Rational::from_double(-hi)});
    return Polytope::from_facets(1, std::move(f));
}

inline Polytope unit_square() {
    std::vector<Facet> f;
    f.push_back({{1, 0}, Rational(0)});
    f.push_back({{0, 1}, Rational(0)});
    f.push_back({{-1, 0}, Rational(-1)});
    f.push_back({{0, -1}, Rational(-1)});
    return Polytope::from_facets(2, std::move(f));
}

inline Polytope simplex2() {
    std::vector<Facet> f;
    f.push_back({{1, 0}, Rational(0)});
    f.push_back({{0, 1}, Rational(0)});
    f.push_back({{-1, -1}, Rational(-1)});
    return Polytope::from_facets(2, std::move(f));
}

// square [a, a+s]^2, for positive-orthant bundle tests
inline Polytope shifted_square(double a, double s) {
    std::vector<Facet> f;
    f.push_back({{1, 0}, Rational::from_double(a)});
    f.push_back({{0, 1}, Rational::from_double(a)});
    f.push_back({{-1, 0}, Rational::from_double(-(a + s))});
    f.push_back({{0, -1}, Rational::from_double(-(a + s))});
    return Polytope::from_facets(2, std::move(f));
}

} // namespace af_test

#endif
