// Shared typedefs, the thread pool used for per-point field loops, and the
// deterministic pairwise reduction that every integral in the library uses.
#ifndef ABREU_FORGE_COMMON_HPP
#define ABREU_FORGE_COMMON_HPP

#include <Eigen/Dense>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace abreu_forge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline int max_threads() {
    static const int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("ABREU_FORGE_THREADS")) {
            int cap = std::atoi(env);
            if (cap >= 1 && cap < hw) hw = cap;
        }
        return hw;
    }();
    return n;
}

// Chunked parallel loop. Each index writes only its own slot, so the result
// is identical for any thread count.
template <class F>
void parallel_for(std::size_t count, F&& body) {
    const int nthreads = max_threads();
    if (nthreads == 1 || count < 256) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(nthreads));
    std::size_t chunk = (count + static_cast<std::size_t>(nthreads) - 1) /
                        static_cast<std::size_t>(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        std::size_t lo = static_cast<std::size_t>(t) * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& w : workers) w.join();
}

// Pairwise tree summation over a fixed ordering; reduction order does not
// depend on the thread count, so emitted numbers are reproducible bytes.
inline double pairwise_sum(const double* data, std::size_t count) {
    if (count <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += data[i];
        return s;
    }
    std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

inline double pairwise_sum(const std::vector<double>& terms) {
    return terms.empty() ? 0.0 : pairwise_sum(terms.data(), terms.size());
}

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace abreu_forge

#endif
