#ifndef POLYROTH_COMMON_HPP
#define POLYROTH_COMMON_HPP

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace polyroth {

inline constexpr const char* kVersion = "polyroth 0.1";

// Violated operation precondition; the CLI maps this to exit code 2.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A quadrature or refinement loop exhausted its budget; CLI exit code 3.
struct unresolved_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal consistency check failed; CLI exit code 4.
struct check_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed integer interval [lo, hi].
struct IntRange {
    int lo = 0;
    int hi = 0;
    bool contains(int k) const { return k >= lo && k <= hi; }
    int length() const { return hi >= lo ? hi - lo + 1 : 0; }
};

inline unsigned worker_count() {
    if (const char* env = std::getenv("POLYROTH_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

// Static partition of [0, count) over worker threads. Results must be written
// to caller-owned per-index slots; the merge is then deterministic regardless
// of scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned workers = worker_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    workers = std::min<std::size_t>(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, a, b); used so that sweep workers never share
// generator state and reruns are reproducible.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
    return std::mt19937_64(s);
}

}  // namespace polyroth

#endif  // POLYROTH_COMMON_HPP
