#ifndef GRIDSEQ_CORE_HPP
#define GRIDSEQ_CORE_HPP

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gridseq {

// ---------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes (usage/config -> 1,
// numerical divergence -> 2, I/O corruption -> 3).
// ---------------------------------------------------------------------
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Additive mask sentinel standing in for -inf. Large enough that
// exp(score + sentinel) underflows to exactly 0, small enough that it
// never produces inf/NaN when added to finite attention scores.
inline constexpr double kMaskSentinel = -1e30;
inline constexpr double kMaskDetect = -0.5e30;

inline bool is_masked(double v) { return v <= kMaskDetect; }

// ---------------------------------------------------------------------
// RNG. One global engine type everywhere; substreams are derived by
// splitmix-style hashing of (seed, index) so per-item work is
// order-independent.
// ---------------------------------------------------------------------
using Rng = std::mt19937_64;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
    return Rng(mix_seed(seed, index));
}

// ---------------------------------------------------------------------
// Worker pool bound. GRIDSEQ_THREADS caps parallelism; results must be
// order-independent (each index owns its output slot).
// ---------------------------------------------------------------------
inline unsigned worker_count() {
    if (const char* env = std::getenv("GRIDSEQ_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------
// Little-endian binary I/O helpers for the TSATRAJ1 / TSACKPT1 formats.
// Host is assumed little-endian (checked once at startup by the CLI).
// ---------------------------------------------------------------------
template <class T>
void write_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError(std::string("truncated read: ") + what);
    return v;
}

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const char* what) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw IoError(std::string("truncated read: ") + what);
}

}  // namespace gridseq

#endif  // GRIDSEQ_CORE_HPP
