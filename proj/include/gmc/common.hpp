// common.hpp — error taxonomy, deterministic RNG, hashing, small shared helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gmc {

// Exit-code taxonomy: DataError -> 1, ConfigError -> 2, InternalError -> 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Deterministic RNG. Wraps mt19937_64 but derives doubles/ints/gaussians from
/// raw engine words only, so streams are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // splitmix64 warm-up so nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next_raw();
    }

    std::uint64_t next_raw() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_raw() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0,n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return next_raw() % n; }

    int range(int lo, int hi_inclusive) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    /// Standard normal via Box-Muller (one value per call; deterministic).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives a per-item seed from a base seed and an item identifier.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view item_id) {
    return fnv1a64(item_id, base ^ 0x9e3779b97f4a7c15ULL);
}

std::string to_hex(std::uint64_t v);

/// Thread count from the GMCNET_THREADS env var; 0 or unset means auto.
int thread_count();

/// Runs fn(i) for i in [0,n). Parallel when thread_count() allows; order of
/// side effects across i must not matter to the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Writes bytes to a temp file in the target directory, then renames atomically.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace gmc
