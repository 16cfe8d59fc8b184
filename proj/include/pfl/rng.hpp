#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pfl {

// Named RNG streams fanned out from the single run seed. Adding a new
// stream kind never perturbs draws made on existing streams.
enum class Stream : std::uint64_t {
    Init = 1,       // model initialization, one sub-stream per model index
    Partition = 2,  // data partitioner
    Synthetic = 3,  // synthetic dataset generation
    Round = 4,      // per-client per-round training (selection + shuffles)
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t x = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
    x = splitmix64(x ^ splitmix64(a + 0x1000000001ULL));
    x = splitmix64(x ^ splitmix64(b + 0x2000000002ULL));
    return x;
}

// Seeded generator with hand-rolled draw primitives so results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Box-Muller; stateless (no cached spare) so draws stay reproducible
    // regardless of interleaving with other draw kinds.
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace pfl
