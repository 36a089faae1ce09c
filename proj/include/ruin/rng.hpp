#pragma once

#include <cstdint>
#include <random>

namespace ruin {

// splitmix64: used both as a stream-key mixer and to expand (seed, index)
// pairs into independent engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic per-path random stream keyed on (seed, stream_index).
// Results are independent of thread scheduling because every path owns
// its stream from construction.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t key = seed ^ (0xA0761D6478BD642FULL * (stream_index + 1));
        const std::uint64_t s0 = splitmix64(key);
        const std::uint64_t s1 = splitmix64(key);
        std::seed_seq sseq{static_cast<std::uint32_t>(s0), static_cast<std::uint32_t>(s0 >> 32),
                           static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s1 >> 32)};
        engine_.seed(sseq);
    }

    double uniform() { return unif_(engine_); }
    double normal() { return norm_(engine_); }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace ruin
