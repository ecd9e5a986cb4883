#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coveq {

// splitmix64 finalizer; the fixed mixing step behind seed derivation.
std::uint64_t mix64(std::uint64_t z);

// Child seed for a unit of work: the master seed mixed with each token in
// order. Same (master, tokens) always gives the same child, so parallel
// schedules cannot change results.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tokens);

// Seeded stream: mt19937_64 (a standard-specified sequence) with explicit
// uniform and Box-Muller normal transforms, so every drawn value is
// reproducible across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe under log.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached and returned on the next call.
    double normal();

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace coveq
