#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ldpd {

/// Random stream owned by exactly one worker. Wraps a 64-bit Mersenne twister
/// together with the normal generator so the full stream state can be saved
/// and restored for bit-identical resumption.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1);

    /// Independent stream for worker `index`, derived from a master seed.
    static Rng derive(std::uint64_t master_seed, std::uint64_t index);

    double uniform();          // (0, 1), never returns 0 or 1
    double normal();           // N(0, 1)
    double gamma(double shape);  // Gamma(shape, 1)
    double log_gamma(double shape);  // log of a Gamma(shape, 1) draw, stable for small shape
    double exponential();      // Exp(1)
    std::size_t index(std::size_t n);  // uniform on {0, ..., n-1}

    std::mt19937_64& engine() { return engine_; }

    std::string serialize() const;
    void deserialize(const std::string& text);

    bool operator==(const Rng& other) const;

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ldpd
