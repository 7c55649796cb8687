#include "ldpd/rng.hpp"

#include <cmath>
#include <sstream>

namespace ldpd {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::derive(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
    Rng rng;
    rng.engine_.seed(seq);
    return rng;
}

double Rng::uniform() {
    // 53-bit mantissa, shifted by half an ulp so both endpoints are excluded.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

double Rng::log_gamma(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape));
    // G(shape) = G(shape + 1) * U^(1/shape)
    const double g = gamma(shape + 1.0);
    return std::log(g) + std::log(uniform()) / shape;
}

double Rng::exponential() { return -std::log(uniform()); }

std::size_t Rng::index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_ << ' ' << normal_;
    return out.str();
}

void Rng::deserialize(const std::string& text) {
    std::istringstream in(text);
    in >> engine_ >> normal_;
}

bool Rng::operator==(const Rng& other) const { return engine_ == other.engine_ && normal_ == other.normal_; }

}  // namespace ldpd
