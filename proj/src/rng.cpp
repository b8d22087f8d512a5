#include "herdlab/rng.hpp"

#include <cmath>

namespace herdlab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
    SplitMix64 gen(master + (k + 1) * 0x9E3779B97F4A7C15ULL);
    return gen.next_u64();
}

std::size_t draw_categorical(SplitMix64& gen, const std::vector<double>& pmf) {
    const double u = gen.next_double();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t m = 0; m < pmf.size(); ++m) {
        if (pmf[m] > 0.0) last_positive = m;
        acc += pmf[m];
        if (u < acc) return m;
    }
    // u landed in the rounding gap past the last positive mass
    return last_positive;
}

std::vector<double> draw_simplex_uniform(SplitMix64& gen, std::size_t m) {
    std::vector<double> p(m);
    double sum = 0.0;
    for (double& v : p) {
        v = -std::log1p(-gen.next_double()); // standard exponential
        sum += v;
    }
    if (!(sum > 0.0)) return std::vector<double>(m, 1.0 / static_cast<double>(m));
    for (double& v : p) v /= sum;
    return p;
}

} // namespace herdlab
