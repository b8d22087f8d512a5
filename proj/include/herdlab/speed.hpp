#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "herdlab/herding.hpp"

namespace herdlab {

// Default cap for index searches (phi_inverse and the minimum-rating bounds).
inline constexpr std::uint64_t kDefaultHorizon = 1'000'000;

// log of the shrink factor product
//   varphi_j = prod_{l=1..j} (1 - w~_{l+1} (1 - gamma_l (1 - eta_l))),
// with varphi_0 = 1. Kept in log space throughout: varphi decays roughly
// like 1/j and its square underflows quickly.
double log_varphi(const HerdingParams& params, std::uint64_t j);
double varphi(const HerdingParams& params, std::uint64_t j);

// Convergence-speed exponent: the tail of the aggregate obeys
//   P[|beta_{i,m} - alpha_m| > eps] <= 2 exp(-phi_i eps^2),
// with phi_i = 1 / ((varphi_{i-1}^2 / 2) sum_{j=1..i} w~_j^2 / varphi_{j-1}^2).
// Larger is faster. For the unweighted no-herding case phi_i = 2i.
double phi(const HerdingParams& params, std::uint64_t i);

// min(1, 2 exp(-phi_i eps^2)); eps must lie in (0, 1].
double tail_bound(const HerdingParams& params, std::uint64_t i, double epsilon);

// Speed exponent under injected misbehavior: 0 for i <= last injected index
// i_k; beyond that, the degraded exponent
//   1{rho <= 1} (1 - rho)^2 / ((varphi_{i-1}^2 / 2) sum_{j=i_k+1..i} w~_j^2 / varphi_{j-1}^2)
// where rho = varphi_{i-1} / (eps varphi_{i_k - 1}) and varphi_{-1} is taken
// as +inf, so an empty injection reproduces phi exactly.
double phi_misbehavior(const HerdingParams& params, std::uint64_t i, const MisbehaviorSpec& spec,
                       double epsilon);

// Dense misbehavior-speed table for i = 1..horizon in one O(horizon) pass
// (per-index phi_misbehavior calls would cost O(horizon^2)). Entry r holds
// the value at i = r + 1.
std::vector<double> phi_misbehavior_curve(const HerdingParams& params, const MisbehaviorSpec& spec,
                                          double epsilon, std::uint64_t horizon);

// Smallest i <= horizon with phi_i >= x, or nullopt if the horizon is hit
// first. phi_i comes out of a sequential recurrence, so this is a forward
// scan with early exit (random access would cost O(i) anyway); the result is
// the smallest qualifying index whether or not phi happens to be monotone.
std::optional<std::uint64_t> phi_inverse(const HerdingParams& params, double x,
                                         std::uint64_t horizon = kDefaultHorizon);

// Minimum number of ratings for the average score of the aggregate to sit
// within epsilon of the truth with probability >= 1 - delta:
// the phi_inverse of M^2 (M+1)^2 / (4 eps^2) * ln(2M / delta).
std::optional<std::uint64_t> min_ratings_average(const HerdingParams& params, double epsilon,
                                                 double delta,
                                                 std::uint64_t horizon = kDefaultHorizon);

// Minimum number of ratings for the majority level of the aggregate to match
// the true majority with probability >= 1 - delta:
// the phi_inverse of M^2 (M+1)^2 / gap^2 * ln(2M / delta), where gap is the
// margin between the largest and second-largest entries of alpha. Note the
// stated bound carries no factor 4 in the denominator, unlike the average
// branch. Requires a strictly positive gap.
std::optional<std::uint64_t> min_ratings_majority(const HerdingParams& params,
                                                  const OpinionDistribution& alpha, double delta,
                                                  std::uint64_t horizon = kDefaultHorizon);

// Dense speed table for i = 1..horizon, built in one O(horizon) pass.
// Row r holds i = r + 1, phi_i, and ln varphi_r, so the log_varphi vector is
// indexed by the product subscript itself (log_varphi[0] == 0 always).
struct SpeedCurve {
    std::vector<std::uint64_t> index;
    std::vector<double> phi;
    std::vector<double> log_varphi;

    std::size_t size() const { return index.size(); }
};

SpeedCurve speed_curve(const HerdingParams& params, std::uint64_t horizon);

// CSV with header i,phi,log_varphi.
void write_csv(const SpeedCurve& curve, std::ostream& out);

} // namespace herdlab
