#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "herdlab/core.hpp"

#include <json.hpp>

namespace herdlab {

struct InferenceConfig {
    int restarts = 10;
    int max_iterations = 5000;
    double likelihood_tolerance = 1e-8; // stop when a step improves by less
    double initial_step = 1.0;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double min_step = 1e-12; // line search gives up below this
    double pmf_floor = 1e-12;
    std::uint64_t seed = 0;
};

struct InferenceResult {
    OpinionDistribution alpha_hat;
    double gamma_tilde_hat = 0.0;
    double log_likelihood = 0.0;
    int restarts_run = 0;
    bool converged = false;
};

void to_json(nlohmann::json& j, const InferenceResult& result);

// Likelihood of the observed stream under the effective-herding
// approximation: each rating i >= 2 has pmf
//   g b_{i-1,R_i} + (1 - g) alpha_{R_i},
// where b is the aggregate of the preceding ratings under `rule` and
// g = gamma_tilde is the single effective herding strength. Terms are
// floored at pmf_floor before the log.
//
// The per-transition data (realized level, aggregate mass at that level)
// depends only on (ratings, rule), so it is precomputed once and reused
// across the many (alpha, g) evaluations an optimizer makes. value() and
// gradient() read raw alpha vectors without simplex validation, which the
// finite-difference tests need (they step off the simplex on purpose).
class LikelihoodModel {
public:
    LikelihoodModel(const RatingSequence& ratings, const WeightRule& rule,
                    double pmf_floor = 1e-12);

    double value(const std::vector<double>& alpha, double gamma_tilde) const;
    // d_alpha is resized to M; floor-clamped terms contribute zero gradient.
    void gradient(const std::vector<double>& alpha, double gamma_tilde,
                  std::vector<double>& d_alpha, double& d_gamma_tilde) const;

    std::size_t terms() const { return levels_.size(); } // N - 1
    int M() const { return m_; }

private:
    int m_;
    double floor_;
    std::vector<int> levels_;  // 0-based realized level of rating i, i = 2..N
    std::vector<double> mass_; // aggregate mass at that level just before rating i
};

// Validated wrappers around LikelihoodModel for one-off evaluation.
double log_likelihood(const OpinionDistribution& alpha, double gamma_tilde,
                      const RatingSequence& ratings, const WeightRule& rule,
                      double pmf_floor = 1e-12);

struct LikelihoodGradient {
    std::vector<double> d_alpha;
    double d_gamma_tilde;
};

LikelihoodGradient grad_log_likelihood(const OpinionDistribution& alpha, double gamma_tilde,
                                       const RatingSequence& ratings, const WeightRule& rule,
                                       double pmf_floor = 1e-12);

// Euclidean projection onto the probability simplex (sort-based). Exposed
// for testing against the brute-force support enumeration.
std::vector<double> project_to_simplex(const std::vector<double>& v);

// Multi-start projected gradient ascent on (alpha, gamma_tilde): alpha steps
// are projected back onto the simplex, gamma_tilde is clamped to [0, 1];
// backtracking line search with an Armijo test. Starts draw alpha uniformly
// from the simplex and gamma_tilde from U[0.05, 0.95]. Returns the restart
// with the best likelihood; deterministic given config.seed.
InferenceResult infer(const RatingSequence& ratings, const WeightRule& rule,
                      const InferenceConfig& config = {});

// Relative estimation errors: L1 error of alpha_hat against the truth
// (normalized by |alpha_star|_1 = 1) and |g_hat - g_star| / g_star.
// g_star = 0 has no relative error; that case throws with guidance to report
// the absolute error instead.
std::pair<double, double> relative_errors(const InferenceResult& result,
                                          const OpinionDistribution& alpha_star,
                                          double gamma_tilde_star);

// Per-transition herding strengths that maximize the unapproximated
// likelihood for a FIXED set of initial opinions: the optimum is bang-bang,
//   gamma_i = 0 if theta_{i,R_{i+1}} <= alpha_{R_{i+1}}, else 1,
// because each term is linear in its own gamma_i. thetas[t] is the initial
// opinion preceding rating t + 2; at least N - 1 of them are required.
std::vector<int> optimal_gamma_witness(const OpinionDistribution& alpha,
                                       const std::vector<OpinionDistribution>& thetas,
                                       const RatingSequence& ratings);

// Likelihood of the same per-transition model at an arbitrary gamma vector
// (entries in [0, 1]); used to verify the witness dominates interior points.
double per_index_log_likelihood(const OpinionDistribution& alpha,
                                const std::vector<OpinionDistribution>& thetas,
                                const RatingSequence& ratings, const std::vector<double>& gammas,
                                double pmf_floor = 1e-12);

} // namespace herdlab
