#pragma once

#include <cstdint>
#include <vector>

#include "herdlab/core.hpp"

namespace herdlab {

// Per-index rate gamma_i or eta_i of the form base + ramp*(1 - 1/i).
// ramp = 0 gives a constant; ramp > 0 gives the ramp-up sequences used in
// illustrations, e.g. 0.8*(1 - 1/i).
class RateSchedule {
public:
    static RateSchedule constant(double value);
    static RateSchedule ramp(double base, double ramp_coeff);

    double operator()(std::uint64_t i) const; // value at index i >= 1
    double inf() const;                       // infimum over i >= 1
    double sup() const;                       // supremum (limit) over i >= 1
    double base() const { return base_; }
    double ramp_coeff() const { return ramp_; }
    bool is_constant() const { return ramp_ == 0.0; }

private:
    RateSchedule(double base, double ramp_coeff) : base_(base), ramp_(ramp_coeff) {}

    double base_;
    double ramp_;
};

// Full generative model: ground truth alpha, herding strengths gamma_i,
// review-selection accuracies eta_i, aggregation rule w.
//
// Validation allows gamma_i in [0,1] inclusive. The closed-form speed
// results assume sup gamma < 1, but the generative process itself is well
// defined at gamma = 1 (a pure cascade), and that case is exercised by the
// all-ones example, so it is not rejected here.
class HerdingParams {
public:
    HerdingParams(OpinionDistribution alpha, RateSchedule gamma, RateSchedule eta,
                  WeightRule rule);

    const OpinionDistribution& alpha() const { return alpha_; }
    const RateSchedule& gamma() const { return gamma_; }
    const RateSchedule& eta() const { return eta_; }
    const WeightRule& rule() const { return rule_; }
    const RatingScale& scale() const { return alpha_.scale(); }

private:
    OpinionDistribution alpha_;
    RateSchedule gamma_;
    RateSchedule eta_;
    WeightRule rule_;
};

// Injection of k fixed ratings m_tilde at 1-based positions `indices`
// (strictly increasing). k may be zero (empty injection).
class MisbehaviorSpec {
public:
    MisbehaviorSpec(int m_tilde, std::vector<std::uint64_t> indices);

    std::size_t k() const { return indices_.size(); }
    int m_tilde() const { return m_tilde_; }
    const std::vector<std::uint64_t>& indices() const { return indices_; }
    std::uint64_t last_index() const { return indices_.empty() ? 0 : indices_.back(); }

private:
    int m_tilde_;
    std::vector<std::uint64_t> indices_;
};

// theta = (1 - eta) beta + eta alpha: the opinion a new rater forms from the
// displayed aggregate plus selected reviews.
OpinionDistribution initial_opinion(const OpinionDistribution& beta,
                                    const OpinionDistribution& alpha, double eta);

// pmf of the next rating: gamma theta + (1 - gamma) alpha.
OpinionDistribution next_rating_pmf(const OpinionDistribution& theta_prev,
                                    const OpinionDistribution& alpha, double gamma_prev);

// Draws a length-n rating sequence from the model. The first rating is drawn
// straight from alpha. Injected positions are forced to m_tilde, flagged,
// and consume no PRNG draw; they still enter the aggregate and therefore
// bias subsequent honest draws, exactly like honest ratings do.
// Deterministic in (params, n, seed, misbehavior).
RatingSequence simulate(const HerdingParams& params, std::uint64_t n, std::uint64_t seed,
                        const MisbehaviorSpec* misbehavior = nullptr);

} // namespace herdlab
