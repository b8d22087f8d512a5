#pragma once

#include <cstdint>
#include <vector>

namespace herdlab {

// Cardinal rating metric with levels 1..M.
struct RatingScale {
    int M;

    explicit RatingScale(int levels);

    bool operator==(const RatingScale& other) const { return M == other.M; }
};

// A point on the M-simplex. Houses the ground-truth opinion, the aggregated
// historical opinion, initial opinions, and the per-step rating pmfs.
// Construction validates: entries in [0,1], sum within 1e-9 of 1.
class OpinionDistribution {
public:
    OpinionDistribution(std::vector<double> p, RatingScale scale);

    // basis vector e_level: all mass on one level (1-based)
    static OpinionDistribution degenerate(int level, RatingScale scale);
    static OpinionDistribution uniform(RatingScale scale);

    const std::vector<double>& p() const { return p_; }
    double at_level(int level) const { return p_[static_cast<std::size_t>(level - 1)]; }
    const RatingScale& scale() const { return scale_; }
    int M() const { return scale_.M; }

private:
    std::vector<double> p_;
    RatingScale scale_;
};

// Aggregation weight sequence w_i, i >= 1.
//   Unweighted: w_i = 1
//   PowerLaw:   w_i = i^c, c >= 0 (computed as exp(c ln i) to dodge overflow)
//   Custom:     explicit finite sequence, w_1 > 0, all >= 0
class WeightRule {
public:
    enum class Kind { Unweighted, PowerLaw, Custom };

    static WeightRule unweighted();
    static WeightRule power_law(double c);
    static WeightRule custom(std::vector<double> weights);

    Kind kind() const { return kind_; }
    double exponent() const;                    // PowerLaw only
    const std::vector<double>& weights() const; // Custom only

    // w_i for 1-based i; throws std::out_of_range past a Custom sequence.
    double weight(std::uint64_t i) const;
    // largest evaluable index (UINT64_MAX for unbounded kinds)
    std::uint64_t max_index() const;

private:
    WeightRule(Kind kind, double c, std::vector<double> weights);

    Kind kind_;
    double c_ = 0.0;
    std::vector<double> weights_;
};

// Streams the normalized weights w~_i = w_i / sum_{j<=i} w_j in O(1) per
// step. w~_1 == 1 exactly.
class NormalizedWeightStream {
public:
    explicit NormalizedWeightStream(WeightRule rule);

    // normalized weight of the next index (first call yields i = 1)
    double next();
    std::uint64_t index() const { return i_; } // last index emitted, 0 before first next()

private:
    WeightRule rule_;
    std::uint64_t i_ = 0;
    double cum_ = 0.0;
};

// O(i) spot evaluation of w~_i.
double normalized_weight(const WeightRule& rule, std::uint64_t i);

// Chronological ratings R_1..R_N with per-index misbehavior flags.
class RatingSequence {
public:
    RatingSequence(RatingScale scale, std::vector<int> ratings, std::vector<bool> injected);
    RatingSequence(RatingScale scale, std::vector<int> ratings); // all honest

    std::size_t size() const { return ratings_.size(); }
    int rating(std::size_t pos) const { return ratings_[pos]; } // 0-based position, 1-based level
    bool injected(std::size_t pos) const { return injected_[pos]; }
    const std::vector<int>& ratings() const { return ratings_; }
    const std::vector<bool>& injected_flags() const { return injected_; }
    const RatingScale& scale() const { return scale_; }

private:
    RatingScale scale_;
    std::vector<int> ratings_;
    std::vector<bool> injected_;
};

// Weighted empirical opinion of the whole sequence: entry m is
// sum_j w_j 1{R_j = m} / sum_j w_j. Throws on an empty sequence (the
// aggregate before the first rating is undefined).
OpinionDistribution aggregate(const RatingSequence& ratings, const WeightRule& rule);

// One incremental update: beta' = (1 - w~) beta + w~ e_rating.
OpinionDistribution aggregate_step(const OpinionDistribution& beta, int next_rating,
                                   double w_tilde_next);

// Hot-path variant of aggregate_step operating in place on a raw vector with
// a 0-based level index and no validation. The simulator and the likelihood
// walk use this so their arithmetic is bit-identical to aggregate_step.
inline void aggregate_step_in_place(std::vector<double>& beta, std::size_t level0,
                                    double w_tilde_next) {
    const double keep = 1.0 - w_tilde_next;
    for (double& b : beta) b *= keep;
    beta[level0] += w_tilde_next;
}

// Average scoring rule: sum_m m p_m, clamped to [1, M] against float spill.
double average_score(const OpinionDistribution& dist);

// Majority rule: argmax_m p_m; ties go to the lowest level.
int majority(const OpinionDistribution& dist);

enum class ConvergenceVerdict { SatisfiedAnalytic, ViolatedAnalytic, HeuristicPass, HeuristicFail };

// Checks the summability conditions on w~ that make the aggregate converge.
// Unweighted and PowerLaw(c >= 0) satisfy them analytically (w~_i behaves as
// (c+1)/i). Custom sequences get a numeric heuristic over
// H' = min(horizon, sequence length), H' >= 100: the partial sum of w~ must
// exceed 0.5 ln(H') AND the tail sum of w~^2 past H'/2 must stay below 10%
// of the head. ViolatedAnalytic is reserved for rule families with a proof
// of divergence; none of the current kinds map to it.
ConvergenceVerdict check_convergence_condition(const WeightRule& rule, std::uint64_t horizon);

} // namespace herdlab
