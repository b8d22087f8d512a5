#include "herdlab/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace herdlab {

namespace {
constexpr double kSimplexTol = 1e-9;
}

RatingScale::RatingScale(int levels) : M(levels) {
    if (levels < 2) throw std::invalid_argument("rating scale needs at least 2 levels");
}

OpinionDistribution::OpinionDistribution(std::vector<double> p, RatingScale scale)
    : p_(std::move(p)), scale_(scale) {
    if (p_.size() != static_cast<std::size_t>(scale_.M))
        throw std::invalid_argument("opinion vector length does not match the rating scale");
    double sum = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0) || v > 1.0 + kSimplexTol)
            throw std::invalid_argument("opinion entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw std::invalid_argument("opinion entries sum to " + std::to_string(sum) +
                                    ", not 1 within 1e-9");
}

OpinionDistribution OpinionDistribution::degenerate(int level, RatingScale scale) {
    if (level < 1 || level > scale.M) throw std::invalid_argument("level outside the rating scale");
    std::vector<double> p(static_cast<std::size_t>(scale.M), 0.0);
    p[static_cast<std::size_t>(level - 1)] = 1.0;
    return OpinionDistribution(std::move(p), scale);
}

OpinionDistribution OpinionDistribution::uniform(RatingScale scale) {
    std::vector<double> p(static_cast<std::size_t>(scale.M), 1.0 / scale.M);
    return OpinionDistribution(std::move(p), scale);
}

WeightRule::WeightRule(Kind kind, double c, std::vector<double> weights)
    : kind_(kind), c_(c), weights_(std::move(weights)) {}

WeightRule WeightRule::unweighted() { return WeightRule(Kind::Unweighted, 0.0, {}); }

WeightRule WeightRule::power_law(double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("power-law exponent must be >= 0");
    return WeightRule(Kind::PowerLaw, c, {});
}

WeightRule WeightRule::custom(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("custom weight sequence is empty");
    if (!(weights.front() > 0.0))
        throw std::invalid_argument("custom weights need w_1 > 0");
    for (double w : weights)
        if (!(w >= 0.0)) throw std::invalid_argument("custom weights must be >= 0");
    return WeightRule(Kind::Custom, 0.0, std::move(weights));
}

double WeightRule::exponent() const {
    if (kind_ != Kind::PowerLaw) throw std::logic_error("exponent() on a non-power-law rule");
    return c_;
}

const std::vector<double>& WeightRule::weights() const {
    if (kind_ != Kind::Custom) throw std::logic_error("weights() on a non-custom rule");
    return weights_;
}

double WeightRule::weight(std::uint64_t i) const {
    if (i < 1) throw std::out_of_range("weight index starts at 1");
    switch (kind_) {
    case Kind::Unweighted:
        return 1.0;
    case Kind::PowerLaw:
        // exp(c ln i) instead of pow: identical value, no integer-power
        // special cases, and explicit about the overflow-avoidance intent
        return std::exp(c_ * std::log(static_cast<double>(i)));
    case Kind::Custom:
        if (i > weights_.size())
            throw std::out_of_range("index " + std::to_string(i) +
                                    " beyond the custom weight sequence");
        return weights_[static_cast<std::size_t>(i - 1)];
    }
    throw std::logic_error("unreachable weight rule kind");
}

std::uint64_t WeightRule::max_index() const {
    return kind_ == Kind::Custom ? weights_.size() : std::numeric_limits<std::uint64_t>::max();
}

NormalizedWeightStream::NormalizedWeightStream(WeightRule rule) : rule_(std::move(rule)) {}

double NormalizedWeightStream::next() {
    ++i_;
    const double w = rule_.weight(i_);
    cum_ += w;
    if (!(cum_ > 0.0)) throw std::domain_error("cumulative weight is not positive");
    return w / cum_;
}

double normalized_weight(const WeightRule& rule, std::uint64_t i) {
    if (i < 1) throw std::out_of_range("weight index starts at 1");
    NormalizedWeightStream stream(rule);
    double wt = 0.0;
    for (std::uint64_t j = 1; j <= i; ++j) wt = stream.next();
    return wt;
}

RatingSequence::RatingSequence(RatingScale scale, std::vector<int> ratings,
                               std::vector<bool> injected)
    : scale_(scale), ratings_(std::move(ratings)), injected_(std::move(injected)) {
    if (injected_.size() != ratings_.size())
        throw std::invalid_argument("misbehavior flags length does not match the ratings");
    for (int r : ratings_)
        if (r < 1 || r > scale_.M)
            throw std::invalid_argument("rating " + std::to_string(r) + " outside 1.." +
                                        std::to_string(scale_.M));
}

RatingSequence::RatingSequence(RatingScale scale, std::vector<int> ratings)
    : scale_(scale), ratings_(std::move(ratings)), injected_(ratings_.size(), false) {
    for (int r : ratings_)
        if (r < 1 || r > scale_.M)
            throw std::invalid_argument("rating " + std::to_string(r) + " outside 1.." +
                                        std::to_string(scale_.M));
}

OpinionDistribution aggregate(const RatingSequence& ratings, const WeightRule& rule) {
    if (ratings.size() == 0)
        throw std::invalid_argument("cannot aggregate an empty rating sequence");
    std::vector<double> mass(static_cast<std::size_t>(ratings.scale().M), 0.0);
    double total = 0.0;
    for (std::size_t pos = 0; pos < ratings.size(); ++pos) {
        const double w = rule.weight(static_cast<std::uint64_t>(pos + 1));
        mass[static_cast<std::size_t>(ratings.rating(pos) - 1)] += w;
        total += w;
    }
    for (double& m : mass) m /= total;
    return OpinionDistribution(std::move(mass), ratings.scale());
}

OpinionDistribution aggregate_step(const OpinionDistribution& beta, int next_rating,
                                   double w_tilde_next) {
    if (!(w_tilde_next > 0.0) || w_tilde_next > 1.0)
        throw std::domain_error("normalized weight must lie in (0, 1]");
    if (next_rating < 1 || next_rating > beta.M())
        throw std::invalid_argument("rating outside the scale");
    std::vector<double> p = beta.p();
    aggregate_step_in_place(p, static_cast<std::size_t>(next_rating - 1), w_tilde_next);
    return OpinionDistribution(std::move(p), beta.scale());
}

double average_score(const OpinionDistribution& dist) {
    double s = 0.0;
    for (int m = 1; m <= dist.M(); ++m) s += m * dist.at_level(m);
    if (s < 1.0) s = 1.0;
    if (s > dist.M()) s = dist.M();
    return s;
}

int majority(const OpinionDistribution& dist) {
    int best = 1;
    for (int m = 2; m <= dist.M(); ++m)
        if (dist.at_level(m) > dist.at_level(best)) best = m;
    return best;
}

ConvergenceVerdict check_convergence_condition(const WeightRule& rule, std::uint64_t horizon) {
    if (rule.kind() != WeightRule::Kind::Custom) return ConvergenceVerdict::SatisfiedAnalytic;

    const std::uint64_t h = std::min<std::uint64_t>(horizon, rule.max_index());
    if (h < 100)
        throw std::invalid_argument("heuristic convergence check needs a horizon of at least 100");

    NormalizedWeightStream stream(rule);
    const std::uint64_t head_end = h / 2;
    double sum_wt = 0.0, head_sq = 0.0, tail_sq = 0.0;
    for (std::uint64_t i = 1; i <= h; ++i) {
        const double wt = stream.next();
        sum_wt += wt;
        (i <= head_end ? head_sq : tail_sq) += wt * wt;
    }

    const bool grows = sum_wt > 0.5 * std::log(static_cast<double>(h));
    const bool plateaus = tail_sq < 0.1 * head_sq;
    return (grows && plateaus) ? ConvergenceVerdict::HeuristicPass
                               : ConvergenceVerdict::HeuristicFail;
}

} // namespace herdlab
