#include "herdlab/herding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "herdlab/rng.hpp"

namespace herdlab {

RateSchedule RateSchedule::constant(double value) { return RateSchedule(value, 0.0); }

RateSchedule RateSchedule::ramp(double base, double ramp_coeff) {
    return RateSchedule(base, ramp_coeff);
}

double RateSchedule::operator()(std::uint64_t i) const {
    if (i < 1) throw std::out_of_range("rate schedules are indexed from 1");
    return base_ + ramp_ * (1.0 - 1.0 / static_cast<double>(i));
}

double RateSchedule::inf() const { return ramp_ >= 0.0 ? base_ : base_ + ramp_; }
double RateSchedule::sup() const { return ramp_ >= 0.0 ? base_ + ramp_ : base_; }

namespace {

void check_rate_range(const RateSchedule& s, const char* name) {
    if (s.inf() < 0.0 || s.sup() > 1.0)
        throw std::domain_error(std::string(name) + " sequence leaves [0, 1]: range [" +
                                std::to_string(s.inf()) + ", " + std::to_string(s.sup()) + "]");
}

} // namespace

HerdingParams::HerdingParams(OpinionDistribution alpha, RateSchedule gamma, RateSchedule eta,
                             WeightRule rule)
    : alpha_(std::move(alpha)), gamma_(gamma), eta_(eta), rule_(std::move(rule)) {
    check_rate_range(gamma_, "gamma");
    check_rate_range(eta_, "eta");
}

MisbehaviorSpec::MisbehaviorSpec(int m_tilde, std::vector<std::uint64_t> indices)
    : m_tilde_(m_tilde), indices_(std::move(indices)) {
    for (std::size_t t = 0; t < indices_.size(); ++t) {
        if (indices_[t] < 1)
            throw std::invalid_argument("misbehavior indices are 1-based rating positions");
        if (t > 0 && indices_[t] <= indices_[t - 1])
            throw std::invalid_argument("misbehavior indices must be strictly increasing");
    }
}

OpinionDistribution initial_opinion(const OpinionDistribution& beta,
                                    const OpinionDistribution& alpha, double eta) {
    if (!(beta.scale() == alpha.scale()))
        throw std::invalid_argument("opinion distributions live on different scales");
    if (eta < 0.0 || eta > 1.0) throw std::domain_error("eta outside [0, 1]");
    std::vector<double> p(beta.p().size());
    for (std::size_t m = 0; m < p.size(); ++m)
        p[m] = (1.0 - eta) * beta.p()[m] + eta * alpha.p()[m];
    return OpinionDistribution(std::move(p), beta.scale());
}

OpinionDistribution next_rating_pmf(const OpinionDistribution& theta_prev,
                                    const OpinionDistribution& alpha, double gamma_prev) {
    if (!(theta_prev.scale() == alpha.scale()))
        throw std::invalid_argument("opinion distributions live on different scales");
    if (gamma_prev < 0.0 || gamma_prev > 1.0) throw std::domain_error("gamma outside [0, 1]");
    std::vector<double> p(theta_prev.p().size());
    for (std::size_t m = 0; m < p.size(); ++m)
        p[m] = gamma_prev * theta_prev.p()[m] + (1.0 - gamma_prev) * alpha.p()[m];
    return OpinionDistribution(std::move(p), theta_prev.scale());
}

RatingSequence simulate(const HerdingParams& params, std::uint64_t n, std::uint64_t seed,
                        const MisbehaviorSpec* misbehavior) {
    if (n < 1) throw std::invalid_argument("simulation length must be positive");
    const int M = params.scale().M;
    if (misbehavior) {
        if (misbehavior->m_tilde() < 1 || misbehavior->m_tilde() > M)
            throw std::invalid_argument("injected rating level outside the scale");
        if (misbehavior->last_index() > n)
            throw std::invalid_argument("misbehavior index beyond the simulation length");
    }

    const std::vector<double>& alpha = params.alpha().p();
    SplitMix64 gen(seed);
    NormalizedWeightStream wstream(params.rule());

    std::vector<int> out;
    std::vector<bool> flags;
    out.reserve(static_cast<std::size_t>(n));
    flags.reserve(static_cast<std::size_t>(n));

    std::vector<double> beta(alpha.size(), 0.0);
    std::vector<double> theta = alpha; // theta before the first rating is alpha itself
    std::vector<double> pmf(alpha.size());

    std::size_t next_inj = 0;
    const std::vector<std::uint64_t>* inj =
        misbehavior ? &misbehavior->indices() : nullptr;

    for (std::uint64_t i = 1; i <= n; ++i) {
        std::size_t level0;
        bool flagged = false;
        if (inj && next_inj < inj->size() && (*inj)[next_inj] == i) {
            level0 = static_cast<std::size_t>(misbehavior->m_tilde() - 1); // no draw consumed
            flagged = true;
            ++next_inj;
        } else if (i == 1) {
            level0 = draw_categorical(gen, alpha);
        } else {
            const double g = params.gamma()(i - 1);
            for (std::size_t m = 0; m < pmf.size(); ++m)
                pmf[m] = g * theta[m] + (1.0 - g) * alpha[m];
            level0 = draw_categorical(gen, pmf);
        }
        out.push_back(static_cast<int>(level0) + 1);
        flags.push_back(flagged);

        aggregate_step_in_place(beta, level0, wstream.next());
        const double e = params.eta()(i);
        for (std::size_t m = 0; m < theta.size(); ++m)
            theta[m] = (1.0 - e) * beta[m] + e * alpha[m];
    }

    return RatingSequence(params.scale(), std::move(out), std::move(flags));
}

} // namespace herdlab
