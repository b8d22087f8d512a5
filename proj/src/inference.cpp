#include "herdlab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "herdlab/rng.hpp"

namespace herdlab {

void to_json(nlohmann::json& j, const InferenceResult& result) {
    j = nlohmann::json{{"alpha_hat", result.alpha_hat.p()},
                       {"gamma_tilde_hat", result.gamma_tilde_hat},
                       {"log_likelihood", result.log_likelihood},
                       {"restarts_run", result.restarts_run},
                       {"converged", result.converged}};
}

LikelihoodModel::LikelihoodModel(const RatingSequence& ratings, const WeightRule& rule,
                                 double pmf_floor)
    : m_(ratings.scale().M), floor_(pmf_floor) {
    if (ratings.size() < 2)
        throw std::invalid_argument("need at least 2 ratings to evaluate the likelihood");
    if (!(pmf_floor > 0.0)) throw std::domain_error("pmf floor must be positive");

    const std::size_t n = ratings.size();
    levels_.reserve(n - 1);
    mass_.reserve(n - 1);

    std::vector<double> beta(static_cast<std::size_t>(m_), 0.0);
    NormalizedWeightStream ws(rule);
    aggregate_step_in_place(beta, static_cast<std::size_t>(ratings.rating(0) - 1), ws.next());
    for (std::size_t pos = 1; pos < n; ++pos) {
        const int lvl0 = ratings.rating(pos) - 1;
        levels_.push_back(lvl0);
        mass_.push_back(beta[static_cast<std::size_t>(lvl0)]);
        aggregate_step_in_place(beta, static_cast<std::size_t>(lvl0), ws.next());
    }
}

double LikelihoodModel::value(const std::vector<double>& alpha, double gamma_tilde) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < levels_.size(); ++t) {
        const double term =
            gamma_tilde * mass_[t] + (1.0 - gamma_tilde) * alpha[static_cast<std::size_t>(levels_[t])];
        sum += std::log(std::max(term, floor_));
    }
    return sum;
}

void LikelihoodModel::gradient(const std::vector<double>& alpha, double gamma_tilde,
                               std::vector<double>& d_alpha, double& d_gamma_tilde) const {
    d_alpha.assign(static_cast<std::size_t>(m_), 0.0);
    d_gamma_tilde = 0.0;
    for (std::size_t t = 0; t < levels_.size(); ++t) {
        const std::size_t lvl = static_cast<std::size_t>(levels_[t]);
        const double a = alpha[lvl];
        const double term = gamma_tilde * mass_[t] + (1.0 - gamma_tilde) * a;
        if (term < floor_) continue; // clamped terms are flat
        const double inv = 1.0 / term;
        d_alpha[lvl] += (1.0 - gamma_tilde) * inv;
        d_gamma_tilde += (mass_[t] - a) * inv;
    }
}

namespace {

void check_likelihood_args(const OpinionDistribution& alpha, double gamma_tilde,
                           const RatingSequence& ratings) {
    if (!(alpha.scale() == ratings.scale()))
        throw std::invalid_argument("alpha lives on a different scale than the ratings");
    if (gamma_tilde < 0.0 || gamma_tilde > 1.0)
        throw std::domain_error("gamma_tilde outside [0, 1]");
}

} // namespace

double log_likelihood(const OpinionDistribution& alpha, double gamma_tilde,
                      const RatingSequence& ratings, const WeightRule& rule, double pmf_floor) {
    check_likelihood_args(alpha, gamma_tilde, ratings);
    return LikelihoodModel(ratings, rule, pmf_floor).value(alpha.p(), gamma_tilde);
}

LikelihoodGradient grad_log_likelihood(const OpinionDistribution& alpha, double gamma_tilde,
                                       const RatingSequence& ratings, const WeightRule& rule,
                                       double pmf_floor) {
    check_likelihood_args(alpha, gamma_tilde, ratings);
    LikelihoodGradient out;
    LikelihoodModel(ratings, rule, pmf_floor).gradient(alpha.p(), gamma_tilde, out.d_alpha,
                                                       out.d_gamma_tilde);
    return out;
}

std::vector<double> project_to_simplex(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("cannot project an empty vector");
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (1.0 - cumulative) / static_cast<double>(j + 1);
        if (u[j] + t > 0.0) tau = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) out[m] = std::max(v[m] + tau, 0.0);
    return out;
}

InferenceResult infer(const RatingSequence& ratings, const WeightRule& rule,
                      const InferenceConfig& config) {
    if (config.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(config.likelihood_tolerance > 0.0) || !(config.min_step > 0.0) ||
        !(config.initial_step > 0.0) || !(config.pmf_floor > 0.0))
        throw std::invalid_argument("inference tolerances must be positive");

    const LikelihoodModel model(ratings, rule, config.pmf_floor);
    const std::size_t M = static_cast<std::size_t>(model.M());
    // raw gradients scale with the number of terms; dividing the step
    // direction by it makes initial_step = 1.0 a sensible first trial
    const double dir_scale = 1.0 / static_cast<double>(model.terms());

    std::vector<double> best_alpha;
    double best_g = 0.0, best_L = 0.0;
    bool best_converged = false, have_best = false;

    std::vector<double> d_alpha, trial(M), trial_proj;
    for (int r = 0; r < config.restarts; ++r) {
        SplitMix64 gen(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        std::vector<double> alpha = draw_simplex_uniform(gen, M);
        double g = 0.05 + 0.9 * gen.next_double();
        double L = model.value(alpha, g);
        double d_g = 0.0;
        model.gradient(alpha, g, d_alpha, d_g);
        bool converged = false;

        for (int it = 0; it < config.max_iterations; ++it) {
            double step = config.initial_step;
            bool accepted = false;
            while (step >= config.min_step) {
                for (std::size_t m = 0; m < M; ++m)
                    trial[m] = alpha[m] + step * dir_scale * d_alpha[m];
                trial_proj = project_to_simplex(trial);
                const double g_trial = std::clamp(g + step * dir_scale * d_g, 0.0, 1.0);
                const double L_trial = model.value(trial_proj, g_trial);

                double slope = d_g * (g_trial - g); // directional derivative along the actual move
                for (std::size_t m = 0; m < M; ++m) slope += d_alpha[m] * (trial_proj[m] - alpha[m]);

                if (L_trial >= L + config.armijo_c * slope && L_trial >= L) {
                    const double improvement = L_trial - L;
                    alpha.swap(trial_proj);
                    g = g_trial;
                    L = L_trial;
                    model.gradient(alpha, g, d_alpha, d_g);
                    accepted = true;
                    if (improvement < config.likelihood_tolerance) converged = true;
                    break;
                }
                step *= config.backtrack_factor;
            }
            if (!accepted) converged = true; // no ascent direction left at min_step resolution
            if (converged) break;
        }

        if (!have_best || L > best_L) {
            best_alpha = alpha;
            best_g = g;
            best_L = L;
            best_converged = converged;
            have_best = true;
        }
    }

    return InferenceResult{OpinionDistribution(std::move(best_alpha), ratings.scale()), best_g,
                           best_L, config.restarts, best_converged};
}

std::pair<double, double> relative_errors(const InferenceResult& result,
                                          const OpinionDistribution& alpha_star,
                                          double gamma_tilde_star) {
    if (!(result.alpha_hat.scale() == alpha_star.scale()))
        throw std::invalid_argument("estimate and truth live on different scales");
    if (gamma_tilde_star == 0.0)
        throw std::domain_error("relative error is undefined at gamma_tilde_star = 0; "
                                "report the absolute error |gamma_tilde_hat| instead");
    double l1 = 0.0, norm = 0.0;
    for (std::size_t m = 0; m < alpha_star.p().size(); ++m) {
        l1 += std::abs(result.alpha_hat.p()[m] - alpha_star.p()[m]);
        norm += std::abs(alpha_star.p()[m]);
    }
    const double e_alpha = l1 / norm;
    const double e_gamma = std::abs(result.gamma_tilde_hat - gamma_tilde_star) / gamma_tilde_star;
    return {e_alpha, e_gamma};
}

namespace {

void check_witness_args(const OpinionDistribution& alpha,
                        const std::vector<OpinionDistribution>& thetas,
                        const RatingSequence& ratings) {
    if (ratings.size() < 2) throw std::invalid_argument("need at least 2 ratings");
    if (thetas.size() < ratings.size() - 1)
        throw std::invalid_argument("need an initial opinion per transition: got " +
                                    std::to_string(thetas.size()) + " for " +
                                    std::to_string(ratings.size() - 1) + " transitions");
    if (!(alpha.scale() == ratings.scale()))
        throw std::invalid_argument("alpha lives on a different scale than the ratings");
    for (const auto& th : thetas)
        if (!(th.scale() == ratings.scale()))
            throw std::invalid_argument("initial opinion on a different scale than the ratings");
}

} // namespace

std::vector<int> optimal_gamma_witness(const OpinionDistribution& alpha,
                                       const std::vector<OpinionDistribution>& thetas,
                                       const RatingSequence& ratings) {
    check_witness_args(alpha, thetas, ratings);
    std::vector<int> gamma(ratings.size() - 1);
    for (std::size_t t = 0; t + 1 < ratings.size(); ++t) {
        const int lvl = ratings.rating(t + 1); // the rating following theta_{t+1}
        gamma[t] = thetas[t].at_level(lvl) <= alpha.at_level(lvl) ? 0 : 1;
    }
    return gamma;
}

double per_index_log_likelihood(const OpinionDistribution& alpha,
                                const std::vector<OpinionDistribution>& thetas,
                                const RatingSequence& ratings, const std::vector<double>& gammas,
                                double pmf_floor) {
    check_witness_args(alpha, thetas, ratings);
    if (gammas.size() != ratings.size() - 1)
        throw std::invalid_argument("need one gamma per transition");
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < ratings.size(); ++t) {
        const double g = gammas[t];
        if (g < 0.0 || g > 1.0) throw std::domain_error("gamma outside [0, 1]");
        const int lvl = ratings.rating(t + 1);
        const double term = g * thetas[t].at_level(lvl) + (1.0 - g) * alpha.at_level(lvl);
        sum += std::log(std::max(term, pmf_floor));
    }
    return sum;
}

} // namespace herdlab
