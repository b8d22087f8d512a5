#include "herdlab/speed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "format.hpp"

namespace herdlab {

namespace {

// Sequential evaluation of the speed recurrences, all in log space.
//
// Walking index i upward maintains
//   lvp  = ln varphi_{i-1}   (varphi_j = prod_{l<=j} (1 - w~_{l+1} (1 - gamma~_l)))
//   lse  = ln sum_{j in window} exp(2 ln w~_j - 2 ln varphi_{j-1})
// so that ln phi_i = ln 2 - 2 lvp - lse when the window is 1..i. The window
// can be restarted mid-walk, which is what the misbehavior variant needs.
class PhiWalk {
public:
    explicit PhiWalk(const HerdingParams& params)
        : ws_(params.rule()), gamma_(params.gamma()), eta_(params.eta()) {
        const double w1 = ws_.next(); // w~_1 == 1
        i_ = 1;
        lvp_ = 0.0;
        push_term(2.0 * std::log(w1));
    }

    void advance() {
        const double w_next = ws_.next(); // w~_{i+1}
        const double g = gamma_(i_);
        const double e = eta_(i_);
        const double shrink = w_next * (1.0 - g * (1.0 - e));
        if (shrink >= 1.0)
            throw std::domain_error("degenerate aggregation rule: shrink factor <= 0 at index " +
                                    std::to_string(i_ + 1));
        lvp_ += std::log1p(-shrink); // now ln varphi_i
        ++i_;
        push_term(2.0 * std::log(w_next) - 2.0 * lvp_);
    }

    std::uint64_t i() const { return i_; }
    double log_varphi_before() const { return lvp_; } // ln varphi_{i-1}
    double log_sum() const { return lse_max_ + std::log(lse_sum_); }
    double log_phi() const { return std::log(2.0) - 2.0 * lvp_ - log_sum(); }

    // Drop the accumulated sum; terms from index i+1 onward build a new one.
    void reset_window() {
        lse_sum_ = 0.0;
        lse_max_ = -std::numeric_limits<double>::infinity();
    }

private:
    void push_term(double t) {
        if (lse_sum_ == 0.0) {
            lse_max_ = t;
            lse_sum_ = 1.0;
        } else if (t <= lse_max_) {
            lse_sum_ += std::exp(t - lse_max_);
        } else {
            lse_sum_ = lse_sum_ * std::exp(lse_max_ - t) + 1.0;
            lse_max_ = t;
        }
    }

    NormalizedWeightStream ws_;
    RateSchedule gamma_;
    RateSchedule eta_;
    std::uint64_t i_ = 0;
    double lvp_ = 0.0;
    double lse_sum_ = 0.0;
    double lse_max_ = -std::numeric_limits<double>::infinity();
};

void check_index_reachable(const HerdingParams& params, std::uint64_t needed, const char* what) {
    if (needed > params.rule().max_index())
        throw std::out_of_range(std::string(what) + " needs weight index " +
                                std::to_string(needed) +
                                ", beyond the custom weight sequence");
}

} // namespace

double log_varphi(const HerdingParams& params, std::uint64_t j) {
    if (j == 0) return 0.0;
    check_index_reachable(params, j + 1, "varphi");
    PhiWalk walk(params);
    while (walk.i() < j + 1) walk.advance();
    return walk.log_varphi_before();
}

double varphi(const HerdingParams& params, std::uint64_t j) {
    return std::exp(log_varphi(params, j));
}

double phi(const HerdingParams& params, std::uint64_t i) {
    if (i < 1) throw std::invalid_argument("speed index starts at 1");
    check_index_reachable(params, i, "phi");
    PhiWalk walk(params);
    while (walk.i() < i) walk.advance();
    return std::exp(walk.log_phi());
}

double tail_bound(const HerdingParams& params, std::uint64_t i, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::domain_error("epsilon outside (0, 1]");
    const double b = 2.0 * std::exp(-phi(params, i) * epsilon * epsilon);
    return std::min(1.0, b);
}

double phi_misbehavior(const HerdingParams& params, std::uint64_t i, const MisbehaviorSpec& spec,
                       double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::domain_error("epsilon outside (0, 1]");
    if (i < 1) throw std::invalid_argument("speed index starts at 1");
    const std::uint64_t ik = spec.last_index();
    if (i <= ik) return 0.0;
    check_index_reachable(params, i, "phi_misbehavior");

    PhiWalk walk(params);
    double log_varphi_anchor = std::numeric_limits<double>::infinity(); // ln varphi_{-1}
    if (ik >= 1) {
        while (walk.i() < ik) walk.advance();
        log_varphi_anchor = walk.log_varphi_before(); // ln varphi_{ik - 1}
        walk.reset_window();                          // sum restarts at j = ik + 1
    }
    while (walk.i() < i) walk.advance();

    // rho = varphi_{i-1} / (eps varphi_{ik-1}); an empty injection anchors at
    // varphi_{-1} = +inf, making rho exactly 0 and reproducing phi bit for bit.
    const double log_rho = std::isinf(log_varphi_anchor)
                               ? -std::numeric_limits<double>::infinity()
                               : walk.log_varphi_before() - std::log(epsilon) - log_varphi_anchor;
    if (log_rho >= 0.0) return 0.0; // indicator gate (rho == 1 gives a zero numerator anyway)
    const double log_num = 2.0 * std::log1p(-std::exp(log_rho));
    return std::exp(log_num + walk.log_phi());
}

std::vector<double> phi_misbehavior_curve(const HerdingParams& params, const MisbehaviorSpec& spec,
                                          double epsilon, std::uint64_t horizon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::domain_error("epsilon outside (0, 1]");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    check_index_reachable(params, horizon, "phi_misbehavior_curve");

    const std::uint64_t ik = spec.last_index();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));

    PhiWalk walk(params);
    double log_varphi_anchor = std::numeric_limits<double>::infinity();
    const double log_eps = std::log(epsilon);
    for (;;) {
        const std::uint64_t i = walk.i();
        if (i <= ik) {
            out.push_back(0.0);
            if (i == ik) {
                log_varphi_anchor = walk.log_varphi_before();
                walk.reset_window();
            }
        } else {
            const double log_rho = std::isinf(log_varphi_anchor)
                                       ? -std::numeric_limits<double>::infinity()
                                       : walk.log_varphi_before() - log_eps - log_varphi_anchor;
            if (log_rho >= 0.0)
                out.push_back(0.0);
            else
                out.push_back(std::exp(2.0 * std::log1p(-std::exp(log_rho)) + walk.log_phi()));
        }
        if (i >= horizon) break;
        walk.advance();
    }
    return out;
}

std::optional<std::uint64_t> phi_inverse(const HerdingParams& params, double x,
                                         std::uint64_t horizon) {
    if (!(x > 0.0)) throw std::domain_error("phi_inverse threshold must be positive");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    const std::uint64_t h = std::min(horizon, params.rule().max_index());
    const double log_x = std::log(x);
    PhiWalk walk(params);
    for (;;) {
        if (walk.log_phi() >= log_x) return walk.i();
        if (walk.i() >= h) return std::nullopt;
        walk.advance();
    }
}

std::optional<std::uint64_t> min_ratings_average(const HerdingParams& params, double epsilon,
                                                 double delta, std::uint64_t horizon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::domain_error("epsilon outside (0, 1]");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::domain_error("delta outside (0, 1)");
    const double M = params.scale().M;
    const double x =
        M * M * (M + 1.0) * (M + 1.0) / (4.0 * epsilon * epsilon) * std::log(2.0 * M / delta);
    return phi_inverse(params, x, horizon);
}

std::optional<std::uint64_t> min_ratings_majority(const HerdingParams& params,
                                                  const OpinionDistribution& alpha, double delta,
                                                  std::uint64_t horizon) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::domain_error("delta outside (0, 1)");
    if (!(alpha.scale() == params.scale()))
        throw std::invalid_argument("alpha lives on a different scale than the model");
    double top = -1.0, second = -1.0;
    for (double v : alpha.p()) {
        if (v > top) {
            second = top;
            top = v;
        } else if (v > second) {
            second = v;
        }
    }
    const double gap = top - second;
    if (!(gap > 0.0))
        throw std::domain_error("no unique majority level: top two opinion masses are equal");
    const double M = params.scale().M;
    const double x = M * M * (M + 1.0) * (M + 1.0) / (gap * gap) * std::log(2.0 * M / delta);
    return phi_inverse(params, x, horizon);
}

SpeedCurve speed_curve(const HerdingParams& params, std::uint64_t horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    check_index_reachable(params, horizon, "speed_curve");
    SpeedCurve curve;
    curve.index.reserve(static_cast<std::size_t>(horizon));
    curve.phi.reserve(static_cast<std::size_t>(horizon));
    curve.log_varphi.reserve(static_cast<std::size_t>(horizon));
    PhiWalk walk(params);
    for (;;) {
        curve.index.push_back(walk.i());
        curve.phi.push_back(std::exp(walk.log_phi()));
        curve.log_varphi.push_back(walk.log_varphi_before()); // row r carries ln varphi_r
        if (walk.i() >= horizon) break;
        walk.advance();
    }
    return curve;
}

void write_csv(const SpeedCurve& curve, std::ostream& out) {
    out << "i,phi,log_varphi\n";
    for (std::size_t r = 0; r < curve.size(); ++r)
        out << detail::fmt(curve.index[r]) << ',' << detail::fmt(curve.phi[r]) << ','
            << detail::fmt(curve.log_varphi[r]) << '\n';
}

} // namespace herdlab
