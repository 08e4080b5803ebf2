#include "bps/pbs_auction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "bps/errors.hpp"
#include "bps/quadrature.hpp"

namespace bps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUBelowOne = 0x1.fffffffffffffp-1;

}  // namespace

BuilderEcosystem BuilderEcosystem::create(int k, Distribution value_dist)
{
    if (k < 2) {
        throw ValidationError("builder ecosystem requires k >= 2");
    }
    if (std::holds_alternative<EmpiricalDist>(value_dist.family())) {
        throw ValidationError(
            "builder value distribution must be continuous or a point mass; the "
            "equilibrium bid formula is undefined for empirical step functions");
    }
    return BuilderEcosystem{k, std::move(value_dist)};
}

double bne_bid(double v, const BuilderEcosystem& eco)
{
    const Distribution& dy = eco.value_dist;
    if (std::holds_alternative<PointMass>(dy.family())) {
        // Degenerate auction: every builder bids its value (Bertrand-style convention).
        return v;
    }
    const double lo = dy.support_lo();
    const double hi = dy.support_hi();
    if (v > hi) {
        throw ValidationError("bid value lies above the value distribution's support");
    }
    const double f_v = dy.cdf(v);
    if (f_v <= 0.0) {
        return lo;
    }

    // Shading = integral over (lo, v) of (F(y)/F(v))^(k-1); the normalized integrand
    // stays in [0, 1] so the absolute tolerance applies to the shading term itself.
    const double log_fv = std::log(f_v);
    const int km1 = eco.k - 1;
    auto normalized = [&](double y) {
        const double fy = dy.cdf(y);
        if (fy <= 0.0) {
            return 0.0;
        }
        return std::exp(km1 * (std::log(fy) - log_fv));
    };
    std::vector<double> cuts;
    for (const auto& [x, p] : dy.atoms()) {
        cuts.push_back(x);
    }
    const double shading = integrate_adaptive_split(normalized, lo, v, cuts, 1e-8);
    return std::clamp(v - shading, lo, v);
}

BidFunction::BidFunction(const BuilderEcosystem& eco, int grid) : eco_(eco), grid_(grid)
{
    if (grid < 64) {
        throw ValidationError("bid table requires at least 64 grid cells");
    }
    const Distribution& dy = eco_.value_dist;
    if (std::holds_alternative<PointMass>(dy.family())) {
        atom_quantile_ = 0.0;
        atom_bid_ = std::get<PointMass>(dy.family()).value;
        return;
    }
    if (const auto* er = std::get_if<EqualRevenueDist>(&dy.family())) {
        // The quantile kink at the cap would spoil interpolation, so only the constant
        // atom bid is cached; values below the cap use direct quadrature per call.
        if (std::isfinite(er->cap)) {
            atom_quantile_ = 1.0 - 1.0 / er->cap;
            atom_bid_ = bne_bid(er->cap, eco_);
        }
        return;
    }
    // Smooth continuous family: tabulate the middle of the quantile range and fall back
    // to direct quadrature near both endpoints, where the quantile transform can have
    // unbounded curvature (upper tail of unbounded supports, square-root-like behaviour
    // at the lower edge) that linear interpolation cannot track.
    const int j_max = grid - 64;
    table_.resize(static_cast<std::size_t>(j_max) + 1);
    for (int j = 0; j <= j_max; ++j) {
        const double w = static_cast<double>(j) / grid;
        table_[static_cast<std::size_t>(j)] = bne_bid(dy.quantile(w), eco_);
    }
    w_table_max_ = static_cast<double>(j_max) / grid;
    w_low_direct_ = 128.0 / grid;
}

double BidFunction::at_value(double v) const
{
    return bne_bid(v, eco_);
}

double BidFunction::at_quantile(double w) const
{
    if (!(w >= 0.0) || !(w < 1.0)) {
        throw ValidationError("bid quantile must lie in [0, 1)");
    }
    if (w >= atom_quantile_) {
        return atom_bid_;
    }
    if (w >= w_low_direct_ && w <= w_table_max_) {
        const double pos = w * grid_;
        const auto j = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(j);
        if (j + 1 < table_.size()) {
            return table_[j] * (1.0 - frac) + table_[j + 1] * frac;
        }
        return table_[j];
    }
    return bne_bid(eco_.value_dist.quantile(w), eco_);
}

AuctionOutcome simulate_auction(const ProposerSpec& prop, const BuilderEcosystem& eco,
                                const BidFunction& bid, RandomStream& rng, TieRule tie_rule)
{
    const double u_b = rng.next_double();
    const double u_p = rng.next_double();
    // Max of k i.i.d. values has CDF F^k, so its quantile is Q(u^(1/k)).
    const double w = std::min(std::pow(u_b, 1.0 / eco.k), kUBelowOne);
    const double b = bid.at_quantile(w);
    const double r = prop.build_dist.quantile(u_p);

    AuctionOutcome out;
    out.winning_bid = b;
    out.proposer_private = r;
    out.realized_reward = std::max(b, r);
    out.used_private = tie_rule == TieRule::kPrivateOnTie ? !(b > r) : !(b >= r);
    return out;
}

MomentAccumulator::MomentAccumulator(std::size_t proposers)
    : sum(proposers, 0.0),
      sum_sq(proposers, 0.0),
      sum_cross(proposers * (proposers > 0 ? proposers - 1 : 0) / 2, 0.0)
{
}

void MomentAccumulator::merge(const MomentAccumulator& other)
{
    if (other.sum.size() != sum.size()) {
        throw ValidationError("cannot merge moment sums over different proposer sets");
    }
    for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] += other.sum[i];
        sum_sq[i] += other.sum_sq[i];
    }
    for (std::size_t i = 0; i < sum_cross.size(); ++i) {
        sum_cross[i] += other.sum_cross[i];
    }
    count += other.count;
}

MomentAccumulator run_reward_batch(const std::vector<ProposerSpec>& props,
                                   const BuilderEcosystem& eco, const BidFunction& bid,
                                   std::int64_t trials, RandomStream& rng)
{
    if (props.empty()) {
        throw ValidationError("reward estimation requires at least one proposer");
    }
    if (trials < 0) {
        throw ValidationError("trial count must be >= 0");
    }
    const std::size_t n = props.size();
    MomentAccumulator acc(n);
    std::vector<double> reward(n);
    const double inv_k = 1.0 / eco.k;
    for (std::int64_t t = 0; t < trials; ++t) {
        const double u_b = rng.next_double();
        const double u_p = rng.next_double();
        const double w = std::min(std::pow(u_b, inv_k), kUBelowOne);
        const double b = bid.at_quantile(w);
        for (std::size_t i = 0; i < n; ++i) {
            // One shared proposer uniform per trial: common random numbers across
            // proposers keep the ratio estimate's variance low.
            reward[i] = std::max(b, props[i].build_dist.quantile(u_p));
        }
        std::size_t cross = 0;
        for (std::size_t i = 0; i < n; ++i) {
            acc.sum[i] += reward[i];
            acc.sum_sq[i] += reward[i] * reward[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                acc.sum_cross[cross++] += reward[i] * reward[j];
            }
        }
    }
    acc.count = trials;
    return acc;
}

RewardMatrix finalize_rewards(const MomentAccumulator& acc)
{
    const std::size_t n = acc.sum.size();
    const auto trials = static_cast<double>(acc.count);
    RewardMatrix out;
    out.trials = acc.count;
    out.per_proposer.resize(n);
    out.mean_covariance.assign(n, std::vector<double>(n, 0.0));
    if (acc.count < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            out.per_proposer[i] = {acc.count == 1 ? acc.sum[i] : 0.0, kInf};
        }
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = acc.sum[i] / trials;
        const double var =
            std::max(0.0, (acc.sum_sq[i] - trials * mean * mean) / (trials - 1.0));
        out.per_proposer[i] = {mean, std::sqrt(var / trials)};
        out.mean_covariance[i][i] = var / trials;
    }
    std::size_t cross = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double cov = (acc.sum_cross[cross++] -
                                trials * out.per_proposer[i].mean * out.per_proposer[j].mean) /
                               (trials - 1.0) / trials;
            out.mean_covariance[i][j] = cov;
            out.mean_covariance[j][i] = cov;
        }
    }
    return out;
}

RewardMatrix estimate_rewards(const std::vector<ProposerSpec>& props,
                              const BuilderEcosystem& eco, std::int64_t trials,
                              RandomStream& rng)
{
    if (trials < 1) {
        throw ValidationError("reward estimation requires trials >= 1");
    }
    if (!eco.value_dist.finite_mean()) {
        throw ValidationError(
            "value distribution has no finite mean; Monte Carlo rewards diverge");
    }
    for (const auto& prop : props) {
        if (!prop.build_dist.finite_mean()) {
            throw ValidationError("proposer \"" + prop.label +
                                  "\" has a build distribution with no finite mean");
        }
    }
    const BidFunction bid(eco);
    return finalize_rewards(run_reward_batch(props, eco, bid, trials, rng));
}

RewardEstimate expected_proposer_reward(const ProposerSpec& prop, const BuilderEcosystem& eco,
                                        std::int64_t trials, RandomStream& rng)
{
    return estimate_rewards({prop}, eco, trials, rng).per_proposer[0];
}

void check_theorem_regime(const std::vector<ProposerSpec>& props, const BuilderEcosystem& eco)
{
    std::string problems;
    if (!is_mhr(eco.value_dist).mhr) {
        problems += "value distribution " + eco.value_dist.to_string() +
                    " fails the monotone hazard rate requirement; ";
    }
    for (const auto& prop : props) {
        if (!fosd_check(prop.build_dist, eco.value_dist)) {
            problems += "proposer \"" + prop.label +
                        "\" is not stochastically dominated by the value distribution; ";
        }
    }
    if (!problems.empty()) {
        problems.erase(problems.size() - 2);
        throw ValidationError("outside the theorem regime (pass waive to override): " +
                              problems);
    }
}

RatioResult ratio_from_estimates(RewardMatrix estimates)
{
    const std::size_t n = estimates.per_proposer.size();
    if (n < 2) {
        throw ValidationError("reward ratio requires at least two proposers");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = estimates.per_proposer[i];
        if (!(e.mean > 3.0 * e.std_error)) {
            throw NumericError(
                "reward ratio undefined: a proposer mean is indistinguishable from zero");
        }
    }
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (estimates.per_proposer[i].mean > estimates.per_proposer[hi].mean) {
            hi = i;
        }
        if (estimates.per_proposer[i].mean < estimates.per_proposer[lo].mean) {
            lo = i;
        }
    }
    if (hi == lo) {
        lo = (hi + 1) % n;
    }

    const double m_hi = estimates.per_proposer[hi].mean;
    const double m_lo = estimates.per_proposer[lo].mean;
    const double ratio = m_hi / m_lo;
    // Delta method on the ratio of correlated sample means.
    const double rel_var = estimates.mean_covariance[hi][hi] / (m_hi * m_hi) +
                           estimates.mean_covariance[lo][lo] / (m_lo * m_lo) -
                           2.0 * estimates.mean_covariance[hi][lo] / (m_hi * m_lo);
    RatioResult out;
    out.ratio = ratio;
    out.std_error = ratio * std::sqrt(std::max(0.0, rel_var));
    out.numerator_index = hi;
    out.denominator_index = lo;
    out.estimates = std::move(estimates);
    return out;
}

RatioResult heterogeneity_ratio(const std::vector<ProposerSpec>& props,
                                const BuilderEcosystem& eco, std::int64_t trials,
                                RandomStream& rng, bool waive_regime_checks)
{
    if (props.size() < 2) {
        throw ValidationError("reward ratio requires at least two proposers");
    }
    if (!waive_regime_checks) {
        check_theorem_regime(props, eco);
    }
    return ratio_from_estimates(estimate_rewards(props, eco, trials, rng));
}

double harmonic_number(int m)
{
    if (m < 1) {
        throw ValidationError("harmonic number requires m >= 1");
    }
    double h = 0.0;
    for (int j = m; j >= 1; --j) {
        h += 1.0 / j;
    }
    return h;
}

double theoretical_ratio_cap(int k)
{
    if (k < 2) {
        throw ValidationError("ratio cap requires k >= 2 builders");
    }
    const double h = harmonic_number(k + 1);
    return (1.0 + 1.0 / (k - 1)) * h / (h - 1.0);
}

OrderStatSandwich order_stat_sandwich(const BuilderEcosystem& eco)
{
    const int k = eco.k;
    OrderStatSandwich out;
    out.second_of_k = expected_order_statistic(eco.value_dist, k, 2);
    out.second_of_k_plus_1 = expected_order_statistic(eco.value_dist, k + 1, 2);
    out.max_of_k_plus_1 = expected_order_statistic(eco.value_dist, k + 1, 1);

    const double h = harmonic_number(k + 1);
    out.growth_ok = out.second_of_k <= out.second_of_k_plus_1 + 1e-9;
    out.concavity_ok =
        out.second_of_k_plus_1 <= (1.0 + 1.0 / (k - 1)) * out.second_of_k + 1e-9;
    if (out.second_of_k_plus_1 > 0.0) {
        out.extremal_ok =
            out.max_of_k_plus_1 / out.second_of_k_plus_1 <= h / (h - 1.0) + 1e-6;
    } else {
        out.extremal_ok = out.max_of_k_plus_1 <= 1e-12;
    }
    return out;
}

}  // namespace bps
