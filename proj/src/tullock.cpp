#include "bps/tullock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bps/errors.hpp"

namespace bps {

namespace {

void validate_common(const MultiplierProfile& p)
{
    if (!(p.r > 0.0) || !std::isfinite(p.r)) {
        throw ValidationError("multiplier profile requires a finite base reward r > 0");
    }
    if (!(p.c > 0.0) || !std::isfinite(p.c)) {
        throw ValidationError("multiplier profile requires a finite staking cost c > 0");
    }
    if (p.mu.empty()) {
        throw ValidationError("multiplier profile requires at least one participant");
    }
    for (double m : p.mu) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw ValidationError("multipliers must be finite and >= 0");
        }
    }
}

}  // namespace

MultiplierProfile MultiplierProfile::canonical(std::vector<double> mu, double r, double c)
{
    MultiplierProfile p{std::move(mu), r, c, false};
    validate_common(p);
    for (std::size_t i = 0; i + 1 < p.mu.size(); ++i) {
        if (p.mu[i] < p.mu[i + 1]) {
            throw ValidationError("canonical profile requires nonincreasing multipliers");
        }
    }
    if (std::fabs(p.mu.back() - 1.0) > 1e-12) {
        throw ValidationError("canonical profile requires the smallest multiplier to be 1");
    }
    return p;
}

MultiplierProfile MultiplierProfile::relaxed_profile(std::vector<double> mu, double r, double c)
{
    MultiplierProfile p{std::move(mu), r, c, true};
    validate_common(p);
    return p;
}

Allocation solve_equilibrium(const MultiplierProfile& p)
{
    validate_common(p);
    const std::size_t n = p.size();
    if (n == 1) {
        throw ValidationError(
            "no equilibrium with a single participant: any vanishing positive stake is a "
            "best response");
    }

    // a_i = mu_i r / c; order indices by a descending, zeros never activate.
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = p.mu[i] * p.r / p.c;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i] > a[j]; });

    std::size_t positive = 0;
    while (positive < n && a[order[positive]] > 0.0) {
        ++positive;
    }
    if (positive == 0) {
        throw ValidationError("no equilibrium: every multiplier is zero");
    }

    // Largest active prefix m with 1 - lambda_m / a_(m) > 0, where
    // lambda_m = (m - 1) / Sum_{i<=m} 1/a_i.
    double lambda = 0.0;
    double inv_sum = 0.0;
    std::size_t active = 1;
    inv_sum = 1.0 / a[order[0]];
    for (std::size_t m = 2; m <= positive; ++m) {
        const double inv_next = inv_sum + 1.0 / a[order[m - 1]];
        const double lambda_m = static_cast<double>(m - 1) / inv_next;
        if (1.0 - lambda_m / a[order[m - 1]] > 0.0) {
            active = m;
            inv_sum = inv_next;
            lambda = lambda_m;
        } else {
            break;
        }
    }

    Allocation out;
    out.x.assign(n, 0.0);
    for (std::size_t m = 0; m < active; ++m) {
        out.x[order[m]] = std::max(0.0, 1.0 - lambda / a[order[m]]);
    }
    out.lambda = lambda;
    out.total_stake = lambda;  // first-order condition mu_i r (1 - x_i) = c * total
    out.pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.pi[i] = out.total_stake * out.x[i];
    }
    return out;
}

double max_share_bound(const CompetitivenessProfile& cp)
{
    if (!(cp.gamma >= 0.0) || !(cp.gamma <= 1.0)) {
        throw ValidationError("competitiveness gamma must lie in [0, 1]");
    }
    if (cp.k < 1) {
        throw ValidationError("competitiveness k must be >= 1");
    }
    return 1.0 - cp.gamma * cp.k / (cp.k + cp.gamma);
}

MultiplierProfile worst_case_instance(const CompetitivenessProfile& cp)
{
    if (!(cp.gamma > 0.0) || !(cp.gamma <= 1.0)) {
        throw ValidationError("worst-case instance requires gamma in (0, 1]");
    }
    if (cp.k < 1) {
        throw ValidationError("competitiveness k must be >= 1");
    }
    std::vector<double> mu(static_cast<std::size_t>(cp.k) + 1, 1.0);
    mu[0] = 1.0 / cp.gamma;
    return MultiplierProfile::canonical(std::move(mu));
}

bool applies_to(const CompetitivenessProfile& cp, const MultiplierProfile& p)
{
    if (cp.k < 1 || static_cast<std::size_t>(cp.k) + 1 > p.size()) {
        return false;
    }
    return p.mu[static_cast<std::size_t>(cp.k)] >= cp.gamma * p.mu[0];
}

GammaProfile gamma_profile(const MultiplierProfile& p)
{
    validate_common(p);
    if (p.size() < 2) {
        throw ValidationError("gamma profile requires at least two participants");
    }
    if (!(p.mu[0] > 0.0)) {
        throw ValidationError("gamma profile requires a positive top multiplier");
    }

    GammaProfile out;
    out.k_star = 1;
    out.best_bound = 2.0;  // above any attainable bound
    for (std::size_t k = 1; k < p.size(); ++k) {
        const CompetitivenessProfile cp{p.mu[k] / p.mu[0], static_cast<int>(k)};
        out.pairs.push_back(cp);
        const double bound = max_share_bound(cp);
        if (bound < out.best_bound - 1e-15) {
            out.best_bound = bound;
            out.k_star = cp.k;
        }
    }
    return out;
}

std::pair<Allocation, Allocation> perturb_multiplier(const MultiplierProfile& p, int j,
                                                     double new_mu)
{
    if (j < 1 || static_cast<std::size_t>(j) > p.size()) {
        throw ValidationError("perturbation index out of range: " + std::to_string(j));
    }
    if (!(new_mu >= 0.0) || !std::isfinite(new_mu)) {
        throw ValidationError("perturbed multiplier must be finite and >= 0");
    }
    Allocation before = solve_equilibrium(p);
    std::vector<double> mu = p.mu;
    mu[static_cast<std::size_t>(j - 1)] = new_mu;
    Allocation after = solve_equilibrium(MultiplierProfile::relaxed_profile(std::move(mu), p.r, p.c));
    return {std::move(before), std::move(after)};
}

double contest_objective(const MultiplierProfile& p, const std::vector<double>& x)
{
    if (x.size() != p.size()) {
        throw ValidationError("share vector length does not match the profile");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += p.mu[i] * (p.r / p.c) * x[i] * (1.0 - 0.5 * x[i]);
    }
    return sum;
}

double participant_utility(const MultiplierProfile& p, const std::vector<double>& pi,
                           std::size_t i)
{
    if (pi.size() != p.size() || i >= pi.size()) {
        throw ValidationError("stake vector length does not match the profile");
    }
    double total = 0.0;
    for (double s : pi) {
        total += s;
    }
    if (total <= 0.0) {
        return 0.0;
    }
    return p.mu[i] * p.r * pi[i] / total - p.c * pi[i];
}

}  // namespace bps
