#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace bps {

// One-shot staking contest: participant i stakes pi_i at unit cost c and wins each of the
// r reward units in proportion to stake, scaled by its multiplier mu_i. Equilibria are
// recovered as the unique maximizer of a concave potential over the share simplex.

struct MultiplierProfile {
    std::vector<double> mu;  // nonnegative; canonical profiles are nonincreasing with mu_n = 1
    double r = 1.0;          // base reward per block, > 0
    double c = 1.0;          // staking cost per currency unit, > 0
    bool relaxed = false;    // true: skip the ordering and mu_n = 1 requirements

    // Canonical profile: sorted nonincreasing with the smallest multiplier equal to 1.
    static MultiplierProfile canonical(std::vector<double> mu, double r = 1.0, double c = 1.0);

    // Arbitrary nonnegative multipliers, any order; used by the monotonicity properties.
    static MultiplierProfile relaxed_profile(std::vector<double> mu, double r = 1.0,
                                             double c = 1.0);

    std::size_t size() const { return mu.size(); }
};

struct Allocation {
    std::vector<double> x;   // market shares, sum to 1
    double lambda;           // KKT multiplier; numerically equals total_stake
    double total_stake;      // aggregate stake in currency units
    std::vector<double> pi;  // per-participant stakes, total_stake * x
};

// (gamma, k)-competitiveness: at least k rivals hold a multiplier within a gamma factor
// of the largest.
struct CompetitivenessProfile {
    double gamma;  // in [0, 1]
    int k;         // >= 1
};

struct GammaProfile {
    std::vector<CompetitivenessProfile> pairs;  // (mu_{k+1}/mu_1, k) for k = 1..n-1
    int k_star;                                 // k minimizing the share bound
    double best_bound;
};

// Water-filling solve of the simplex program; lambda equalizes mu_i (r/c) (1 - x_i)
// across active participants. Throws ValidationError when n = 1 or every mu_i is zero
// (the underlying game has no equilibrium there).
Allocation solve_equilibrium(const MultiplierProfile& p);

// Largest share any participant can hold in a (gamma, k)-competitive instance:
// 1 - gamma k / (k + gamma).
double max_share_bound(const CompetitivenessProfile& cp);

// The (k+1)-participant instance mu = (1/gamma, 1, ..., 1) attaining the bound exactly.
// gamma = 0 is rejected (the top multiplier would diverge).
MultiplierProfile worst_case_instance(const CompetitivenessProfile& cp);

// True iff p is (gamma, k)-competitive: k + 1 <= n and mu_{k+1} >= gamma * mu_1.
bool applies_to(const CompetitivenessProfile& cp, const MultiplierProfile& p);

// All maximal (gamma_k, k) pairs of a canonical profile plus the bound-minimizing k.
GammaProfile gamma_profile(const MultiplierProfile& p);

// Equilibria before and after setting mu_j := new_mu (1-based j); the perturbed profile
// is solved in relaxed mode since the change may break the canonical ordering.
std::pair<Allocation, Allocation> perturb_multiplier(const MultiplierProfile& p, int j,
                                                     double new_mu);

// Potential Sum mu_i (r/c) x_i (1 - x_i/2) maximized by the equilibrium shares.
double contest_objective(const MultiplierProfile& p, const std::vector<double>& x);

// Utility of participant i at stake vector pi: mu_i r pi_i / Sum(pi) - c pi_i.
double participant_utility(const MultiplierProfile& p, const std::vector<double>& pi,
                           std::size_t i);

}  // namespace bps
