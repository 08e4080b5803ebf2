#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bps/distributions.hpp"
#include "bps/random.hpp"

namespace bps {

// Proposer-builder separation auction: k symmetric builders with i.i.d. values from
// value_dist bid in a first-price auction; a proposer holding a private build value r_i
// publishes the builder block only when the winning bid strictly beats r_i and earns
// max(winning bid, r_i) either way.

struct BuilderEcosystem {
    int k;                   // >= 2
    Distribution value_dist;

    // Rejects k < 2 and empirical value distributions (the equilibrium bid needs a
    // continuous distribution or the degenerate point-mass convention).
    static BuilderEcosystem create(int k, Distribution value_dist);
};

struct ProposerSpec {
    std::string label;
    Distribution build_dist;
};

enum class TieRule {
    kPrivateOnTie,  // publish the private block when the bid exactly equals r_i (default)
    kBuilderOnTie,
};

struct AuctionOutcome {
    double winning_bid;
    double proposer_private;
    double realized_reward;  // max(winning_bid, proposer_private)
    bool used_private;
};

// Symmetric first-price equilibrium bid beta(v) = v - [integral of F(y)^{k-1} over
// (0, v)] / F(v)^{k-1}, evaluated with adaptive quadrature to 1e-8 after normalizing the
// integrand by F(v)^{k-1} (so the tolerance applies to the shading term itself and small
// powers cannot underflow). Degenerate cases: F(v) = 0 returns the support infimum;
// point-mass ecosystems bid truthfully.
double bne_bid(double v, const BuilderEcosystem& eco);

// Bid as a function of the value's quantile w = F(v), cached for the Monte Carlo loop:
// continuous families without quantile kinks get a dense interpolation table with direct
// quadrature near both quantile endpoints, where the transform's curvature would defeat
// linear interpolation; capped heavy-tail families get the constant atom bid plus direct
// quadrature below the cap. Agreement with bne_bid is covered by tests.
class BidFunction {
public:
    explicit BidFunction(const BuilderEcosystem& eco, int grid = 16384);

    double at_value(double v) const;     // uncached bne_bid
    double at_quantile(double w) const;  // w in [0, 1)

    const BuilderEcosystem& ecosystem() const { return eco_; }

private:
    BuilderEcosystem eco_;
    int grid_ = 0;
    std::vector<double> table_;  // bid at w = j / grid
    double w_table_max_ = -1.0;   // table valid for w <= this; beyond, direct quadrature
    double w_low_direct_ = 0.0;   // table valid for w >= this; below, direct quadrature
    double atom_quantile_ = 2.0;  // w at or above which the value sits on a top atom
    double atom_bid_ = 0.0;
};

// One auction: the winning builder value is drawn as the max of k i.i.d. values, the
// proposer's private value from its build distribution (two uniform draws total).
AuctionOutcome simulate_auction(const ProposerSpec& prop, const BuilderEcosystem& eco,
                                const BidFunction& bid, RandomStream& rng,
                                TieRule tie_rule = TieRule::kPrivateOnTie);

// Raw cross-moment sums over trials; merged in fixed batch order by the experiment layer
// so results are independent of the degree of parallelism.
struct MomentAccumulator {
    std::vector<double> sum;        // per proposer
    std::vector<double> sum_sq;     // per proposer
    std::vector<double> sum_cross;  // upper triangle (i < j), row-major
    std::int64_t count = 0;

    explicit MomentAccumulator(std::size_t proposers = 0);
    void merge(const MomentAccumulator& other);
};

struct RewardEstimate {
    double mean;
    double std_error;
};

struct RewardMatrix {
    std::vector<RewardEstimate> per_proposer;
    std::vector<std::vector<double>> mean_covariance;  // covariance of the sample means
    std::int64_t trials = 0;
};

// Common-random-numbers kernel: per trial, one uniform drives the builders' max value and
// one shared uniform drives every proposer's private draw. Exactly two uniforms per trial.
MomentAccumulator run_reward_batch(const std::vector<ProposerSpec>& props,
                                   const BuilderEcosystem& eco, const BidFunction& bid,
                                   std::int64_t trials, RandomStream& rng);

RewardMatrix finalize_rewards(const MomentAccumulator& acc);

// Sequential convenience wrapper over the batch kernel. Rejects infinite-mean value or
// build distributions (their Monte Carlo means diverge).
RewardMatrix estimate_rewards(const std::vector<ProposerSpec>& props,
                              const BuilderEcosystem& eco, std::int64_t trials,
                              RandomStream& rng);

RewardEstimate expected_proposer_reward(const ProposerSpec& prop, const BuilderEcosystem& eco,
                                        std::int64_t trials, RandomStream& rng);

struct RatioResult {
    double ratio;  // max over proposer pairs of mean_i / mean_j
    double std_error;
    std::size_t numerator_index;
    std::size_t denominator_index;
    RewardMatrix estimates;
};

// Throws ValidationError listing every failed theorem-regime requirement: value_dist must
// have a monotone hazard rate and every build_dist must be first-order stochastically
// dominated by value_dist.
void check_theorem_regime(const std::vector<ProposerSpec>& props, const BuilderEcosystem& eco);

// Ratio of the largest to the smallest estimated mean reward with a delta-method standard
// error. Throws NumericError if any mean is indistinguishable from zero (3 standard
// errors).
RatioResult ratio_from_estimates(RewardMatrix estimates);

RatioResult heterogeneity_ratio(const std::vector<ProposerSpec>& props,
                                const BuilderEcosystem& eco, std::int64_t trials,
                                RandomStream& rng, bool waive_regime_checks = false);

// Proof-chain constant (1 + 1/(k-1)) * H_{k+1} / (H_{k+1} - 1); decreasing in k >= 2.
double theoretical_ratio_cap(int k);

double harmonic_number(int m);

struct OrderStatSandwich {
    double second_of_k;
    double second_of_k_plus_1;
    double max_of_k_plus_1;
    bool growth_ok;     // second_of_k <= second_of_{k+1} + 1e-9
    bool concavity_ok;  // second_of_{k+1} <= (1 + 1/(k-1)) * second_of_k + 1e-9
    bool extremal_ok;   // max_of_{k+1} / second_of_{k+1} <= H_{k+1}/(H_{k+1}-1) + 1e-6
};

// The three order-statistic expectations linking the winning bid to the best sample.
OrderStatSandwich order_stat_sandwich(const BuilderEcosystem& eco);

}  // namespace bps
