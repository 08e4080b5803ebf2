#pragma once

#include <cstdint>
#include <vector>

#include "bps/random.hpp"
#include "bps/tullock.hpp"

namespace bps {

// Stochastic staking dynamics: at every block one participant wins with probability equal
// to its current stake share and its stake grows by mu_i * r. Stakes are held as int64
// multiples of a resolution quantum so rewards are exact and conservation is bit-exact.
// Participant indices are 1-based throughout this module, matching the mu_1 convention.

struct StakeState {
    std::vector<std::int64_t> quanta;  // per-participant stake in quantum units, > 0
    double quantum;                    // currency value of one quantum
    std::int64_t block = 1;            // block index t; the state holds x_{i,t}

    std::int64_t history_len() const { return block - 1; }  // completed reward events
    std::int64_t total_quanta() const;
    std::vector<double> stakes() const;  // currency units
    std::vector<double> shares() const;
    double share(int bp) const;  // 1-based
};

// Closed-form block-count bounds on the time to epsilon-centralization.
struct CentralizationBounds {
    double upper_blocks;   // +inf when the target has no multiplier edge (mu1 == mu2)
    double lower_blocks;   // clamped at 0
    bool lower_vacuous;    // true when the raw lower expression was <= 0 or undefined
    double prob_cap;       // 8 * beta; each bound fails with probability at most this
    double beta;
    double rho;
    double critical_time;  // continuous-time analogue ln(3 rho (1-eps)/eps) / (r (mu1-mu2))
};

class ProcessConfig {
public:
    // Derives the coarsest quantum 10^-d (d <= 9) making every stake and reward an integer
    // multiple within 1e-9 relative error; unrepresentable inputs are rejected.
    static ProcessConfig create(MultiplierProfile profile, std::vector<double> initial_stakes,
                                double epsilon, int target_bp = 1);

    const MultiplierProfile& profile() const { return profile_; }
    const std::vector<double>& initial_stakes() const { return initial_stakes_; }
    double epsilon() const { return epsilon_; }
    int target_bp() const { return target_bp_; }
    double quantum() const { return quantum_; }
    const std::vector<std::int64_t>& reward_quanta() const { return reward_quanta_; }
    std::size_t size() const { return initial_stakes_.size(); }

    StakeState initial_state() const;

    // Competitors' initial stake over the target's. Requires n >= 2.
    double rho() const;
    // max(mu_t r / pi_t, mu' r / pi') with mu' the strongest competitor multiplier and
    // pi' the competitors' total stake. Requires n >= 2.
    double beta() const;

private:
    MultiplierProfile profile_;
    std::vector<double> initial_stakes_;
    double epsilon_;
    int target_bp_;
    double quantum_;
    std::vector<std::int64_t> initial_quanta_;
    std::vector<std::int64_t> reward_quanta_;
};

// One block: winner drawn by a single uniform against the cumulative-share partition
// (y in (a_{i-1}, a_i] elects i), stake bumped by the winner's reward. Returns the
// 1-based winner. Throws NumericError if stake counts leave the exact-integer range.
int step(StakeState& s, const ProcessConfig& p, RandomStream& rng);

struct RunResult {
    bool hit;
    std::int64_t block;  // first block t with x_{target,t} >= 1 - epsilon; -1 if never
    StakeState final_state;
};

// Checks blocks t = 1..max_blocks (so at most max_blocks - 1 reward events); block 1 is
// the initial state.
RunResult run_until_centralized(const ProcessConfig& p, std::int64_t max_blocks,
                                RandomStream& rng);

// Exactly `steps` reward events from the initial state; returns the state at block steps+1.
StakeState run_blocks(const ProcessConfig& p, std::int64_t steps, RandomStream& rng);

// Verbatim evaluation of the two block-count bounds and the 8*beta probability cap.
// Requires n >= 2.
CentralizationBounds theorem_bounds(const ProcessConfig& p);

// Continuous-time embedding, ring order only: every stake quantum carries an independent
// exponential clock, so each ring is a uniformly random quantum and its owner collects its
// reward. The states at ring times are distributed identically to the discrete process.
StakeState run_continuous(const ProcessConfig& p, std::int64_t until_rings, RandomStream& rng);

// Same embedding with explicit timestamps: inter-ring times are exponential at rate equal
// to the total currency stake. Returns the state at continuous time t_end.
StakeState run_continuous_timed(const ProcessConfig& p, double t_end, RandomStream& rng);

// Closed-form moments of one participant's continuous-time stake:
// mean pi0 e^{mu r t} and variance bound mu r pi0 e^{2 mu r t}.
std::pair<double, double> yule_moments(double pi0, double mu, double r, double t);

struct CoupledPaths {
    std::vector<double> x;      // target share by block, x[j] at block j+1
    std::vector<double> x_alt;
};

// Runs the process and an alternative-multiplier variant from the same initial stakes,
// feeding both the same uniform draw each block. mu_alt must keep the target's multiplier
// and move every competitor weakly above the strongest (or weakly below the weakest)
// original competitor; otherwise the pathwise share-dominance guarantee fails and the
// call is rejected.
CoupledPaths coupled_run(const ProcessConfig& p, const std::vector<double>& mu_alt,
                         std::int64_t blocks, RandomStream& rng);

}  // namespace bps
