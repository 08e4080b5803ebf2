#include "bps/staking_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bps/errors.hpp"

namespace bps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Stake counts must stay exactly representable in a double for the partition draw.
constexpr std::int64_t kMaxExactQuanta = std::int64_t{1} << 53;

// Winner of the uniform draw u against the cumulative partition (a_{i-1}, a_i];
// 1-based. Quanta totals are kept below 2^53 so the scaled comparison is exact.
int pick_winner(const std::vector<std::int64_t>& quanta, std::int64_t total, double u)
{
    const double scaled = u * static_cast<double>(total);
    std::int64_t cum = 0;
    for (std::size_t i = 0; i + 1 < quanta.size(); ++i) {
        cum += quanta[i];
        if (scaled <= static_cast<double>(cum)) {
            return static_cast<int>(i) + 1;
        }
    }
    return static_cast<int>(quanta.size());
}

void apply_reward(StakeState& s, const std::vector<std::int64_t>& reward_quanta, int winner)
{
    s.quanta[static_cast<std::size_t>(winner - 1)] += reward_quanta[static_cast<std::size_t>(winner - 1)];
    s.block += 1;
    if (s.total_quanta() > kMaxExactQuanta) {
        throw NumericError("stake resolution exhausted: quantum count exceeded 2^53");
    }
}

bool centralized(const StakeState& s, const ProcessConfig& p)
{
    const auto target = static_cast<std::size_t>(p.target_bp() - 1);
    return static_cast<double>(s.quanta[target]) >=
           (1.0 - p.epsilon()) * static_cast<double>(s.total_quanta());
}

}  // namespace

std::int64_t StakeState::total_quanta() const
{
    std::int64_t total = 0;
    for (std::int64_t q : quanta) {
        total += q;
    }
    return total;
}

std::vector<double> StakeState::stakes() const
{
    std::vector<double> out(quanta.size());
    for (std::size_t i = 0; i < quanta.size(); ++i) {
        out[i] = static_cast<double>(quanta[i]) * quantum;
    }
    return out;
}

std::vector<double> StakeState::shares() const
{
    const double total = static_cast<double>(total_quanta());
    std::vector<double> out(quanta.size());
    for (std::size_t i = 0; i < quanta.size(); ++i) {
        out[i] = static_cast<double>(quanta[i]) / total;
    }
    return out;
}

double StakeState::share(int bp) const
{
    if (bp < 1 || static_cast<std::size_t>(bp) > quanta.size()) {
        throw ValidationError("participant index out of range: " + std::to_string(bp));
    }
    return static_cast<double>(quanta[static_cast<std::size_t>(bp - 1)]) /
           static_cast<double>(total_quanta());
}

ProcessConfig ProcessConfig::create(MultiplierProfile profile,
                                    std::vector<double> initial_stakes, double epsilon,
                                    int target_bp)
{
    if (profile.size() != initial_stakes.size()) {
        throw ValidationError("initial stake list must match the multiplier profile length");
    }
    if (initial_stakes.empty()) {
        throw ValidationError("process requires at least one participant");
    }
    for (double s : initial_stakes) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ValidationError("initial stakes must be finite and > 0");
        }
    }
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw ValidationError("epsilon must lie in (0, 1)");
    }
    if (target_bp < 1 || static_cast<std::size_t>(target_bp) > initial_stakes.size()) {
        throw ValidationError("target participant index out of range: " +
                              std::to_string(target_bp));
    }

    // Coarsest power-of-ten quantum representing every stake and reward exactly.
    std::vector<double> amounts = initial_stakes;
    for (double m : profile.mu) {
        amounts.push_back(m * profile.r);
    }
    double quantum = 0.0;
    for (int d = 0; d <= 9; ++d) {
        const double scale = std::pow(10.0, d);
        bool ok = true;
        for (double v : amounts) {
            const double scaled = v * scale;
            if (scaled > 4.5e15) {
                ok = false;
                break;
            }
            const double m = std::nearbyint(scaled);
            // A positive amount must map to at least one quantum; otherwise a stake or
            // reward would silently round to nothing.
            if (v > 0.0 && m < 0.5) {
                ok = false;
                break;
            }
            if (std::fabs(m - scaled) > 1e-9 * std::max(1.0, scaled)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            quantum = std::pow(10.0, -d);
            break;
        }
    }
    if (quantum == 0.0) {
        throw ValidationError(
            "stakes and rewards are not representable as integer multiples of any quantum "
            "down to 1e-9; adjust mu, r, or the initial stakes");
    }

    ProcessConfig cfg;
    cfg.profile_ = std::move(profile);
    cfg.initial_stakes_ = std::move(initial_stakes);
    cfg.epsilon_ = epsilon;
    cfg.target_bp_ = target_bp;
    cfg.quantum_ = quantum;
    const double scale = 1.0 / quantum;
    for (double s : cfg.initial_stakes_) {
        cfg.initial_quanta_.push_back(std::llround(s * scale));
    }
    for (double m : cfg.profile_.mu) {
        cfg.reward_quanta_.push_back(std::llround(m * cfg.profile_.r * scale));
    }
    return cfg;
}

StakeState ProcessConfig::initial_state() const
{
    return StakeState{initial_quanta_, quantum_, 1};
}

double ProcessConfig::rho() const
{
    if (size() < 2) {
        throw ValidationError("rho requires at least two participants");
    }
    double rest = 0.0;
    for (std::size_t i = 0; i < initial_stakes_.size(); ++i) {
        if (static_cast<int>(i) + 1 != target_bp_) {
            rest += initial_stakes_[i];
        }
    }
    return rest / initial_stakes_[static_cast<std::size_t>(target_bp_ - 1)];
}

double ProcessConfig::beta() const
{
    if (size() < 2) {
        throw ValidationError("beta requires at least two participants");
    }
    const auto t = static_cast<std::size_t>(target_bp_ - 1);
    double rest = 0.0;
    double mu_top_rival = 0.0;
    for (std::size_t i = 0; i < initial_stakes_.size(); ++i) {
        if (i != t) {
            rest += initial_stakes_[i];
            mu_top_rival = std::max(mu_top_rival, profile_.mu[i]);
        }
    }
    return std::max(profile_.mu[t] * profile_.r / initial_stakes_[t],
                    mu_top_rival * profile_.r / rest);
}

int step(StakeState& s, const ProcessConfig& p, RandomStream& rng)
{
    const int winner = pick_winner(s.quanta, s.total_quanta(), rng.next_double());
    apply_reward(s, p.reward_quanta(), winner);
    return winner;
}

RunResult run_until_centralized(const ProcessConfig& p, std::int64_t max_blocks,
                                RandomStream& rng)
{
    if (max_blocks < 1) {
        throw ValidationError("max_blocks must be >= 1");
    }
    StakeState s = p.initial_state();
    if (centralized(s, p)) {
        return {true, 1, std::move(s)};
    }
    while (s.block < max_blocks) {
        step(s, p, rng);
        if (centralized(s, p)) {
            return {true, s.block, std::move(s)};
        }
    }
    return {false, -1, std::move(s)};
}

StakeState run_blocks(const ProcessConfig& p, std::int64_t steps, RandomStream& rng)
{
    if (steps < 0) {
        throw ValidationError("step count must be >= 0");
    }
    StakeState s = p.initial_state();
    for (std::int64_t i = 0; i < steps; ++i) {
        step(s, p, rng);
    }
    return s;
}

CentralizationBounds theorem_bounds(const ProcessConfig& p)
{
    if (p.size() < 2) {
        throw ValidationError("bounds require at least two participants");
    }
    const auto t = static_cast<std::size_t>(p.target_bp() - 1);
    const auto& mu = p.profile().mu;
    const double r = p.profile().r;
    const double eps = p.epsilon();

    const double mu1 = mu[t];
    double mu2 = 0.0;
    double mun = kInf;
    double pi_rest = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i != t) {
            mu2 = std::max(mu2, mu[i]);
            mun = std::min(mun, mu[i]);
            pi_rest += p.initial_stakes()[i];
        }
    }
    const double pi1 = p.initial_stakes()[t];

    CentralizationBounds out;
    out.rho = pi_rest / pi1;
    out.beta = p.beta();
    out.prob_cap = 8.0 * out.beta;

    if (mu1 > mu2) {
        const double base = 3.0 * out.rho * (1.0 - eps) / eps;
        const double e1 = mu1 / (mu1 - mu2);
        const double e2 = mu2 / (mu1 - mu2);
        out.upper_blocks =
            (mu2 > 0.0)
                ? 3.0 / (2.0 * mu2 * r) * (pi1 * std::pow(base, e1) + pi_rest * std::pow(base, e2))
                : kInf;
        out.critical_time = std::log(base) / (r * (mu1 - mu2));
    } else {
        out.upper_blocks = kInf;
        out.critical_time = kInf;
    }

    if (mu1 > mun) {
        const double base = out.rho * (1.0 - eps) / (3.0 * eps);
        const double f1 = mu1 / (mu1 - mun);
        const double f2 = mun / (mu1 - mun);
        const double raw = 1.0 / (2.0 * mu1 * r) *
                           (pi1 * std::pow(base, f1) + pi_rest * std::pow(base, f2) -
                            2.0 * (pi1 + pi_rest));
        out.lower_blocks = std::max(raw, 0.0);
        out.lower_vacuous = raw <= 0.0;
    } else {
        out.lower_blocks = 0.0;
        out.lower_vacuous = true;
    }
    return out;
}

StakeState run_continuous(const ProcessConfig& p, std::int64_t until_rings, RandomStream& rng)
{
    if (until_rings < 0) {
        throw ValidationError("ring count must be >= 0");
    }
    StakeState s = p.initial_state();
    for (std::int64_t ring = 0; ring < until_rings; ++ring) {
        // Memorylessness: the next clock to ring is a uniformly random quantum.
        const std::uint64_t coin = rng.next_below(static_cast<std::uint64_t>(s.total_quanta()));
        std::uint64_t cum = 0;
        int owner = static_cast<int>(s.quanta.size());
        for (std::size_t i = 0; i < s.quanta.size(); ++i) {
            cum += static_cast<std::uint64_t>(s.quanta[i]);
            if (coin < cum) {
                owner = static_cast<int>(i) + 1;
                break;
            }
        }
        apply_reward(s, p.reward_quanta(), owner);
    }
    return s;
}

StakeState run_continuous_timed(const ProcessConfig& p, double t_end, RandomStream& rng)
{
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw ValidationError("end time must be finite and >= 0");
    }
    StakeState s = p.initial_state();
    double now = 0.0;
    while (true) {
        // Each quantum rings at rate quantum (unit rate per currency unit of stake), so
        // the next ring arrives at total-currency rate.
        const double rate = static_cast<double>(s.total_quanta()) * s.quantum;
        const double dt = -std::log1p(-rng.next_double()) / rate;
        if (now + dt > t_end) {
            return s;
        }
        now += dt;
        const std::uint64_t coin = rng.next_below(static_cast<std::uint64_t>(s.total_quanta()));
        std::uint64_t cum = 0;
        int owner = static_cast<int>(s.quanta.size());
        for (std::size_t i = 0; i < s.quanta.size(); ++i) {
            cum += static_cast<std::uint64_t>(s.quanta[i]);
            if (coin < cum) {
                owner = static_cast<int>(i) + 1;
                break;
            }
        }
        apply_reward(s, p.reward_quanta(), owner);
    }
}

std::pair<double, double> yule_moments(double pi0, double mu, double r, double t)
{
    if (!(pi0 > 0.0) || !(mu >= 0.0) || !(r > 0.0) || !(t >= 0.0)) {
        throw ValidationError("moment evaluation requires pi0 > 0, mu >= 0, r > 0, t >= 0");
    }
    const double mean = pi0 * std::exp(mu * r * t);
    const double var_bound = mu * r * pi0 * std::exp(2.0 * mu * r * t);
    return {mean, var_bound};
}

CoupledPaths coupled_run(const ProcessConfig& p, const std::vector<double>& mu_alt,
                         std::int64_t blocks, RandomStream& rng)
{
    if (blocks < 0) {
        throw ValidationError("block count must be >= 0");
    }
    if (p.target_bp() != 1) {
        throw ValidationError("coupled runs compare participant 1; set target_bp = 1");
    }
    const auto& mu = p.profile().mu;
    if (mu_alt.size() != mu.size()) {
        throw ValidationError("alternative multiplier list must match the profile length");
    }
    if (mu.size() < 2) {
        throw ValidationError("coupled runs require at least two participants");
    }
    if (mu_alt[0] != mu[0]) {
        throw ValidationError(
            "coupling premise violated: participant 1's multiplier must be unchanged");
    }

    if (mu_alt != mu) {
        double rival_max = 0.0;
        double rival_min = kInf;
        for (std::size_t i = 1; i < mu.size(); ++i) {
            rival_max = std::max(rival_max, mu[i]);
            rival_min = std::min(rival_min, mu[i]);
        }
        bool all_above = true;
        bool all_below = true;
        for (std::size_t i = 1; i < mu_alt.size(); ++i) {
            all_above = all_above && mu_alt[i] >= rival_max - 1e-12;
            all_below = all_below && mu_alt[i] <= rival_min + 1e-12;
        }
        if (!all_above && !all_below) {
            throw ValidationError(
                "coupling premise violated: every alternative competitor multiplier must sit "
                "weakly above the strongest original competitor (share upper coupling) or "
                "weakly below the weakest (share lower coupling)");
        }
    }

    const ProcessConfig alt = ProcessConfig::create(
        MultiplierProfile::relaxed_profile(mu_alt, p.profile().r, p.profile().c),
        p.initial_stakes(), p.epsilon(), p.target_bp());

    StakeState s = p.initial_state();
    StakeState s_alt = alt.initial_state();
    CoupledPaths paths;
    paths.x.reserve(static_cast<std::size_t>(blocks) + 1);
    paths.x_alt.reserve(static_cast<std::size_t>(blocks) + 1);
    paths.x.push_back(s.share(1));
    paths.x_alt.push_back(s_alt.share(1));
    for (std::int64_t b = 0; b < blocks; ++b) {
        const double y = rng.next_double();
        apply_reward(s, p.reward_quanta(), pick_winner(s.quanta, s.total_quanta(), y));
        apply_reward(s_alt, alt.reward_quanta(),
                     pick_winner(s_alt.quanta, s_alt.total_quanta(), y));
        paths.x.push_back(s.share(1));
        paths.x_alt.push_back(s_alt.share(1));
    }
    return paths;
}

}  // namespace bps
