#include "bps/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "bps/errors.hpp"
#include "bps/pbs_auction.hpp"
#include "bps/staking_process.hpp"
#include "bps/tullock.hpp"
#include "bps/version.hpp"

namespace bps {

namespace {

constexpr std::int64_t kTrialBatch = 65536;  // fixed batch size keeps reductions stable

std::string trim_copy(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

std::vector<std::string> split_list(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(trim_copy(std::string_view(s).substr(start)));
            return parts;
        }
        parts.push_back(trim_copy(std::string_view(s).substr(start, pos - start)));
        start = pos + 1;
    }
}

bool valid_key(const std::string& key)
{
    if (key.empty()) {
        return false;
    }
    for (char c : key) {
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_')) {
            return false;
        }
    }
    return true;
}

bool valid_label(const std::string& label)
{
    if (label.empty()) {
        return false;
    }
    for (char c : label) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

// Runs body(0..count-1) on up to `jobs` threads. Batch boundaries and result slots are
// fixed up front, so callers see identical results at any parallelism level; the lowest
// failing index wins error reporting to keep failures reproducible too.
void parallel_for(std::int64_t count, int jobs, const std::function<void(std::int64_t)>& body)
{
    if (count <= 0) {
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(jobs, count));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::int64_t first_error_index = -1;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error_index < 0 || i < first_error_index) {
                    first_error = std::current_exception();
                    first_error_index = i;
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

// Collects per-field validation complaints so a bad config reports everything at once.
class FieldCollector {
public:
    void attempt(const std::function<void()>& f)
    {
        try {
            f();
        } catch (const ValidationError& e) {
            problems_.emplace_back(e.what());
        }
    }

    void finish() const
    {
        if (problems_.empty()) {
            return;
        }
        std::string joined = "invalid config: ";
        for (std::size_t i = 0; i < problems_.size(); ++i) {
            if (i > 0) {
                joined += "; ";
            }
            joined += problems_[i];
        }
        throw ValidationError(joined);
    }

private:
    std::vector<std::string> problems_;
};

struct ParsedProposers {
    std::vector<ProposerSpec> specs;
};

ParsedProposers parse_proposers(const ExperimentConfig& cfg)
{
    ParsedProposers out;
    const std::string raw = cfg.get_string("proposers");
    for (const std::string& entry : split_list(raw, '|')) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("proposers: expected label=distribution, got \"" + entry +
                                  "\"");
        }
        const std::string label = trim_copy(std::string_view(entry).substr(0, eq));
        if (!valid_label(label)) {
            throw ValidationError("proposers: label \"" + label +
                                  "\" must be alphanumeric/_/- and nonempty");
        }
        for (const auto& existing : out.specs) {
            if (existing.label == label) {
                throw ValidationError("proposers: duplicate label \"" + label + "\"");
            }
        }
        out.specs.push_back(
            {label, Distribution::parse(std::string_view(entry).substr(eq + 1))});
    }
    if (out.specs.empty()) {
        throw ValidationError("proposers: list is empty");
    }
    return out;
}

// Shared batched Monte Carlo for the pbs/pbs-sweep/compose kinds: fixed-size batches,
// per-batch seeds derived from (master_seed, point, batch), reduced in batch order.
RewardMatrix estimate_rewards_batched(const std::vector<ProposerSpec>& props,
                                      const BuilderEcosystem& eco, std::int64_t trials,
                                      std::uint64_t master_seed, std::uint64_t point,
                                      int jobs)
{
    if (trials < 1) {
        throw ValidationError("trials must be >= 1");
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
    const std::int64_t batches = (trials + kTrialBatch - 1) / kTrialBatch;
    std::vector<MomentAccumulator> parts(static_cast<std::size_t>(batches),
                                         MomentAccumulator(props.size()));
    parallel_for(batches, jobs, [&](std::int64_t b) {
        const std::int64_t lo = b * kTrialBatch;
        const std::int64_t n = std::min<std::int64_t>(kTrialBatch, trials - lo);
        RandomStream rng(derive_seed(master_seed, point, static_cast<std::uint64_t>(b)));
        parts[static_cast<std::size_t>(b)] = run_reward_batch(props, eco, bid, n, rng);
    });
    MomentAccumulator total(props.size());
    for (const auto& part : parts) {
        total.merge(part);
    }
    return finalize_rewards(total);
}

ResultTable run_equilibrium(const ExperimentConfig& cfg)
{
    std::vector<double> mu;
    double r = 1.0;
    double c = 1.0;
    FieldCollector fc;
    fc.attempt([&] { mu = cfg.get_double_list("mu"); });
    fc.attempt([&] { r = cfg.get_double("r", 1.0); });
    fc.attempt([&] { c = cfg.get_double("c", 1.0); });
    fc.finish();

    const Allocation alloc = solve_equilibrium(MultiplierProfile::canonical(mu, r, c));
    ResultTable table({"bp", "mu", "x", "pi"}, cfg.identity_hash(), cfg.master_seed());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        table.add_row({ResultTable::integer(static_cast<std::int64_t>(i) + 1),
                       ResultTable::num(mu[i]), ResultTable::num(alloc.x[i]),
                       ResultTable::num(alloc.pi[i])});
    }
    return table;
}

ResultTable run_figure_econ(const ExperimentConfig& cfg)
{
    static constexpr int kCounts[] = {1, 2, 5, 10, 100};
    ResultTable table({"gamma", "k", "max_share_bound", "above_threshold"},
                      cfg.identity_hash(), cfg.master_seed());
    for (int i = 0; i <= 100; ++i) {
        const double gamma = static_cast<double>(i) / 100.0;
        for (int k : kCounts) {
            const double bound = max_share_bound({gamma, k});
            table.add_row({ResultTable::num(gamma), ResultTable::integer(k),
                           ResultTable::num(bound),
                           ResultTable::integer(bound > 1.0 / 3.0 ? 1 : 0)});
        }
    }
    return table;
}

ProcessConfig process_config_from(const ExperimentConfig& cfg)
{
    std::vector<double> mu;
    std::vector<double> stakes;
    double r = 1.0;
    double epsilon = 0.0;
    std::int64_t target = 1;
    FieldCollector fc;
    fc.attempt([&] { mu = cfg.get_double_list("mu"); });
    fc.attempt([&] { stakes = cfg.get_double_list("stakes"); });
    fc.attempt([&] { r = cfg.get_double("r", 1.0); });
    fc.attempt([&] { epsilon = cfg.get_double("epsilon"); });
    fc.attempt([&] { target = cfg.get_int("target", 1); });
    fc.finish();

    return ProcessConfig::create(MultiplierProfile::canonical(mu, r), stakes, epsilon,
                                 static_cast<int>(target));
}

ResultTable run_simulate(const ExperimentConfig& cfg)
{
    const ProcessConfig pc = process_config_from(cfg);
    const std::int64_t runs = cfg.get_int("runs");
    const std::int64_t max_blocks = cfg.get_int("max_blocks");
    if (runs < 1) {
        throw ValidationError("runs must be >= 1");
    }

    struct Row {
        std::uint64_t seed;
        bool hit;
        std::int64_t block;
        std::vector<double> shares;
    };
    std::vector<Row> rows(static_cast<std::size_t>(runs));
    parallel_for(runs, cfg.jobs(), [&](std::int64_t i) {
        const std::uint64_t seed = derive_seed(cfg.master_seed(), static_cast<std::uint64_t>(i));
        RandomStream rng(seed);
        try {
            RunResult res = run_until_centralized(pc, max_blocks, rng);
            rows[static_cast<std::size_t>(i)] =
                Row{seed, res.hit, res.block, res.final_state.shares()};
        } catch (const NumericError& e) {
            throw NumericError(e.what(), e.run_index >= 0 ? e.run_index : i);
        }
    });

    std::vector<std::string> columns{"seed", "hit", "blocks"};
    for (std::size_t i = 1; i <= pc.size(); ++i) {
        columns.push_back("x_" + std::to_string(i));
    }
    ResultTable table(std::move(columns), cfg.identity_hash(), cfg.master_seed());
    for (const Row& row : rows) {
        std::vector<std::string> cells{std::to_string(row.seed),
                                       ResultTable::integer(row.hit ? 1 : 0),
                                       ResultTable::integer(row.block)};
        for (double x : row.shares) {
            cells.push_back(ResultTable::num(x));
        }
        table.add_row(std::move(cells));
    }
    return table;
}

ResultTable run_bounds(const ExperimentConfig& cfg)
{
    const ProcessConfig pc = process_config_from(cfg);
    const CentralizationBounds cb = theorem_bounds(pc);
    ResultTable table({"upper_blocks", "lower_blocks", "lower_vacuous", "prob_cap", "beta",
                       "rho", "critical_time"},
                      cfg.identity_hash(), cfg.master_seed());
    table.add_row({ResultTable::num(cb.upper_blocks), ResultTable::num(cb.lower_blocks),
                   ResultTable::integer(cb.lower_vacuous ? 1 : 0),
                   ResultTable::num(cb.prob_cap), ResultTable::num(cb.beta),
                   ResultTable::num(cb.rho), ResultTable::num(cb.critical_time)});
    return table;
}

ResultTable run_bound_sweep(const ExperimentConfig& cfg)
{
    std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5};
    double rho = 9.0;
    double epsilon = 2.0 / 3.0;
    double mu2 = 1.0;
    double r = 1.0;
    double pi1 = 1.0;
    FieldCollector fc;
    fc.attempt([&] {
        if (cfg.has("deltas")) {
            deltas = cfg.get_double_list("deltas");
        }
    });
    fc.attempt([&] { rho = cfg.get_double("rho", 9.0); });
    fc.attempt([&] { epsilon = cfg.get_double("epsilon", 2.0 / 3.0); });
    fc.attempt([&] { mu2 = cfg.get_double("mu2", 1.0); });
    fc.attempt([&] { r = cfg.get_double("r", 1.0); });
    fc.attempt([&] { pi1 = cfg.get_double("pi1", 1.0); });
    fc.finish();
    if (deltas.empty()) {
        throw ValidationError("deltas: list is empty");
    }
    for (double d : deltas) {
        if (!(d > 0.0)) {
            throw ValidationError("deltas: multiplier gaps must be > 0");
        }
    }

    std::vector<CentralizationBounds> bounds;
    bounds.reserve(deltas.size());
    for (double delta : deltas) {
        const ProcessConfig pc = ProcessConfig::create(
            MultiplierProfile::relaxed_profile({mu2 + delta, mu2}, r), {pi1, rho * pi1},
            epsilon);
        bounds.push_back(theorem_bounds(pc));
    }
    const double widest_upper = bounds[std::max_element(deltas.begin(), deltas.end()) -
                                       deltas.begin()].upper_blocks;

    ResultTable table({"delta", "mu1", "upper_blocks", "lower_blocks", "lower_vacuous",
                       "critical_time", "upper_ratio_to_widest_gap"},
                      cfg.identity_hash(), cfg.master_seed());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        table.add_row({ResultTable::num(deltas[i]), ResultTable::num(mu2 + deltas[i]),
                       ResultTable::num(bounds[i].upper_blocks),
                       ResultTable::num(bounds[i].lower_blocks),
                       ResultTable::integer(bounds[i].lower_vacuous ? 1 : 0),
                       ResultTable::num(bounds[i].critical_time),
                       ResultTable::num(bounds[i].upper_blocks / widest_upper)});
    }
    return table;
}

struct PbsInputs {
    BuilderEcosystem eco;
    std::vector<ProposerSpec> props;
    std::int64_t trials;
    bool waived;
};

PbsInputs pbs_inputs_from(const ExperimentConfig& cfg, int k)
{
    std::optional<Distribution> dy;
    std::optional<ParsedProposers> props;
    std::int64_t trials = 0;
    bool waive = false;
    FieldCollector fc;
    fc.attempt([&] { dy = Distribution::parse(cfg.get_string("dy")); });
    fc.attempt([&] { props = parse_proposers(cfg); });
    fc.attempt([&] { trials = cfg.get_int("trials"); });
    fc.attempt([&] { waive = cfg.get_bool("waive_mhr", false); });
    fc.finish();

    PbsInputs in{BuilderEcosystem::create(k, std::move(*dy)), std::move(props->specs),
                 trials, waive};
    if (!in.waived) {
        check_theorem_regime(in.props, in.eco);
    }
    return in;
}

ResultTable run_pbs(const ExperimentConfig& cfg)
{
    const int k = static_cast<int>(cfg.get_int("builders"));
    const PbsInputs in = pbs_inputs_from(cfg, k);
    const RewardMatrix m = estimate_rewards_batched(in.props, in.eco, in.trials,
                                                    cfg.master_seed(), 0, cfg.jobs());

    double min_mean = m.per_proposer[0].mean;
    for (const auto& e : m.per_proposer) {
        min_mean = std::min(min_mean, e.mean);
    }
    const double cap = theoretical_ratio_cap(k);
    ResultTable table({"label", "mean_reward", "std_error", "ratio_to_min",
                       "theoretical_cap"},
                      cfg.identity_hash(), cfg.master_seed());
    for (std::size_t i = 0; i < in.props.size(); ++i) {
        table.add_row({in.props[i].label, ResultTable::num(m.per_proposer[i].mean),
                       ResultTable::num(m.per_proposer[i].std_error),
                       min_mean > 0.0 ? ResultTable::num(m.per_proposer[i].mean / min_mean)
                                      : "nan",
                       ResultTable::num(cap)});
    }
    return table;
}

ResultTable run_pbs_sweep(const ExperimentConfig& cfg)
{
    const std::vector<std::int64_t> k_list = cfg.get_int_list("k_list");
    if (k_list.empty()) {
        throw ValidationError("k_list: list is empty");
    }

    ResultTable table({"k", "ratio", "std_error", "theoretical_cap"}, cfg.identity_hash(),
                      cfg.master_seed());
    for (std::size_t point = 0; point < k_list.size(); ++point) {
        const int k = static_cast<int>(k_list[point]);
        const PbsInputs in = pbs_inputs_from(cfg, k);
        if (in.props.size() < 2) {
            throw ValidationError("pbs-sweep requires at least two proposers");
        }
        RewardMatrix m = estimate_rewards_batched(in.props, in.eco, in.trials,
                                                  cfg.master_seed(), point, cfg.jobs());
        RatioResult ratio;
        try {
            ratio = ratio_from_estimates(std::move(m));
        } catch (const NumericError& e) {
            throw NumericError(e.what(), static_cast<long long>(point));
        }
        table.add_row({ResultTable::integer(k), ResultTable::num(ratio.ratio),
                       ResultTable::num(ratio.std_error),
                       ResultTable::num(theoretical_ratio_cap(k))});
    }
    return table;
}

ResultTable run_compose(const ExperimentConfig& cfg)
{
    const int k = static_cast<int>(cfg.get_int("builders"));
    const double r = cfg.get_double("r", 1.0);
    const double c = cfg.get_double("c", 1.0);
    const PbsInputs in = pbs_inputs_from(cfg, k);
    if (in.props.size() < 2) {
        throw ValidationError("compose requires at least two proposers");
    }
    const RewardMatrix m = estimate_rewards_batched(in.props, in.eco, in.trials,
                                                    cfg.master_seed(), 0, cfg.jobs());

    double min_mean = m.per_proposer[0].mean;
    for (const auto& e : m.per_proposer) {
        min_mean = std::min(min_mean, e.mean);
    }
    if (!(min_mean > 0.0)) {
        throw NumericError("compose: a proposer mean reward is not positive");
    }

    // Mean conditional rewards become effective multipliers, smallest normalized to 1.
    std::vector<double> mu_eff(in.props.size());
    for (std::size_t i = 0; i < mu_eff.size(); ++i) {
        mu_eff[i] = m.per_proposer[i].mean / min_mean;
    }
    const Allocation alloc =
        solve_equilibrium(MultiplierProfile::relaxed_profile(mu_eff, r, c));

    const double mu_max = *std::max_element(mu_eff.begin(), mu_eff.end());
    const double gamma = 1.0 / mu_max;  // weakest over strongest effective multiplier
    const int k_comp = static_cast<int>(mu_eff.size()) - 1;
    const double bound = max_share_bound({gamma, k_comp});
    const double max_share = *std::max_element(alloc.x.begin(), alloc.x.end());

    ResultTable table({"label", "mean_reward", "effective_mu", "x", "gamma", "k_comp",
                       "max_share", "share_bound"},
                      cfg.identity_hash(), cfg.master_seed());
    for (std::size_t i = 0; i < in.props.size(); ++i) {
        table.add_row({in.props[i].label, ResultTable::num(m.per_proposer[i].mean),
                       ResultTable::num(mu_eff[i]), ResultTable::num(alloc.x[i]),
                       ResultTable::num(gamma), ResultTable::integer(k_comp),
                       ResultTable::num(max_share), ResultTable::num(bound)});
    }
    return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_text(std::string_view text)
{
    ExperimentConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        const std::string_view raw =
            text.substr(start, end == std::string_view::npos ? text.size() - start
                                                             : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        const std::string line = trim_copy(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key=value, got \"" + line + "\"");
        }
        std::string key = trim_copy(std::string_view(line).substr(0, eq));
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (!valid_key(key)) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": invalid key \"" + key + "\"");
        }
        cfg.values_[key] = trim_copy(std::string_view(line).substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

void ExperimentConfig::set(const std::string& key, std::string value)
{
    if (!valid_key(key)) {
        throw ValidationError("invalid config key \"" + key + "\"");
    }
    values_[key] = std::move(value);
}

bool ExperimentConfig::has(const std::string& key) const
{
    return values_.count(key) > 0;
}

std::string ExperimentConfig::get_string(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ValidationError("missing config key \"" + key + "\"");
    }
    return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const
{
    const std::string raw = get_string(key);
    char* end = nullptr;
    const long long v = std::strtoll(raw.c_str(), &end, 10);
    if (raw.empty() || end != raw.c_str() + raw.size()) {
        throw ValidationError("config key \"" + key + "\": invalid integer \"" + raw + "\"");
    }
    return v;
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ExperimentConfig::get_uint(const std::string& key, std::uint64_t fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const std::string raw = get_string(key);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
    if (raw.empty() || end != raw.c_str() + raw.size() || raw.front() == '-') {
        throw ValidationError("config key \"" + key + "\": invalid unsigned integer \"" +
                              raw + "\"");
    }
    return v;
}

double ExperimentConfig::get_double(const std::string& key) const
{
    const std::string raw = get_string(key);
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (raw.empty() || end != raw.c_str() + raw.size()) {
        throw ValidationError("config key \"" + key + "\": invalid number \"" + raw + "\"");
    }
    return v;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const std::string raw = get_string(key);
    if (raw == "1" || raw == "true") {
        return true;
    }
    if (raw == "0" || raw == "false") {
        return false;
    }
    throw ValidationError("config key \"" + key + "\": expected 0/1/true/false, got \"" +
                          raw + "\"");
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const
{
    const std::string raw = get_string(key);
    std::vector<double> out;
    for (const std::string& tok : split_list(raw, ',')) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size()) {
            throw ValidationError("config key \"" + key + "\": invalid number \"" + tok +
                                  "\"");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::int64_t> ExperimentConfig::get_int_list(const std::string& key) const
{
    const std::string raw = get_string(key);
    std::vector<std::int64_t> out;
    for (const std::string& tok : split_list(raw, ',')) {
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (tok.empty() || end != tok.c_str() + tok.size()) {
            throw ValidationError("config key \"" + key + "\": invalid integer \"" + tok +
                                  "\"");
        }
        out.push_back(v);
    }
    return out;
}

std::string ExperimentConfig::kind() const
{
    return get_string("kind");
}

std::uint64_t ExperimentConfig::master_seed() const
{
    return get_uint("master_seed", 1);
}

int ExperimentConfig::jobs() const
{
    const std::int64_t j = get_int("jobs", 1);
    if (j < 1 || j > 256) {
        throw ValidationError("jobs must lie in [1, 256]");
    }
    return static_cast<int>(j);
}

std::string ExperimentConfig::output_path() const
{
    return get_string("output_path", "");
}

std::string ExperimentConfig::format() const
{
    return get_string("format", "csv");
}

std::string ExperimentConfig::serialize() const
{
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

std::string ExperimentConfig::identity_hash() const
{
    std::string payload;
    for (const auto& [key, value] : values_) {
        if (key == "output_path" || key == "jobs" || key == "format") {
            continue;
        }
        payload += key;
        payload += '=';
        payload += value;
        payload += '\n';
    }
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : payload) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

ResultTable::ResultTable(std::vector<std::string> columns, std::string config_hash,
                         std::uint64_t master_seed)
    : columns_(std::move(columns)), config_hash_(std::move(config_hash)),
      master_seed_(master_seed)
{
    if (columns_.empty()) {
        throw ValidationError("result table requires at least one column");
    }
}

std::string ResultTable::num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

std::string ResultTable::integer(std::int64_t v)
{
    return std::to_string(v);
}

void ResultTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != columns_.size()) {
        throw ValidationError("row width does not match the column count");
    }
    for (const std::string& cell : cells) {
        if (cell.find_first_of(",\n\r") != std::string::npos) {
            throw ValidationError("cell value may not contain commas or newlines: \"" +
                                  cell + "\"");
        }
    }
    rows_.push_back(std::move(cells));
}

std::string ResultTable::to_csv() const
{
    std::string out;
    out += "# version=";
    out += kVersion;
    out += "\n# config_hash=";
    out += config_hash_;
    out += "\n# master_seed=";
    out += std::to_string(master_seed_);
    out += '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += columns_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

ResultTable run_experiment(const ExperimentConfig& cfg)
{
    if (cfg.format() != "csv") {
        throw ValidationError("format: only \"csv\" is supported");
    }
    cfg.jobs();  // range check up front

    const std::string kind = cfg.kind();
    if (kind == "equilibrium") {
        return run_equilibrium(cfg);
    }
    if (kind == "figure-econ") {
        return run_figure_econ(cfg);
    }
    if (kind == "simulate") {
        return run_simulate(cfg);
    }
    if (kind == "bounds") {
        return run_bounds(cfg);
    }
    if (kind == "bound-sweep") {
        return run_bound_sweep(cfg);
    }
    if (kind == "pbs") {
        return run_pbs(cfg);
    }
    if (kind == "pbs-sweep") {
        return run_pbs_sweep(cfg);
    }
    if (kind == "compose") {
        return run_compose(cfg);
    }
    throw ValidationError(
        "unknown experiment kind \"" + kind +
        "\" (expected equilibrium, figure-econ, simulate, bounds, bound-sweep, pbs, "
        "pbs-sweep, or compose)");
}

void write_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write output file: " + tmp);
        }
        out << content;
        out.flush();
        if (!out) {
            throw ValidationError("failed while writing output file: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ValidationError("cannot rename " + tmp + " to " + path);
    }
}

}  // namespace bps
