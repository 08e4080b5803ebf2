#include "bps/tullock.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bps/errors.hpp"
#include "bps/random.hpp"
#include "doctest.h"

using bps::Allocation;
using bps::CompetitivenessProfile;
using bps::contest_objective;
using bps::gamma_profile;
using bps::max_share_bound;
using bps::MultiplierProfile;
using bps::participant_utility;
using bps::perturb_multiplier;
using bps::RandomStream;
using bps::solve_equilibrium;
using bps::ValidationError;
using bps::worst_case_instance;

namespace {

// Verifies the first-order conditions directly: mu_i (r/c)(1 - x_i) equals lambda on the
// active set and does not exceed it off the active set.
void check_kkt(const MultiplierProfile& p, const Allocation& a, double tol = 1e-10)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        REQUIRE(a.x[i] >= 0.0);
        sum += a.x[i];
        const double grad = p.mu[i] * (p.r / p.c) * (1.0 - a.x[i]);
        if (a.x[i] > 0.0) {
            REQUIRE(std::abs(grad - a.lambda) <= tol * std::max(1.0, std::abs(a.lambda)));
        } else {
            REQUIRE(grad <= a.lambda + tol);
        }
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-10);
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        REQUIRE(a.pi[i] == doctest::Approx(a.total_stake * a.x[i]).epsilon(1e-12));
    }
}

MultiplierProfile random_instance(RandomStream& rng, std::size_t max_n)
{
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_below(max_n - 1));
    std::vector<double> mu(n);
    for (auto& m : mu) {
        m = std::exp(std::log(100.0) * rng.next_double());  // log-uniform in [1, 100]
    }
    const double r = 0.5 + rng.next_double() * 2.0;
    const double c = 0.5 + rng.next_double() * 2.0;
    return MultiplierProfile::relaxed_profile(std::move(mu), r, c);
}

}  // namespace

TEST_CASE("equal multipliers split the market evenly")
{
    const auto a = solve_equilibrium(MultiplierProfile::canonical({1, 1, 1, 1}, 2.0, 0.5));
    for (double xi : a.x) {
        CHECK(xi == doctest::Approx(0.25).epsilon(1e-12));
    }
    check_kkt(MultiplierProfile::canonical({1, 1, 1, 1}, 2.0, 0.5), a);
}

TEST_CASE("the two-participant example solves in closed form")
{
    // mu = (2,1), r = c = 1: shares (2/3, 1/3), lambda = 2/3, stakes (4/9, 2/9).
    const auto p = MultiplierProfile::canonical({2, 1});
    const auto a = solve_equilibrium(p);
    CHECK(a.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(a.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.total_stake == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.pi[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(a.pi[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    check_kkt(p, a);

    // Scaling r and c separately: shares invariant, stakes scale with r/c.
    const auto scaled = solve_equilibrium(MultiplierProfile::canonical({2, 1}, 3.0, 2.0));
    CHECK(scaled.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(scaled.pi[0] == doctest::Approx(4.0 / 9.0 * 1.5).epsilon(1e-12));
}

TEST_CASE("a dominated participant is driven out of the market")
{
    // mu = (10,10,1): active set {1,2}, lambda = 5 (r = c), excluded share 0.
    const auto p = MultiplierProfile::canonical({10, 10, 1}, 1.0, 1.0);
    const auto a = solve_equilibrium(p);
    CHECK(a.x[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.x[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.x[2] == 0.0);
    CHECK(a.lambda == doctest::Approx(5.0).epsilon(1e-12));
    check_kkt(p, a);
}

TEST_CASE("degenerate inputs are rejected with explicit errors")
{
    CHECK_THROWS_AS(static_cast<void>(solve_equilibrium(
                        MultiplierProfile::relaxed_profile({1.0}))),
                    ValidationError);
    CHECK_THROWS_AS(static_cast<void>(solve_equilibrium(
                        MultiplierProfile::relaxed_profile({0.0, 0.0, 0.0}))),
                    ValidationError);
    CHECK_THROWS_AS(static_cast<void>(MultiplierProfile::canonical({1, 2})), ValidationError);
    CHECK_THROWS_AS(static_cast<void>(MultiplierProfile::canonical({3, 2})), ValidationError);
    CHECK_THROWS_AS(static_cast<void>(MultiplierProfile::canonical({2, 1}, 0.0)),
                    ValidationError);
    CHECK_THROWS_AS(static_cast<void>(MultiplierProfile::relaxed_profile({2, -1})),
                    ValidationError);
}

TEST_CASE("share bound closed form and endpoints")
{
    CHECK(max_share_bound({1.0, 9}) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(max_share_bound({0.5, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(max_share_bound({0.9, 10}) == doctest::Approx(1.0 - 9.0 / 10.9).epsilon(1e-9));
    CHECK(max_share_bound({0.9, 10}) == doctest::Approx(0.174312).epsilon(1e-5));
    CHECK(max_share_bound({0.0, 5}) == doctest::Approx(1.0));
    for (int k = 1; k <= 10; ++k) {
        CHECK(max_share_bound({1.0, k}) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-12));
    }
}

TEST_CASE("worst-case instances attain the bound exactly")
{
    SUBCASE("documented pairs") {
        const auto w = worst_case_instance({0.5, 1});
        REQUIRE(w.mu.size() == 2);
        CHECK(w.mu[0] == doctest::Approx(2.0));
        const auto a = solve_equilibrium(w);
        CHECK(a.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

        const auto w2 = worst_case_instance({0.9, 10});
        const auto a2 = solve_equilibrium(w2);
        CHECK(std::abs(a2.x[0] - max_share_bound({0.9, 10})) <= 1e-10);
        for (std::size_t i = 1; i < a2.x.size(); ++i) {
            CHECK(a2.x[i] == doctest::Approx(0.9 / 10.9).epsilon(1e-10));
        }

        const auto sym = solve_equilibrium(worst_case_instance({1.0, 3}));
        for (double xi : sym.x) {
            CHECK(xi == doctest::Approx(0.25).epsilon(1e-12));
        }
    }
    SUBCASE("20-point tightness grid") {
        for (double gamma : {0.1, 0.25, 0.5, 0.75, 1.0}) {
            for (int k : {1, 2, 5, 10}) {
                CAPTURE(gamma);
                CAPTURE(k);
                const auto a = solve_equilibrium(worst_case_instance({gamma, k}));
                REQUIRE(std::abs(a.x[0] - max_share_bound({gamma, k})) <= 1e-10);
            }
        }
    }
    SUBCASE("gamma zero rejected") {
        CHECK_THROWS_AS(static_cast<void>(worst_case_instance({0.0, 2})), ValidationError);
    }
}

TEST_CASE("competitiveness profile enumerates maximal gamma per k")
{
    const auto single = gamma_profile(MultiplierProfile::canonical({2, 1}));
    REQUIRE(single.pairs.size() == 1);
    CHECK(single.pairs[0].gamma == doctest::Approx(0.5));
    CHECK(single.pairs[0].k == 1);
    CHECK(single.k_star == 1);

    const auto ties = gamma_profile(MultiplierProfile::canonical({1, 1, 1, 1}));
    REQUIRE(ties.pairs.size() == 3);
    for (const auto& cp : ties.pairs) {
        CHECK(cp.gamma == doctest::Approx(1.0));
    }
    CHECK(ties.k_star == 3);
    CHECK(ties.best_bound == doctest::Approx(0.25).epsilon(1e-12));

    const auto mixed = gamma_profile(MultiplierProfile::canonical({4, 2, 1}));
    REQUIRE(mixed.pairs.size() == 2);
    CHECK(mixed.pairs[0].gamma == doctest::Approx(0.5));
    CHECK(mixed.pairs[1].gamma == doctest::Approx(0.25));
    CHECK(mixed.k_star == 1);
    CHECK(mixed.best_bound == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // The k = 2 bound is weaker: 1 - 0.25*2/2.25 = 7/9.
    CHECK(max_share_bound(mixed.pairs[1]) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("the bound holds for every random instance and every k")
{
    RandomStream rng(20240817);
    for (int t = 0; t < 100; ++t) {
        auto p = random_instance(rng, 12);
        std::sort(p.mu.begin(), p.mu.end(), std::greater<double>());
        const auto a = solve_equilibrium(p);
        check_kkt(p, a);
        for (std::size_t k = 1; k + 1 <= p.mu.size(); ++k) {
            const CompetitivenessProfile cp{p.mu[k] / p.mu[0], static_cast<int>(k)};
            REQUIRE(a.x[0] <= max_share_bound(cp) + 1e-10);
        }
        // Shares ordered like multipliers.
        for (std::size_t i = 0; i + 1 < p.mu.size(); ++i) {
            REQUIRE(a.x[i] >= a.x[i + 1] - 1e-12);
        }
    }
}

TEST_CASE("raising one rival multiplier weakly lowers every other share")
{
    RandomStream rng(424242);
    for (int t = 0; t < 200; ++t) {
        const auto p = random_instance(rng, 8);
        const std::size_t j = rng.next_below(p.mu.size());
        const double factor = 1.0 + rng.next_double() * 3.0;
        const auto [before, after] =
            perturb_multiplier(p, static_cast<int>(j) + 1, p.mu[j] * factor);
        for (std::size_t i = 0; i < p.mu.size(); ++i) {
            if (i == j) continue;
            REQUIRE(after.x[i] <= before.x[i] + 1e-10);
        }
        // The perturbed participant itself weakly gains.
        REQUIRE(after.x[j] >= before.x[j] - 1e-10);
    }
}

TEST_CASE("perturbation follows the documented examples")
{
    const auto p = MultiplierProfile::canonical({2, 1});
    const auto [b1, a1] = perturb_multiplier(p, 2, 1.5);
    CHECK(b1.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a1.x[0] < b1.x[0]);

    const auto [b2, a2] = perturb_multiplier(MultiplierProfile::canonical({1, 1}), 1, 1.0);
    CHECK(a2.x[0] == doctest::Approx(b2.x[0]).epsilon(1e-12));
    CHECK(a2.x[1] == doctest::Approx(b2.x[1]).epsilon(1e-12));

    const auto [b3, a3] = perturb_multiplier(p, 2, 0.0);
    CHECK(b3.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a3.x[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no feasible grid point beats the solver on the potential")
{
    // Brute force over the simplex at resolution 1e-3 for n <= 3. The potential has
    // gradient components bounded by max(mu) r / c, so the best grid point can trail the
    // true optimum by at most that Lipschitz constant times the grid diameter.
    RandomStream rng(777);
    for (int t = 0; t < 50; ++t) {
        const auto p = random_instance(rng, 3);
        const auto a = solve_equilibrium(p);
        const double solver_value = contest_objective(p, a.x);

        const int steps = 1000;
        double best_grid = -1.0;
        const double mu_max = *std::max_element(p.mu.begin(), p.mu.end());
        if (p.mu.size() == 2) {
            for (int i = 0; i <= steps; ++i) {
                const double x1 = static_cast<double>(i) / steps;
                best_grid = std::max(best_grid, contest_objective(p, {x1, 1.0 - x1}));
            }
        } else {
            for (int i = 0; i <= steps; ++i) {
                for (int j = 0; i + j <= steps; ++j) {
                    const double x1 = static_cast<double>(i) / steps;
                    const double x2 = static_cast<double>(j) / steps;
                    best_grid =
                        std::max(best_grid, contest_objective(p, {x1, x2, 1.0 - x1 - x2}));
                }
            }
        }
        const double slack = mu_max * (p.r / p.c) * (2.0 / steps);
        REQUIRE(best_grid <= solver_value + 1e-12);
        REQUIRE(solver_value <= best_grid + slack);
    }
}

TEST_CASE("equilibrium stakes are best responses under unilateral deviation")
{
    RandomStream rng(31337);
    for (int t = 0; t < 100; ++t) {
        const auto p = random_instance(rng, 20);
        const auto a = solve_equilibrium(p);
        for (std::size_t i = 0; i < p.mu.size(); ++i) {
            const double base = participant_utility(p, a.pi, i);
            for (double delta : {1e-3, 1e-2}) {
                for (double sign : {1.0, -1.0}) {
                    auto dev = a.pi;
                    dev[i] += sign * delta * a.total_stake;
                    if (dev[i] < 0.0) continue;
                    const double u = participant_utility(p, dev, i);
                    REQUIRE(u <= base + 1e-9 * std::max(1.0, std::abs(base)));
                }
            }
        }
    }
}

TEST_CASE("shares and scaled lambda are invariant to joint r and c scaling")
{
    const std::vector<double> mu = {5, 3, 1};
    const auto base = solve_equilibrium(MultiplierProfile::canonical(mu, 1.0, 1.0));
    for (double s : {0.1, 2.0, 50.0}) {
        const auto scaled = solve_equilibrium(MultiplierProfile::canonical(mu, s, s));
        for (std::size_t i = 0; i < mu.size(); ++i) {
            CHECK(scaled.x[i] == doctest::Approx(base.x[i]).epsilon(1e-12));
        }
        // a_i = mu_i r / c is unchanged, so lambda itself is unchanged.
        CHECK(scaled.lambda == doctest::Approx(base.lambda).epsilon(1e-12));
    }
    // Scaling r alone leaves shares unchanged and scales lambda linearly.
    const auto r_only = solve_equilibrium(MultiplierProfile::canonical(mu, 7.0, 1.0));
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(r_only.x[i] == doctest::Approx(base.x[i]).epsilon(1e-12));
    }
    CHECK(r_only.lambda == doctest::Approx(7.0 * base.lambda).epsilon(1e-12));
}
