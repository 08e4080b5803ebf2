#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bps/random.hpp"

namespace bps {

// Parametric one-dimensional reward distributions, all supported on [0, inf).
//
// Every family exposes cdf / quantile / sample plus the analytic predicates needed by
// the auction model: monotone hazard rate, first-order stochastic dominance, and
// order-statistic expectations. Sampling is always quantile(u) for one uniform draw,
// so identical streams give identical draws everywhere in the toolkit.

struct PointMass {
    double value;  // >= 0
};

struct UniformDist {
    double lo, hi;  // 0 <= lo < hi
};

struct ExponentialDist {
    double rate;  // > 0
};

struct WeibullDist {
    double shape;  // >= 1 (keeps the hazard nondecreasing)
    double scale;  // > 0
};

// F(x) = 1 - 1/x on [1, cap) with an atom of mass 1/cap at the cap. cap = inf gives the
// untruncated heavy tail, which has no mean; finite-mean operations reject it.
struct EqualRevenueDist {
    double cap;  // > 1, may be +inf
};

struct EmpiricalDist {
    std::vector<double> values;  // sorted, nonnegative, nonempty
};

struct HazardProfile {
    std::vector<std::pair<double, double>> points;  // (x, f(x) / (1 - F(x)))
    bool monotone = true;                           // nondecreasing on the grid
};

struct MhrResult {
    bool mhr;
    HazardProfile profile;  // numeric evidence for the analytic verdict
};

class Distribution {
public:
    using Family = std::variant<PointMass, UniformDist, ExponentialDist, WeibullDist,
                                EqualRevenueDist, EmpiricalDist>;

    explicit Distribution(Family family);

    // Textual form `family(param=value,...)`, e.g. "exp(rate=1.0)", "equalrev(cap=100)",
    // "empirical(values=0.5;1;2)". Parse errors name the offending token.
    static Distribution parse(std::string_view spec);
    std::string to_string() const;

    double cdf(double x) const;

    // Generalized inverse of the CDF for u in [0, 1).
    double quantile(double u) const;

    // Density on the continuous part; throws for families without one.
    double pdf(double x) const;

    double sample(RandomStream& rng) const { return quantile(rng.next_double()); }

    double mean() const;      // NumericError when the mean diverges
    double variance() const;  // NumericError when divergent
    bool finite_mean() const;

    double support_lo() const;
    double support_hi() const;  // +inf for unbounded support
    bool is_discrete() const;   // PointMass or Empirical
    bool has_density() const;

    // Atoms as (x, probability); empty for purely continuous families.
    std::vector<std::pair<double, double>> atoms() const;

    // u-scale discontinuities of the quantile (used to split quadrature panels).
    std::vector<double> quantile_breakpoints() const;

    const Family& family() const { return family_; }

private:
    Family family_;
};

// Analytic MHR verdict per family, with a numeric hazard grid as evidence.
// Empirical inputs have no density and throw ValidationError ("undecidable analytically");
// use hazard_profile() directly for their discrete-hazard grid.
MhrResult is_mhr(const Distribution& d, int grid_size = 256);

// Numeric hazard grid. Continuous families evaluate f/(1-F) on an interior quantile grid;
// discrete families report the discrete hazard P(X = x_i) / P(X >= x_i).
HazardProfile hazard_profile(const Distribution& d, int grid_size = 256);

// True iff cdf(lower)(x) >= cdf(upper)(x) - 1e-12 on a quantile-spaced grid of the union
// support, i.e. `upper` first-order stochastically dominates `lower`. A passing grid check
// is evidence, not proof; a failure is a certificate of non-domination.
bool fosd_check(const Distribution& lower, const Distribution& upper, int grid_size = 10000);

// E[j-th largest of n i.i.d. draws], j counted from the top. Continuous families integrate
// the quantile representation with adaptive quadrature (absolute tolerance abs_tol);
// discrete families sum exactly over atoms. Throws NumericError when the mean diverges.
double expected_order_statistic(const Distribution& d, int n, int j_from_top,
                                double abs_tol = 1e-8);

}  // namespace bps
