#include "bps/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

#include "bps/errors.hpp"
#include "bps/quadrature.hpp"

namespace bps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Largest double below 1; quantile arguments are clamped here so panel arithmetic
// that rounds to 1.0 cannot produce inf * 0 in order-statistic integrands.
constexpr double kUBelowOne = 0x1.fffffffffffffp-1;

std::string format_double(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double parse_number(std::string_view token)
{
    const std::string text(trim(token));
    if (text.empty()) {
        throw ValidationError("distribution spec: empty numeric token");
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
        throw ValidationError("distribution spec: invalid number \"" + text + "\"");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void fail(const std::string& context, const std::string& detail)
{
    throw ValidationError("distribution spec \"" + context + "\": " + detail);
}

}  // namespace

Distribution::Distribution(Family family) : family_(std::move(family))
{
    std::visit(
        [](auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                if (!(f.value >= 0.0) || !std::isfinite(f.value)) {
                    throw ValidationError("point mass requires a finite value >= 0");
                }
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                if (!(f.lo >= 0.0) || !(f.lo < f.hi) || !std::isfinite(f.hi)) {
                    throw ValidationError("uniform requires 0 <= lo < hi, both finite");
                }
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                if (!(f.rate > 0.0) || !std::isfinite(f.rate)) {
                    throw ValidationError("exponential requires a finite rate > 0");
                }
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                if (!(f.shape >= 1.0) || !std::isfinite(f.shape)) {
                    throw ValidationError("weibull requires shape >= 1");
                }
                if (!(f.scale > 0.0) || !std::isfinite(f.scale)) {
                    throw ValidationError("weibull requires a finite scale > 0");
                }
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (!(f.cap > 1.0)) {
                    throw ValidationError("equal-revenue requires cap > 1 (may be inf)");
                }
            } else if constexpr (std::is_same_v<T, EmpiricalDist>) {
                if (f.values.empty()) {
                    throw ValidationError("empirical requires a nonempty value list");
                }
                for (double v : f.values) {
                    if (!(v >= 0.0) || !std::isfinite(v)) {
                        throw ValidationError("empirical values must be finite and >= 0");
                    }
                }
                std::sort(f.values.begin(), f.values.end());
            }
        },
        family_);
}

Distribution Distribution::parse(std::string_view spec)
{
    const std::string context(trim(spec));
    const std::string_view text(context);

    const std::size_t open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')') {
        fail(context, "expected form family(param=value,...)");
    }
    const std::string name = lower(trim(text.substr(0, open)));
    const std::string_view body = text.substr(open + 1, text.size() - open - 2);

    std::map<std::string, std::string_view> params;
    if (!trim(body).empty()) {
        for (std::string_view part : split(body, ',')) {
            const std::size_t eq = part.find('=');
            if (eq == std::string_view::npos) {
                fail(context, "expected key=value, got \"" + std::string(trim(part)) + "\"");
            }
            const std::string key = lower(trim(part.substr(0, eq)));
            if (!params.emplace(key, trim(part.substr(eq + 1))).second) {
                fail(context, "duplicate parameter \"" + key + "\"");
            }
        }
    }

    auto take = [&](std::initializer_list<const char*> names) -> std::string_view {
        for (const char* n : names) {
            auto it = params.find(n);
            if (it != params.end()) {
                const std::string_view v = it->second;
                params.erase(it);
                return v;
            }
        }
        fail(context, "missing parameter \"" + std::string(*names.begin()) + "\"");
    };
    auto finish = [&](Family f) {
        if (!params.empty()) {
            fail(context, "unexpected parameter \"" + params.begin()->first + "\"");
        }
        return Distribution(std::move(f));
    };

    if (name == "point" || name == "pointmass") {
        return finish(PointMass{parse_number(take({"value", "a"}))});
    }
    if (name == "uniform") {
        const double lo = parse_number(take({"lo", "a"}));
        const double hi = parse_number(take({"hi", "b"}));
        return finish(UniformDist{lo, hi});
    }
    if (name == "exp" || name == "exponential") {
        return finish(ExponentialDist{parse_number(take({"rate"}))});
    }
    if (name == "weibull") {
        const double shape = parse_number(take({"shape"}));
        const double scale = parse_number(take({"scale"}));
        return finish(WeibullDist{shape, scale});
    }
    if (name == "equalrev" || name == "equalrevenue" || name == "equalrevenuetruncated") {
        return finish(EqualRevenueDist{parse_number(take({"cap", "m"}))});
    }
    if (name == "empirical") {
        std::vector<double> values;
        for (std::string_view tok : split(take({"values"}), ';')) {
            values.push_back(parse_number(tok));
        }
        return finish(EmpiricalDist{std::move(values)});
    }
    fail(context, "unknown family \"" + name + "\"");
}

std::string Distribution::to_string() const
{
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return "point(value=" + format_double(f.value) + ")";
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return "uniform(lo=" + format_double(f.lo) + ",hi=" + format_double(f.hi) + ")";
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return "exp(rate=" + format_double(f.rate) + ")";
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                return "weibull(shape=" + format_double(f.shape) +
                       ",scale=" + format_double(f.scale) + ")";
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                return "equalrev(cap=" + format_double(f.cap) + ")";
            } else {
                std::string out = "empirical(values=";
                for (std::size_t i = 0; i < f.values.size(); ++i) {
                    if (i > 0) {
                        out += ';';
                    }
                    out += format_double(f.values[i]);
                }
                return out + ")";
            }
        },
        family_);
}

double Distribution::cdf(double x) const
{
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return x < f.value ? 0.0 : 1.0;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return std::clamp((x - f.lo) / (f.hi - f.lo), 0.0, 1.0);
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return x <= 0.0 ? 0.0 : -std::expm1(-f.rate * x);
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / f.scale, f.shape));
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (x < 1.0) {
                    return 0.0;
                }
                return x < f.cap ? 1.0 - 1.0 / x : 1.0;
            } else {
                const auto& v = f.values;
                const auto it = std::upper_bound(v.begin(), v.end(), x);
                return static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
            }
        },
        family_);
}

double Distribution::quantile(double u) const
{
    if (!(u >= 0.0) || !(u <= 1.0)) {
        throw ValidationError("quantile argument must lie in [0, 1)");
    }
    return std::visit(
        [u](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return f.lo + u * (f.hi - f.lo);
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return -std::log1p(-u) / f.rate;
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                return f.scale * std::pow(-std::log1p(-u), 1.0 / f.shape);
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (std::isfinite(f.cap) && u >= 1.0 - 1.0 / f.cap) {
                    return f.cap;
                }
                return std::min(1.0 / (1.0 - u), f.cap);
            } else {
                const auto& v = f.values;
                const auto idx = std::min(
                    v.size() - 1, static_cast<std::size_t>(u * static_cast<double>(v.size())));
                return v[idx];
            }
        },
        family_);
}

double Distribution::pdf(double x) const
{
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass> || std::is_same_v<T, EmpiricalDist>) {
                throw ValidationError("discrete distribution has no density");
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return (x >= f.lo && x <= f.hi) ? 1.0 / (f.hi - f.lo) : 0.0;
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return x < 0.0 ? 0.0 : f.rate * std::exp(-f.rate * x);
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                if (x < 0.0) {
                    return 0.0;
                }
                if (x == 0.0) {
                    return f.shape == 1.0 ? 1.0 / f.scale : 0.0;
                }
                const double z = x / f.scale;
                return (f.shape / f.scale) * std::pow(z, f.shape - 1.0) *
                       std::exp(-std::pow(z, f.shape));
            } else {
                // Density of the continuous part only; the atom at the cap is excluded.
                return (x >= 1.0 && x < f.cap) ? 1.0 / (x * x) : 0.0;
            }
        },
        family_);
}

double Distribution::mean() const
{
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return 0.5 * (f.lo + f.hi);
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return 1.0 / f.rate;
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                return f.scale * std::tgamma(1.0 + 1.0 / f.shape);
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (!std::isfinite(f.cap)) {
                    throw NumericError("equal-revenue distribution with cap=inf has no mean");
                }
                return std::log(f.cap) + 1.0;
            } else {
                double sum = 0.0;
                for (double v : f.values) {
                    sum += v;
                }
                return sum / static_cast<double>(f.values.size());
            }
        },
        family_);
}

double Distribution::variance() const
{
    return std::visit(
        [this](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                const double w = f.hi - f.lo;
                return w * w / 12.0;
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return 1.0 / (f.rate * f.rate);
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                const double g1 = std::tgamma(1.0 + 1.0 / f.shape);
                const double g2 = std::tgamma(1.0 + 2.0 / f.shape);
                return f.scale * f.scale * (g2 - g1 * g1);
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (!std::isfinite(f.cap)) {
                    throw NumericError(
                        "equal-revenue distribution with cap=inf has no variance");
                }
                // E[X^2] = 2 cap - 1: integrate x^2 / x^2 over [1, cap) plus the atom.
                const double m = mean();
                return 2.0 * f.cap - 1.0 - m * m;
            } else {
                const double m = mean();
                double sum = 0.0;
                for (double v : f.values) {
                    sum += (v - m) * (v - m);
                }
                return sum / static_cast<double>(f.values.size());
            }
        },
        family_);
}

bool Distribution::finite_mean() const
{
    if (const auto* er = std::get_if<EqualRevenueDist>(&family_)) {
        return std::isfinite(er->cap);
    }
    return true;
}

double Distribution::support_lo() const
{
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return f.lo;
            } else if constexpr (std::is_same_v<T, ExponentialDist> ||
                                 std::is_same_v<T, WeibullDist>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                return 1.0;
            } else {
                return f.values.front();
            }
        },
        family_);
}

double Distribution::support_hi() const
{
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return f.hi;
            } else if constexpr (std::is_same_v<T, ExponentialDist> ||
                                 std::is_same_v<T, WeibullDist>) {
                return kInf;
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                return f.cap;
            } else {
                return f.values.back();
            }
        },
        family_);
}

bool Distribution::is_discrete() const
{
    return std::holds_alternative<PointMass>(family_) ||
           std::holds_alternative<EmpiricalDist>(family_);
}

bool Distribution::has_density() const
{
    return !is_discrete();
}

std::vector<std::pair<double, double>> Distribution::atoms() const
{
    return std::visit(
        [](const auto& f) -> std::vector<std::pair<double, double>> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return {{f.value, 1.0}};
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (std::isfinite(f.cap)) {
                    return {{f.cap, 1.0 / f.cap}};
                }
                return {};
            } else if constexpr (std::is_same_v<T, EmpiricalDist>) {
                std::vector<std::pair<double, double>> out;
                const double n = static_cast<double>(f.values.size());
                std::size_t i = 0;
                while (i < f.values.size()) {
                    std::size_t j = i;
                    while (j < f.values.size() && f.values[j] == f.values[i]) {
                        ++j;
                    }
                    out.emplace_back(f.values[i], static_cast<double>(j - i) / n);
                    i = j;
                }
                return out;
            } else {
                return {};
            }
        },
        family_);
}

std::vector<double> Distribution::quantile_breakpoints() const
{
    return std::visit(
        [](const auto& f) -> std::vector<double> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                if (std::isfinite(f.cap)) {
                    return {1.0 - 1.0 / f.cap};
                }
                return {};
            } else if constexpr (std::is_same_v<T, EmpiricalDist>) {
                std::vector<double> cuts;
                const double n = static_cast<double>(f.values.size());
                for (std::size_t i = 1; i < f.values.size(); ++i) {
                    cuts.push_back(static_cast<double>(i) / n);
                }
                return cuts;
            } else {
                return {};
            }
        },
        family_);
}

HazardProfile hazard_profile(const Distribution& d, int grid_size)
{
    if (grid_size < 2) {
        throw ValidationError("hazard grid requires at least 2 points");
    }
    HazardProfile profile;

    if (d.is_discrete()) {
        // Discrete hazard P(X = x_i) / P(X >= x_i) over the atoms.
        double tail = 1.0;
        for (const auto& [x, p] : d.atoms()) {
            profile.points.emplace_back(x, p / tail);
            tail -= p;
        }
    } else {
        // Interior quantile grid over the continuous part (atoms carry no density).
        double u_hi = 1.0;
        if (const auto* er = std::get_if<EqualRevenueDist>(&d.family())) {
            if (std::isfinite(er->cap)) {
                u_hi = 1.0 - 1.0 / er->cap;
            }
        }
        for (int i = 0; i < grid_size; ++i) {
            const double u = u_hi * (i + 0.5) / grid_size;
            const double x = d.quantile(u);
            const double surv = 1.0 - d.cdf(x);
            if (surv <= 0.0) {
                continue;
            }
            profile.points.emplace_back(x, d.pdf(x) / surv);
        }
    }

    for (std::size_t i = 0; i + 1 < profile.points.size(); ++i) {
        const double h0 = profile.points[i].second;
        const double h1 = profile.points[i + 1].second;
        if (h1 < h0 - 1e-9 * std::max(1.0, std::fabs(h0))) {
            profile.monotone = false;
            break;
        }
    }
    return profile;
}

MhrResult is_mhr(const Distribution& d, int grid_size)
{
    const bool verdict = std::visit(
        [](const auto& f) -> bool {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return true;  // vacuous: no continuous part
            } else if constexpr (std::is_same_v<T, UniformDist>) {
                return true;  // h(x) = 1 / (hi - x), increasing
            } else if constexpr (std::is_same_v<T, ExponentialDist>) {
                return true;  // constant hazard
            } else if constexpr (std::is_same_v<T, WeibullDist>) {
                return true;  // shape >= 1 enforced at construction
            } else if constexpr (std::is_same_v<T, EqualRevenueDist>) {
                return false;  // h(x) = 1/x, strictly decreasing
            } else {
                throw ValidationError(
                    "monotone hazard rate is undecidable analytically for the empirical "
                    "family; use hazard_profile for its discrete-hazard grid");
            }
        },
        d.family());
    return {verdict, hazard_profile(d, grid_size)};
}

bool fosd_check(const Distribution& lower, const Distribution& upper, int grid_size)
{
    if (grid_size < 2) {
        throw ValidationError("dominance grid requires at least 2 points");
    }
    std::vector<double> xs;
    xs.reserve(2 * static_cast<std::size_t>(grid_size) + 4);
    for (const Distribution* d : {&lower, &upper}) {
        xs.push_back(d->support_lo());
        for (int i = 1; i <= grid_size; ++i) {
            const double u = static_cast<double>(i) / (grid_size + 1);
            xs.push_back(d->quantile(u));
        }
        const double hi = d->support_hi();
        if (std::isfinite(hi)) {
            xs.push_back(hi);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    for (double x : xs) {
        if (lower.cdf(x) < upper.cdf(x) - 1e-12) {
            return false;
        }
    }
    return true;
}

double expected_order_statistic(const Distribution& d, int n, int j_from_top, double abs_tol)
{
    if (n < 1) {
        throw ValidationError("order statistic requires n >= 1");
    }
    if (j_from_top < 1 || j_from_top > n) {
        throw ValidationError("order statistic rank must satisfy 1 <= j <= n");
    }
    if (!d.finite_mean()) {
        throw NumericError("order-statistic expectation diverges: no finite mean");
    }

    const int j = j_from_top;
    if (d.is_discrete()) {
        // G(x) = P(j-th largest <= x) = P(at most j-1 draws exceed x); exact atom sum.
        const auto atoms = d.atoms();
        auto cdf_of_jth = [&](double f_at_x) {
            if (f_at_x >= 1.0) {
                return 1.0;
            }
            double g = 0.0;
            for (int m = 0; m < j; ++m) {
                const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0) -
                                              std::lgamma(n - m + 1.0));
                g += binom * std::pow(1.0 - f_at_x, m) * std::pow(f_at_x, n - m);
            }
            return std::min(g, 1.0);
        };
        double expectation = 0.0;
        double g_prev = 0.0;
        double f_cum = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            f_cum = (i + 1 == atoms.size()) ? 1.0 : f_cum + atoms[i].second;
            const double g = cdf_of_jth(f_cum);
            expectation += atoms[i].first * (g - g_prev);
            g_prev = g;
        }
        return expectation;
    }

    // Quantile representation: E = C * integral of Q(u) u^(n-j) (1-u)^(j-1) du over [0,1).
    const double log_c =
        std::lgamma(n + 1.0) - std::lgamma(n - j + 1.0) - std::lgamma(static_cast<double>(j));
    const double c = std::exp(log_c);
    auto integrand = [&](double u) {
        const double uc = std::clamp(u, 0.0, kUBelowOne);
        const double weight = c * std::pow(uc, n - j) * std::pow(1.0 - uc, j - 1);
        return d.quantile(uc) * weight;
    };
    return integrate_adaptive_split(integrand, 0.0, 1.0, d.quantile_breakpoints(), abs_tol);
}

}  // namespace bps
