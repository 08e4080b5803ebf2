#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bps/errors.hpp"

namespace bps {

// Adaptive Gauss-Kronrod (G7,K15) integration to an absolute tolerance, QUADPACK style:
// the worst panel (largest |K15 - G7|) is bisected until the summed error estimate meets
// the target. Integrable endpoint singularities converge because K15 nodes are interior.
// Header-only templates so hot callers pay no std::function overhead.

namespace gk {

// QUADPACK qk15 abscissae and weights on [-1, 1] (positive half; node 7 is the origin).
inline constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};

// Gauss weights for the embedded 7-point rule (nodes 1, 3, 5, 7 above).
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

}  // namespace gk

struct PanelEstimate {
    double value;
    double error;  // |K15 - G7|
};

template <class F>
PanelEstimate gk15_panel(F&& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double offset = half * gk::kNodes[i];
        const double fsum =
            (i == 7) ? f(center) : f(center - offset) + f(center + offset);
        kronrod += gk::kKronrodWeights[i] * fsum;
        if (i % 2 == 1) {
            gauss += gk::kGaussWeights[i / 2] * fsum;
        } else if (i == 7) {
            gauss += gk::kGaussWeights[3] * fsum;
        }
    }
    return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

// Integrates f over [a, b], seeding one panel per piece between consecutive cut points.
// `interior_cuts` lists known discontinuities or kinks; out-of-range cuts are ignored.
template <class F>
double integrate_adaptive_split(F&& f, double a, double b, const std::vector<double>& interior_cuts,
                                double abs_tol = 1e-8, int max_panels = 4096)
{
    if (!(a < b)) {
        return 0.0;
    }

    struct Panel {
        double a, b, value, error;
    };

    std::vector<double> cuts{a};
    for (double c : interior_cuts) {
        if (c > a && c < b) {
            cuts.push_back(c);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Panel> panels;
    panels.reserve(64);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const PanelEstimate est = gk15_panel(f, cuts[i], cuts[i + 1]);
        panels.push_back({cuts[i], cuts[i + 1], est.value, est.error});
    }

    const double min_width = 0x1.0p-52 * (b - a);
    while (true) {
        double total_error = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total_error += panels[i].error;
            if (panels[i].error > panels[worst].error) {
                worst = i;
            }
        }
        if (total_error <= abs_tol || panels[worst].b - panels[worst].a <= min_width) {
            break;
        }
        if (static_cast<int>(panels.size()) >= max_panels) {
            throw NumericError("quadrature failed to converge to tolerance");
        }
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        const PanelEstimate left = gk15_panel(f, p.a, mid);
        const PanelEstimate right = gk15_panel(f, mid, p.b);
        panels[worst] = {p.a, mid, left.value, left.error};
        panels.push_back({mid, p.b, right.value, right.error});
    }

    // Sum in interval order so the result does not depend on split history.
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double sum = 0.0;
    for (const Panel& p : panels) {
        sum += p.value;
    }
    return sum;
}

template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-8, int max_panels = 4096)
{
    return integrate_adaptive_split(f, a, b, {}, abs_tol, max_panels);
}

}  // namespace bps
