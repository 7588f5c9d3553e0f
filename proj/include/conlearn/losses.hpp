#pragma once

// Per-sample losses as functions of the linear predictor xi = x'w and the
// observed output y, together with their first (g1) and second (g2)
// derivatives in xi.

#include <string>
#include <variant>

namespace conlearn {

/// Mean-square loss, 1/2 (xi - y)^2.
struct LinearLoss {};

/// Cross-entropy against sigmoid(xi), y in [0, 1].
struct LogisticLoss {};

/// Negative log-likelihood of a unit-variance Gaussian observation censored
/// below `lower` (reported as `floor_out`) and above `upper` (reported as `ceiling_out`).
struct SaturatedLoss {
    double lower = -1.0;
    double upper = 1.0;
    double floor_out = -1.0;
    double ceiling_out = 1.0;
};

using LossFamily = std::variant<LinearLoss, LogisticLoss, SaturatedLoss>;

struct CurvatureBounds {
    double mu_lower;
    double mu_upper;
    double predictor_bound;
};

/// "linear" | "logistic" | "saturated"
std::string family_name(const LossFamily& family);

/// Throws InvalidArgument unless lower < upper and all four values are finite.
void validate_family(const LossFamily& family);

double sigmoid(double xi) noexcept;

double loss_value(const LossFamily& family, double xi, double y);
double g1(const LossFamily& family, double xi, double y);
double g2(const LossFamily& family, double xi, double y);

/// Bounds on g2 over |xi| <= C, valid for every admissible y.
CurvatureBounds curvature_bounds(const LossFamily& family, double C);

/// (x f(x) F(x) + f(x)^2) / F(x)^2 with f, F the standard normal pdf/cdf.
/// Strictly decreasing from 1 to 0.
double saturation_h(double x) noexcept;

} // namespace conlearn
