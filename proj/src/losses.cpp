#include "conlearn/losses.hpp"

#include "conlearn/errors.hpp"
#include "conlearn/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conlearn {

namespace {

constexpr double kProbClamp = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

enum class Censor { Floor, Interior, Ceiling };

Censor classify(const SaturatedLoss& s, double y)
{
    // Sentinels are matched exactly; the generator emits them verbatim.
    if (y == s.floor_out) {
        return Censor::Floor;
    }
    if (y == s.ceiling_out) {
        return Censor::Ceiling;
    }
    if (y >= s.lower && y <= s.upper) {
        return Censor::Interior;
    }
    throw DataError("saturated observation y=" + std::to_string(y) +
                    " is neither a censor sentinel nor inside [lower, upper]");
}

void check_logistic_y(double y)
{
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DataError("logistic observation y=" + std::to_string(y) + " outside [0, 1]");
    }
}

// log sigmoid(xi) without overflow.
double log_sigmoid(double xi) noexcept
{
    return xi >= 0.0 ? -std::log1p(std::exp(-xi)) : xi - std::log1p(std::exp(xi));
}

} // namespace

std::string family_name(const LossFamily& family)
{
    return std::visit(overloaded{
                          [](const LinearLoss&) { return std::string("linear"); },
                          [](const LogisticLoss&) { return std::string("logistic"); },
                          [](const SaturatedLoss&) { return std::string("saturated"); },
                      },
                      family);
}

void validate_family(const LossFamily& family)
{
    if (const auto* s = std::get_if<SaturatedLoss>(&family)) {
        if (!std::isfinite(s->lower) || !std::isfinite(s->upper) || !std::isfinite(s->floor_out) ||
            !std::isfinite(s->ceiling_out)) {
            throw InvalidArgument("saturated family: thresholds must be finite");
        }
        if (!(s->lower < s->upper)) {
            throw InvalidArgument("saturated family: requires lower < upper");
        }
        if (s->floor_out == s->ceiling_out) {
            throw InvalidArgument("saturated family: floor and ceiling outputs must differ");
        }
    }
}

double sigmoid(double xi) noexcept
{
    if (xi >= 0.0) {
        return 1.0 / (1.0 + std::exp(-xi));
    }
    const double e = std::exp(xi);
    return e / (1.0 + e);
}

double loss_value(const LossFamily& family, double xi, double y)
{
    return std::visit(
        overloaded{
            [&](const LinearLoss&) { return 0.5 * (xi - y) * (xi - y); },
            [&](const LogisticLoss&) {
                check_logistic_y(y);
                // Clamped so a saturated sigmoid never yields an infinite loss.
                const double lo = std::log(kProbClamp);
                const double log_p = std::clamp(log_sigmoid(xi), lo, std::log1p(-kProbClamp));
                const double log_q = std::clamp(log_sigmoid(-xi), lo, std::log1p(-kProbClamp));
                return -y * log_p - (1.0 - y) * log_q;
            },
            [&](const SaturatedLoss& s) {
                switch (classify(s, y)) {
                case Censor::Floor:
                    return -normal_log_cdf(s.lower - xi);
                case Censor::Ceiling:
                    // 1 - F(u - xi) = F(xi - u)
                    return -normal_log_cdf(xi - s.upper);
                case Censor::Interior:
                    break;
                }
                const double r = y - xi;
                return 0.5 * r * r + 0.5 * std::log(2.0 * std::numbers::pi);
            },
        },
        family);
}

double g1(const LossFamily& family, double xi, double y)
{
    return std::visit(overloaded{
                          [&](const LinearLoss&) { return xi - y; },
                          [&](const LogisticLoss&) {
                              check_logistic_y(y);
                              return sigmoid(xi) - y;
                          },
                          [&](const SaturatedLoss& s) {
                              switch (classify(s, y)) {
                              case Censor::Floor:
                                  return normal_hazard_left(s.lower - xi);
                              case Censor::Ceiling:
                                  return -normal_hazard_left(xi - s.upper);
                              case Censor::Interior:
                                  break;
                              }
                              // f'(r)/f(r) = -r with r = y - xi
                              return xi - y;
                          },
                      },
                      family);
}

double g2(const LossFamily& family, double xi, double y)
{
    return std::visit(overloaded{
                          [&](const LinearLoss&) { return 1.0; },
                          [&](const LogisticLoss&) {
                              check_logistic_y(y);
                              const double p = sigmoid(xi);
                              return p * (1.0 - p);
                          },
                          [&](const SaturatedLoss& s) {
                              switch (classify(s, y)) {
                              case Censor::Floor:
                                  return saturation_h(s.lower - xi);
                              case Censor::Ceiling:
                                  return saturation_h(xi - s.upper);
                              case Censor::Interior:
                                  break;
                              }
                              return 1.0;
                          },
                      },
                      family);
}

double saturation_h(double x) noexcept
{
    const double r = normal_hazard_left(x);
    return r * (x + r);
}

CurvatureBounds curvature_bounds(const LossFamily& family, double C)
{
    if (!(C >= 0.0) || !std::isfinite(C)) {
        throw InvalidArgument("curvature_bounds: predictor bound must be finite and >= 0");
    }
    return std::visit(overloaded{
                          [&](const LinearLoss&) { return CurvatureBounds{1.0, 1.0, C}; },
                          [&](const LogisticLoss&) {
                              const double p = sigmoid(C);
                              return CurvatureBounds{p * (1.0 - p), 0.25, C};
                          },
                          [&](const SaturatedLoss& s) {
                              // saturation_h is decreasing, so each censored branch attains its
                              // minimum at the end of |xi| <= C that pushes its argument up.
                              const double floor_min = saturation_h(s.lower + C);
                              const double ceiling_min = saturation_h(C - s.upper);
                              return CurvatureBounds{std::min({1.0, floor_min, ceiling_min}), 1.0, C};
                          },
                      },
                      family);
}

} // namespace conlearn
