#include "conlearn/errors.hpp"
#include "conlearn/losses.hpp"
#include "conlearn/numkit.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace conlearn;

TEST_CASE("loss values")
{
    CHECK(loss_value(LinearLoss{}, 0.0, 1.0) == 0.5);
    CHECK(loss_value(LogisticLoss{}, 0.0, 0.5) == doctest::Approx(std::log(2.0)));
    const SaturatedLoss sat{-1.0, 1.0, -1.0, 1.0};
    CHECK(loss_value(sat, 0.0, 0.5) == doctest::Approx(-std::log(normal_pdf(0.5))));
}

TEST_CASE("first derivatives")
{
    CHECK(g1(LinearLoss{}, 2.0, 3.0) == -1.0);
    CHECK(g1(LogisticLoss{}, 0.0, 1.0) == -0.5);
    const SaturatedLoss sat{-1.0, 1.0, -1.0, 1.0};
    CHECK(g1(sat, 0.0, 0.5) == doctest::Approx(-0.5));
    const double h = 1e-6;
    const double fd = (loss_value(sat, h, 0.5) - loss_value(sat, -h, 0.5)) / (2.0 * h);
    CHECK(g1(sat, 0.0, 0.5) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("second derivatives")
{
    for (double xi : {-3.0, 0.0, 7.0}) {
        CHECK(g2(LinearLoss{}, xi, 1.5) == 1.0);
    }
    CHECK(g2(LogisticLoss{}, 0.0, 1.0) == 0.25);
    const SaturatedLoss sat{-1.0, 1.0, -1.0, 1.0};
    CHECK(g2(sat, 0.3, 0.5) == 1.0);
    CHECK(g2(sat, 0.3, sat.floor_out) == doctest::Approx(saturation_h(sat.lower - 0.3)));
    CHECK(g2(sat, 0.3, sat.ceiling_out) == doctest::Approx(saturation_h(0.3 - sat.upper)));
}

TEST_CASE("curvature bounds")
{
    const auto lin = curvature_bounds(LinearLoss{}, 5.0);
    CHECK(lin.mu_lower == 1.0);
    CHECK(lin.mu_upper == 1.0);
    const auto lg0 = curvature_bounds(LogisticLoss{}, 0.0);
    CHECK(lg0.mu_lower == 0.25);
    CHECK(lg0.mu_upper == 0.25);

    const auto lg2 = curvature_bounds(LogisticLoss{}, 2.0);
    CHECK(lg2.mu_lower == doctest::Approx(0.10499358540350652));
    double grid_min = 1.0;
    for (int i = -20000; i <= 20000; ++i) {
        grid_min = std::min(grid_min, g2(LogisticLoss{}, 2.0 * i / 20000.0, 1.0));
    }
    CHECK(lg2.mu_lower == doctest::Approx(grid_min).epsilon(1e-12));

    const SaturatedLoss sat{-1.0, 1.0, -1.0, 1.0};
    const double C = 1.5;
    const auto sb = curvature_bounds(sat, C);
    double sat_min = 1.0;
    for (int i = -3000; i <= 3000; ++i) {
        const double xi = C * i / 3000.0;
        for (double y : {sat.floor_out, sat.ceiling_out, 0.2}) {
            sat_min = std::min(sat_min, g2(sat, xi, y));
        }
    }
    CHECK(sb.mu_lower == doctest::Approx(sat_min).epsilon(1e-12));
    CHECK(sb.mu_upper == 1.0);
}

TEST_CASE("saturation_h shape")
{
    const double f0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(saturation_h(0.0) == doctest::Approx(f0 * f0 / 0.25));
    CHECK(saturation_h(-1.0) > saturation_h(1.0));
    double prev = 2.0;
    for (int x = -5; x <= 5; ++x) {
        const double h = saturation_h(x);
        CHECK(h > 0.0);
        CHECK(h < 1.0);
        CHECK(h < prev);
        prev = h;
    }
    CHECK(std::isfinite(saturation_h(-80.0)));
    CHECK(saturation_h(-80.0) <= 1.0);
}

TEST_CASE("invalid observations")
{
    CHECK_THROWS_AS(loss_value(LogisticLoss{}, 0.0, 1.5), DataError);
    const SaturatedLoss sat{-1.0, 1.0, -2.0, 2.0};
    CHECK_THROWS_AS(g1(sat, 0.0, 1.5), DataError);
    CHECK_NOTHROW(g1(sat, 0.0, 2.0));
    CHECK_THROWS_AS(validate_family(SaturatedLoss{1.0, -1.0, -1.0, 1.0}), InvalidArgument);
}

TEST_CASE("logistic loss is finite at extreme predictors")
{
    CHECK(std::isfinite(loss_value(LogisticLoss{}, 800.0, 0.0)));
    CHECK(std::isfinite(loss_value(LogisticLoss{}, -800.0, 1.0)));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
}
