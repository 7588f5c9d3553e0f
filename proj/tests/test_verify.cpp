#include "conlearn/verify.hpp"

#include <doctest.h>

#include <sstream>

using namespace conlearn;

TEST_CASE("derivative check passes on the real losses")
{
    const CheckResult r = check_derivatives(
        {derivative_target(LinearLoss{}), derivative_target(LogisticLoss{}), derivative_target(SaturatedLoss{})}, 2000,
        3);
    CHECK(r.passed);
}

TEST_CASE("derivative check catches a corrupted loss")
{
    auto broken = derivative_target(LogisticLoss{});
    const auto good = broken.first;
    broken.first = [good](double xi, double y) { return good(xi, y) * 1.001; };
    CHECK_FALSE(check_derivatives({broken}, 2000, 3).passed);

    auto sign = derivative_target(SaturatedLoss{});
    const auto second = sign.second;
    sign.second = [second](double xi, double y) { return y == -1.0 ? -second(xi, y) : second(xi, y); };
    CHECK_FALSE(check_derivatives({sign}, 2000, 3).passed);
}

TEST_CASE("quick suite is green")
{
    std::ostringstream log;
    const auto results = verify_suite(VerifyLevel::Quick, log);
    CHECK_FALSE(results.empty());
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.passed);
    }
    CHECK(log.str().find("PASS derivative correctness") != std::string::npos);
}
