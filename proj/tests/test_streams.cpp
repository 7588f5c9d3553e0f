#include "conlearn/errors.hpp"
#include "conlearn/streams.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace conlearn;

namespace {

StreamSpec drifting(std::size_t m)
{
    StreamSpec s;
    s.stream_case = StreamCase::Drifting;
    s.dim = 2;
    s.num_tasks = m;
    s.samples_per_task = 5;
    s.meta = {Vector{{1.0, 0.0}}, Vector{{-1.0, 0.0}}};
    s.perturbation_sigma = 0.3;
    s.seed = 3;
    return s;
}

} // namespace

TEST_CASE("single-task shared stream")
{
    StreamSpec s;
    s.dim = 2;
    s.num_tasks = 1;
    s.samples_per_task = 4;
    s.w_star = Vector{{0.5, -2.0}};
    const TaskStream st = build_stream(s);
    REQUIRE(st.tasks.size() == 1);
    CHECK(st.per_task_w[0] == s.w_star);
    CHECK(effective_target(st) == s.w_star);
    CHECK(analytic_target(s) == s.w_star);
}

TEST_CASE("drifting stream with one unperturbed meta equals a shared stream")
{
    StreamSpec d = drifting(6);
    d.meta = {Vector{{0.5, 1.5}}};
    d.perturbation_sigma = 0.0;
    const TaskStream st = build_stream(d);
    for (const auto& w : st.per_task_w) {
        CHECK(w == d.meta[0]);
    }
    StreamSpec s = d;
    s.stream_case = StreamCase::Shared;
    s.w_star = d.meta[0];
    s.meta.clear();
    const TaskStream shared = build_stream(s);
    for (std::size_t k = 0; k < st.tasks.size(); ++k) {
        CHECK(st.tasks[k].features == shared.tasks[k].features);
        CHECK(st.tasks[k].outputs == shared.tasks[k].outputs);
    }
}

TEST_CASE("analytic target is the mean of the metas")
{
    StreamSpec s = drifting(10);
    CHECK(analytic_target(s).norm() == 0.0);
    s.meta = {Vector{{4.0, 2.0}}, Vector{{5.5, -1.5}}, Vector{{3.0, -1.0}}};
    CHECK(analytic_target(s)[0] == doctest::Approx(25.0 / 6.0));
    CHECK(analytic_target(s)[1] == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("random order is a permutation and leaves task data unchanged")
{
    StreamSpec seq = drifting(40);
    StreamSpec rnd = seq;
    rnd.order = RandomOrder{};
    const TaskStream a = build_stream(seq);
    const TaskStream b = build_stream(rnd);
    std::set<std::uint64_t> seen(b.visit.begin(), b.visit.end());
    CHECK(seen.size() == 40);
    CHECK(b.visit != a.visit);
    for (std::size_t k = 0; k < b.tasks.size(); ++k) {
        const auto& same = a.tasks[static_cast<std::size_t>(
            std::find(a.visit.begin(), a.visit.end(), b.visit[k]) - a.visit.begin())];
        CHECK(same.outputs == b.tasks[k].outputs);
    }
}

TEST_CASE("sequential drifting order groups tasks")
{
    StreamSpec s = drifting(30);
    const TaskStream st = build_stream(s);
    for (std::size_t k = 1; k < st.tasks.size(); ++k) {
        CHECK(st.tasks[k - 1].group <= st.tasks[k].group);
    }
}

TEST_CASE("balanced assignment cycles through the metas")
{
    StreamSpec s = drifting(9);
    s.meta.push_back(Vector{{0.0, 1.0}});
    s.assignment = GroupAssignment::Balanced;
    s.order = RandomOrder{};
    const TaskStream st = build_stream(s);
    int counts[3] = {0, 0, 0};
    for (const auto& t : st.tasks) {
        ++counts[t.group];
        CHECK(t.group == static_cast<int>((t.index - 1) % 3));
    }
    CHECK(counts[0] == 3);
    CHECK(counts[1] == 3);
    CHECK(counts[2] == 3);
}

TEST_CASE("stream spec validation")
{
    StreamSpec s = drifting(5);
    s.meta.clear();
    CHECK_THROWS_AS(validate_stream_spec(s), InvalidArgument);
    StreamSpec c1;
    c1.dim = 3;
    c1.w_star = Vector::Zero(2);
    CHECK_THROWS_AS(validate_stream_spec(c1), InvalidArgument);
    StreamSpec neg = drifting(5);
    neg.perturbation_sigma = -0.1;
    CHECK_THROWS_AS(validate_stream_spec(neg), InvalidArgument);
}
