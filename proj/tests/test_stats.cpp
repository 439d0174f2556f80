#include <catch_amalgamated.hpp>

#include "aoi/stats.hpp"

using namespace aoi;
using Catch::Matchers::WithinRel;

TEST_CASE("student-t 97.5% critical values match references") {
    // 25-digit references from inverting the regularized incomplete beta
    CHECK_THAT(student_t_975(4), WithinRel(2.7764451051977944, 1e-12));
    CHECK_THAT(student_t_975(9), WithinRel(2.2621571627982055, 1e-12));
    CHECK_THAT(student_t_975(19), WithinRel(2.0930240544083098, 1e-12));
    CHECK_THAT(student_t_975(39), WithinRel(2.0226909200367611, 1e-12));
    CHECK_THROWS_AS(student_t_975(0), std::domain_error);
}

TEST_CASE("mean and halfwidth of a known sample") {
    const std::vector<double> samples{1.0, 2.0, 3.0, 4.0, 5.0};
    const MeanCi ci = mean_ci_95(samples);
    CHECK_THAT(ci.mean, WithinRel(3.0, 1e-15));
    // t(0.975,4) * sqrt(2.5) / sqrt(5) = t * sqrt(0.5)
    CHECK_THAT(ci.halfwidth, WithinRel(1.9632431614775608, 1e-12));
}

TEST_CASE("degenerate sample sets") {
    CHECK_THROWS_AS(mean_ci_95({}), std::domain_error);
    const MeanCi one = mean_ci_95({2.5});
    CHECK(one.mean == 2.5);
    CHECK(std::isinf(one.halfwidth));
    const MeanCi flat = mean_ci_95({2.0, 2.0, 2.0});
    CHECK(flat.mean == 2.0);
    CHECK(flat.halfwidth == 0.0);
}
