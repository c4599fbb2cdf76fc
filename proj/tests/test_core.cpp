#include <cmath>

#include <doctest.h>

#include "zoprox/core.hpp"

using namespace zoprox;

TEST_CASE("same seed and label replay identical draws") {
  RngStream parent = make_stream(7);
  RngStream a = split_stream(parent, 0);
  RngStream b = split_stream(parent, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct labels and seeds give distinct sequences") {
  RngStream parent = make_stream(7);
  RngStream a = split_stream(parent, 0);
  RngStream b = split_stream(parent, 1);
  CHECK(a.next_u64() != b.next_u64());

  RngStream c = split_stream(make_stream(7), 0);
  RngStream d = split_stream(make_stream(8), 0);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("nested splits depend on the parent stream id") {
  RngStream r0 = split_stream(make_stream(3), 0);
  RngStream r1 = split_stream(make_stream(3), 1);
  RngStream a = split_stream(r0, 5);
  RngStream b = split_stream(r1, 5);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("sibling streams are empirically uncorrelated") {
  RngStream parent = make_stream(12345);
  RngStream a = split_stream(parent, 0);
  RngStream b = split_stream(parent, 1);
  const int n = 10000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.next_normal(), y = b.next_normal();
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const double ma = sa / n, mb = sb / n;
  const double cov = sab / n - ma * mb;
  const double r = cov / std::sqrt((saa / n - ma * ma) * (sbb / n - mb * mb));
  CHECK(std::fabs(r) < 0.05);
}

TEST_CASE("uniform draws live in (0,1)") {
  RngStream s = make_stream(99);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("inverse normal CDF hits reference quantiles") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.999) == doctest::Approx(3.090232306167813).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS((void)inverse_normal_cdf(0.0), std::invalid_argument);
}

TEST_CASE("record_step appends rows in order") {
  RunTrace trace;
  trace.stride = 2;
  record_step(trace, Vector{1.0}, 0.5, 0.1);
  CHECK(trace.iterates.size() == 1);
  CHECK(trace.objectives.size() == 1);
  CHECK(trace.step_sizes.size() == 1);
  CHECK(trace.log_iterations[0] == 0);

  record_step(trace, Vector{2.0}, 0.25, 0.1);
  REQUIRE(trace.iterates.size() == 2);
  CHECK(trace.iterates[0][0] == 1.0);
  CHECK(trace.iterates[1][0] == 2.0);
  CHECK(trace.log_iterations[1] == 2);
}

TEST_CASE("record_step rejects non-finite rows") {
  RunTrace trace;
  CHECK_THROWS_AS(record_step(trace, Vector{1.0}, 0.5, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(record_step(trace, Vector{1.0}, std::nan(""), 0.1), std::invalid_argument);
  CHECK(trace.iterates.empty());
}

TEST_CASE("vector helpers") {
  Vector a{1.0, 2.0, -3.0}, b{0.5, 0.0, 2.0};
  CHECK(dot(a, b) == doctest::Approx(-5.5));
  CHECK(nrm2(Vector{3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(nrm_inf(a) == 3.0);
  CHECK(all_finite(a));
  Vector c = a;
  axpy(2.0, b, c);
  CHECK(c[2] == doctest::Approx(1.0));
  CHECK_FALSE(all_finite(Vector{1.0, std::nan("")}));
}
