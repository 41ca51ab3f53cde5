#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "armada/hermite.hpp"
#include "armada/phase_spline.hpp"

using namespace armada;

namespace {

std::mt19937 rng(11);

double rnd(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

// C1 chain of n random Hermite segments.
std::vector<HermiteSegment> random_chain(int n) {
  std::vector<HermiteSegment> segs;
  double u = rnd(-1, 1), du = rnd(-1, 1);
  for (int k = 0; k < n; ++k) {
    HermiteSegment s;
    s.duration = rnd(0.2, 1.5);
    s.u0 = u;
    s.du0 = du;
    s.u1 = rnd(-1, 1);
    s.du1 = rnd(-1, 1);
    u = s.u1;
    du = s.du1;
    segs.push_back(s);
  }
  return segs;
}

// Independent evaluation through the monomial coefficients.
double poly_value(const HermiteSegment& s, double tau) {
  const double T = s.duration;
  const double a0 = s.u0;
  const double a1 = s.du0;
  const double a2 = (3.0 * (s.u1 - s.u0) / T - 2.0 * s.du0 - s.du1) / T;
  const double a3 = (2.0 * (s.u0 - s.u1) / T + s.du0 + s.du1) / (T * T);
  return a0 + a1 * tau + a2 * tau * tau + a3 * tau * tau * tau;
}

}  // namespace

TEST_CASE("segments reproduce their endpoint values and rates") {
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseSpline s(random_chain(4));
    double t0 = 0.0;
    for (const HermiteSegment& seg : s.segments()) {
      CHECK(s.value(t0) == doctest::Approx(seg.u0).epsilon(1e-10));
      CHECK(s.rate(t0) == doctest::Approx(seg.du0).epsilon(1e-10));
      t0 += seg.duration;
      CHECK(s.value(t0) == doctest::Approx(seg.u1).epsilon(1e-10));
      CHECK(s.rate(t0) == doctest::Approx(seg.du1).epsilon(1e-10));
    }
  }
}

TEST_CASE("evaluation matches the monomial form of each cubic") {
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseSpline s(random_chain(5));
    double t0 = 0.0;
    int k = 0;
    for (const HermiteSegment& seg : s.segments()) {
      for (double f : {0.1, 0.37, 0.5, 0.83, 0.99}) {
        const double t = t0 + f * seg.duration;
        CHECK(std::abs(s.value(t) - poly_value(seg, f * seg.duration)) < 1e-12);
      }
      t0 += seg.duration;
      ++k;
    }
    (void)k;
  }
}

TEST_CASE("interior knots are continuous in value and rate") {
  const PhaseSpline s(random_chain(6));
  for (int k = 1; k < 6; ++k) {
    const double t = s.start_time(k);
    const double eps = 1e-9 * s.total_duration();
    // Straddling the knot picks up O(eps) drift along the curve itself, so
    // the bound scales with the local rate / acceleration magnitude.
    const double rate_scale = 1.0 + std::abs(s.rate(t));
    const double acc_scale = 1.0 + std::abs(s.accel(t - eps)) + std::abs(s.accel(t + eps));
    CHECK(std::abs(s.value(t - eps) - s.value(t + eps)) < 10.0 * eps * rate_scale + 1e-12);
    CHECK(std::abs(s.rate(t - eps) - s.rate(t + eps)) < 10.0 * eps * acc_scale + 1e-12);
  }
}

TEST_CASE("rate and acceleration are consistent derivatives") {
  const PhaseSpline s(random_chain(4));
  const double h = 1e-6;
  for (double f : {0.1, 0.3, 0.45, 0.62, 0.9}) {
    const double t = f * s.total_duration();
    const double fd_rate = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
    const double fd_acc = (s.rate(t + h) - s.rate(t - h)) / (2.0 * h);
    CHECK(std::abs(s.rate(t) - fd_rate) < 1e-7);
    CHECK(std::abs(s.accel(t) - fd_acc) < 1e-6);
  }
}

TEST_CASE("a constant segment holds its value with zero rate") {
  const PhaseSpline s({HermiteSegment::constant(2.5, 3.0)});
  for (double t : {0.0, 0.5, 1.7, 3.0}) {
    CHECK(s.value(t) == 2.5);
    CHECK(s.rate(t) == 0.0);
    CHECK(s.accel(t) == 0.0);
  }
}

TEST_CASE("time lookup is half-open and the horizon maps to the last segment") {
  const PhaseSpline s({{1.0, 0, 0, 1, 0}, {2.0, 1, 0, 3, 0}});
  CHECK(s.segment_at(0.0) == 0);
  CHECK(s.segment_at(1.0 - 1e-12) == 0);
  CHECK(s.segment_at(1.0) == 1);
  CHECK(s.segment_at(3.0) == 1);
  CHECK(s.total_duration() == doctest::Approx(3.0));
}

TEST_CASE("uniform sampling starts at zero and ends on the last grid point") {
  const PhaseSpline s(random_chain(3));
  const auto times = s.sample_times(100.0);
  CHECK(static_cast<int>(times.size()) ==
        static_cast<int>(std::floor(s.total_duration() * 100.0)) + 1);
  CHECK(times.front() == 0.0);
  CHECK(times.back() <= s.total_duration() + 1e-12);
  CHECK(times.back() > s.total_duration() - 0.01 - 1e-12);
  for (std::size_t i = 1; i < times.size(); ++i)
    CHECK(times[i] - times[i - 1] == doctest::Approx(0.01).epsilon(1e-12));
  const auto values = s.sample_values(100.0);
  CHECK(values.size() == times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(values[i] == doctest::Approx(s.value(times[i])).epsilon(1e-14));
}

TEST_CASE("construction rejects broken chains") {
  CHECK_THROWS(PhaseSpline({{-1.0, 0, 0, 1, 0}}));
  CHECK_THROWS(PhaseSpline({{0.0, 0, 0, 1, 0}}));
  // C0 break between segments.
  CHECK_THROWS(PhaseSpline({{1.0, 0, 0, 1, 0}, {1.0, 2, 0, 3, 0}}));
  // C1 break between segments.
  CHECK_THROWS(PhaseSpline({{1.0, 0, 0, 1, 1}, {1.0, 1, 0, 3, 0}}));
}

TEST_CASE("hermite coefficients satisfy the endpoint conditions") {
  const double T = 1.3, u0 = 0.4, du0 = -0.3, u1 = -1.1, du1 = 0.9;
  const auto a = hermite_coefficients(u0, du0, u1, du1, T);
  CHECK(std::abs(hermite_value(a, 0.0) - u0) < 1e-12);
  CHECK(std::abs(hermite_rate(a, 0.0) - du0) < 1e-12);
  CHECK(std::abs(hermite_value(a, T) - u1) < 1e-10);
  CHECK(std::abs(hermite_rate(a, T) - du1) < 1e-10);
  const double h = 1e-7;
  for (double f : {0.2, 0.5, 0.8}) {
    const double s = f * T;
    const double fd = (hermite_value(a, s + h) - hermite_value(a, s - h)) / (2.0 * h);
    CHECK(std::abs(hermite_rate(a, s) - fd) < 1e-6);
    const double fd2 = (hermite_rate(a, s + h) - hermite_rate(a, s - h)) / (2.0 * h);
    CHECK(std::abs(hermite_accel(a, s) - fd2) < 1e-5);
  }
}
