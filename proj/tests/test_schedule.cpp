#include "doctest.h"

#include <cmath>

#include "boxqp/error.hpp"
#include "boxqp/schedule.hpp"

using boxqp::Schedule;

TEST_CASE("schedule shapes") {
  const double T = 100.0;
  const auto pump = Schedule::linear_pump(2.0, T);
  CHECK(pump(0.0) == 0.0);
  CHECK(pump(50.0) == doctest::Approx(1.0));
  CHECK(pump(T) == doctest::Approx(2.0));

  const auto j = Schedule::exp_measurement(20.0, 3.0, T);
  CHECK(j(0.0) == doctest::Approx(20.0));
  CHECK(j(T) == doctest::Approx(20.0 * std::exp(-3.0)));

  const auto r = Schedule::exp_noise(10.0, 3.0, T);
  CHECK(r(T / 3.0) == doctest::Approx(10.0 * std::exp(-1.0)));

  // The MF pump cancels the loss 1 + j(t) and adds a linear ramp.
  const auto mf = Schedule::mf_pump(0.55, 20.0, 3.0, T);
  for (double t : {0.0, 10.0, 70.0, T}) CHECK(mf(t) - (1.0 + j(t)) == doctest::Approx(0.55 * t / T));

  CHECK(Schedule::constant(0.3)(42.0) == 0.3);
}

TEST_CASE("schedules reject a non-positive horizon") {
  CHECK_THROWS_AS(Schedule::linear_pump(1.0, 0.0), boxqp::InvalidArgument);
}
