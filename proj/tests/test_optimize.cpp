#include <doctest.h>

#include <cmath>
#include <vector>

#include "ndopfe/optimize.hpp"

using namespace ndopfe;

TEST_CASE("bounded simplex search finds a quadratic minimum") {
  const std::vector<double> lo{-5.0, -5.0, -5.0}, hi{5.0, 5.0, 5.0}, x0{3.0, -2.0, 4.0};
  const std::vector<double> target{0.7, -1.2, 2.5};
  auto fn = [&](std::span<const double> x) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) f += (x[i] - target[i]) * (x[i] - target[i]);
    return f;
  };
  NelderMeadOptions opt;
  opt.max_evals = 2000;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.converged);
  for (std::size_t i = 0; i < 3; ++i) CHECK(res.x[i] == doctest::Approx(target[i]).epsilon(1e-5));
  CHECK(res.f <= 1e-10);
}

TEST_CASE("starting at the optimum yields zero improvements and the exact start") {
  const std::vector<double> lo{0.0, 0.0}, hi{2.0, 2.0}, x0{0.5, 1.25};
  auto fn = [&](std::span<const double> x) {
    const double a = x[0] - 0.5, b = x[1] - 1.25;
    return a * a + b * b;
  };
  NelderMeadOptions opt;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.improvements == 0);
  CHECK(res.x[0] == 0.5);
  CHECK(res.x[1] == 1.25);
  CHECK(res.f == 0.0);
}

TEST_CASE("bounds clamp an exterior optimum onto the box face") {
  const std::vector<double> lo{0.0}, hi{1.0}, x0{0.4};
  auto fn = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
  NelderMeadOptions opt;
  opt.max_evals = 400;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("rosenbrock valley within a generous budget") {
  const std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0}, x0{-1.2, 1.0};
  auto fn = [](std::span<const double> x) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NelderMeadOptions opt;
  opt.max_evals = 4000;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("budget is respected up to one simplex operation") {
  const std::vector<double> lo{-1.0, -1.0, -1.0, -1.0}, hi{1.0, 1.0, 1.0, 1.0},
      x0{0.9, 0.9, 0.9, 0.9};
  auto fn = [](std::span<const double> x) {
    double f = 0.0;
    for (double v : x) f += std::cos(3.0 * v) + v * v;
    return f;
  };
  NelderMeadOptions opt;
  opt.max_evals = 60;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.evals <= opt.max_evals + 8);
}

TEST_CASE("infinite objective values are survived") {
  const std::vector<double> lo{0.0}, hi{4.0}, x0{3.5};
  auto fn = [](std::span<const double> x) {
    if (x[0] > 3.0) return std::numeric_limits<double>::infinity();
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  NelderMeadOptions opt;
  opt.max_evals = 300;
  const NelderMeadResult res = nelder_mead_box(fn, lo, hi, x0, opt);
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-4));
}
