#include <doctest.h>

#include <random>
#include <sstream>

#include "ndopfe/errors.hpp"
#include "ndopfe/numerics.hpp"
#include "ndopfe/transport.hpp"
#include "reference.hpp"

using namespace ndopfe;

namespace {

std::vector<double> random_field(std::size_t n, std::mt19937_64& rng, double lo = -2.0,
                                 double hi = 2.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  std::vector<double> f(n);
  for (double& v : f) v = uni(rng);
  return f;
}

double weighted_sum(std::span<const double> f, std::span<const double> vol) {
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(f[i] * vol[i]);
  return s.value();
}

double weighted_abs_sum(std::span<const double> f, std::span<const double> vol) {
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(std::abs(f[i]) * vol[i]);
  return s.value();
}

}  // namespace

TEST_CASE("synthetic operator: structural invariants") {
  const Grid g = Grid::desk_default();
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  REQUIRE(op.snapshots.size() == 12);
  std::mt19937_64 rng(101);
  std::vector<double> out(g.n_cells());

  SUBCASE("mass annihilation on every snapshot") {
    for (int trial = 0; trial < 40; ++trial) {
      const std::vector<double> s = random_field(g.n_cells(), rng);
      for (std::size_t m = 0; m < op.snapshots.size(); ++m) {
        op.apply_snapshot(static_cast<int>(m), s, out);
        const double total = weighted_sum(out, op.volumes);
        const double scale = std::max(weighted_abs_sum(out, op.volumes), 1e-30);
        CHECK(std::abs(total) <= 1e-12 * scale);
      }
    }
  }

  SUBCASE("constants are annihilated") {
    const std::vector<double> ones(g.n_cells(), 3.25);
    const double rate_scale = 1.0 / op.max_stable_dt();
    for (std::size_t m = 0; m < op.snapshots.size(); ++m) {
      op.apply_snapshot(static_cast<int>(m), ones, out);
      for (double v : out) CHECK(std::abs(v) <= 1e-11 * 3.25 * rate_scale);
    }
  }

  SUBCASE("linearity of apply") {
    const std::vector<double> s = random_field(g.n_cells(), rng);
    const double a = -1.767;
    std::vector<double> as(g.n_cells()), out2(g.n_cells());
    for (std::size_t i = 0; i < s.size(); ++i) as[i] = a * s[i];
    op.apply(s, 33.25, out);
    op.apply(as, 33.25, out2);
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(out2[i] == doctest::Approx(a * out[i]).epsilon(1e-12));
  }

  SUBCASE("periodicity: t and t + period give identical tendencies") {
    const std::vector<double> s = random_field(g.n_cells(), rng);
    std::vector<double> out2(g.n_cells());
    const double t = 100.25;  // dyadic, so t + 360 is exact
    op.apply(s, t, out);
    op.apply(s, t + op.period, out2);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(out[i] == out2[i]);
  }

  SUBCASE("interpolation hits the snapshots and their midpoints") {
    const std::vector<double> s = random_field(g.n_cells(), rng);
    std::vector<double> a(g.n_cells()), b(g.n_cells()), mid(g.n_cells());
    op.apply(s, op.snapshot_time[3], a);
    op.apply_snapshot(3, s, b);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(a[i] == b[i]);

    const double tm = 0.5 * (op.snapshot_time[3] + op.snapshot_time[4]);
    op.apply(s, tm, mid);
    op.apply_snapshot(4, s, b);
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(mid[i] == doctest::Approx(0.5 * (a[i] + b[i])).epsilon(1e-12));
  }

  SUBCASE("serial and parallel apply agree bitwise") {
    const std::vector<double> s = random_field(g.n_cells(), rng);
    std::vector<double> out2(g.n_cells());
    op.apply(s, 200.0, out);
    op.apply_serial(s, 200.0, out2);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(out[i] == out2[i]);
  }

  SUBCASE("shape mismatch throws") {
    std::vector<double> bad(g.n_cells() - 1);
    CHECK_THROWS_AS(op.apply(bad, 0.0, out), ConfigError);
  }
}

TEST_CASE("zero settings give the zero operator") {
  const Grid g = Grid::twin_default();
  TransportSettings s;
  s.gyre_strength = 0.0;
  s.overturn_velocity = 0.0;
  s.kappa = 0.0;
  const TransportOperator op = build_synthetic(g, s);
  std::mt19937_64 rng(5);
  const std::vector<double> f = random_field(g.n_cells(), rng);
  std::vector<double> out(g.n_cells());
  op.apply(f, 17.0, out);
  for (double v : out) CHECK(v == 0.0);
  CHECK(op.max_stable_dt() == std::numeric_limits<double>::infinity());
}

TEST_CASE("upwind advection is monotone under the CFL bound") {
  const Grid g = Grid::desk_default();
  TransportSettings s;
  s.kappa = 0.0;  // pure advection
  const TransportOperator op = build_synthetic(g, s);
  const double dt = 0.99 * op.max_stable_dt();
  std::mt19937_64 rng(7);
  std::vector<double> f = random_field(g.n_cells(), rng, 0.0, 5.0);
  std::vector<double> out(g.n_cells());
  for (int m = 0; m < 12; ++m) {
    op.apply_snapshot(m, f, out);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double next = f[i] + dt * out[i];
      CHECK(next >= 0.0);
    }
  }
}

TEST_CASE("diffusion-only operator is symmetric negative semidefinite in the volume inner product") {
  const Grid g = Grid::twin_default();
  TransportSettings s;
  s.gyre_strength = 0.0;
  s.overturn_velocity = 0.0;
  s.kappa = 0.2;
  s.n_snapshots = 1;
  const TransportOperator op = build_synthetic(g, s);
  const auto dense = ref::dense_of(op.snapshots[0]);
  const std::size_t n = g.n_cells();

  double scale = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      scale = std::max(scale, std::abs(g.cell_volume[r] * dense[r][c]));

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double vrc = g.cell_volume[r] * dense[r][c];
      const double vcr = g.cell_volume[c] * dense[c][r];
      CHECK(std::abs(vrc - vcr) <= 1e-12 * scale);
    }
  }

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x = random_field(n, rng);
    const std::vector<double> ax = ref::dense_apply(dense, x);
    long double quad = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      quad += static_cast<long double>(x[i]) * g.cell_volume[i] * ax[i];
    CHECK(static_cast<double>(quad) <= 1e-10 * scale);
  }
}

TEST_CASE("operator save/load round trip is exact") {
  const Grid g = Grid::twin_default();
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  std::stringstream ss;
  op.save(ss);
  const TransportOperator back = TransportOperator::load(ss, g);
  REQUIRE(back.snapshots.size() == op.snapshots.size());
  CHECK(back.period == op.period);
  for (std::size_t m = 0; m < op.snapshots.size(); ++m) {
    CHECK(back.snapshot_time[m] == op.snapshot_time[m]);
    CHECK(back.snapshots[m].row_ptr == op.snapshots[m].row_ptr);
    CHECK(back.snapshots[m].col == op.snapshots[m].col);
    CHECK(back.snapshots[m].val == op.snapshots[m].val);
  }
}

TEST_CASE("operator load rejects malformed input") {
  const Grid g = Grid::twin_default();
  std::stringstream bad("not a transport file\n");
  CHECK_THROWS_AS(TransportOperator::load(bad, g), ConfigError);

  const Grid other = Grid::desk_default();
  const TransportOperator op = build_synthetic(other, TransportSettings{});
  std::stringstream ss;
  op.save(ss);
  CHECK_THROWS_AS(TransportOperator::load(ss, g), ConfigError);
}

TEST_CASE("annual mean equals the snapshot average") {
  const Grid g = Grid::twin_default();
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  const TransportOperator mean = op.annual_mean();
  REQUIRE(mean.snapshots.size() == 1);
  std::mt19937_64 rng(13);
  const std::vector<double> s = random_field(g.n_cells(), rng);
  std::vector<double> got(g.n_cells()), tmp(g.n_cells());
  mean.apply(s, 123.0, got);
  std::vector<long double> acc(g.n_cells(), 0.0L);
  for (std::size_t m = 0; m < op.snapshots.size(); ++m) {
    op.apply_snapshot(static_cast<int>(m), s, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) acc[i] += tmp[i];
  }
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(static_cast<double>(acc[i] / 12.0L)).epsilon(1e-12));
}

TEST_CASE("implicit transport solves (I - dt A) x = b and conserves mass") {
  const Grid g = Grid::twin_default();
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  const double dt = 2.0;  // stiffer than the explicit bound would allow
  const ImplicitTransport solver(op, dt);
  std::mt19937_64 rng(17);
  std::vector<double> b = random_field(g.n_cells(), rng, 0.0, 2.0);
  const std::vector<double> b0 = b;
  const double t = 40.0;
  solver.step(b, t);

  // residual check: x - dt A x == b
  std::vector<double> ax(g.n_cells());
  op.apply_snapshot(op.snapshot_at(t), b, ax);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(b[i] - dt * ax[i] == doctest::Approx(b0[i]).epsilon(1e-10));

  const double m0 = weighted_sum(b0, op.volumes);
  const double m1 = weighted_sum(b, op.volumes);
  CHECK(m1 == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("single cell grid warns and yields a zero operator") {
  const std::vector<double> depth{50.0}, area{1.0}, ladder{50.0};
  const Grid g = Grid::build(1, 1, depth, area, ladder);
  REQUIRE(g.n_cells() == 1);
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  std::vector<double> f{2.0}, out{0.0};
  op.apply(f, 0.0, out);
  CHECK(out[0] == 0.0);
}
