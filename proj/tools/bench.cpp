// Times the OpenMP kernels against their serial reference paths on the
// default desk grid: reaction tendencies, transport apply, one full step.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "ndopfe/forcing.hpp"
#include "ndopfe/grid.hpp"
#include "ndopfe/kernels.hpp"
#include "ndopfe/solvers.hpp"
#include "ndopfe/transport.hpp"

using namespace ndopfe;

namespace {

template <class F>
double time_ms(int reps, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) body();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  const Grid g = Grid::desk_default();
  const TransportOperator op = build_synthetic(g, TransportSettings{});
  const Forcing f = Forcing::defaults_for(g);
  const ParameterSet p;

  TracerState y = uniform_state_with_mass(1.0, g);
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    y.y1[c] = 0.5 + 0.1 * std::sin(0.1 * c);
    y.y2[c] = 0.2 + 0.05 * std::cos(0.2 * c);
    y.y3[c] = 0.4 + 0.1 * std::sin(0.3 * c);
  }
  std::vector<double> insol(g.n_columns());
  for (std::size_t c = 0; c < g.n_columns(); ++c) insol[c] = f.insolation(static_cast<int>(c), 90.0);
  const std::vector<double> src = iron_source_field(g, p, f);
  std::vector<double> r1(g.n_cells()), r2(g.n_cells()), r3(g.n_cells()), out(g.n_cells());

  const int reps = 2000;
  std::printf("desk grid: %zu cells, %zu columns, OpenMP threads: %d\n", g.n_cells(),
              g.n_columns(), omp_get_max_threads());

  const double serial_react = time_ms(reps, [&] {
    kernels::reaction_tendencies_all_serial(g, y.y1, y.y2, y.y3, insol, src, p,
                                            kernels::IronVariant::Adjusted, r1, r2, r3);
  });
  const double omp_react = time_ms(reps, [&] {
    kernels::reaction_tendencies_all(g, y.y1, y.y2, y.y3, insol, src, p,
                                     kernels::IronVariant::Adjusted, r1, r2, r3);
  });
  std::printf("reaction tendencies  serial %8.4f ms   openmp %8.4f ms   speedup %5.2fx\n",
              serial_react, omp_react, serial_react / omp_react);

  const double serial_apply = time_ms(reps, [&] { op.apply_serial(y.y1, 90.0, out); });
  const double omp_apply = time_ms(reps, [&] { op.apply(y.y1, 90.0, out); });
  std::printf("transport apply      serial %8.4f ms   openmp %8.4f ms   speedup %5.2fx\n",
              serial_apply, omp_apply, serial_apply / omp_apply);

  SolverSettings serial_cfg;
  serial_cfg.parallel = false;
  SolverSettings omp_cfg;
  Simulator sim_serial(g, op, f, p, serial_cfg);
  Simulator sim_omp(g, op, f, p, omp_cfg);
  TracerState ys = y, yo = y;
  const double serial_step = time_ms(reps, [&] { sim_serial.step(ys, 90.0); });
  const double omp_step = time_ms(reps, [&] { sim_omp.step(yo, 90.0); });
  std::printf("full solver step     serial %8.4f ms   openmp %8.4f ms   speedup %5.2fx\n",
              serial_step, omp_step, serial_step / omp_step);
  return 0;
}
