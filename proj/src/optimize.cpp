#include "ndopfe/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ndopfe {

namespace {

// Standard coefficients: reflection, expansion, contraction, shrink.
constexpr double kRho = 1.0;
constexpr double kChi = 2.0;
constexpr double kGamma = 0.5;
constexpr double kSigma = 0.5;

struct Vertex {
  std::vector<double> x;
  double f = 0.0;
};

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& fn,
                                 std::span<const double> lower, std::span<const double> upper,
                                 std::span<const double> x0, const NelderMeadOptions& opt) {
  const std::size_t d = x0.size();
  if (lower.size() != d || upper.size() != d)
    throw std::invalid_argument("nelder_mead_box: bound shapes do not match x0");
  for (std::size_t i = 0; i < d; ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("nelder_mead_box: need lower < upper in every coordinate");

  NelderMeadResult res;
  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double f = fn(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  std::vector<double> start(x0.begin(), x0.end());
  clamp(start);
  const double f_start = eval(start);
  Vertex best{start, f_start};

  double step = opt.init_step;
  for (int round = 0; round <= opt.max_inner_restarts; ++round) {
    // Build a fresh simplex around the incumbent.
    std::vector<Vertex> simplex;
    simplex.push_back(best);
    for (std::size_t i = 0; i < d && res.evals < opt.max_evals; ++i) {
      Vertex v;
      v.x = best.x;
      const double width = (upper[i] - lower[i]) * step;
      v.x[i] += (v.x[i] + width <= upper[i]) ? width : -width;
      clamp(v.x);
      v.f = eval(v.x);
      simplex.push_back(std::move(v));
    }
    if (simplex.size() < d + 1) break;  // budget exhausted while seeding

    const double f_before_round = best.f;
    bool collapsed = false;
    while (res.evals < opt.max_evals) {
      std::sort(simplex.begin(), simplex.end(),
                [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (simplex.front().f < best.f) {
        best = simplex.front();
        ++res.improvements;
      }

      double diam = 0.0;  // measured relative to the box widths
      for (std::size_t v = 1; v <= d; ++v)
        for (std::size_t i = 0; i < d; ++i)
          diam = std::max(diam, std::abs(simplex[v].x[i] - simplex[0].x[i]) / (upper[i] - lower[i]));
      const double fspread = simplex[d].f - simplex[0].f;
      if (diam <= opt.xtol && (fspread <= opt.ftol || !std::isfinite(fspread))) {
        collapsed = true;
        break;
      }

      std::vector<double> centroid(d, 0.0);
      for (std::size_t v = 0; v < d; ++v)
        for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[v].x[i] / d;

      Vertex& worst = simplex[d];
      auto along = [&](double coef) {
        std::vector<double> x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = centroid[i] + coef * (centroid[i] - worst.x[i]);
        clamp(x);
        return x;
      };

      Vertex refl{along(kRho), 0.0};
      refl.f = eval(refl.x);

      if (refl.f < simplex[0].f) {
        Vertex exp_{along(kRho * kChi), 0.0};
        exp_.f = res.evals < opt.max_evals ? eval(exp_.x) : refl.f + 1.0;
        worst = exp_.f < refl.f ? std::move(exp_) : std::move(refl);
        continue;
      }
      if (refl.f < simplex[d - 1].f) {
        worst = std::move(refl);
        continue;
      }
      // Contraction: outside if the reflection helped over the worst,
      // inside otherwise.
      const bool outside = refl.f < worst.f;
      Vertex contr{along(outside ? kRho * kGamma : -kGamma), 0.0};
      contr.f = eval(contr.x);
      if (contr.f < std::min(refl.f, worst.f)) {
        worst = std::move(contr);
        continue;
      }
      // Shrink towards the best vertex.
      for (std::size_t v = 1; v <= d && res.evals < opt.max_evals; ++v) {
        for (std::size_t i = 0; i < d; ++i)
          simplex[v].x[i] = simplex[0].x[i] + kSigma * (simplex[v].x[i] - simplex[0].x[i]);
        clamp(simplex[v].x);
        simplex[v].f = eval(simplex[v].x);
      }
    }

    if (!collapsed) break;  // ran out of budget mid-round
    res.converged = true;
    const bool improved = best.f < f_before_round - opt.ftol;
    if (!improved && round > 0) break;  // a reseeded simplex found nothing new
    step *= 0.25;
  }

  res.x = best.x;
  res.f = best.f;
  return res;
}

}  // namespace ndopfe
