#include "qio/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qio/error.hpp"
#include "qio/parallel.hpp"

namespace qio {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<Vector> axis_nodes(const Box& box, Index points) {
  std::vector<Vector> axes;
  for (Index a = 0; a < box.size(); ++a) {
    const double lo = box.lower(a), hi = box.upper(a);
    if (hi == lo || points <= 1) {
      axes.push_back(Vector::Constant(1, hi == lo ? lo : 0.5 * (lo + hi)));
    } else {
      axes.push_back(Vector::LinSpaced(points, lo, hi));
    }
  }
  return axes;
}

/// Nelder-Mead minimisation of `cost` over the free coordinates of x0.
struct NelderMead {
  const std::function<double(const Vector&)>& cost;
  const Box& box;
  std::vector<Index> free;
  Index evaluations = 0;

  double eval(const Vector& y, const Vector& anchor) {
    Vector x = anchor;
    for (std::size_t i = 0; i < free.size(); ++i) x(free[i]) = y(static_cast<Index>(i));
    ++evaluations;
    const double c = cost(box.clamp(x));
    return std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
  }

  std::pair<Vector, double> run(const Vector& x0, const Vector& steps, const MaximizeOptions& opt) {
    const Index m = static_cast<Index>(free.size());
    std::vector<Vector> pts(static_cast<std::size_t>(m + 1), Vector(m));
    std::vector<double> vals(static_cast<std::size_t>(m + 1));
    for (Index i = 0; i < m; ++i) pts[0](i) = x0(free[i]);
    vals[0] = eval(pts[0], x0);
    for (Index j = 0; j < m; ++j) {
      pts[j + 1] = pts[0];
      pts[j + 1](j) += steps(free[j]);
      vals[j + 1] = eval(pts[j + 1], x0);
    }
    std::vector<std::size_t> order(pts.size());
    for (int it = 0; it < opt.max_iterations; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
      double spread = 0.0;
      for (const Vector& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
      const double fspread = std::abs(vals[worst] - vals[best]);
      if (std::isfinite(vals[worst]) && fspread <= opt.f_tolerance * (1.0 + std::abs(vals[best])) &&
          spread <= opt.x_tolerance * (1.0 + pts[best].cwiseAbs().maxCoeff()))
        break;
      Vector centroid = Vector::Zero(m);
      for (std::size_t i : order)
        if (i != worst) centroid += pts[i];
      centroid /= static_cast<double>(m);
      const Vector xr = centroid + (centroid - pts[worst]);
      const double fr = eval(xr, x0);
      if (fr < vals[best]) {
        const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
        const double fe = eval(xe, x0);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
      } else if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
      } else {
        const bool outside = fr < vals[worst];
        const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                  : Vector(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc, x0);
        if (fc < (outside ? fr : vals[worst])) {
          pts[worst] = xc;
          vals[worst] = fc;
        } else {
          for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i], x0);
          }
        }
      }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    Vector x = x0;
    const Vector& y = pts[static_cast<std::size_t>(it - vals.begin())];
    for (Index i = 0; i < m; ++i) x(free[i]) = y(i);
    return {box.clamp(x), *it};
  }
};

}  // namespace

std::vector<Vector> regular_grid(const Box& box, Index points) {
  box.validate();
  const std::vector<Vector> axes = axis_nodes(box, points);
  std::vector<Vector> grid{Vector(box.size())};
  for (Index a = 0; a < box.size(); ++a) {
    std::vector<Vector> next;
    for (const Vector& g : grid) {
      for (Index j = 0; j < axes[a].size(); ++j) {
        Vector p = g;
        p(a) = axes[a](j);
        next.push_back(p);
      }
    }
    grid = std::move(next);
  }
  // Order so that the first axis varies slowest, matching lexicographic grid indices.
  return grid;
}

MaximizeResult maximize_on_box(const std::function<double(const Vector&)>& objective, const Box& box,
                               const MaximizeOptions& options) {
  box.validate();
  const Index points = box.size() > 2 ? std::min<Index>(options.grid_points, 5) : options.grid_points;
  const std::vector<Vector> grid = regular_grid(box, points);
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { values[i] = objective(grid[i]); });

  MaximizeResult res;
  res.evaluations = static_cast<Index>(grid.size());
  std::size_t best = grid.size();
  double lo = std::numeric_limits<double>::infinity(), hi = kNegInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = values[i];
    if (std::isnan(v) || v == kNegInf) continue;
    lo = std::min(lo, v);
    if (best == grid.size() || v > values[best]) best = i;
    hi = std::max(hi, v);
  }
  if (best == grid.size()) fail(Errc::all_records_impossible, "log-likelihood is -inf at every grid point");

  res.flat = std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }) &&
             hi - lo <= 1e-12 * (1.0 + std::abs(hi));
  res.argmax = grid[best];
  res.value = values[best];
  if (res.flat) {
    res.argmax = grid.front();
    res.value = values.front();
    return res;
  }

  std::vector<Index> free;
  Vector steps(box.size());
  for (Index a = 0; a < box.size(); ++a) {
    const double width = box.upper(a) - box.lower(a);
    steps(a) = points > 1 ? 0.5 * width / static_cast<double>(points - 1) : 0.25 * width;
    if (width > 0.0) free.push_back(a);
  }
  if (free.empty()) return res;
  const std::function<double(const Vector&)> cost = [&](const Vector& x) { return -objective(x); };
  NelderMead nm{cost, box, free};
  // Step towards the interior when the grid optimum sits on the upper bound.
  for (Index a : free)
    if (res.argmax(a) + steps(a) > box.upper(a)) steps(a) = -steps(a);
  auto [x, c] = nm.run(res.argmax, steps, options);
  res.evaluations += nm.evaluations;
  if (-c > res.value) {
    res.argmax = x;
    res.value = -c;
  }
  return res;
}

double total_log_likelihood(const ParameterFamily& family, const Vector& theta,
                            std::span<const MeasurementRecord> records, const DensityOperator& rho0,
                            const FilterOptions& filter) {
  const QMarkovModel model = family.model(theta);
  double total = 0.0;
  for (const MeasurementRecord& r : records) {
    total += log_likelihood(model, rho0, r, filter);
    if (total == kNegInf) break;
  }
  return total;
}

MaximizeResult mle(const ParameterFamily& family, std::span<const MeasurementRecord> records,
                   const DensityOperator& rho0, const MleOptions& options) {
  require(!records.empty(), "mle needs at least one record");
  for (const MeasurementRecord& r : records) validate(r);
  return maximize_on_box(
      [&](const Vector& theta) { return total_log_likelihood(family, theta, records, rho0, options.filter); },
      family.domain(), options.search);
}

PosteriorGrid posterior_grid(const ParameterFamily& family, std::span<const MeasurementRecord> records,
                             const DensityOperator& rho0, const std::vector<Vector>& grid,
                             const std::vector<double>& prior, const FilterOptions& filter) {
  require(!grid.empty() && grid.size() == prior.size(), "grid and prior must have equal non-zero length");
  double mass = 0.0;
  for (double p : prior) {
    require(p >= 0.0 && std::isfinite(p), "prior weights must be non-negative");
    mass += p;
  }
  require(std::abs(mass - 1.0) <= 1e-8, "prior must sum to 1 on the grid");
  PosteriorGrid out;
  out.grid = grid;
  out.log_weights.assign(grid.size(), kNegInf);
  parallel_for(grid.size(), [&](std::size_t i) {
    if (prior[i] > 0.0)
      out.log_weights[i] = total_log_likelihood(family, grid[i], records, rho0, filter) + std::log(prior[i]);
  });
  const double top = *std::max_element(out.log_weights.begin(), out.log_weights.end());
  if (top == kNegInf) fail(Errc::degenerate_posterior, "every posterior weight vanishes");
  out.weights.resize(grid.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) norm += out.weights[i] = std::exp(out.log_weights[i] - top);
  const double log_norm = top + std::log(norm);
  out.pm = Vector::Zero(grid.front().size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.weights[i] /= norm;
    out.log_weights[i] -= log_norm;
    out.pm += out.weights[i] * grid[i];
    if (out.weights[i] > out.weights[best]) best = i;
  }
  out.map = grid[best];
  return out;
}

AbcResult abc_rejection(const ParameterFamily& family, const Vector& observed, const PriorSampler& prior,
                        const RecordSimulator& simulate, const StatisticFn& statistic, const AbcOptions& options) {
  require(options.epsilon >= 0.0, "epsilon must be non-negative");
  const Index m = observed.size();
  // Stream layout: 2i / 2i+1 for the prior draw and simulation of sample i,
  // offset by 2 * n_sims for the pilot runs.
  const auto draw = [&](std::size_t index, Vector& theta_out) {
    RandomStream rng(options.seed, 2 * index);
    theta_out = prior(rng);
    const MeasurementRecord rec = simulate(family.model(theta_out), options.seed, 2 * index + 1);
    Vector s = statistic(rec);
    require(s.size() == m, "statistic dimension does not match the observed statistics");
    return s;
  };

  AbcResult res;
  res.n_sims = options.n_sims;
  res.scale = Vector::Ones(m);
  if (options.pilot > 1) {
    std::vector<Vector> pilot(options.pilot);
    parallel_for(options.pilot, [&](std::size_t j) {
      Vector theta;
      pilot[j] = draw(options.n_sims + j, theta);
    });
    for (Index c = 0; c < m; ++c) {
      double mean = 0.0, sq = 0.0;
      for (const Vector& s : pilot) mean += s(c);
      mean /= static_cast<double>(pilot.size());
      for (const Vector& s : pilot) sq += (s(c) - mean) * (s(c) - mean);
      const double sd = std::sqrt(sq / static_cast<double>(pilot.size() - 1));
      res.scale(c) = sd > 0.0 ? sd : 1.0;
    }
  }

  std::vector<Vector> thetas(options.n_sims);
  std::vector<double> dist(options.n_sims);
  parallel_for(options.n_sims, [&](std::size_t i) {
    const Vector s = draw(i, thetas[i]);
    dist[i] = ((s - observed).array() / res.scale.array()).matrix().norm();
  });
  for (std::size_t i = 0; i < options.n_sims; ++i) {
    if (dist[i] <= options.epsilon) {
      res.accepted.push_back(thetas[i]);
      res.distances.push_back(dist[i]);
    }
  }
  res.no_acceptances = res.accepted.empty();
  return res;
}

RecordSimulator counting_simulator(const DensityOperator& rho0, double T, double dt, CountingScheme scheme) {
  return [=](const QMarkovModel& model, std::uint64_t seed, std::uint64_t stream) -> MeasurementRecord {
    SimulationOptions opt;
    opt.keep_every = 0;
    opt.counting_scheme = scheme;
    opt.stream = stream;
    return simulate_counting(model, rho0, T, dt, seed, opt).first;
  };
}

RecordSimulator homodyne_simulator(const DensityOperator& rho0, double T, double dt) {
  return [=](const QMarkovModel& model, std::uint64_t seed, std::uint64_t stream) -> MeasurementRecord {
    SimulationOptions opt;
    opt.keep_every = 0;
    opt.stream = stream;
    return simulate_homodyne(model, rho0, T, dt, seed, opt).first;
  };
}

}  // namespace qio
