#include <cmath>

#include "qio/error.hpp"
#include "qio/sysid.hpp"

namespace qio {

namespace {

template <typename F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

bool subspace_origin(Errc code) {
  return code == Errc::insufficient_data || code == Errc::not_exciting || code == Errc::log_branch;
}

}  // namespace

SysIdDataset generate_dataset(const LinearQSystem& system, Quadrature quadrature, double dt, double T,
                              double amplitude, std::uint64_t seed, double split, Index hold,
                              InnovationScheme scheme) {
  system.validate();
  require(dt > 0.0 && T > 0.0 && std::isfinite(T / dt), "need dt > 0 and T > 0");
  const Index n = static_cast<Index>(std::llround(T / dt));
  require(n >= 1, "T / dt must be at least one sample");
  SysIdDataset data;
  data.dt = dt;
  data.split = split;
  data.inputs = prbs_inputs(n, amplitude, seed, hold);
  const KalmanResult kf = kalman_gain(system, quadrature);
  InnovationOptions opts;
  opts.scheme = scheme;
  opts.stream = 0x5157;
  const InnovationSimulation sim = simulate_innovation_form(system, kf.L_m, quadrature, data.inputs, dt, seed, opts);
  data.outputs = Eigen::Map<const Vector>(sim.Y.increments.data(), n) / dt;
  return data;
}

SysIdResult run_pipeline(const PipelineConfig& config) {
  const Matrix D = config.system ? config.system->D : Matrix(Matrix::Identity(2, 2));
  SysIdDataset data = staged("simulate", [&] {
    if (config.dataset) return *config.dataset;
    if (!config.system) fail(Errc::invalid_argument, "pipeline needs a system or a dataset");
    return generate_dataset(*config.system, config.quadrature, config.dt, config.T, config.prbs_amplitude,
                            config.seed, config.split, config.prbs_hold, config.scheme);
  });
  const SysIdDataset est = staged("split", [&] {
    if (data.size() > 0) data.validate();
    return data.size() > 0 ? data.estimation() : data;
  });

  SysIdResult res;
  try {
    res.fpe = fpe_order_select(est, config.orders, config.horizon);
  } catch (const Error& e) {
    throw e.with_stage(subspace_origin(e.code()) ? "subspace_id" : "fpe_order_select");
  }
  res.order = res.fpe.best;
  const SubspaceResult sub = staged("subspace_id", [&] { return subspace_id(est, res.order, config.horizon); });
  res.raw_discrete = sub.discrete;
  res.raw = sub.continuous;

  res.projection = staged("pr_projection", [&] {
    ProjectionOptions opts;
    opts.starts = config.projection_starts;
    opts.seed = config.seed;
    return pr_projection(res.raw, D, config.quadrature, opts);
  });
  LinearQSystem& g = res.projection.system;
  g.C = staged("recover_full_C", [&] {
    return recover_full_C(res.projection.Z, g.B, g.D, config.quadrature, g.C.row(quadrature_row(config.quadrature)));
  });
  res.projection.pr2_residual = pr2_residual(g, res.projection.Z);
  res.L_m = staged("kalman", [&] { return kalman_gain(g, config.quadrature).L_m; });
  res.nmse = staged("validate_nmse", [&] { return validate_nmse(g, res.L_m, config.quadrature, data); });
  return res;
}

}  // namespace qio
