#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qio/error.hpp"
#include "qio/estimation.hpp"
#include "qio/filter.hpp"
#include "qio/io.hpp"
#include "qio/linalg.hpp"
#include "qio/linear_system.hpp"
#include "qio/markov_qfi.hpp"
#include "qio/operator_core.hpp"
#include "qio/sysid.hpp"
#include "qio/trajectory.hpp"

namespace {

using qio::io::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitStatistical = 4;

int exit_code(qio::Errc code) {
  switch (code) {
    case qio::Errc::invalid_argument:
    case qio::Errc::parse_error:
      return kExitValidation;
    case qio::Errc::all_records_impossible:
    case qio::Errc::degenerate_posterior:
    case qio::Errc::zero_variance:
    case qio::Errc::degenerate_output:
      return kExitStatistical;
    default:
      return kExitRuntime;
  }
}

struct Common {
  std::string out;
  std::string csv;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double dt = 1e-3;
  double T = 10.0;
  double lambda = 1.0;
  std::string initial = "mixed";
};

qio::DensityOperator initial_state(const std::string& kind, const qio::QMarkovModel& model) {
  if (kind == "mixed") return qio::DensityOperator::maximally_mixed(model.dim());
  if (kind == "ground") return qio::DensityOperator::basis_state(model.dim(), 0);
  if (kind == "stationary") return qio::stationary_state(model);
  qio::fail(qio::Errc::invalid_argument, "--initial must be mixed, ground or stationary");
}

void emit(const Common& c, const json& report) {
  if (c.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    qio::io::write_json_file(c.out, report);
  }
}

void row(const std::string& key, const std::string& value) { std::printf("%-18s %s\n", key.c_str(), value.c_str()); }
void row(const std::string& key, double value) { std::printf("%-18s %.10g\n", key.c_str(), value); }

std::vector<qio::MeasurementRecord> load_records(const std::vector<std::string>& paths) {
  std::vector<qio::MeasurementRecord> out;
  for (const auto& p : paths) out.push_back(qio::io::record_from_json(qio::io::read_json_file(p)));
  return out;
}

json string_list(const std::vector<std::string>& v) { return json(v); }

int cmd_simulate(const Common& c, const std::string& model_path, const std::string& kind, const std::string& scheme) {
  if (!c.seed_given) qio::fail(qio::Errc::invalid_argument, "simulate requires --seed");
  if (c.out.empty()) qio::fail(qio::Errc::invalid_argument, "simulate requires --out");
  const qio::QMarkovModel model = qio::io::model_from_json(qio::io::read_json_file(model_path));
  const qio::DensityOperator rho0 = initial_state(c.initial, model);
  qio::SimulationOptions opts;
  opts.keep_every = 0;
  json record;
  if (kind == "homodyne") {
    auto [rec, traj] = qio::simulate_homodyne(model, rho0, c.T, c.dt, c.seed, opts);
    double total = 0.0;
    for (double dy : rec.increments) total += dy;
    row("kind", "homodyne");
    row("samples", std::to_string(rec.increments.size()));
    row("mean current", total / rec.horizon());
    record = qio::io::to_json(qio::MeasurementRecord(rec));
  } else if (kind == "counting") {
    if (scheme == "waiting-time") opts.counting_scheme = qio::CountingScheme::waiting_time;
    else if (scheme != "bernoulli") qio::fail(qio::Errc::invalid_argument, "--scheme must be bernoulli or waiting-time");
    auto [rec, traj] = qio::simulate_counting(model, rho0, c.T, c.dt, c.seed, opts);
    row("kind", "counting");
    row("jumps", std::to_string(rec.count()));
    row("count rate", static_cast<double>(rec.count()) / rec.horizon);
    record = qio::io::to_json(qio::MeasurementRecord(rec));
  } else {
    qio::fail(qio::Errc::invalid_argument, "--kind must be homodyne or counting");
  }
  qio::io::write_json_file(c.out, record);
  return kExitOk;
}

qio::FilterOptions filter_options(const Common& c) {
  qio::FilterOptions f;
  f.dt = c.dt;
  f.lambda = c.lambda;
  return f;
}

json common_config(const Common& c) {
  return json{{"dt", c.dt}, {"lambda", c.lambda}, {"initial", c.initial}};
}

int cmd_filter(const Common& c, const std::string& model_path, const std::string& record_path, std::size_t keep_every) {
  const qio::QMarkovModel model = qio::io::model_from_json(qio::io::read_json_file(model_path));
  const qio::MeasurementRecord record = qio::io::record_from_json(qio::io::read_json_file(record_path));
  qio::FilterOptions f = filter_options(c);
  f.keep_every = keep_every;
  const qio::FilterTrajectory traj = qio::run_filter(model, initial_state(c.initial, model), record, f);
  json states = json::array();
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    states.push_back(json{{"t", traj.times[k]},
                          {"re", qio::io::to_json(qio::Matrix(traj.states[k].real()))},
                          {"im", qio::io::to_json(qio::Matrix(traj.states[k].imag()))}});
  json config = common_config(c);
  config["model"] = model_path;
  config["record"] = record_path;
  config["keep_every"] = keep_every;
  row("loglik", traj.loglik);
  row("stored states", std::to_string(traj.states.size()));
  emit(c, qio::io::report("filter", config,
                          json{{"loglik", traj.loglik},
                               {"final_state",
                                {{"re", qio::io::to_json(qio::Matrix(traj.final_state.real()))},
                                 {"im", qio::io::to_json(qio::Matrix(traj.final_state.imag()))}}},
                               {"states", states}}));
  return kExitOk;
}

int cmd_loglik(const Common& c, const std::string& model_path, const std::vector<std::string>& record_paths) {
  const qio::QMarkovModel model = qio::io::model_from_json(qio::io::read_json_file(model_path));
  const auto records = load_records(record_paths);
  const qio::DensityOperator rho0 = initial_state(c.initial, model);
  json values = json::array();
  double total = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const double ll = qio::log_likelihood(model, rho0, records[k], filter_options(c));
    total += ll;
    row(record_paths[k], ll);
    values.push_back(std::isfinite(ll) ? json(ll) : json("-inf"));
  }
  row("total", total);
  json config = common_config(c);
  config["model"] = model_path;
  config["records"] = string_list(record_paths);
  emit(c, qio::io::report("loglik", config,
                          json{{"loglik", values}, {"total", std::isfinite(total) ? json(total) : json("-inf")}}));
  return kExitOk;
}

int cmd_estimate(const Common& c, const std::string& family_path, const std::vector<std::string>& record_paths,
                 const std::string& method, qio::Index grid_points, std::size_t n_sims, double epsilon) {
  const qio::ParameterFamily family = qio::io::family_from_json(qio::io::read_json_file(family_path));
  const auto records = load_records(record_paths);
  if (records.empty()) qio::fail(qio::Errc::invalid_argument, "estimate needs at least one record");
  const qio::DensityOperator rho0 = initial_state(c.initial, family.base());
  json config = common_config(c);
  config["family"] = family_path;
  config["records"] = string_list(record_paths);
  config["method"] = method;
  config["grid_points"] = grid_points;
  json body;
  if (method == "mle") {
    qio::MleOptions opts;
    opts.search.grid_points = grid_points;
    opts.filter = filter_options(c);
    const qio::MaximizeResult r = qio::mle(family, records, rho0, opts);
    body = json{{"theta_hat", qio::io::to_json(r.argmax)},
                {"loglik", r.value},
                {"method", "mle"},
                {"diagnostics", {{"flat", r.flat}, {"evaluations", r.evaluations}}}};
  } else if (method == "pm" || method == "map") {
    const auto grid = qio::regular_grid(family.domain(), grid_points);
    const std::vector<double> prior(grid.size(), 1.0 / static_cast<double>(grid.size()));
    const qio::PosteriorGrid post = qio::posterior_grid(family, records, rho0, grid, prior, filter_options(c));
    const qio::Vector theta = method == "pm" ? post.pm : post.map;
    body = json{{"theta_hat", qio::io::to_json(theta)},
                {"loglik", qio::total_log_likelihood(family, theta, records, rho0, filter_options(c))},
                {"method", method},
                {"diagnostics", {{"grid_size", grid.size()}, {"pm", qio::io::to_json(post.pm)}, {"map", qio::io::to_json(post.map)}}}};
    if (!c.csv.empty()) {
      std::ofstream csv(c.csv);
      for (qio::Index a = 0; a < family.k(); ++a) csv << "theta" << a << ',';
      csv << "log_weight,weight\n";
      csv.precision(17);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (qio::Index a = 0; a < family.k(); ++a) csv << grid[i](a) << ',';
        csv << post.log_weights[i] << ',' << post.weights[i] << '\n';
      }
    }
  } else if (method == "abc") {
    if (!c.seed_given) qio::fail(qio::Errc::invalid_argument, "abc requires --seed");
    const auto* counting = std::get_if<qio::CountingRecord>(&records.front());
    if (records.size() != 1 || counting == nullptr)
      qio::fail(qio::Errc::invalid_argument, "abc takes exactly one counting record");
    const qio::Index bins = 10;
    const qio::StatisticFn stat = [bins](const qio::MeasurementRecord& r) {
      return qio::stat_binned_counts(std::get<qio::CountingRecord>(r), bins);
    };
    const qio::Box box = family.domain();
    const qio::PriorSampler prior = [box](qio::RandomStream& rng) {
      qio::Vector t(box.size());
      for (qio::Index a = 0; a < box.size(); ++a) t(a) = box.lower(a) + (box.upper(a) - box.lower(a)) * rng.uniform();
      return t;
    };
    qio::AbcOptions opts;
    opts.n_sims = n_sims;
    opts.epsilon = epsilon;
    opts.seed = c.seed;
    const qio::AbcResult r = qio::abc_rejection(family, stat(records.front()), prior,
                                                qio::counting_simulator(rho0, counting->horizon, c.dt), stat, opts);
    qio::Vector mean = qio::Vector::Zero(family.k());
    for (const auto& t : r.accepted) mean += t;
    if (!r.accepted.empty()) mean /= static_cast<double>(r.accepted.size());
    json accepted = json::array();
    for (const auto& t : r.accepted) accepted.push_back(qio::io::to_json(t));
    config["n_sims"] = n_sims;
    config["epsilon"] = epsilon;
    config["seed"] = c.seed;
    body = json{{"theta_hat", r.no_acceptances ? json(nullptr) : qio::io::to_json(mean)},
                {"loglik", nullptr},
                {"method", "abc"},
                {"diagnostics",
                 {{"accepted", accepted.size()}, {"n_sims", r.n_sims}, {"no_acceptances", r.no_acceptances},
                  {"samples", accepted}}}};
  } else {
    qio::fail(qio::Errc::invalid_argument, "--method must be mle, pm, map or abc");
  }
  row("method", method);
  if (body["theta_hat"].is_array())
    for (std::size_t a = 0; a < body["theta_hat"].size(); ++a)
      row("theta_hat[" + std::to_string(a) + "]", body["theta_hat"][a].get<double>());
  emit(c, qio::io::report("estimate", config, body));
  return kExitOk;
}

int cmd_qfi(const Common& c, const std::string& family_path, const std::vector<double>& theta_values) {
  const qio::ParameterFamily family = qio::io::family_from_json(qio::io::read_json_file(family_path));
  qio::Vector theta = Eigen::Map<const qio::Vector>(theta_values.data(), static_cast<qio::Index>(theta_values.size()));
  if (theta.size() != family.k())
    qio::fail(qio::Errc::invalid_argument, "--theta needs " + std::to_string(family.k()) + " values");
  const qio::QMarkovModel model = family.model(theta);
  const qio::Matrix f = qio::qfi_rate(family, theta);
  const qio::SpectralInfo spec = qio::spectral_info(model);
  const qio::CountingMoments mom = qio::counting_rate_and_variance(model);
  for (qio::Index a = 0; a < f.rows(); ++a)
    for (qio::Index b = 0; b < f.cols(); ++b) row("qfi_rate[" + std::to_string(a) + "," + std::to_string(b) + "]", f(a, b));
  row("gap", spec.gap);
  row("mu", mom.mu);
  row("V", mom.V);
  json config{{"family", family_path}, {"theta", theta_values}};
  emit(c, qio::io::report("qfi", config,
                          json{{"theta", theta_values},
                               {"qfi_rate", qio::io::to_json(f)},
                               {"gap", spec.gap},
                               {"mu", mom.mu},
                               {"V", mom.V}}));
  return kExitOk;
}

std::vector<double> frequencies(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo)) qio::fail(qio::Errc::invalid_argument, "need --count >= 1 and --omega-max >= --omega-min");
  std::vector<double> w;
  for (int k = 0; k < count; ++k) w.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
  return w;
}

json complex_matrix_json(const qio::CMatrix& m) {
  return json{{"re", qio::io::to_json(qio::Matrix(m.real()))}, {"im", qio::io::to_json(qio::Matrix(m.imag()))}};
}

int cmd_linsys(const Common& c, const std::string& action, const std::string& system_path, double wlo, double whi,
               int count, const std::string& quadrature) {
  const qio::LinearQSystem g = qio::io::linear_system_from_json(qio::io::read_json_file(system_path));
  json config{{"system", system_path}, {"action", action}};
  json body;
  if (action == "check-pr") {
    const double pr1 = qio::check_pr1(g);
    const qio::Pr2Result pr2 = qio::check_pr2(g);
    const char* status = pr2.status == qio::Pr2Status::ok ? "ok"
                         : pr2.status == qio::Pr2Status::singular_z ? "singular_z"
                                                                    : "no_skew_solution";
    row("pr1 residual", pr1);
    row("pr2 status", status);
    row("pr2 residual", pr2.residual);
    body = json{{"pr1_residual", pr1}, {"pr2_status", status}, {"pr2_residual", pr2.residual}};
    if (pr2.Z) body["Z"] = qio::io::to_json(*pr2.Z);
    if (pr2.V) body["V"] = qio::io::to_json(*pr2.V);
  } else if (action == "transfer" || action == "spectrum") {
    const auto w = frequencies(wlo, whi, count);
    config["omega"] = w;
    json sweep = json::array();
    std::ofstream csv;
    if (!c.csv.empty()) {
      csv.open(c.csv);
      csv.precision(17);
      csv << "omega,m00_re,m00_im,m01_re,m01_im,m10_re,m10_im,m11_re,m11_im\n";
    }
    for (double omega : w) {
      const qio::CMatrix m = action == "transfer" ? qio::transfer_function(g, qio::cplx(0.0, omega))
                                                  : qio::power_spectrum(g, qio::GaussianInput{}, omega);
      sweep.push_back(json{{"omega", omega}, {"value", complex_matrix_json(m)}});
      if (csv.is_open()) {
        csv << omega;
        for (qio::Index i = 0; i < 2; ++i)
          for (qio::Index k = 0; k < 2; ++k) csv << ',' << m(i, k).real() << ',' << m(i, k).imag();
        csv << '\n';
      }
    }
    row("frequencies", std::to_string(w.size()));
    body = json{{action == "transfer" ? "transfer_function" : "power_spectrum", sweep}};
  } else if (action == "kalman") {
    const qio::Quadrature q = quadrature == "P" ? qio::Quadrature::P : qio::Quadrature::Q;
    if (quadrature != "P" && quadrature != "Q") qio::fail(qio::Errc::invalid_argument, "--quadrature must be Q or P");
    config["quadrature"] = quadrature;
    const qio::KalmanResult k = qio::kalman_gain(g, q);
    row("riccati residual", k.riccati_residual);
    row("closed-loop abscissa", qio::spectral_abscissa(k.closed_loop));
    body = json{{"L_m", qio::io::to_json(k.L_m)},
                {"Q_m", qio::io::to_json(k.Q_m)},
                {"riccati_residual", k.riccati_residual},
                {"closed_loop", qio::io::to_json(k.closed_loop)}};
  } else {
    qio::fail(qio::Errc::invalid_argument, "unknown linsys action " + action);
  }
  emit(c, qio::io::report("linsys " + action, config, body));
  return kExitOk;
}

int cmd_sysid(const Common& c, const std::string& config_path) {
  const json raw = qio::io::read_json_file(config_path);
  const std::filesystem::path base = std::filesystem::path(config_path).parent_path();
  const qio::PipelineConfig config = qio::io::pipeline_config_from_json(raw, base);
  const qio::SysIdResult r = qio::run_pipeline(config);
  row("order", std::to_string(r.order));
  for (const auto& e : r.fpe.table) row("fpe[n=" + std::to_string(e.order) + "]", e.fpe);
  row("cost", r.projection.cost);
  row("pr2 residual", r.projection.pr2_residual);
  row("nmse", r.nmse);
  emit(c, qio::io::report("sysid", raw, qio::io::to_json(r)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qiokit: quantum input-output systems toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QIOKIT_VERSION));
  Common c;

  auto add_common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--out", c.out, "Output JSON path (report goes to stdout when omitted)");
    sub->add_option("--dt", c.dt, "Time step")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", c.lambda, "Reference Poisson intensity")->check(CLI::PositiveNumber);
    sub->add_option("--initial", c.initial, "Initial state: mixed, ground or stationary")
        ->check(CLI::IsMember({"mixed", "ground", "stationary"}));
    if (stochastic) sub->add_option("--seed", c.seed, "Random seed");
  };

  std::string model, family, record, kind = "counting", scheme = "bernoulli", method = "mle", config, action;
  std::string quadrature = "Q";
  std::vector<std::string> records;
  std::vector<double> theta;
  std::size_t keep_every = 0;
  qio::Index grid_points = 21;
  std::size_t n_sims = 1000;
  double epsilon = 1.0, wlo = 0.0, whi = 10.0;
  int count = 20;

  auto* sim = app.add_subcommand("simulate", "Simulate a measurement record");
  add_common(sim, true);
  sim->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--kind", kind, "homodyne or counting")->check(CLI::IsMember({"homodyne", "counting"}));
  sim->add_option("--T", c.T, "Horizon")->check(CLI::PositiveNumber);
  sim->add_option("--scheme", scheme, "Counting scheme: bernoulli or waiting-time");

  auto* filt = app.add_subcommand("filter", "Run the quantum filter on a record");
  add_common(filt, false);
  filt->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  filt->add_option("--record", record, "Record JSON")->required()->check(CLI::ExistingFile);
  filt->add_option("--keep-every", keep_every, "Store every k-th state (0 stores none)");

  auto* ll = app.add_subcommand("loglik", "Log-likelihood of records");
  add_common(ll, false);
  ll->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  ll->add_option("--records,--record", records, "Record JSON files")->required()->check(CLI::ExistingFile);

  auto* est = app.add_subcommand("estimate", "Parameter estimation");
  add_common(est, true);
  est->add_option("--family", family, "Family JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--records,--record", records, "Record JSON files")->required()->check(CLI::ExistingFile);
  est->add_option("--method", method, "mle, pm, map or abc")->check(CLI::IsMember({"mle", "pm", "map", "abc"}));
  est->add_option("--grid", grid_points, "Grid points per axis")->check(CLI::PositiveNumber);
  est->add_option("--n-sims", n_sims, "ABC simulations");
  est->add_option("--epsilon", epsilon, "ABC tolerance");
  est->add_option("--csv", c.csv, "CSV export of the posterior grid");

  auto* qfi = app.add_subcommand("qfi", "QFI rate and counting moments");
  qfi->add_option("--out", c.out, "Output JSON path");
  qfi->add_option("--family", family, "Family JSON")->required()->check(CLI::ExistingFile);
  qfi->add_option("--theta", theta, "Parameter value(s)")->required();

  auto* lin = app.add_subcommand("linsys", "Linear quantum system tools");
  lin->add_option("action", action, "check-pr, transfer, spectrum or kalman")
      ->required()
      ->check(CLI::IsMember({"check-pr", "transfer", "spectrum", "kalman"}));
  lin->add_option("--system,--model", model, "Linear system JSON")->required()->check(CLI::ExistingFile);
  lin->add_option("--out", c.out, "Output JSON path");
  lin->add_option("--omega-min", wlo, "Lowest frequency");
  lin->add_option("--omega-max", whi, "Highest frequency");
  lin->add_option("--count", count, "Number of frequencies");
  lin->add_option("--quadrature", quadrature, "Measured quadrature Q or P");
  lin->add_option("--csv", c.csv, "CSV export of the frequency sweep");

  auto* sid = app.add_subcommand("sysid", "Identification pipeline");
  sid->add_option("--config", config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
  sid->add_option("--out", c.out, "Output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  for (auto* sub : {sim, est}) {
    if (sub->parsed() && sub->count("--seed") > 0) c.seed_given = true;
  }

  try {
    if (sim->parsed()) return cmd_simulate(c, model, kind, scheme);
    if (filt->parsed()) return cmd_filter(c, model, record, keep_every);
    if (ll->parsed()) return cmd_loglik(c, model, records);
    if (est->parsed()) return cmd_estimate(c, family, records, method, grid_points, n_sims, epsilon);
    if (qfi->parsed()) return cmd_qfi(c, family, theta);
    if (lin->parsed()) return cmd_linsys(c, action, model, wlo, whi, count, quadrature);
    if (sid->parsed()) return cmd_sysid(c, config);
  } catch (const qio::Error& e) {
    std::cerr << "error";
    if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
    std::cerr << ": " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
