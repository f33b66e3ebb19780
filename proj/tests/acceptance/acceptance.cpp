// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qio/error.hpp"
#include "qio/estimation.hpp"
#include "qio/filter.hpp"
#include "qio/markov_qfi.hpp"
#include "qio/random.hpp"
#include "qio/sysid.hpp"
#include "qio/trajectory.hpp"

namespace {

using namespace qio;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  for (double v : x) r.mean += v;
  r.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return r;
}

QMarkovModel random_model(Index d, RandomStream& rng) {
  for (;;) {
    QMarkovModel m(random_hermitian(d, rng), random_complex(d, rng, 0.7));
    if (spectral_info(m).is_ergodic) return m;
  }
}

// 1. Filter states stay normalised and positive.
Outcome filter_soundness() {
  const QMarkovModel m = testing::driven_qubit();
  const DensityOperator rho0 = DensityOperator::maximally_mixed(2);
  double worst_trace = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  std::size_t states = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    SimulationOptions opts;
    opts.stream = s;
    const FilterTrajectory f = simulate_homodyne(m, rho0, 10.0, 1e-3, 101, opts).second;
    for (const CMatrix& rho : f.states) {
      worst_trace = std::max(worst_trace, std::abs(rho.trace() - 1.0));
      worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<CMatrix>(rho, Eigen::EigenvaluesOnly)
                                          .eigenvalues()
                                          .minCoeff());
    }
    states += f.states.size();
  }
  return {worst_trace <= 1e-8 && worst_eig >= -1e-10,
          fmt("%zu states, max |Tr-1| = %.2e (tol 1e-8), min eig = %.2e (tol -1e-10)", states, worst_trace,
              worst_eig)};
}

// 2. E_ref[exp(loglik)] = 1 under the reference measure.
Outcome likelihood_martingale() {
  const QMarkovModel m = testing::driven_qubit();
  const DensityOperator rho0 = DensityOperator::maximally_mixed(2);
  const std::size_t n = 10000;
  bool ok = true;
  std::string detail;
  auto check = [&](const char* label, ReferenceKind kind, double lambda, double T, double dt) {
    std::vector<double> lik(n);
    FilterOptions opts;
    opts.lambda = lambda;
    opts.dt = dt;
    opts.keep_every = 0;
    for (std::size_t i = 0; i < n; ++i)
      lik[i] = std::exp(log_likelihood(m, rho0, simulate_reference(kind, lambda, T, dt, 202, i), opts));
    const MeanSe r = mean_se(lik);
    const double z = std::abs(r.mean - 1.0) / r.se;
    ok = ok && z <= 3.0;
    detail += fmt("%s mean=%.4f se=%.4f |z|=%.2f; ", label, r.mean, r.se, z);
  };
  check("diffusive", ReferenceKind::wiener, 1.0, 2.0, 1e-3);
  check("counting l=1", ReferenceKind::poisson, 1.0, 5.0, 1e-3);
  check("counting l=2", ReferenceKind::poisson, 2.0, 5.0, 1e-3);
  return {ok, detail + "(tol |z| <= 3)"};
}

// 3. Sum over all 2^8 jump patterns of likelihood times reference probability.
Outcome exhaustive_sum() {
  const QMarkovModel m = testing::driven_qubit();
  const DensityOperator rho0 = DensityOperator::maximally_mixed(2);
  const int n = 8;
  const double dt = 1e-3;
  FilterOptions opts;
  opts.dt = dt;
  const double p = 1.0 - std::exp(-opts.lambda * dt);
  double total = 0.0;
  for (int pattern = 0; pattern < (1 << n); ++pattern) {
    CountingRecord rec{n * dt, {}};
    for (int k = 0; k < n; ++k)
      if (pattern & (1 << k)) rec.jumps.push_back((k + 1) * dt);
    const double j = static_cast<double>(rec.count());
    total += std::exp(log_likelihood(m, rho0, rec, opts)) * std::pow(p, j) * std::pow(1.0 - p, n - j);
  }
  const double err = std::abs(total - 1.0);
  return {err <= 5.0 * dt, fmt("sum = %.10f, |sum-1| = %.2e (tol %.1e)", total, err, 5.0 * dt)};
}

// 4. Phase-family QFI rate equals four times the counting variance.
Outcome qfi_cross_check() {
  RandomStream rng(404);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const QMarkovModel m = random_model(i % 2 == 0 ? 2 : 3, rng);
    const ParameterFamily fam = ParameterFamily::phase(m, Box::interval(-1.0, 1.0));
    const double f = qfi_rate(fam, Vector::Zero(1))(0, 0);
    worst = std::max(worst, std::abs(f - 4.0 * counting_rate_and_variance(m).V));
  }
  return {worst <= 1e-8, fmt("max |F - 4V| = %.2e over 10 models (tol 1e-8)", worst)};
}

// 5. QFI rate vanishes along gauge orbits.
Outcome gauge_nullity() {
  RandomStream rng(505);
  double worst_hs = 0.0, worst_uc = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Index d = i % 2 == 0 ? 2 : 3;
    const QMarkovModel m = random_model(d, rng);
    const std::vector<CMatrix> hs_h{CMatrix::Identity(d, d)}, hs_l{CMatrix::Zero(d, d)};
    worst_hs = std::max(worst_hs, std::abs(qfi_rate(m, hs_h, hs_l)(0, 0)));
    const CMatrix x = random_hermitian(d, rng);
    const std::vector<CMatrix> uc_h{kI * (m.H() * x - x * m.H())}, uc_l{kI * (m.L() * x - x * m.L())};
    worst_uc = std::max(worst_uc, std::abs(qfi_rate(m, uc_h, uc_l)(0, 0)));
  }
  return {worst_hs <= 1e-8 && worst_uc <= 1e-8,
          fmt("max HS rate = %.2e, max UC rate = %.2e over 20 directions (tol 1e-8)", worst_hs, worst_uc)};
}

// 6. Counting CLT variance against trajectory statistics.
Outcome clt_validation() {
  const QMarkovModel m = testing::driven_qubit();
  const DensityOperator rho0 = stationary_state(m);
  const double T = 200.0;
  const std::size_t n = 10000;
  std::vector<double> counts(n);
  SimulationOptions opts;
  opts.keep_every = 0;
  opts.counting_scheme = CountingScheme::waiting_time;
  for (std::size_t i = 0; i < n; ++i) {
    opts.stream = i;
    counts[i] = static_cast<double>(simulate_counting(m, rho0, T, 1e-3, 606, opts).first.count());
  }
  const MeanSe r = mean_se(counts);
  const double var = r.se * r.se * static_cast<double>(n);
  const double v = counting_rate_and_variance(m).V;
  const double rel = std::abs(var / T - v) / v;
  return {rel <= 0.10, fmt("Var/T = %.5f, V = %.5f, rel err = %.3f (tol 0.10)", var / T, v, rel)};
}

// 7. MLE of the Rabi frequency within three CRB widths.
Outcome mle_consistency() {
  const double kappa = 1.0, omega = 1.0, T = 2000.0;
  const ParameterFamily fam = testing::rabi_family(kappa, 0.2, 3.0);
  const QMarkovModel truth = testing::driven_qubit(omega, kappa);
  const DensityOperator rho0 = DensityOperator::maximally_mixed(2);
  const double ic = counting_fisher(fam, omega);
  const double tol = 3.0 / std::sqrt(T * ic);
  int hits = 0;
  double worst = 0.0;
  SimulationOptions sim;
  sim.keep_every = 0;
  sim.counting_scheme = CountingScheme::waiting_time;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    sim.stream = rep;
    const std::vector<MeasurementRecord> recs{simulate_counting(truth, rho0, T, 1e-3, 707, sim).first};
    const double err = std::abs(mle(fam, recs, rho0).argmax(0) - omega);
    worst = std::max(worst, err);
    if (err <= tol) ++hits;
  }
  return {hits >= 95, fmt("%d/100 within %.4f (I_c = %.4f), worst error %.4f (need >= 95)", hits, tol, ic, worst)};
}

// 8. Realizability of constructed linear systems.
Outcome linear_realizability() {
  RandomStream rng(808);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) worst = std::max(worst, check_pr1(build_linear_system(random_quadratic_spec(1 + i % 3, rng))));
  const double cav = check_pr1(testing::cavity(1.0, 2.0));
  return {worst <= 1e-10 && cav <= 1e-15,
          fmt("max random residual = %.2e (tol 1e-10), cavity residual = %.2e (tol 1e-15)", worst, cav)};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return w;
}

// 9. Transfer function and power spectrum invariant under symplectic transforms.
Outcome symplectic_invariance() {
  RandomStream rng(909);
  const LinearQSystem g = random_realizable_system(2, rng);
  GaussianInput input;
  input.Gamma << 2.0, 0.4, 0.4, 0.8;
  const std::vector<double> omegas = log_grid(0.05, 20.0, 20);
  double worst_xi = 0.0, worst_phi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const LinearQSystem t = symplectic_transform(g, random_symplectic(2, rng));
    for (double w : omegas) {
      worst_xi = std::max(worst_xi, testing::max_abs_diff(transfer_function(t, cplx(0, w)), transfer_function(g, cplx(0, w))));
      worst_phi = std::max(worst_phi, testing::max_abs_diff(power_spectrum(t, input, w), power_spectrum(g, input, w)));
    }
  }
  return {worst_xi <= 1e-8 && worst_phi <= 1e-8,
          fmt("max transfer diff = %.2e, max spectrum diff = %.2e (tol 1e-8)", worst_xi, worst_phi)};
}

// 10. Steady-state Kalman filter.
Outcome kalman_correctness() {
  RandomStream rng(1010);
  double worst_res = 0.0, worst_eig = std::numeric_limits<double>::infinity(), worst_white = 0.0;
  bool stable = true, white = true;
  for (int i = 0; i < 20; ++i) {
    const LinearQSystem g = random_realizable_system(1 + i % 3, rng);
    const Quadrature q = i % 2 == 0 ? Quadrature::Q : Quadrature::P;
    const KalmanResult k = kalman_gain(g, q);
    worst_res = std::max(worst_res, k.riccati_residual);
    worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix>(k.Q_m).eigenvalues().minCoeff());
    stable = stable && is_hurwitz(k.closed_loop);
    const double dt = 0.05 / std::max(1.0, spectral_radius(g.A));
    const Index n = 20000;
    const Matrix f = prbs_inputs(n, 1.0, 1010 + i);
    InnovationOptions opts;
    opts.stream = static_cast<std::uint64_t>(i);
    const auto sim = simulate_innovation_form(g, k.L_m, q, f, dt, 1010, opts);
    const Vector e = kalman_innovations(g, k.L_m, q, f, sim.Y);
    const double z = std::abs(lag1_autocorrelation(e)) * std::sqrt(static_cast<double>(n));
    worst_white = std::max(worst_white, z);
    white = white && z <= 3.0;
  }
  return {worst_res <= 1e-8 && worst_eig >= -1e-9 && stable && white,
          fmt("max Riccati residual = %.2e (tol 1e-8), min eig Q_m = %.2e, closed loops Hurwitz = %s, "
              "max lag-1 |z| = %.2f (tol 3)",
              worst_res, worst_eig, stable ? "yes" : "no", worst_white)};
}

double worst_relative_error(const LinearQSystem& est, const LinearQSystem& truth, const std::vector<double>& omegas) {
  double worst = 0.0;
  for (double w : omegas) {
    const CMatrix a = transfer_function(est, cplx(0, w));
    const CMatrix b = transfer_function(truth, cplx(0, w));
    worst = std::max(worst, (a - b).norm() / b.norm());
  }
  return worst;
}

// 11. Identification round trip on the cavity benchmark.
Outcome identification_round_trip() {
  const LinearQSystem truth = testing::cavity();
  const std::vector<double> omegas = log_grid(0.1, 10.0, 20);
  auto config = [&](std::uint64_t seed, double amplitude) {
    PipelineConfig cfg;
    cfg.system = truth;
    cfg.seed = seed;
    cfg.prbs_amplitude = amplitude;
    return cfg;
  };

  // (a) and (b) at the default, moderate-noise amplitude; (c) at high SNR,
  // one decade above it.
  int order_hits = 0, failures = 0;
  double worst_pr2 = 0.0;
  std::vector<double> rel_err_moderate;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    try {
      const SysIdResult r = run_pipeline(config(1100 + seed, 10.0));
      if (r.order == 1) ++order_hits;
      const Pr2Result pr2 = check_pr2(r.projection.system);
      worst_pr2 = std::max(worst_pr2, pr2.status == Pr2Status::ok ? pr2.residual : std::numeric_limits<double>::infinity());
      if (seed < 20) rel_err_moderate.push_back(worst_relative_error(r.projection.system, truth, omegas));
    } catch (const Error&) {
      ++failures;
      worst_pr2 = std::numeric_limits<double>::infinity();
      if (seed < 20) rel_err_moderate.push_back(std::numeric_limits<double>::infinity());
    }
  }
  std::vector<double> rel_err;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    try {
      rel_err.push_back(worst_relative_error(run_pipeline(config(1300 + seed, 100.0)).projection.system, truth, omegas));
    } catch (const Error&) {
      ++failures;
      rel_err.push_back(std::numeric_limits<double>::infinity());
    }
  }
  const double med_err = median(rel_err);

  std::vector<double> nmse_low, nmse_high;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto [amp, out] : {std::pair{1.0, &nmse_low}, std::pair{10.0, &nmse_high}}) {
      try {
        out->push_back(run_pipeline(config(1200 + seed, amp)).nmse);
      } catch (const Error&) {
        out->push_back(std::numeric_limits<double>::infinity());
      }
    }
  }
  const double med_low = median(nmse_low), med_high = median(nmse_high);

  const bool a = order_hits >= 45, b = worst_pr2 <= 1e-6, c = med_err <= 0.05, d = med_high < med_low;
  return {a && b && c && d,
          fmt("(a) order 1 in %d/50 (need >= 45) %s; (b) max pr-2 residual %.2e (tol 1e-6) %s; "
              "(c) median worst relative transfer error at amplitude 100: %.4f (tol 0.05) %s "
              "[amplitude 10: %.4f]; "
              "(d) median NMSE amplitude 1: %.4f, amplitude 10: %.4f %s; pipeline failures %d",
              order_hits, a ? "ok" : "FAIL", worst_pr2, b ? "ok" : "FAIL", med_err, c ? "ok" : "FAIL", median(rel_err_moderate), med_low,
              med_high, d ? "ok" : "FAIL", failures)};
}

// 12. Erase-and-recover of the unmeasured output row.
Outcome erase_and_recover() {
  RandomStream rng(1212);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Index n = 1 + i % 3;
    const Matrix v = random_symplectic(n, rng);
    const LinearQSystem g = symplectic_transform(build_linear_system(random_quadratic_spec(n, rng)), v);
    const Matrix z = v * symplectic_form(n) * v.transpose();
    const Quadrature q = i % 2 == 0 ? Quadrature::Q : Quadrature::P;
    const Matrix c = recover_full_C(z, g.B, g.D, q, g.C.row(quadrature_row(q)));
    worst = std::max(worst, testing::max_abs_diff(c, g.C));
  }
  return {worst <= 1e-8, fmt("max |C_recovered - C| = %.2e over 20 systems (tol 1e-8)", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"filter soundness", filter_soundness},
      {"likelihood martingale", likelihood_martingale},
      {"exhaustive likelihood sum", exhaustive_sum},
      {"QFI cross-check", qfi_cross_check},
      {"gauge-orbit nullity", gauge_nullity},
      {"CLT validation", clt_validation},
      {"MLE consistency", mle_consistency},
      {"linear realizability", linear_realizability},
      {"symplectic invariance", symplectic_invariance},
      {"Kalman correctness", kalman_correctness},
      {"identification round trip", identification_round_trip},
      {"erase-and-recover", erase_and_recover},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
