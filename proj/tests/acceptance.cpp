// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "bt/consistency.hpp"
#include "bt/derivation.hpp"
#include "bt/scenario.hpp"
#include "oracles.hpp"

using namespace bt;
using oracle::Rng;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <Scalar T>
TransportLaw<T> random_law(Rng& rng, std::size_t n, const Grid& grid) {
  const auto family = oracle::random_frame_family<T>(rng, n);
  return TransportLaw<T>(sample_analytic<T>([family](double s) { return family(s); }, grid));
}

template <Scalar T>
MetricField<T> analytic_metric(const oracle::MetricFamily<T>& family, const Grid& grid) {
  return MetricField<T>(sample_analytic<T>([family](double s) { return family.metric(s); }, grid,
                                           [family](double s) { return family.metric_rate(s); }));
}

template <Scalar T>
double max_imag_eigen(const MetricField<T>& g) {
  double worst = 0.0;
  for (const auto& m : g.field().values()) worst = std::max(worst, sym_eigen(m).max_imag_diagonal);
  return worst;
}

// Round trip through metrics_from_transport and back, plus signature constancy.
template <Scalar T>
Outcome round_trip(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  const Grid grid = Grid::uniform(0, 2, 20);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_res = 0.0, worst_c = 0.0, worst_herm = 0.0, worst_imag = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = rng.index(2, 6);
    const Signature sig = oracle::random_signature(rng, n);
    const Matrix<T> c = oracle::random_self_adjoint<T>(rng, sig);
    const auto law = random_law<T>(rng, n, grid);
    const auto g = metrics_from_transport(law, c);
    const auto report = consistency_residual(g, law);
    const auto gram = extract_invariant_gram(g, law);
    worst_res = std::max(worst_res, report.max_residual / g.scale());
    worst_c = std::max(worst_c, norm(gram.c0 - c) / norm(c));
    out.require(report.verdict && report.max_residual <= 1e-9 * g.scale(),
                "consistency residual " + fmt(report.max_residual) + " at trial " + std::to_string(trial));
    out.require(norm(gram.c0 - c) <= 1e-9 * norm(c), "C not recovered at trial " + std::to_string(trial));
    for (const auto& s : g.signatures()) out.require(s == sig, "signature changed along the grid");
    if constexpr (is_complex_v<T>) {
      const double herm = norm(gram.c0 - gram.c0.adjoint());
      worst_herm = std::max(worst_herm, herm);
      worst_imag = std::max(worst_imag, max_imag_eigen(g));
      out.require(herm <= 1e-11, "extracted C not Hermitian: " + fmt(herm));
      out.require(worst_imag <= 1e-12, "eigenvalue imaginary part " + fmt(worst_imag));
    }
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed <= 30.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) {
    out.detail = "500 trials, max residual/|G| " + fmt(worst_res) + ", max C error " + fmt(worst_c) + ", " +
                 fmt(elapsed) + " s";
    if constexpr (is_complex_v<T>) {
      out.detail += ", C Hermitian defect " + fmt(worst_herm) + ", eigen imag " + fmt(worst_imag);
    }
  }
  return out;
}

template <Scalar T>
Outcome existence_both_ways(std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  const Grid grid = Grid::uniform(0, 1, 20);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Signature sig = oracle::random_signature(rng, rng.index(1, 6));
    const auto g = analytic_metric(oracle::random_metric_family<T>(rng, sig), grid);
    const Matrix<T> gpq = pseudo_identity<T>(sig);
    const Matrix<T> a = oracle::random_skew<T>(rng, sig.dimension());
    const auto z = sample_analytic<T>([gpq, a](double s) { return oracle::expm(gpq * a * T(s)); }, grid);
    const Matrix<T> y = oracle::random_frame_family<T>(rng, sig.dimension())(0.0);
    const auto law = transport_from_metric(g, y, z);
    const double r = consistency_residual(g, law).max_residual;
    worst = std::max(worst, r);
    out.require(r <= 1e-8, "transport_from_metric residual " + fmt(r));
  }
  const std::vector<Matrix<T>> mixed = {Matrix<T>::identity(2), Matrix<T>{{T(2), T(1)}, {T(1), T(2)}},
                                        pseudo_identity<T>({1, 1})};
  out.require(!existence_check<T>(mixed), "mixed-signature probe reported existence");
  const std::vector<Matrix<T>> same = {Matrix<T>::identity(2), Matrix<T>{{T(2), T(1)}, {T(1), T(2)}}};
  out.require(existence_check<T>(same), "constant-signature probe reported nonexistence");
  if (out.pass) {
    out.detail = "100 constructed laws, max residual " + fmt(worst) + "; mixed probe rejected";
  }
  return out;
}

Outcome criterion_2() {
  Outcome a = existence_both_ways<double>(202);
  // Generated pairs keep their signature; checked over the round-trip trials.
  Outcome b = round_trip<double>(201);
  a.require(b.pass, b.detail);
  return a;
}

Outcome criterion_6() {
  Outcome a = round_trip<Complex>(601);
  Outcome b = existence_both_ways<Complex>(602);
  if (a.pass && b.pass) a.detail += "; " + b.detail;
  a.require(b.pass, b.detail);
  return a;
}

// Component equations in an eigenframe supplied by the caller.
double component_defect(const RMatrix& gamma, const RMatrix& dg, const RMatrix& r, const std::vector<double>& lam) {
  const RMatrix t = r.transpose() * gamma * r;
  const RMatrix k = r.transpose() * dg * r;
  double worst = 0.0;
  for (std::size_t a = 0; a < lam.size(); ++a)
    for (std::size_t b = 0; b < lam.size(); ++b)
      worst = std::max(worst, std::abs(lam[a] * t(a, b) + lam[b] * t(b, a) - k(a, b)));
  return worst;
}

Outcome criterion_3() {
  Outcome out;
  Rng rng(301);
  const Grid grid = Grid::uniform(0, 1, 100);
  double worst_comp = 0.0, worst_compat = 0.0;

  const auto exp_metric = [](double s) { return RMatrix::diagonal(std::vector<double>{std::exp(2 * s), 1.0}); };
  const auto exp_rate = [](double s) { return RMatrix::diagonal(std::vector<double>{2 * std::exp(2 * s), 0.0}); };
  {
    const MetricField<double> g(sample_analytic<double>(exp_metric, grid, exp_rate));
    const auto coeff = coefficients_from_metric(g);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double s = grid[k];
      worst_comp = std::max(worst_comp, component_defect(coeff.gamma()[k], exp_rate(s), RMatrix::identity(2),
                                                         {std::exp(2 * s), 1.0}));
    }
    worst_compat = std::max(worst_compat, compatibility_residual(g, coeff).max_residual);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Signature sig = oracle::random_signature(rng, rng.index(1, 6));
    const auto family = oracle::random_metric_family<double>(rng, sig);
    const auto g = analytic_metric(family, grid);
    FreeParameters free;
    if (rng.coin()) free.q_free = oracle::random_matrix<double>(rng, sig.dimension(), sig.dimension());
    const auto coeff = coefficients_from_metric(g, free);
    for (std::size_t k = 0; k < grid.size(); k += 10) {
      const double s = grid[k];
      worst_comp = std::max(worst_comp, component_defect(coeff.gamma()[k], family.metric_rate(s),
                                                         family.rotation(s), family.eigenvalues(s)));
    }
    worst_compat = std::max(worst_compat, compatibility_residual(g, coeff).max_residual);
  }
  out.require(worst_comp <= 1e-10, "component defect " + fmt(worst_comp));
  out.require(worst_compat <= 1e-8, "compatibility residual " + fmt(worst_compat));

  // Sampled derivatives: residual against the exact rate as h halves twice.
  double min_order = 1e9;
  for (int trial = 0; trial < 10; ++trial) {
    const auto family = oracle::random_metric_family<double>(rng, oracle::random_signature(rng, rng.index(2, 4)));
    std::vector<double> errs;
    for (std::size_t steps : {40u, 80u, 160u}) {
      const Grid h = Grid::uniform(0, 1, steps);
      std::vector<RMatrix> values;
      for (std::size_t k = 0; k < h.size(); ++k) values.push_back(family.metric(h[k]));
      const MetricField<double> g(MatrixField<double>(h, std::move(values)));
      const auto coeff = coefficients_from_metric(g);
      double e = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        const RMatrix& gamma = coeff.gamma()[k];
        e = std::max(e, norm(family.metric_rate(h[k]) - gamma.transpose() * g[k] - g[k] * gamma));
      }
      errs.push_back(e);
    }
    min_order = std::min({min_order, std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2])});
  }
  out.require(min_order >= 1.9, "sampled-derivative order " + fmt(min_order));
  if (out.pass) {
    out.detail = "component defect " + fmt(worst_comp) + ", compatibility " + fmt(worst_compat) +
                 ", sampled order " + fmt(min_order);
  }
  return out;
}

Outcome criterion_4() {
  Outcome out;
  Rng rng(401);
  double min_order = 1e9;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = rng.index(2, 5);
    const RMatrix a = oracle::random_matrix<double>(rng, n, n, -2, 2);
    const CoefficientField coeff(MatrixField<double>(Grid({0.0, 1.0}), {a, a}));
    const RMatrix exact = oracle::expm(a);
    std::vector<double> errs;
    for (std::size_t m : {16u, 32u, 64u}) errs.push_back(norm(propagator(coeff, 1, 0, m) - exact));
    min_order = std::min({min_order, std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2])});
  }
  out.require(min_order >= 3.8, "RK4 order " + fmt(min_order));

  double worst = 0.0;
  const Grid grid({0.0, 0.4, 1.0});
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = rng.index(1, 6);
    const RMatrix a = oracle::random_matrix<double>(rng, n, n);
    const RMatrix b = oracle::random_matrix<double>(rng, n, n);
    const CoefficientField coeff(
        sample_analytic<double>([a, b](double s) { return RMatrix(a + b * std::sin(3 * s)); }, grid));
    const RMatrix y20 = propagator(coeff, 2, 0, 1000);
    worst = std::max(worst, norm(propagator(coeff, 2, 1, 1000) * propagator(coeff, 1, 0, 1000) - y20));
    worst = std::max(worst, norm(propagator(coeff, 0, 2, 1000) * y20 - RMatrix::identity(n)));
  }
  out.require(worst <= 1e-9, "group-law defect " + fmt(worst));
  if (out.pass) out.detail = "order " + fmt(min_order) + ", group-law defect " + fmt(worst);
  return out;
}

Outcome criterion_5() {
  using namespace bt::cli;
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_scenario(parse_scenario(sphere_config(std::numbers::pi / 3, 10000)));
  const double elapsed = seconds_since(t0);
  double angle = -1.0, drift = -1.0;
  for (const auto& c : report.checks) {
    out.require(!c.error, "sphere check raised " + (c.error ? c.error->message : std::string()));
    if (c.check == CheckKind::holonomy) angle = c.outputs["angle"].get<double>();
    if (c.check == CheckKind::norm_drift) drift = c.max_residual.value_or(1.0);
  }
  out.require(std::abs(angle - std::numbers::pi) <= 1e-6, "angle " + fmt(angle));
  out.require(drift >= 0.0 && drift <= 1e-9, "norm drift " + fmt(drift));
  out.require(elapsed <= 5.0, "runtime " + fmt(elapsed) + " s");

  const auto equator = run_scenario(parse_scenario(sphere_config(std::numbers::pi / 2, 10000)));
  double eq_angle = -1.0;
  for (const auto& c : equator.checks)
    if (c.check == CheckKind::holonomy) eq_angle = oracle::angle_distance(c.outputs["angle"].get<double>(), 0.0);
  out.require(eq_angle >= 0.0 && eq_angle <= 1e-8, "equator angle " + fmt(eq_angle));
  if (out.pass) {
    out.detail = "|angle - pi| " + fmt(std::abs(angle - std::numbers::pi)) + ", drift " + fmt(drift) +
                 ", equator " + fmt(eq_angle) + ", " + fmt(elapsed) + " s";
  }
  return out;
}

Outcome criterion_7() {
  Outcome out;
  Rng rng(701);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.index(2, 6);
    std::vector<double> lam(n);
    for (auto& x : lam) x = std::pow(10.0, rng.uniform(-2, 2));
    const RMatrix g = oracle::with_spectrum(oracle::random_unitary<double>(rng, n), lam);
    const RMatrix gs = (g + g.transpose()) * 0.5;
    const RMatrix b = oracle::random_matrix<double>(rng, n, n);
    const RMatrix k = b + b.transpose();
    const double d = norm(lyapunov_spectral(gs, k) - lyapunov_integral(gs, k));
    worst = std::max(worst, d);
  }
  out.require(worst <= 1e-6, "spectral vs integral " + fmt(worst));

  // Exact resonance (g, -g) with a controlled coupling entry.
  int raised_below = 0, missed_above = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = rng.index(2, 5);
    std::vector<double> lam(n);
    lam[0] = rng.uniform(0.5, 3);
    lam[1] = -lam[0];
    for (std::size_t i = 2; i < n; ++i) lam[i] = 4.0 + static_cast<double>(i);
    const RMatrix u = oracle::random_unitary<double>(rng, n);
    const RMatrix g = oracle::with_spectrum(u, lam);
    const RMatrix gs = (g + g.transpose()) * 0.5;
    RMatrix kt(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (!(i == 0 && j == 1)) kt(i, j) = kt(j, i) = rng.uniform(-1, 1);
    const double base = norm(kt);
    for (double factor : {0.0, 0.5, 2.0}) {
      RMatrix kf = kt;
      kf(0, 1) = kf(1, 0) = factor * kDefaultTol * base;
      const RMatrix k = u * kf * u.transpose();
      bool raised = false;
      try {
        lyapunov_spectral(gs, k);
      } catch (const Error& e) {
        raised = e.kind() == ErrorKind::NoSymmetricSolution;
      }
      if (factor < 1.0 && raised) ++raised_below;
      if (factor > 1.0 && !raised) ++missed_above;
    }
  }
  out.require(raised_below == 0, std::to_string(raised_below) + " spurious NoSymmetricSolution");
  out.require(missed_above == 0, std::to_string(missed_above) + " missed NoSymmetricSolution");
  if (out.pass) out.detail = "max disagreement " + fmt(worst) + ", 60 fault injections classified";
  return out;
}

template <Scalar T>
void gauge_trials(Rng& rng, Outcome& out, double& worst_h, double& worst_c) {
  const Grid grid = Grid::uniform(0, 1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.index(1, 6);
    const auto law = random_law<T>(rng, n, grid);
    const Matrix<T> dg = oracle::random_frame_family<T>(rng, n)(rng.uniform(0, 6));
    const auto moved = gauge_transform(law, dg);
    for (std::size_t t = 0; t < grid.size(); ++t)
      for (std::size_t s = 0; s < grid.size(); ++s)
        worst_h = std::max(worst_h, norm(transport_matrix(moved, t, s) - transport_matrix(law, t, s)));

    const Matrix<T> c = oracle::random_self_adjoint<T>(rng, oracle::random_signature(rng, n));
    const auto good = metrics_from_transport(law, c);
    std::vector<Matrix<T>> values = good.field().values();
    const Matrix<T> b = oracle::random_matrix<T>(rng, n, n);
    values[3] += (b + b.adjoint()) * T(1e-3);
    const MetricField<T> bad(MatrixField<T>(grid, values));
    for (const auto* g : {&good, &bad}) {
      out.require(consistency_residual(*g, law).verdict == consistency_residual(*g, moved).verdict,
                  "verdict changed under a gauge transform");
      out.require(extract_invariant_gram(*g, law).constant() == extract_invariant_gram(*g, moved).constant(),
                  "invariant-Gram verdict changed under a gauge transform");
    }
    const Matrix<T> dinv = guarded_inverse(dg);
    const Matrix<T> expected = dinv.adjoint() * c * dinv;
    worst_c = std::max(worst_c, norm(extract_invariant_gram(good, moved).c0 - expected) / norm(expected));
  }
}

Outcome criterion_8() {
  Outcome out;
  Rng rng(801);
  double worst_h = 0.0, worst_c = 0.0;
  gauge_trials<double>(rng, out, worst_h, worst_c);
  gauge_trials<Complex>(rng, out, worst_h, worst_c);
  out.require(worst_h <= 1e-12, "transport changed by " + fmt(worst_h));
  out.require(worst_c <= 1e-11, "C covariance defect " + fmt(worst_c));
  if (out.pass) out.detail = "transport change " + fmt(worst_h) + ", C defect " + fmt(worst_c);
  return out;
}

Outcome criterion_9() {
  Outcome out;
  Rng rng(901);
  std::vector<CMatrix> hs;
  for (int trial = 0; trial < 200; ++trial) {
    const CMatrix h = oracle::random_self_adjoint<Complex>(rng, oracle::random_signature(rng, rng.index(1, 6)));
    const auto f = split_hermitian(h);
    out.require(j_compatibility_check(f.g, f.omega), "j-compatibility failed at trial " + std::to_string(trial));
    hs.push_back(h);
  }
  double worst = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    const CMatrix& h = hs[rng.index(0, hs.size() - 1)];
    const auto f = split_hermitian(h);
    const std::size_t n = h.rows();
    std::vector<Complex> u(n), v(n);
    std::vector<double> x(2 * n), y(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.scalar<Complex>();
      v[i] = rng.scalar<Complex>();
      x[i] = u[i].real();
      x[n + i] = u[i].imag();
      y[i] = v[i].real();
      y[n + i] = v[i].imag();
    }
    Complex direct = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) direct += u[i] * h(i, j) * std::conj(v[j]);
    double gxy = 0.0, wxy = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i)
      for (std::size_t j = 0; j < 2 * n; ++j) {
        gxy += x[i] * f.g(i, j) * y[j];
        wxy += x[i] * f.omega(i, j) * y[j];
      }
    worst = std::max({worst, std::abs(direct.real() - gxy), std::abs(direct.imag() - wxy)});
  }
  out.require(worst <= 1e-10, "realified identity defect " + fmt(worst));
  if (out.pass) out.detail = "200 matrices compatible, 1000 pairs, max defect " + fmt(worst);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 real round trip", [] { return round_trip<double>(101); }},
      {"2 existence both directions", criterion_2},
      {"3 generator from metric", criterion_3},
      {"4 propagator convergence", criterion_4},
      {"5 sphere holonomy", criterion_5},
      {"6 Hermitian mirror", criterion_6},
      {"7 Lyapunov solvers", criterion_7},
      {"8 gauge invariance", criterion_8},
      {"9 realified Hermitian forms", criterion_9},
  };
  bool all = true;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
