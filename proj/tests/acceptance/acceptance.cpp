// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "calabi/cli.hpp"
#include "calabi/curvature.hpp"
#include "calabi/geometry.hpp"
#include "calabi/profile_io.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/random.hpp"
#include "calabi/symplectic_map.hpp"
#include "calabi/text_format.hpp"

using namespace calabi;
namespace fs = std::filesystem;

namespace {

struct Config {
  int n;
  double y0;
};

std::vector<Config> grid() {
  std::vector<Config> out;
  for (int n : {2, 3, 4})
    for (double y0 : {-1.0, 0.0, 1.0}) out.push_back({n, y0});
  return out;
}

PotentialParams params_for(int n, double y0) {
  PotentialParams p;
  p.n = n;
  p.y0 = y0;
  return p;
}

const RadialProfile& profile_for(int n, double y0) {
  static std::map<std::pair<int, double>, RadialProfile> cache;
  auto it = cache.find({n, y0});
  if (it == cache.end()) it = cache.emplace(std::pair{n, y0}, solve_radial(params_for(n, y0))).first;
  return it->second;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

// ---- 1 -------------------------------------------------------------------

Outcome ode_fidelity() {
  double worst_residual = 0.0, worst_identity = 0.0;
  for (const auto& c : grid()) {
    const RadialProfile& p = profile_for(c.n, c.y0);
    Sampler rng(1000 + 10 * c.n + static_cast<int>(c.y0 + 1));
    const auto& nodes = p.grid();
    for (int i = 0; i < 100; ++i) {
      const std::size_t k = std::min(nodes.size() - 2,
                                     static_cast<std::size_t>(rng.uniform() * (nodes.size() - 1)));
      const double r = nodes[k] + rng.uniform(0.05, 0.95) * (nodes[k + 1] - nodes[k]);
      worst_residual = std::max(worst_residual, ode_residual(p, r));
    }
    const RadialState s0 = eval(p, 0.0);
    const double lhs = std::pow(s0.Ypp, c.n);
    worst_identity = std::max(worst_identity, std::abs(lhs - std::exp(s0.Y)) / std::exp(s0.Y));
  }
  return {worst_residual <= 1e-6 && worst_identity <= 1e-12,
          "max residual " + sci(worst_residual) + " (<= 1e-6), initial identity " +
              sci(worst_identity) + " (<= 1e-12)"};
}

// ---- 2 -------------------------------------------------------------------

Outcome scaling_law() {
  const auto start = std::chrono::steady_clock::now();
  double worst_match = 0.0, worst_invariant = 0.0;
  for (int n : {2, 3, 4}) {
    const RadialProfile& base = profile_for(n, 0.0);
    for (double lambda : {0.5, 2.0}) {
      const RadialProfile scaled = rescale(base, lambda);
      const RadialProfile direct = solve_radial(params_for(n, 2.0 * n * std::log(lambda)));
      const double top = 0.9 * std::min(scaled.r_max(), direct.r_max());
      for (int i = 0; i < 50; ++i) {
        const double r = top * (i + 0.5) / 50.0;
        const double a = eval(scaled, r).Y, b = eval(direct, r).Y;
        worst_match = std::max(worst_match, std::abs(a - b) / std::max(std::abs(b), 1.0));
      }
    }
    const double ref = profile_for(n, 0.0).a_est();
    for (double y0 : {-1.0, 1.0}) {
      const double v = profile_for(n, y0).a_est() * std::exp(y0 / (2.0 * n));
      worst_invariant = std::max(worst_invariant, std::abs(v - ref) / ref);
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_match <= 1e-7 && worst_invariant <= 1e-5 && seconds < 30.0,
          "rescale vs solve " + sci(worst_match) + " (<= 1e-7), a*e^(y0/2n) spread " +
              sci(worst_invariant) + " (<= 1e-5), " + sci(seconds) + " s"};
}

// ---- 3 -------------------------------------------------------------------

Outcome symplectic_certificate() {
  double worst_analytic = 0.0, worst_fd = 0.0;
  double ratio_lo = INFINITY, ratio_hi = -INFINITY;
  for (const auto& c : grid()) {
    const RadialProfile& p = profile_for(c.n, c.y0);
    Sampler rng(3000 + 10 * c.n + static_cast<int>(c.y0 + 1));
    const double coarse_h = 1e-2 * p.r_max();
    double coarse = 0.0, fine = 0.0;
    for (int i = 0; i < 200; ++i) {
      const TubePoint q{rng.in_ball(c.n, 0.9 * p.r_max()), rng.normal_vector(c.n)};
      worst_analytic = std::max(worst_analytic, pullback_residual_analytic(p, q));
      const TubePoint qf{rng.in_ball(c.n, 0.6 * p.r_max()), rng.normal_vector(c.n)};
      worst_fd = std::max(worst_fd, pullback_residual_fd(p, qf, 1e-4));
      coarse += pullback_residual_fd(p, qf, coarse_h);
      fine += pullback_residual_fd(p, qf, 0.5 * coarse_h);
    }
    ratio_lo = std::min(ratio_lo, coarse / fine);
    ratio_hi = std::max(ratio_hi, coarse / fine);
  }
  return {worst_analytic <= 1e-12 && worst_fd <= 1e-6 && ratio_lo >= 3.5 && ratio_hi <= 4.5,
          "analytic " + sci(worst_analytic) + " (<= 1e-12), fd(h=1e-4) " + sci(worst_fd) +
              " (<= 1e-6), halving ratio in [" + sci(ratio_lo) + ", " + sci(ratio_hi) + "]"};
}

// ---- 4 -------------------------------------------------------------------

Outcome bijectivity() {
  double worst = 0.0;
  std::size_t collisions = 0;
  for (const auto& c : grid()) {
    const RadialProfile& p = profile_for(c.n, c.y0);
    Sampler rng(4000 + 10 * c.n + static_cast<int>(c.y0 + 1));
    for (int i = 0; i < 100; ++i) {
      const TubePoint q{rng.in_ball(c.n, 0.9 * p.r_max()), rng.normal_vector(c.n)};
      const TubePoint back = phi_inverse(p, phi(p, q));
      double dev = (back.x - q.x).norm() / q.x.norm();
      if (back.y != q.y) dev = INFINITY;
      worst = std::max(worst, dev);
    }
    for (int i = 0; i < 100; ++i) {
      const TubePoint a{rng.in_ball(c.n, 0.9 * p.r_max()), rng.normal_vector(c.n)};
      const TubePoint b{rng.in_ball(c.n, 0.9 * p.r_max()), a.y};
      if (phi(p, a).p == phi(p, b).p) ++collisions;
    }
  }
  return {worst <= 1e-10 && collisions == 0,
          "round trip " + sci(worst) + " (<= 1e-10), " + std::to_string(collisions) +
              " collisions in 900 pairs"};
}

// ---- 5 -------------------------------------------------------------------

Outcome monge_ampere_einstein() {
  double worst_ma = 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : grid()) {
    const RadialProfile& p = profile_for(c.n, c.y0);
    Sampler rng(5000 + 10 * c.n + static_cast<int>(c.y0 + 1));
    for (int i = 0; i < 50; ++i)
      worst_ma = std::max(worst_ma, monge_ampere_residual(p, SpatialPoint{rng.in_ball(c.n, 0.9 * p.r_max())}));
    const double h = 1e-2 * p.r_max();
    for (int i = 0; i < 10; ++i) {
      const SpatialPoint pt{rng.in_ball(c.n, 0.6 * p.r_max())};
      const double ratio = einstein_residual(p, pt, h) / einstein_residual(p, pt, 0.5 * h);
      if (!std::isfinite(ratio)) {
        lo = -INFINITY;
        continue;
      }
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {worst_ma <= 1e-6 && lo >= 3.5 && hi <= 4.5,
          "|log det H - f| " + sci(worst_ma) + " (<= 1e-6), einstein halving ratio in [" +
              sci(lo) + ", " + sci(hi) + "]"};
}

// ---- 6 -------------------------------------------------------------------

Outcome positivity_properness() {
  double min_eig = INFINITY;
  for (const auto& c : grid()) {
    const RadialProfile& p = profile_for(c.n, c.y0);
    Sampler rng(6000 + 10 * c.n + static_cast<int>(c.y0 + 1));
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd x = rng.in_ball(c.n, 0.95 * p.r_max());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess_potential(p, SpatialPoint{x}),
                                                         Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
  }
  bool increasing = true;
  double worst_log2 = 0.0;
  std::ostringstream finals;
  const double base = PotentialParams{}.blowup_threshold;
  for (double threshold : {base, 100.0 * base}) {
    PotentialParams params = params_for(2, 0.0);
    params.blowup_threshold = threshold;
    const auto rows = properness_table(solve_radial(params), {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6,
                                                              0.7, 0.8, 0.9, 0.99, 0.999, 1.0});
    for (std::size_t i = 1; i < rows.size(); ++i)
      increasing = increasing && rows[i].grad_norm > rows[i - 1].grad_norm;
    worst_log2 = std::max(worst_log2, std::abs(std::log2(rows.back().grad_norm / threshold)));
    finals << ' ' << sci(rows.back().grad_norm) << "/" << sci(threshold);
  }
  return {min_eig > 0.0 && increasing && worst_log2 <= 1.0,
          "min eig " + sci(min_eig) + " (> 0), increasing " + (increasing ? "yes" : "no") +
              ", final |grad f| / threshold:" + finals.str()};
}

// ---- 7 -------------------------------------------------------------------

Outcome curvature_controls() {
  double worst_flat = 0.0;
  for (int n : {2, 3, 4}) {
    const SyntheticPotential flat = quadratic_potential(n, 0.5);
    Sampler rng(7000 + n);
    for (int i = 0; i < 100; ++i) {
      const SpatialPoint pt{rng.in_ball(n, 0.8 * flat.r_max())};
      const double K = sectional_curvature(flat, pt, rng.normal_vector(2 * n),
                                           rng.normal_vector(2 * n), 1e-3 * flat.r_max());
      worst_flat = std::max(worst_flat, std::abs(K));
    }
  }
  bool deterministic = true, finite = true;
  std::size_t total = 0;
  for (int n : {2, 3}) {
    const RadialProfile& p = profile_for(n, 0.0);
    std::vector<double> radii;
    for (int k = 0; k <= 8; ++k) radii.push_back(0.1 * k * p.r_max());
    const double h = 1e-3 * p.r_max();
    const CurvatureScan a = curvature_scan(p, radii, 50, 7, h);
    const CurvatureScan b = curvature_scan(p, radii, 50, 7, h);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      finite = finite && a.samples[i].status == "ok" && std::isfinite(a.samples[i].K);
      deterministic = deterministic && format_double(a.samples[i].K) == format_double(b.samples[i].K);
    }
    total += a.samples.size();
  }
  return {worst_flat <= 1e-4 && deterministic && finite,
          "flat max |K| " + sci(worst_flat) + " (<= 1e-4), " + std::to_string(total) +
              " scan samples, finite " + (finite ? "yes" : "no") + ", repeatable " +
              (deterministic ? "yes" : "no")};
}

// ---- 8 -------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "calabi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome cli_contract() {
  const fs::path dir = fs::temp_directory_path() / "calabi_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&](const char* name) { return (dir / name).string(); };
  std::vector<std::string> problems;

  for (const char* name : {"a.json", "b.json"})
    if (cli({"solve", "--out", at(name)}) != 0) problems.push_back("solve failed");
  if (read_text_file(at("a.json")) != read_text_file(at("b.json")))
    problems.push_back("solve output differs");

  for (const char* name : {"c1.json", "c2.json"})
    cli({"curvature", "--profile", at("a.json"), "--planes", "10", "--out", at(name), "--svg",
         at((std::string(name) + ".svg").c_str())});
  {
    auto c1 = nlohmann::json::parse(read_text_file(at("c1.json")));
    auto c2 = nlohmann::json::parse(read_text_file(at("c2.json")));
    if (c1["samples"] != c2["samples"] ||
        read_text_file(at("c1.json.svg")) != read_text_file(at("c2.json.svg")))
      problems.push_back("curvature output differs");
  }

  const int ok_code = cli({"verify", "--profile", at("a.json"), "--out", at("ok_report.json")});
  if (ok_code != 0) problems.push_back("verify exit " + std::to_string(ok_code));

  auto doc = nlohmann::json::parse(read_text_file(at("a.json")));
  const std::size_t k = doc["Y"].size() / 2;
  doc["Y"][k] = doc["Y"][k].get<double>() + 1e-5;
  std::ofstream(at("tampered.json")) << doc.dump();
  const int bad_code = cli({"verify", "--profile", at("tampered.json"), "--out", at("bad_report.json")});
  if (bad_code != 2) problems.push_back("tampered verify exit " + std::to_string(bad_code));

  fs::remove_all(dir);
  std::string detail = "solve/curvature repeatable, verify 0, tampered verify 2";
  if (!problems.empty()) {
    detail.clear();
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  }
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ode_fidelity", ode_fidelity},
      {"scaling_law", scaling_law},
      {"symplectic_certificate", symplectic_certificate},
      {"bijectivity", bijectivity},
      {"monge_ampere_einstein", monge_ampere_einstein},
      {"positivity_properness", positivity_properness},
      {"curvature_controls", curvature_controls},
      {"determinism_cli", cli_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
