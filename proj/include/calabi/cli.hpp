#ifndef CALABI_CLI_HPP
#define CALABI_CLI_HPP

// `calabi` command-line front end.
//
//   calabi solve | verify | map | invmap | curvature | plot | rescale [flags]
//
// Exit codes: 0 success, 1 validation, 2 numerical failure (including a
// failed verification), 3 I/O. Effective settings come from flags, then the
// --config JSON file, then built-in defaults.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calabi/batch_csv.hpp"
#include "calabi/curvature.hpp"
#include "calabi/error.hpp"
#include "calabi/profile_io.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/svg.hpp"
#include "calabi/symplectic_map.hpp"
#include "calabi/text_format.hpp"
#include "calabi/verification.hpp"

namespace calabi {

inline constexpr const char* verify_schema = "calabi-verify/1";
inline constexpr const char* curvature_schema = "calabi-curvature/1";

struct RunConfig {
  std::string command;
  PotentialParams params;
  std::string profile = "profile.json";
  std::string out;  // empty: command default
  std::string in;
  std::string svg;
  std::string out_dir = "plots";
  std::uint64_t seed = 1;
  int samples = 50;
  int planes = 50;
  std::vector<double> radii;  // empty: fractions of r_max
  double h = 0.0;             // 0: 1e-3 r_max
  double lambda = 0.0;
  int points = 400;
  HistogramConfig histogram;
  bool flat = false;
  bool timestamp = false;
  VerificationConfig verify;
};

inline std::string default_out(const std::string& command) {
  static const std::map<std::string, std::string> defaults{
      {"solve", "profile.json"},        {"verify", "verify_report.json"},
      {"map", "mapped.csv"},            {"invmap", "unmapped.csv"},
      {"curvature", "curvature_report.json"}, {"rescale", "profile_rescaled.json"}};
  const auto it = defaults.find(command);
  return it == defaults.end() ? std::string() : it->second;
}

inline void validate(const RunConfig& c) {
  validate(c.params);
  if (c.samples < 1) throw Error(ErrorCode::invalid_params, "--samples must be at least 1");
  if (c.planes < 1) throw Error(ErrorCode::invalid_params, "--planes must be at least 1");
  if (c.points < 2) throw Error(ErrorCode::invalid_params, "--points must be at least 2");
  if (c.h < 0.0 || !std::isfinite(c.h))
    throw Error(ErrorCode::invalid_step, "--step must be positive");
  if (!(c.histogram.hi > c.histogram.lo) || c.histogram.bins < 1)
    throw Error(ErrorCode::invalid_params, "histogram needs hist-hi > hist-lo and hist-bins >= 1");
  validate(c.verify);
}

inline nlohmann::ordered_json effective_config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["n"] = c.params.n;
  j["y0"] = c.params.y0;
  j["tol_rel"] = c.params.rel_tol;
  j["tol_abs"] = c.params.abs_tol;
  j["blowup_threshold"] = c.params.blowup_threshold;
  j["max_steps"] = c.params.max_steps;
  j["experimental"] = c.params.experimental;
  j["profile"] = c.profile;
  j["out"] = c.out;
  j["in"] = c.in;
  j["svg"] = c.svg;
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["planes"] = c.planes;
  j["radii"] = c.radii;
  j["step"] = c.h;
  j["lambda"] = c.lambda;
  j["points"] = c.points;
  j["hist_lo"] = c.histogram.lo;
  j["hist_hi"] = c.histogram.hi;
  j["hist_bins"] = c.histogram.bins;
  j["flat"] = c.flat;
  j["tol_ode"] = c.verify.tol_ode;
  j["tol_monge_ampere"] = c.verify.tol_monge_ampere;
  j["tol_einstein"] = c.verify.tol_einstein_ratio;
  j["tol_pullback_analytic"] = c.verify.tol_pullback_analytic;
  j["tol_pullback_fd"] = c.verify.tol_pullback_fd;
  j["tol_roundtrip"] = c.verify.tol_roundtrip;
  j["tol_properness"] = c.verify.tol_properness_log2;
  return j;
}

namespace cli_detail {

// One setting reachable both as a flag and as a config-file key.
class SettingTable {
 public:
  explicit SettingTable(CLI::App& app) : app_(app) {}

  template <class T>
  void option(const std::string& flag, const std::string& key,
              std::function<T&(RunConfig&)> field, const std::string& help) {
    auto storage = std::make_shared<T>();
    CLI::Option* opt = app_.add_option(flag, *storage, help);
    from_flags_.push_back([opt, storage, field](RunConfig& c) {
      if (opt->count() > 0) field(c) = *storage;
    });
    from_json_[key] = [key, field](RunConfig& c, const nlohmann::json& v) {
      try {
        field(c) = v.get<T>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::invalid_params, "config key '" + key + "' has the wrong type");
      }
    };
  }

  void flag(const std::string& flag, const std::string& key,
            std::function<bool&(RunConfig&)> field, const std::string& help) {
    CLI::Option* opt = app_.add_flag(flag, help);
    from_flags_.push_back([opt, field](RunConfig& c) {
      if (opt->count() > 0) field(c) = true;
    });
    from_json_[key] = [key, field](RunConfig& c, const nlohmann::json& v) {
      if (!v.is_boolean())
        throw Error(ErrorCode::invalid_params, "config key '" + key + "' must be a boolean");
      field(c) = v.get<bool>();
    };
  }

  void apply_json(RunConfig& c, const nlohmann::json& doc) const {
    if (!doc.is_object()) throw Error(ErrorCode::invalid_params, "config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      const auto it = from_json_.find(key);
      if (it == from_json_.end())
        throw Error(ErrorCode::invalid_params, "unknown config key '" + key + "'");
      it->second(c, value);
    }
  }

  void apply_flags(RunConfig& c) const {
    for (const auto& f : from_flags_) f(c);
  }

 private:
  CLI::App& app_;
  std::vector<std::function<void(RunConfig&)>> from_flags_;
  std::map<std::string, std::function<void(RunConfig&, const nlohmann::json&)>> from_json_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path);
}

inline nlohmann::ordered_json timestamps(const RunConfig& c) {
  nlohmann::ordered_json t;
  if (!c.timestamp) {
    t["generated_utc"] = nullptr;
    return t;
  }
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  t["generated_utc"] = buf;
  return t;
}

inline nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::ordered_json profile_summary_json(const RadialProfile& p, const std::string& path) {
  nlohmann::ordered_json j;
  j["path"] = path;
  j["fingerprint"] = profile_fingerprint(p);
  j["params_fingerprint"] = params_fingerprint(p.params());
  j["params"] = nlohmann::ordered_json::parse(params_to_json(p.params()));
  j["a_est"] = p.a_est();
  j["a_err"] = p.a_err();
  j["r_max"] = p.r_max();
  j["nodes"] = p.size();
  return j;
}

inline std::string output_path(const RunConfig& c) {
  return c.out.empty() ? default_out(c.command) : c.out;
}

// ---- commands -------------------------------------------------------------

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  const RadialProfile profile = solve_radial(c.params);
  const std::string path = output_path(c);
  save_profile(profile, path);
  out << "effective config: " << effective_config_json(c).dump() << '\n'
      << "a_est = " << format_double(profile.a_est()) << " +/- "
      << format_double(profile.a_err()) << '\n'
      << "grid nodes = " << profile.size() << " (handoff r0 = "
      << format_double(profile.handoff()) << ", r_max = " << format_double(profile.r_max())
      << ")\n"
      << "max interval ODE residual = " << format_double(max_interval_residual(profile))
      << '\n'
      << "wrote " << path << " (fingerprint " << profile_fingerprint(profile) << ")\n";
  return 0;
}

inline std::string verification_summary(const VerificationReport& report,
                                        const RadialProfile& profile) {
  std::ostringstream s;
  s << "verification of profile " << profile_fingerprint(profile) << " (n = " << profile.n()
    << ", y0 = " << format_double(profile.y0()) << ")\n";
  for (const auto& c : report.checks) {
    s << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.value)
      << (c.comparison == Comparison::at_most ? " <= " : " > ") << format_double(c.tolerance)
      << '\n';
  }
  s << "overall: " << (report.overall_pass ? "PASS" : "FAIL") << '\n';
  return s.str();
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  const RadialProfile profile = load_profile(c.profile);
  VerificationConfig vc = c.verify;
  vc.samples = c.samples;
  vc.seed = c.seed;
  const VerificationReport report = run_verification(profile, vc);

  nlohmann::ordered_json j;
  j["schema_version"] = verify_schema;
  j["effective_config"] = effective_config_json(c);
  j["profile"] = profile_summary_json(profile, c.profile);
  j["timestamps"] = timestamps(c);
  nlohmann::ordered_json checks;
  for (const auto& chk : report.checks) {
    nlohmann::ordered_json e;
    e["value"] = chk.value;
    e["tolerance"] = chk.tolerance;
    e["comparison"] = chk.comparison == Comparison::at_most ? "<=" : ">";
    e["pass"] = chk.pass;
    e["detail"] = chk.detail;
    checks[chk.name] = e;
  }
  j["checks"] = checks;
  j["overall_pass"] = report.overall_pass;

  const std::string path = output_path(c);
  write_file(path, j.dump(2) + "\n");
  const std::string summary = verification_summary(report, profile);
  write_file(std::filesystem::path(path).replace_extension(".txt").string(), summary);
  out << summary;
  return report.overall_pass ? 0 : 2;
}

inline int cmd_batch(const RunConfig& c, BatchDirection direction, std::ostream& out) {
  if (c.in.empty()) throw Error(ErrorCode::invalid_params, "--in <batch.csv> is required");
  const RadialProfile profile = load_profile(c.profile);
  const BatchResult result = run_batch(profile, read_text_file(c.in), direction);
  const std::string path = output_path(c);
  write_file(path, result.text);
  out << "wrote " << path << ": " << result.ok << " ok, " << result.failed << " failed\n";
  return 0;
}

template <RadialPotential P>
int run_curvature(const RunConfig& c, const P& potential, const std::string& fingerprint,
                  const std::string& params_fp, std::ostream& out) {
  const double R = potential.r_max();
  const double h = c.h > 0.0 ? c.h : 1e-3 * R;
  std::vector<double> radii = c.radii;
  if (radii.empty())
    for (int k = 0; k <= 8; ++k) radii.push_back(0.1 * k * R);
  const CurvatureScan scan =
      curvature_scan(potential, radii, c.planes, c.seed, h, c.histogram);
  std::vector<double> line_radii;
  for (int k = 0; k <= 40; ++k) line_radii.push_back(0.85 * R * k / 40.0);
  const auto rows = radial_curvature_profile(potential, line_radii, h);

  nlohmann::ordered_json j;
  j["schema_version"] = curvature_schema;
  j["effective_config"] = effective_config_json(c);
  j["params_fingerprint"] = params_fp;
  j["profile_fingerprint"] = fingerprint;
  j["timestamps"] = timestamps(c);
  j["seed"] = scan.seed;
  j["h"] = scan.h;
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const auto& s : scan.samples) {
    nlohmann::ordered_json e;
    e["point_index"] = s.point_index;
    e["radius"] = s.radius;
    e["x"] = vector_json(s.x);
    e["plane"] = {vector_json(s.e1), vector_json(s.e2)};
    e["K"] = s.K;
    e["status"] = s.status;
    samples.push_back(e);
  }
  j["samples"] = samples;
  nlohmann::ordered_json summary;
  summary["ok"] = scan.summary.ok;
  summary["failed"] = scan.summary.failed;
  summary["min"] = scan.summary.min;
  summary["max"] = scan.summary.max;
  summary["argmin"] = scan.summary.argmin;
  summary["argmax"] = scan.summary.argmax;
  summary["histogram"] = {{"edges", scan.summary.edges},
                          {"counts", scan.summary.counts},
                          {"underflow", scan.summary.underflow},
                          {"overflow", scan.summary.overflow}};
  j["summary"] = summary;
  nlohmann::ordered_json radial = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    radial.push_back({{"r", r.r},
                      {"radial_complex", r.radial_complex},
                      {"radial_tangential", r.radial_tangential},
                      {"tangential_complex", r.tangential_complex}});
  j["radial_profile"] = radial;

  const std::string path = output_path(c);
  write_file(path, j.dump(2) + "\n");
  const std::string svg_path =
      c.svg.empty() ? std::filesystem::path(path).replace_extension(".svg").string() : c.svg;
  write_file(svg_path, svg::plot_curvature(scan, rows));
  out << "curvature scan: " << scan.summary.ok << " ok, " << scan.summary.failed
      << " failed; K in [" << format_double(scan.summary.min) << ", "
      << format_double(scan.summary.max) << "]\n"
      << "wrote " << path << " and " << svg_path << '\n';
  return scan.summary.failed == 0 ? 0 : 2;
}

inline int cmd_curvature(const RunConfig& c, std::ostream& out) {
  if (c.flat) {
    const SyntheticPotential flat = quadratic_potential(c.params.n, 0.5);
    const std::string fp = fnv1a_hex("synthetic:quadratic;n=" + std::to_string(c.params.n));
    return run_curvature(c, flat, fp, fp, out);
  }
  const RadialProfile profile = load_profile(c.profile);
  return run_curvature(c, profile, profile_fingerprint(profile),
                       params_fingerprint(profile.params()), out);
}

inline int cmd_plot(const RunConfig& c, std::ostream& out) {
  const RadialProfile profile = load_profile(c.profile);
  const auto data = svg::profile_plot_data(profile, c.points);
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + c.out_dir + ": " + ec.message());
  const std::filesystem::path dir(c.out_dir);
  write_file((dir / "Y.svg").string(), svg::plot_Y(profile, data));
  write_file((dir / "Yp.svg").string(), svg::plot_Yp(profile, data));
  write_file((dir / "properness.svg").string(), svg::plot_properness(profile, data));
  out << "wrote Y.svg, Yp.svg and properness.svg to " << c.out_dir << '\n';
  return 0;
}

inline int cmd_rescale(const RunConfig& c, std::ostream& out) {
  const RadialProfile profile = load_profile(c.profile);
  const RadialProfile scaled = rescale(profile, c.lambda);
  const std::string path = output_path(c);
  save_profile(scaled, path);
  out << "rescaled by lambda = " << format_double(c.lambda) << ": y0 = "
      << format_double(scaled.y0()) << ", a_est = " << format_double(scaled.a_est())
      << "\nwrote " << path << '\n';
  return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial Kahler potential solver and symplectic chart checker", "calabi"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunConfig cfg;
  cli_detail::SettingTable table(app);
  using RC = RunConfig;
  table.option<int>("--n", "n", [](RC& c) -> int& { return c.params.n; }, "complex dimension n");
  table.option<double>("--y0", "y0", [](RC& c) -> double& { return c.params.y0; }, "Y(0)");
  table.option<double>("--tol-rel", "tol_rel", [](RC& c) -> double& { return c.params.rel_tol; },
                       "integrator relative tolerance");
  table.option<double>("--tol-abs", "tol_abs", [](RC& c) -> double& { return c.params.abs_tol; },
                       "integrator absolute tolerance");
  table.option<double>("--blowup-threshold", "blowup_threshold",
                       [](RC& c) -> double& { return c.params.blowup_threshold; },
                       "stop when Y' reaches this value");
  table.option<long>("--max-steps", "max_steps", [](RC& c) -> long& { return c.params.max_steps; },
                     "integrator step budget");
  table.flag("--experimental", "experimental", [](RC& c) -> bool& { return c.params.experimental; },
             "allow n = 1");
  table.option<std::string>("--profile", "profile", [](RC& c) -> std::string& { return c.profile; },
                            "profile JSON to read");
  table.option<std::string>("--out", "out", [](RC& c) -> std::string& { return c.out; },
                            "output file");
  table.option<std::string>("--in", "in", [](RC& c) -> std::string& { return c.in; },
                            "input batch CSV");
  table.option<std::string>("--svg", "svg", [](RC& c) -> std::string& { return c.svg; },
                            "curvature SVG output");
  table.option<std::string>("--out-dir", "out_dir", [](RC& c) -> std::string& { return c.out_dir; },
                            "directory for plot SVGs");
  table.option<std::uint64_t>("--seed", "seed", [](RC& c) -> std::uint64_t& { return c.seed; },
                              "sampling seed");
  table.option<int>("--samples", "samples", [](RC& c) -> int& { return c.samples; },
                    "verification sample count");
  table.option<int>("--planes", "planes", [](RC& c) -> int& { return c.planes; },
                    "random planes per scan point");
  table.option<std::vector<double>>("--radii", "radii",
                                    [](RC& c) -> std::vector<double>& { return c.radii; },
                                    "scan radii (absolute)");
  table.option<double>("--step", "step", [](RC& c) -> double& { return c.h; },
                       "curvature finite-difference step");
  table.option<double>("--lambda", "lambda", [](RC& c) -> double& { return c.lambda; },
                       "rescale factor");
  table.option<int>("--points", "points", [](RC& c) -> int& { return c.points; },
                    "plot sample count");
  table.option<double>("--hist-lo", "hist_lo", [](RC& c) -> double& { return c.histogram.lo; },
                       "histogram lower edge");
  table.option<double>("--hist-hi", "hist_hi", [](RC& c) -> double& { return c.histogram.hi; },
                       "histogram upper edge");
  table.option<int>("--hist-bins", "hist_bins", [](RC& c) -> int& { return c.histogram.bins; },
                    "histogram bin count");
  table.flag("--flat", "flat", [](RC& c) -> bool& { return c.flat; },
             "scan the flat synthetic control instead of a profile");
  table.flag("--timestamp", "timestamp", [](RC& c) -> bool& { return c.timestamp; },
             "record the wall-clock time in reports");
  table.option<double>("--tol-ode", "tol_ode", [](RC& c) -> double& { return c.verify.tol_ode; },
                       "verify: ODE residual tolerance");
  table.option<double>("--tol-monge-ampere", "tol_monge_ampere",
                       [](RC& c) -> double& { return c.verify.tol_monge_ampere; },
                       "verify: Monge-Ampere tolerance");
  table.option<double>("--tol-einstein", "tol_einstein",
                       [](RC& c) -> double& { return c.verify.tol_einstein_ratio; },
                       "verify: allowed |ratio - 4|");
  table.option<double>("--tol-pullback-analytic", "tol_pullback_analytic",
                       [](RC& c) -> double& { return c.verify.tol_pullback_analytic; },
                       "verify: analytic pullback tolerance");
  table.option<double>("--tol-pullback-fd", "tol_pullback_fd",
                       [](RC& c) -> double& { return c.verify.tol_pullback_fd; },
                       "verify: finite-difference pullback tolerance");
  table.option<double>("--tol-roundtrip", "tol_roundtrip",
                       [](RC& c) -> double& { return c.verify.tol_roundtrip; },
                       "verify: inverse round-trip tolerance");
  table.option<double>("--tol-properness", "tol_properness",
                       [](RC& c) -> double& { return c.verify.tol_properness_log2; },
                       "verify: allowed |log2(|grad f| / threshold)|");
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of settings (flags override it)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "integrate the radial ODE and write a profile"},
      {"verify", "run the verification suite on a profile"},
      {"map", "apply the chart to a batch of tube points"},
      {"invmap", "apply the inverse chart to a batch of image points"},
      {"curvature", "seeded sectional curvature scan with SVG"},
      {"plot", "write Y, Y' and properness SVG plots"},
      {"rescale", "apply the scaling symmetry to a profile"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorClass::validation);
  }

  try {
    if (!config_path.empty()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_text_file(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, "config " + config_path + ": " + e.what());
      }
      table.apply_json(cfg, doc);
    }
    table.apply_flags(cfg);
    cfg.command = app.get_subcommands().front()->get_name();
    validate(cfg);

    const std::string& cmd = cfg.command;
    if (cmd == "solve") return cli_detail::cmd_solve(cfg, out);
    if (cmd == "verify") return cli_detail::cmd_verify(cfg, out);
    if (cmd == "map") return cli_detail::cmd_batch(cfg, BatchDirection::forward, out);
    if (cmd == "invmap") return cli_detail::cmd_batch(cfg, BatchDirection::inverse, out);
    if (cmd == "curvature") return cli_detail::cmd_curvature(cfg, out);
    if (cmd == "plot") return cli_detail::cmd_plot(cfg, out);
    return cli_detail::cmd_rescale(cfg, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    err << "error [numerical_failure]: " << e.what() << '\n';
    return static_cast<int>(ErrorClass::numerical);
  }
}

}  // namespace calabi

#endif  // CALABI_CLI_HPP
