#ifndef CALABI_PROFILE_IO_HPP
#define CALABI_PROFILE_IO_HPP

// Profile cache file: one JSON document
//
//   { format_version, solver_fingerprint, params{...}, a_est, a_err,
//     grid[], Y[], Yp[], interpolant_coeffs[][14] }
//
// Numbers are written as the shortest decimal that round-trips to the same
// binary64. interpolant_coeffs holds, per interval, the 8 monomial
// coefficients of the Y polynomial followed by the 6 of the Y' polynomial in
// theta = (r - r_i) / (r_{i+1} - r_i). They are derived data: the loader
// checks their shape and rebuilds them from the nodes.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calabi/error.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/text_format.hpp"

namespace calabi {

inline constexpr int profile_format_version = 1;
inline constexpr std::size_t coeffs_per_interval = 14;
inline constexpr const char* solver_fingerprint =
    "dormand-prince-5(4);hermite-septic-Y/quintic-Yp;series-r4;"
    "tail-fit-quadratic-inverse-Yp;v1";

namespace profile_io_detail {

inline void write_array(std::ostream& out, const std::vector<double>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  out << ']';
}

}  // namespace profile_io_detail

inline std::string params_to_json(const PotentialParams& p) {
  std::ostringstream out;
  out << "{\"n\":" << p.n << ",\"y0\":" << format_double(p.y0)
      << ",\"rel_tol\":" << format_double(p.rel_tol)
      << ",\"abs_tol\":" << format_double(p.abs_tol)
      << ",\"blowup_threshold\":" << format_double(p.blowup_threshold)
      << ",\"max_steps\":" << p.max_steps
      << ",\"experimental\":" << (p.experimental ? "true" : "false") << '}';
  return out.str();
}

inline std::string serialize_profile(const RadialProfile& profile) {
  using profile_io_detail::write_array;
  std::ostringstream out;
  out << "{\n\"format_version\":" << profile_format_version
      << ",\n\"solver_fingerprint\":\"" << solver_fingerprint << '"'
      << ",\n\"params\":" << params_to_json(profile.params())
      << ",\n\"a_est\":" << format_double(profile.a_est())
      << ",\n\"a_err\":" << format_double(profile.a_err()) << ",\n\"grid\":";
  write_array(out, profile.grid());
  out << ",\n\"Y\":";
  write_array(out, profile.Y());
  out << ",\n\"Yp\":";
  write_array(out, profile.Yp());
  out << ",\n\"interpolant_coeffs\":[";
  const auto& coeffs = profile.coeffs();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    std::vector<double> row(coeffs[i].Y.begin(), coeffs[i].Y.end());
    row.insert(row.end(), coeffs[i].Yp.begin(), coeffs[i].Yp.end());
    out << (i ? ",\n" : "\n");
    write_array(out, row);
  }
  out << "\n]\n}\n";
  return out.str();
}

inline std::string params_fingerprint(const PotentialParams& p) {
  return fnv1a_hex(params_to_json(p));
}

inline std::string profile_fingerprint(const RadialProfile& profile) {
  return fnv1a_hex(serialize_profile(profile));
}

inline PotentialParams params_from_json(const nlohmann::json& j) {
  PotentialParams p;
  p.n = j.at("n").get<int>();
  p.y0 = j.at("y0").get<double>();
  p.rel_tol = j.at("rel_tol").get<double>();
  p.abs_tol = j.at("abs_tol").get<double>();
  p.blowup_threshold = j.at("blowup_threshold").get<double>();
  p.max_steps = j.at("max_steps").get<long>();
  p.experimental = j.value("experimental", false);
  return p;
}

/// Parses and validates a profile document (format version, parameters,
/// array shapes and every structural profile invariant).
inline RadialProfile parse_profile(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::format_error, std::string("profile is not valid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != profile_format_version) {
      throw Error(ErrorCode::format_error,
                  "unsupported profile format_version " + std::to_string(version));
    }
    const PotentialParams params = params_from_json(doc.at("params"));
    validate(params);
    auto grid = doc.at("grid").get<std::vector<double>>();
    auto Y = doc.at("Y").get<std::vector<double>>();
    auto Yp = doc.at("Yp").get<std::vector<double>>();
    const double a_est = doc.at("a_est").get<double>();
    const double a_err = doc.at("a_err").get<double>();
    const auto& coeffs = doc.at("interpolant_coeffs");
    if (!coeffs.is_array() || coeffs.size() + 1 != grid.size())
      throw Error(ErrorCode::format_error, "interpolant_coeffs must have one row per interval");
    for (const auto& row : coeffs) {
      if (!row.is_array() || row.size() != coeffs_per_interval)
        throw Error(ErrorCode::format_error, "interpolant_coeffs rows must have 14 entries");
    }
    RadialProfile profile(params, std::move(grid), std::move(Y), std::move(Yp), a_est, a_err);
    if (auto bad = find_invariant_violation(profile))
      throw Error(ErrorCode::format_error, "profile invariant violated: " + *bad);
    return profile;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::experimental_dimension || e.code() == ErrorCode::invalid_params)
      throw Error(ErrorCode::format_error, std::string("profile params: ") + e.what());
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed profile: ") + e.what());
  }
}

inline void save_profile(const RadialProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path + " for writing");
  out << serialize_profile(profile);
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline RadialProfile load_profile(const std::string& path) {
  return parse_profile(read_text_file(path));
}

}  // namespace calabi

#endif  // CALABI_PROFILE_IO_HPP
