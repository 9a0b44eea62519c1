#ifndef CALABI_BATCH_CSV_HPP
#define CALABI_BATCH_CSV_HPP

// Point batches for Phi and its inverse.
//
//   forward input   x1..xn,y1..yn[,status]
//   forward output  p1..pn,y1..yn,status
//   inverse input   p1..pn,y1..yn[,status]
//   inverse output  x1..xn,y1..yn,status
//
// The header row is mandatory. A trailing status column on input is accepted
// so that a forward output can be fed straight back into the inverse. Rows
// that fail carry nan coordinates and a status code instead of aborting the
// batch; malformed text aborts with the offending line number.

#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "calabi/error.hpp"
#include "calabi/geometry.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/symplectic_map.hpp"
#include "calabi/text_format.hpp"

namespace calabi {

enum class BatchDirection { forward, inverse };

struct BatchRow {
  std::size_t line;
  Eigen::VectorXd a;  // x or p block
  Eigen::VectorXd y;
  std::string status;  // status read from input, empty if the column is absent
};

struct ParsedBatch {
  std::vector<BatchRow> rows;
};

namespace batch_detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> header(char block, int n, bool with_status) {
  std::vector<std::string> cols;
  for (int i = 1; i <= n; ++i) cols.push_back(block + std::to_string(i));
  for (int i = 1; i <= n; ++i) cols.push_back("y" + std::to_string(i));
  if (with_status) cols.push_back("status");
  return cols;
}

inline std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
}

inline char input_block(BatchDirection d) { return d == BatchDirection::forward ? 'x' : 'p'; }
inline char output_block(BatchDirection d) { return d == BatchDirection::forward ? 'p' : 'x'; }

}  // namespace batch_detail

inline std::string batch_header(BatchDirection d, int n) {
  return batch_detail::join(batch_detail::header(batch_detail::output_block(d), n, true));
}

inline ParsedBatch parse_batch(std::string_view text, BatchDirection direction, int n) {
  using namespace batch_detail;
  ParsedBatch batch;
  const auto expected = header(input_block(direction), n, false);
  bool saw_header = false;
  bool has_status = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(raw).empty()) continue;
    auto fields = split(raw);
    for (auto& f : fields) f = trim(f);

    if (!saw_header) {
      saw_header = true;
      has_status = fields.size() == expected.size() + 1 && fields.back() == "status";
      const std::size_t width = has_status ? fields.size() - 1 : fields.size();
      bool ok = width == expected.size();
      for (std::size_t i = 0; ok && i < width; ++i) ok = fields[i] == expected[i];
      if (!ok) parse_fail(line_no, "header must be " + join(expected) + "[,status]");
      continue;
    }

    const std::size_t width = expected.size() + (has_status ? 1 : 0);
    if (fields.size() != width) {
      parse_fail(line_no, "expected " + std::to_string(width) + " fields, found " +
                              std::to_string(fields.size()));
    }
    BatchRow row{line_no, Eigen::VectorXd(n), Eigen::VectorXd(n), {}};
    for (int i = 0; i < 2 * n; ++i) {
      double v;
      if (!parse_double(fields[static_cast<std::size_t>(i)], v))
        parse_fail(line_no, "field " + std::to_string(i + 1) + " is not a number: '" +
                                std::string(fields[static_cast<std::size_t>(i)]) + "'");
      (i < n ? row.a(i) : row.y(i - n)) = v;
    }
    if (has_status) row.status = std::string(fields.back());
    batch.rows.push_back(std::move(row));
  }
  if (!saw_header) parse_fail(line_no == 0 ? 1 : line_no, "missing header row");
  return batch;
}

/// Status code for a row-level failure.
inline std::string batch_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::outside_computed_domain: return "out_of_domain";
    case ErrorCode::image_beyond_profile: return "beyond_profile";
    case ErrorCode::invalid_params: return "invalid_input";
    default: return std::string(to_string(code));
  }
}

struct BatchResult {
  std::string text;
  std::size_t ok = 0;
  std::size_t failed = 0;
};

inline BatchResult run_batch(const RadialProfile& profile, std::string_view input,
                             BatchDirection direction) {
  const int n = profile.n();
  const ParsedBatch batch = parse_batch(input, direction, n);
  BatchResult result;
  std::ostringstream out;
  out << batch_header(direction, n) << '\n';
  for (const auto& row : batch.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    std::string status = "ok";
    if (!row.status.empty() && row.status != "ok") {
      status = row.status;
    } else if (!row.a.allFinite() || !row.y.allFinite()) {
      status = "invalid_input";
    } else {
      try {
        if (direction == BatchDirection::forward) {
          a = phi(profile, TubePoint{row.a, row.y}).p;
        } else {
          a = phi_inverse(profile, ImagePoint{row.a, row.y}).x;
        }
      } catch (const Error& e) {
        status = batch_status(e.code());
      }
    }
    (status == "ok" ? result.ok : result.failed)++;
    for (int i = 0; i < n; ++i) out << format_double(a(i)) << ',';
    for (int i = 0; i < n; ++i) out << format_double(row.y(i)) << ',';
    out << status << '\n';
  }
  result.text = out.str();
  return result;
}

}  // namespace calabi

#endif  // CALABI_BATCH_CSV_HPP
