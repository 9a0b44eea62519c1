#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "calabi/profile_io.hpp"
#include "calabi/random.hpp"
#include "calabi/text_format.hpp"
#include "test_support.hpp"

using namespace calabi;
using calabi::testing::cached_profile;
using calabi::testing::scratch_dir;

namespace {

ErrorCode parse_error_code(const std::string& text) {
  try {
    parse_profile(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "document accepted";
  return ErrorCode::internal_consistency;
}

std::string mutate(const RadialProfile& p, const std::function<void(nlohmann::json&)>& edit) {
  nlohmann::json doc = nlohmann::json::parse(serialize_profile(p));
  edit(doc);
  return doc.dump();
}

}  // namespace

TEST(TextFormat, ShortestRoundTrip) {
  Sampler rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng.uniform(-300, 300)));
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  double v;
  EXPECT_FALSE(parse_double("1.5x", v));
  EXPECT_FALSE(parse_double("", v));
  EXPECT_TRUE(parse_double(" 2.5\r", v));
  EXPECT_EQ(v, 2.5);
}

TEST(TextFormat, FingerprintIsFnv1a) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(ProfileIo, SerializationRoundTripIsByteIdentical) {
  const RadialProfile& p = cached_profile(2, 0.0);
  const std::string text = serialize_profile(p);
  const RadialProfile back = parse_profile(text);
  EXPECT_EQ(back.grid(), p.grid());
  EXPECT_EQ(back.Y(), p.Y());
  EXPECT_EQ(back.Yp(), p.Yp());
  EXPECT_EQ(back.a_est(), p.a_est());
  EXPECT_EQ(back.a_err(), p.a_err());
  EXPECT_EQ(back.params(), p.params());
  EXPECT_EQ(serialize_profile(back), text);
  EXPECT_EQ(profile_fingerprint(back), profile_fingerprint(p));
}

TEST(ProfileIo, DocumentHasAllFields) {
  const nlohmann::json doc = nlohmann::json::parse(serialize_profile(cached_profile(3, 1.0)));
  for (const char* key : {"format_version", "params", "grid", "Y", "Yp", "interpolant_coeffs",
                          "a_est", "a_err", "solver_fingerprint"})
    EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc["interpolant_coeffs"].size() + 1, doc["grid"].size());
  EXPECT_EQ(doc["interpolant_coeffs"][0].size(), coeffs_per_interval);
}

TEST(ProfileIo, FingerprintsDistinguishParameters) {
  EXPECT_NE(params_fingerprint(cached_profile(2, 0.0).params()),
            params_fingerprint(cached_profile(2, 1.0).params()));
  EXPECT_NE(profile_fingerprint(cached_profile(2, 0.0)), profile_fingerprint(cached_profile(3, 0.0)));
}

TEST(ProfileIo, RejectsMalformedDocuments) {
  const RadialProfile& p = cached_profile(2, 0.0);
  EXPECT_EQ(parse_error_code("{not json"), ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["format_version"] = 99; })),
            ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d.erase("Yp"); })), ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["grid"][3] = "x"; })),
            ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["interpolant_coeffs"].erase(0); })),
            ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["interpolant_coeffs"][2].erase(0); })),
            ErrorCode::format_error);
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["Y"].erase(0); })), ErrorCode::format_error);
}

TEST(ProfileIo, RejectsInvariantViolations) {
  const RadialProfile& p = cached_profile(2, 0.0);
  // Non-monotone grid.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) {
              const double tmp = d["grid"][10];
              d["grid"][10] = d["grid"][11];
              d["grid"][11] = tmp;
            })),
            ErrorCode::format_error);
  // Decreasing Y'.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["Yp"][20] = 0.0; })),
            ErrorCode::format_error);
  // Blow-up estimate inside the computed range.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["a_est"] = 1.0; })),
            ErrorCode::format_error);
  // Negative uncertainty.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["a_err"] = -1.0; })),
            ErrorCode::format_error);
  // First node no longer matches the series start.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["Y"][0] = 1e-3; })),
            ErrorCode::format_error);
  // n = 1 without the experimental flag.
  EXPECT_EQ(parse_error_code(mutate(p, [](auto& d) { d["params"]["n"] = 1; })),
            ErrorCode::format_error);
}

TEST(ProfileIo, TamperedInteriorNodeStillLoads) {
  const RadialProfile& p = cached_profile(2, 0.0);
  const std::string text = mutate(p, [&](auto& d) {
    const std::size_t k = p.size() / 2;
    d["Y"][k] = p.Y()[k] + 1e-5;
  });
  EXPECT_NO_THROW(parse_profile(text));
}

TEST(ProfileIo, SaveAndLoadFiles) {
  const auto dir = scratch_dir("profile_io");
  const RadialProfile& p = cached_profile(4, -1.0);
  const std::string path = (dir / "p.json").string();
  save_profile(p, path);
  const RadialProfile back = load_profile(path);
  EXPECT_EQ(serialize_profile(back), serialize_profile(p));

  try {
    load_profile((dir / "missing.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
    EXPECT_EQ(e.error_class(), ErrorClass::io);
  }
  try {
    save_profile(p, (dir / "no_such_dir" / "p.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
  }
}
