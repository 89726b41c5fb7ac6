#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "blayer/io.hpp"
#include "canonical.hpp"

using namespace blayer;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(CurveCsv, HeaderRowsAndExactValues) {
  const Curve c = trace_all(canon::system(1.0)).at(0);
  std::ostringstream os;
  write_curve_csv(os, c);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), c.samples.size() + 1);
  EXPECT_EQ(ls[0], "index,u,theta");
  for (std::size_t i = 0; i < c.samples.size(); i += 101) {
    std::istringstream row(ls[i + 1]);
    std::string idx, u, t;
    std::getline(row, idx, ',');
    std::getline(row, u, ',');
    std::getline(row, t, ',');
    EXPECT_EQ(std::stoul(idx), i);
    EXPECT_EQ(std::stod(u), c.samples[i].u);
    EXPECT_EQ(std::stod(t), c.samples[i].theta);
  }
}

TEST(CurveJson, Fields) {
  const Curve c = trace_all(canon::system(1.0)).at(1);
  const json j = json::parse(curve_json(c));
  EXPECT_EQ(j["label"], "Gamma2");
  EXPECT_EQ(j["terminal"], "ConvergedToS2");
  EXPECT_EQ(j["terminal_point"]["u"].get<double>(), c.terminal_point.u);
  EXPECT_EQ(j["seed_offset"].get<double>(), c.seed_offset);
  ASSERT_EQ(j["samples"].size(), c.samples.size());
  EXPECT_EQ(j["samples"][5][1].get<double>(), c.samples[5].theta);
}

TEST(ProfileCsv, Header) {
  const Query q{canon::far(1.0), canon::far(1.0), canon::gas()};
  const Profile p = compute_profile(q, decide(q));
  std::ostringstream os;
  write_profile_csv(os, p);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "xi,V,U,Theta");
  EXPECT_EQ(ls[1], "0,1,1,1");
}

TEST(VerdictJson, ExistsWithDecay) {
  ExistenceEngine eng;
  const Curve& c = eng.curves(canon::gas(), canon::far(1.0))->at(0);
  const Query q = canon::query_at(c.samples[c.samples.size() / 2], 1.0);
  const Verdict v = eng.decide(q);
  const Profile p = compute_profile(q, v);
  const json j = json::parse(verdict_json(v, p.metrics.decay));
  for (const char* key : {"outcome", "reason", "regime", "mach_plus", "curve", "distance", "decay"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["outcome"], "Exists");
  EXPECT_EQ(j["reason"], "None");
  EXPECT_EQ(j["regime"], "Subsonic");
  EXPECT_EQ(j["curve"], "Gamma1");
  EXPECT_NEAR(j["mach_plus"].get<double>(), 1.0 / std::sqrt(1.4), 1e-15);
  EXPECT_EQ(j["decay"]["kind"], "Exponential");
  EXPECT_NEAR(j["decay"]["fitted"].get<double>(), -frozen::kSubLambda2, 0.05 * -frozen::kSubLambda2);
  EXPECT_TRUE(j["decay"]["ok"].get<bool>());
}

TEST(VerdictJson, NotExistsAndNonFinite) {
  Verdict v;
  v.reason = Reason::OffCurve;
  v.regime = {RegimeKind::Subsonic, 0.5};
  v.curve = CurveLabel::Gamma2;
  v.distance = NAN;
  const json j = json::parse(verdict_json(v));
  EXPECT_EQ(j["outcome"], "NotExists");
  EXPECT_EQ(j["reason"], "OffCurve");
  EXPECT_EQ(j["curve"], "Gamma2");
  EXPECT_TRUE(j["distance"].is_null());
  EXPECT_TRUE(j["decay"].is_null());
}
