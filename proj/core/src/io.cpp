#include "blayer/io.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

namespace blayer {

using nlohmann::json;

namespace {

// JSON has no infinities or NaN.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json decay_json(const DecayReport& d) {
  json j{{"kind", to_string(d.kind)}, {"ok", d.ok()}};
  if (d.kind == DecayKind::NotApplicable) return j;
  j["tail_samples"] = d.tail_samples;
  j["expected"] = number(d.expected);
  j["fitted"] = number(d.fitted);
  j["C"] = number(d.C);
  j["rate_ok"] = d.rate_ok;
  j["derivative_expected"] = number(d.derivative_expected);
  j["derivative_fitted"] = number(d.derivative_fitted);
  j["derivative_ok"] = d.derivative_ok;
  if (d.kind == DecayKind::Algebraic) {
    j["product_expected"] = number(d.product_expected);
    j["product_min"] = number(d.product_min);
    j["product_max"] = number(d.product_max);
    j["product_ok"] = d.product_ok;
  }
  return j;
}

}  // namespace

void write_curve_csv(std::ostream& os, const Curve& c) {
  const auto old = os.precision(17);
  os << "index,u,theta\n";
  for (std::size_t i = 0; i < c.samples.size(); ++i) os << i << ',' << c.samples[i].u << ',' << c.samples[i].theta << '\n';
  os.precision(old);
}

std::string curve_json(const Curve& c, int indent) {
  json samples = json::array();
  for (const PhasePoint& p : c.samples) samples.push_back({p.u, p.theta});
  const json j{{"label", to_string(c.label)},
               {"terminal", to_string(c.terminal)},
               {"terminal_point", {{"u", c.terminal_point.u}, {"theta", c.terminal_point.theta}}},
               {"seed_offset", c.seed_offset},
               {"u_plus", c.system.u_plus},
               {"theta_plus", c.system.theta_plus},
               {"samples", samples}};
  return j.dump(indent);
}

void write_profile_csv(std::ostream& os, const Profile& p) {
  const auto old = os.precision(17);
  os << "xi,V,U,Theta\n";
  for (std::size_t i = 0; i < p.xi.size(); ++i) os << p.xi[i] << ',' << p.V[i] << ',' << p.U[i] << ',' << p.Theta[i] << '\n';
  os.precision(old);
}

std::string verdict_json(const Verdict& v, const std::optional<DecayReport>& decay, int indent) {
  json j;
  j["outcome"] = to_string(v.outcome);
  j["reason"] = to_string(v.reason);
  j["regime"] = to_string(v.regime.tag);
  j["mach_plus"] = number(v.regime.mach_plus);
  j["trivial"] = v.trivial;
  j["curve"] = v.curve ? json(to_string(*v.curve)) : json(nullptr);
  j["parameter"] = v.parameter ? number(*v.parameter) : json(nullptr);
  j["distance"] = v.distance ? number(*v.distance) : json(nullptr);
  if (v.flux_gap) j["flux_gap"] = number(*v.flux_gap);
  j["decay"] = decay ? decay_json(*decay) : json(nullptr);
  return j.dump(indent);
}

}  // namespace blayer
