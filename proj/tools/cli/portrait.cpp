#include "portrait.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "blayer/error.hpp"
#include "blayer/integrator.hpp"
#include "blayer/linearization.hpp"

namespace blayer::cli {

namespace {

std::string num(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string px(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << x;
  return os.str();
}

struct View {
  double u_min, u_max, t_min, t_max;
  double x0 = 60, y0 = 20, w = 0, h = 0;

  double x(double u) const { return x0 + (u - u_min) / (u_max - u_min) * w; }
  double y(double t) const { return y0 + (t_max - t) / (t_max - t_min) * h; }
  bool inside(PhasePoint p) const { return p.u >= u_min && p.u <= u_max && p.theta >= t_min && p.theta <= t_max; }
  std::string xy(PhasePoint p) const { return px(x(p.u)) + "," + px(y(p.theta)); }
};

std::string polyline(const View& v, const std::vector<PhasePoint>& pts) {
  std::string out;
  for (const PhasePoint& p : pts) {
    if (!out.empty()) out += ' ';
    out += v.xy(p);
  }
  return out;
}

// At most `limit` points, always keeping both ends.
std::vector<PhasePoint> thin(const std::vector<PhasePoint>& pts, std::size_t limit) {
  if (pts.size() <= limit) return pts;
  std::vector<PhasePoint> out;
  const double stride = static_cast<double>(pts.size() - 1) / static_cast<double>(limit - 1);
  for (std::size_t k = 0; k < limit; ++k) out.push_back(pts[static_cast<std::size_t>(std::round(k * stride))]);
  return out;
}

// Path data for theta = f(u) on [from, to], broken where it leaves the window.
template <class F>
std::string graph(const View& v, F f, double from, double to, int n = 200) {
  std::string d;
  bool pen_down = false;
  for (int k = 0; k <= n; ++k) {
    const double u = from + (to - from) * k / n;
    const PhasePoint p{u, f(u)};
    if (!v.inside(p)) {
      pen_down = false;
      continue;
    }
    if (!d.empty()) d += ' ';
    d += (pen_down ? "L" : "M") + v.xy(p);
    pen_down = true;
  }
  return d;
}

std::vector<PhasePoint> trajectory(const SystemData& s, const View& v, PhasePoint start) {
  const double du = v.u_max - v.u_min, dt = v.t_max - v.t_min;
  const EventSpec leave = level_crossing([v, du, dt](const PhasePoint& p) {
    return std::min({(p.u - v.u_min) / du, (v.u_max - p.u) / du, (p.theta - v.t_min) / dt, (v.t_max - p.theta) / dt});
  });
  const double capture = 1e-3 * s.scale();
  const EventSpec near[] = {leave, near_equilibrium(s.s1(), capture), near_equilibrium(s.s2(), capture),
                            near_equilibrium(SystemData::origin(), capture)};
  IntegrationSettings st;
  st.rel_tol = 1e-7;
  st.abs_tol = 1e-9;
  st.max_steps = 4000;
  st.xi_span = 50.0;
  auto run = [&](Direction d) {
    st.direction = d;
    std::vector<PhasePoint> pts;
    try {
      const Trajectory tr = integrate([&s](const PhasePoint& p) { return rhs_poly(p, s); }, start, st, near);
      for (const Sample& smp : tr.samples) pts.push_back(smp.point);
    } catch (const Error&) {
      // Blow-up outside the plotted window; keep nothing from this half.
    }
    return pts;
  };
  std::vector<PhasePoint> back = run(Direction::Backward);
  std::reverse(back.begin(), back.end());
  std::vector<PhasePoint> fwd = run(Direction::Forward);
  if (!back.empty() && !fwd.empty()) back.pop_back();
  back.insert(back.end(), fwd.begin(), fwd.end());
  std::vector<PhasePoint> kept;
  for (const PhasePoint& p : back)
    if (v.inside(p)) kept.push_back(p);
  return kept;
}

const char* z_name(CurveLabel l) {
  switch (l) {
    case CurveLabel::Sigma: return "Z0";
    case CurveLabel::Gamma1: return "Z1";
    case CurveLabel::Gamma2: return "Z2";
  }
  return "Z";
}

const char* curve_color(CurveLabel l) {
  switch (l) {
    case CurveLabel::Sigma: return "#c0392b";
    case CurveLabel::Gamma1: return "#c0392b";
    case CurveLabel::Gamma2: return "#8e44ad";
  }
  return "black";
}

}  // namespace

std::string render_portrait(const SystemData& s, const std::vector<Curve>& curves, const PortraitOptions& opts) {
  const RegimeKind regime = classify_regime(s.mach_plus, opts.tol_M).tag;
  if (regime == RegimeKind::Supersonic) throw Error(ErrorCode::WrongRegime, "no portrait for a supersonic far field");
  const bool subsonic = regime == RegimeKind::Subsonic;
  const double up = s.u_plus, tp = s.theta_plus;

  double u_hi = subsonic ? std::max(s.alpha1 * up, up) : up;
  double t_lo = std::min(0.0, subsonic ? s.s2().theta : 0.0);
  double t_hi = std::max(tp, nullcline_h2(0.0, s));
  for (const Curve& c : curves)
    for (const PhasePoint& p : c.samples) {
      u_hi = std::max(u_hi, p.u);
      t_lo = std::min(t_lo, p.theta);
      t_hi = std::max(t_hi, p.theta);
    }
  u_hi *= subsonic ? 1.1 : 1.4;
  const double pad_u = 0.05 * u_hi, pad_t = 0.08 * (t_hi - t_lo);
  View v{-pad_u, u_hi + pad_u, t_lo - pad_t, t_hi + pad_t};
  v.w = opts.width - v.x0 - 20;
  v.h = opts.height - v.y0 - 50;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(opts.width) << "\" height=\"" << px(opts.height)
     << "\" viewBox=\"0 0 " << px(opts.width) << ' ' << px(opts.height) << "\" data-regime=\"" << to_string(regime)
     << "\" data-mach-plus=\"" << num(s.mach_plus) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << px(opts.width) << "\" height=\"" << px(opts.height)
     << "\" fill=\"white\"/>\n";
  os << "<g id=\"plot\" data-u-min=\"" << num(v.u_min) << "\" data-u-max=\"" << num(v.u_max) << "\" data-theta-min=\""
     << num(v.t_min) << "\" data-theta-max=\"" << num(v.t_max) << "\" data-x0=\"" << num(v.x0) << "\" data-y0=\""
     << num(v.y0) << "\" data-width=\"" << num(v.w) << "\" data-height=\"" << num(v.h) << "\">\n";

  // Axes through the origin when visible.
  const double ax_y = v.y(std::clamp(0.0, v.t_min, v.t_max));
  os << "<line id=\"axis-u\" x1=\"" << px(v.x0) << "\" y1=\"" << px(ax_y) << "\" x2=\"" << px(v.x0 + v.w)
     << "\" y2=\"" << px(ax_y) << "\" stroke=\"black\"/>\n";
  os << "<line id=\"axis-theta\" x1=\"" << px(v.x(0.0)) << "\" y1=\"" << px(v.y0 + v.h) << "\" x2=\"" << px(v.x(0.0))
     << "\" y2=\"" << px(v.y0) << "\" stroke=\"black\"/>\n";
  os << "<text id=\"label-u\" x=\"" << px(v.x0 + v.w - 10) << "\" y=\"" << px(std::min(ax_y + 18, opts.height - 5))
     << "\" font-size=\"16\">u</text>\n";
  os << "<text id=\"label-theta\" x=\"" << px(v.x(0.0) + 6) << "\" y=\"" << px(v.y0 + 14)
     << "\" font-size=\"16\">θ</text>\n";

  // Nullclines over the whole window.
  auto h1 = [&s](double u) { return nullcline_h1(u, s); };
  auto h2 = [&s](double u) { return nullcline_h2(u, s); };
  os << "<path id=\"h1\" class=\"nullcline\" fill=\"none\" stroke=\"#2980b9\" stroke-dasharray=\"4 3\" d=\""
     << graph(v, h1, v.u_min, v.u_max) << "\"/>\n";
  os << "<path id=\"h2\" class=\"nullcline\" fill=\"none\" stroke=\"#27ae60\" stroke-dasharray=\"4 3\" d=\""
     << graph(v, h2, v.u_min, v.u_max) << "\"/>\n";

  // Region boundaries.
  auto piece = [&](const char* id, auto f, double from, double to) {
    os << "<path id=\"" << id << "\" class=\"boundary\" data-u-from=\"" << num(from) << "\" data-u-to=\"" << num(to)
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"" << graph(v, f, from, to, 100) << "\"/>\n";
  };
  piece("l1", h1, 0.0, up);
  piece("l2", h2, 0.0, up);
  const double l3_lo = std::min(h1(0.0), h2(0.0)), l3_hi = std::max(h1(0.0), h2(0.0));
  os << "<line id=\"l3\" class=\"boundary\" data-theta-from=\"" << num(l3_lo) << "\" data-theta-to=\"" << num(l3_hi)
     << "\" x1=\"" << px(v.x(0.0)) << "\" y1=\"" << px(v.y(l3_lo)) << "\" x2=\"" << px(v.x(0.0)) << "\" y2=\""
     << px(v.y(l3_hi)) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  if (subsonic) {
    piece("l4", h2, up, s.alpha1 * up);
    piece("l5", h1, up, s.alpha1 * up);
  }

  // Tangent line at S1, drawn over 15% of the window width.
  TangentLine tau = subsonic ? tangent_line(s, eigen_2x2(s.A), opts.tol_M) : tangent_line(s, transonic_frame(s, opts.tol_M));
  const double reach = 0.15 * (v.u_max - v.u_min) / std::max(std::abs(tau.direction.u), 1e-12);
  const PhasePoint t_end = s.s1() + reach * tau.direction;
  const PhasePoint t_begin = tau.half_line ? s.s1() : s.s1() - reach * tau.direction;
  os << "<line id=\"" << (subsonic ? "tau-prime" : "tau") << "\" class=\"tangent\" data-slope=\"" << num(tau.slope)
     << "\" x1=\"" << px(v.x(t_begin.u)) << "\" y1=\"" << px(v.y(t_begin.theta)) << "\" x2=\"" << px(v.x(t_end.u))
     << "\" y2=\"" << px(v.y(t_end.theta)) << "\" stroke=\"gray\" stroke-dasharray=\"2 2\"/>\n";

  // Generic trajectories from an interior grid.
  const int n = opts.trajectories;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const PhasePoint start{v.u_min + (v.u_max - v.u_min) * (i + 0.5) / n,
                             v.t_min + (v.t_max - v.t_min) * (j + 0.5) / n};
      const std::vector<PhasePoint> pts = trajectory(s, v, start);
      if (pts.size() < 2) continue;
      os << "<polyline class=\"trajectory\" data-start-u=\"" << num(start.u) << "\" data-start-theta=\""
         << num(start.theta) << "\" fill=\"none\" stroke=\"#bbbbbb\" points=\"" << polyline(v, thin(pts, 400))
         << "\"/>\n";
    }

  for (const Curve& c : curves) {
    os << "<polyline id=\"curve-" << to_string(c.label) << "\" class=\"curve\" data-terminal=\"" << to_string(c.terminal)
       << "\" data-start-u=\"" << num(c.samples.front().u) << "\" data-start-theta=\"" << num(c.samples.front().theta)
       << "\" data-end-u=\"" << num(c.terminal_point.u) << "\" data-end-theta=\"" << num(c.terminal_point.theta)
       << "\" fill=\"none\" stroke=\"" << curve_color(c.label) << "\" stroke-width=\"2.5\" points=\""
       << polyline(v, thin(c.samples, 1500)) << "\"/>\n";
    if (c.terminal == TerminalKind::HitUAxis || c.terminal == TerminalKind::HitThetaAxis) {
      const PhasePoint z = c.terminal_point;
      os << "<circle id=\"" << z_name(c.label) << "\" class=\"endpoint\" data-u=\"" << num(z.u) << "\" data-theta=\""
         << num(z.theta) << "\" cx=\"" << px(v.x(z.u)) << "\" cy=\"" << px(v.y(z.theta))
         << "\" r=\"4\" fill=\"white\" stroke=\"black\"/>\n";
      os << "<text x=\"" << px(v.x(z.u) + 6) << "\" y=\"" << px(v.y(z.theta) - 6) << "\" font-size=\"13\">"
         << z_name(c.label) << "</text>\n";
    }
  }

  auto equilibrium = [&](const char* name, PhasePoint p, bool label) {
    os << "<circle id=\"eq-" << name << "\" class=\"equilibrium\" data-u=\"" << num(p.u) << "\" data-theta=\""
       << num(p.theta) << "\" cx=\"" << px(v.x(p.u)) << "\" cy=\"" << px(v.y(p.theta))
       << "\" r=\"4\" fill=\"black\"/>\n";
    if (label)
      os << "<text x=\"" << px(v.x(p.u) + 6) << "\" y=\"" << px(v.y(p.theta) + 16) << "\" font-size=\"13\">" << name
       << "</text>\n";
  };
  equilibrium("O", SystemData::origin(), true);
  equilibrium("S1", s.s1(), true);
  equilibrium("S2", s.s2(), subsonic);  // coincides with S1 when sonic

  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace blayer::cli
