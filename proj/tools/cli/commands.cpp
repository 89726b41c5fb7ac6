#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blayer/error.hpp"
#include "blayer/io.hpp"
#include "blayer/linearization.hpp"
#include "portrait.hpp"

namespace blayer::cli {

namespace {

const std::vector<std::string> kGas{"gamma", "R", "mu", "kappa"};
const std::vector<std::string> kRight{"v_plus", "u_plus", "theta_plus"};

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::filesystem::path output_file(const RunConfig& cfg, const std::string& stem) {
  std::filesystem::create_directories(cfg.out);
  return cfg.out / (stem + (cfg.format == Format::Json ? ".json" : ".csv"));
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

Query query(const RunConfig& cfg) {
  require(cfg, kGas + kRight + std::vector<std::string>{"u_minus", "theta_minus"});
  return Query{cfg.left(), cfg.right(), cfg.gas(), cfg.tolerances()};
}

}  // namespace

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const Verdict v = decide(query(cfg));
  out << verdict_json(v) << '\n';
  return v.exists() ? kExitExists : kExitNotExists;
}

int cmd_profile(const RunConfig& cfg, std::ostream& out) {
  const Query q = query(cfg);
  const Verdict v = decide(q);
  if (!v.exists()) {
    out << verdict_json(v) << '\n';
    return kExitNotExists;
  }
  const Profile p = compute_profile(q, v);
  const auto path = output_file(cfg, "profile");
  auto f = open_out(path);
  if (cfg.format == Format::Csv) {
    write_profile_csv(f, p);
  } else {
    const nlohmann::json j{{"xi", p.xi}, {"V", p.V}, {"U", p.U}, {"Theta", p.Theta},
                           {"monotone_ok", p.metrics.monotone_ok}, {"residual_sup", p.metrics.residual_sup},
                           {"start_gap", p.start_gap}};
    f << j.dump() << '\n';
  }
  auto verdict = nlohmann::json::parse(verdict_json(v, p.metrics.decay));
  verdict["profile"] = {{"file", path.string()},
                        {"samples", p.xi.size()},
                        {"monotone_ok", p.metrics.monotone_ok},
                        {"residual_sup", p.metrics.residual_sup}};
  out << verdict.dump(2) << '\n';
  return kExitExists;
}

int cmd_trace(const RunConfig& cfg, std::ostream& out) {
  require(cfg, kGas + kRight);
  const SystemData s = build_system(cfg.gas(), cfg.right());
  TraceOptions opts;
  opts.tol_M = cfg.tol_mach;
  const std::vector<Curve> curves = trace_all(s, opts);
  if (curves.empty()) {
    out << "supersonic far field (M+ = " << s.mach_plus << "): no existence curves\n";
    return kExitNotExists;
  }
  for (const Curve& c : curves) {
    const auto path = output_file(cfg, lower(to_string(c.label)));
    auto f = open_out(path);
    if (cfg.format == Format::Csv)
      write_curve_csv(f, c);
    else
      f << curve_json(c) << '\n';
    out << to_string(c.label) << ' ' << to_string(c.terminal) << " (" << c.terminal_point.u << ", "
        << c.terminal_point.theta << ") " << c.samples.size() << " samples -> " << path.string() << '\n';
  }
  return kExitExists;
}

int cmd_portrait(const RunConfig& cfg, std::ostream& out) {
  require(cfg, kGas + kRight);
  const SystemData s = build_system(cfg.gas(), cfg.right());
  if (classify_regime(s.mach_plus, cfg.tol_mach).tag == RegimeKind::Supersonic) {
    out << "supersonic far field (M+ = " << s.mach_plus << "): nothing to draw\n";
    return kExitNotExists;
  }
  TraceOptions topts;
  topts.tol_M = cfg.tol_mach;
  PortraitOptions popts;
  popts.trajectories = cfg.trajectories;
  popts.tol_M = cfg.tol_mach;
  const std::string svg = render_portrait(s, trace_all(s, topts), popts);
  std::filesystem::create_directories(cfg.out);
  const auto path = cfg.out / "portrait.svg";
  auto f = open_out(path);
  f << svg;
  out << "portrait -> " << path.string() << '\n';
  return kExitExists;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  require(cfg, kGas + std::vector<std::string>{"v_plus", "theta_plus"});
  if (!(cfg.mach_min < cfg.mach_max))
    throw ConfigError("field 'mach_min': must be below mach_max (" + std::to_string(cfg.mach_min) +
                      " >= " + std::to_string(cfg.mach_max) + ")");
  const GasParams gas = cfg.gas();
  const int n = cfg.points;
  std::vector<SweepRow> rows(static_cast<std::size_t>(n));

  auto evaluate = [&](int k) {
    const double M = cfg.mach_min + (cfg.mach_max - cfg.mach_min) * k / (n - 1);
    const double u = M * std::sqrt(gas.R() * gas.gamma() * *cfg.theta_plus);
    const SystemData s = build_system(gas, EndState(*cfg.v_plus, u, *cfg.theta_plus));
    SweepRow r{M, classify_regime(s.mach_plus, cfg.tol_mach).tag, s.A.det(), s.A.trace(), 0, 0, s.alpha1, s.alpha2, "NA"};
    if (r.regime == RegimeKind::Transonic) {
      r.lambda1 = 0.0;
      r.lambda2 = transonic_frame(s, cfg.tol_mach).lambda2;
    } else {
      const EigenPair e = eigen_2x2(s.A);
      r.lambda1 = e.lambda1;
      r.lambda2 = e.lambda2;
      if (r.regime == RegimeKind::Subsonic) {
        TraceOptions opts;
        opts.tol_M = cfg.tol_mach;
        r.gamma2_terminal = std::string(to_string(trace_gamma(s, e, CurveLabel::Gamma2, opts).terminal));
      }
    }
    rows[static_cast<std::size_t>(k)] = r;
  };

  // Workers pull grid indices; each row lands in its own slot.
  const int workers = std::clamp(cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency()), 1, n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          evaluate(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const std::vector<SweepRow> rows = run_sweep(cfg);
  const auto path = output_file(cfg, "sweep");
  auto f = open_out(path);
  if (cfg.format == Format::Csv) {
    f.precision(17);
    f << "mach_plus,regime,det_A,tr_A,lambda1,lambda2,alpha1,alpha2,gamma2_terminal\n";
    for (const SweepRow& r : rows)
      f << r.mach_plus << ',' << to_string(r.regime) << ',' << r.det_A << ',' << r.tr_A << ',' << r.lambda1 << ','
        << r.lambda2 << ',' << r.alpha1 << ',' << r.alpha2 << ',' << r.gamma2_terminal << '\n';
  } else {
    nlohmann::json j = nlohmann::json::array();
    for (const SweepRow& r : rows)
      j.push_back({{"mach_plus", r.mach_plus}, {"regime", to_string(r.regime)}, {"det_A", r.det_A},
                   {"tr_A", r.tr_A}, {"lambda1", r.lambda1}, {"lambda2", r.lambda2}, {"alpha1", r.alpha1},
                   {"alpha2", r.alpha2}, {"gamma2_terminal", r.gamma2_terminal}});
    f << j.dump(2) << '\n';
  }
  out << rows.size() << " rows -> " << path.string() << '\n';
  return kExitExists;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-layer existence classifier and profile tracer"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::optional<std::string> config_path;
  std::map<std::string, std::optional<std::string>> flags;
  for (const std::string& key : config_keys()) flags[key];

  using Command = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands{
      {"classify", "Decide whether a boundary layer exists (verdict JSON on stdout)", cmd_classify},
      {"trace", "Trace the existence curves of the far-field state", cmd_trace},
      {"profile", "Compute and verify the layer profile", cmd_profile},
      {"portrait", "Render the phase portrait as SVG", cmd_portrait},
      {"sweep", "Sweep the far-field Mach number", cmd_sweep}};

  std::optional<Command> chosen;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value config file");
    for (const std::string& key : config_keys()) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      sub->add_option("--" + flag, flags[key]);
    }
    sub->callback([&chosen, f = fn] { chosen = f; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    RunConfig cfg;
    if (config_path) load_file(cfg, *config_path);
    for (const std::string& key : config_keys()) {
      if (const auto& value = flags[key]) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        apply(cfg, key, *value, "--" + flag);
      }
    }
    return (*chosen)(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace blayer::cli
