// fluidq: excursion laws of stochastic fluid queues fed by local-time processes.
//
// Commands (selected with --command):
//   scale     tabulate the q-scale function W^{(q)} on a grid
//   law       evaluate a named law on a grid
//   simulate  Monte Carlo cycles (B, I, Q*), CSV samples + summary
//   validate  analytic-vs-Monte-Carlo validation suite, JSON report
//
// Exit codes: 0 success, 1 usage, 2 evaluation failure, 3 infrastructure
// failure, 4 validation failed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluidq/csv.hpp"
#include "fluidq/excursion_laws.hpp"
#include "fluidq/mc_oracle.hpp"
#include "fluidq/scale_fn.hpp"
#include "fluidq/validation.hpp"
#include "fluidq/version.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::string command;
  std::string model = "brownian";
  double c = 0.5;
  double phi = 1.0, gamma = 2.0, nu = 0.5;
  std::string out;
  std::uint64_t seed = 1;
  std::uint64_t cycles = 100000;
  double epsilon = 1e-6;
  int workers = 1;
  std::string grid = "0:5:51";
  double q = 0.0;
  std::string engine = "auto";
  std::string law = "QstarCDF";
  double alpha = 0.0, beta = 0.0;
  double x = std::numeric_limits<double>::infinity();
  double y = 0.0;
  std::string which = "busy_length";
};

std::vector<double> parse_grid(const std::string& s) {
  // "a:b:n" -> n equally spaced points from a to b inclusive
  const auto p1 = s.find(':');
  const auto p2 = s.find(':', p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos)
    throw CLI::ValidationError("--grid", "expected a:b:n");
  const double a = std::stod(s.substr(0, p1));
  const double b = std::stod(s.substr(p1 + 1, p2 - p1 - 1));
  const long n = std::stol(s.substr(p2 + 1));
  if (n < 1 || b < a) throw CLI::ValidationError("--grid", "need n >= 1 and b >= a");
  std::vector<double> g(n);
  for (long i = 0; i < n; ++i)
    g[i] = (n == 1) ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  return g;
}

// Flags override config-file values: apply the file first, then reparse the
// command line on top.
void apply_config_file(Options& o) {
  std::ifstream in(o.config_path);
  if (!in) throw std::runtime_error("cannot open config " + o.config_path);
  json j = json::parse(in);
  if (j.contains("command")) o.command = j["command"].get<std::string>();
  if (j.contains("model")) {
    const auto& m = j["model"];
    if (m.contains("kind")) o.model = m["kind"].get<std::string>();
    if (m.contains("c")) o.c = m["c"].get<double>();
    if (m.contains("phi")) o.phi = m["phi"].get<double>();
    if (m.contains("gamma")) o.gamma = m["gamma"].get<double>();
    if (m.contains("nu")) o.nu = m["nu"].get<double>();
  }
  if (j.contains("out")) o.out = j["out"].get<std::string>();
  if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("cycles")) o.cycles = j["cycles"].get<std::uint64_t>();
  if (j.contains("epsilon")) o.epsilon = j["epsilon"].get<double>();
  if (j.contains("workers")) o.workers = j["workers"].get<int>();
  if (j.contains("grid")) o.grid = j["grid"].get<std::string>();
  if (j.contains("q")) o.q = j["q"].get<double>();
  if (j.contains("engine")) o.engine = j["engine"].get<std::string>();
  if (j.contains("law")) o.law = j["law"].get<std::string>();
  if (j.contains("alpha")) o.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) o.beta = j["beta"].get<double>();
  if (j.contains("x")) o.x = j["x"].get<double>();
  if (j.contains("y")) o.y = j["y"].get<double>();
  if (j.contains("which")) o.which = j["which"].get<std::string>();
}

fluidq::LevyModel make_model(const Options& o) {
  if (o.model == "brownian") return fluidq::LevyModel::brownian(o.c);
  if (o.model == "tempered_stable" || o.model == "tempered-stable")
    return fluidq::LevyModel::tempered_stable(o.phi, o.gamma, o.nu);
  throw CLI::ValidationError("--model", "expected brownian or tempered_stable");
}

void add_provenance(fluidq::csv::Writer& w, const Options& o,
                    const fluidq::LevyModel& m) {
  w.comment("fluidq v" + std::string(fluidq::kVersion));
  w.comment("command=" + o.command);
  w.comment("model=" + m.describe());
  w.comment("seed=" + std::to_string(o.seed));
}

int cmd_scale(const Options& o) {
  const fluidq::LevyModel model = make_model(o);
  const auto grid = parse_grid(o.grid);
  if (grid.front() < 0.0) {
    std::cerr << "error: scale grid needs x_min >= 0\nusage: --command scale --grid a:b:n with a >= 0\n";
    return 1;
  }
  fluidq::ScaleFunction w = [&] {
    if (o.engine == "auto") return fluidq::ScaleFunction::make(model, o.q);
    if (o.engine == "closed_form")
      return fluidq::ScaleFunction(model, o.q, fluidq::ScaleEngine::ClosedFormBrownian);
    if (o.engine == "mittag_leffler")
      return fluidq::ScaleFunction(model, o.q, fluidq::ScaleEngine::MittagLefflerTS);
    if (o.engine == "inversion")
      return fluidq::ScaleFunction(model, o.q, fluidq::ScaleEngine::NumericInversion);
    throw CLI::ValidationError("--engine",
                               "expected auto|closed_form|mittag_leffler|inversion");
  }();
  const char* engine_name =
      w.engine() == fluidq::ScaleEngine::ClosedFormBrownian  ? "closed_form"
      : w.engine() == fluidq::ScaleEngine::MittagLefflerTS   ? "mittag_leffler"
                                                              : "inversion";
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = w(grid[i]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (values[i + 1] < values[i] * (1.0 - 1e-12))
      throw std::runtime_error("scale table violates monotonicity at x=" +
                               fluidq::csv::format(grid[i + 1]));
  }
  fluidq::csv::Writer out(o.out.empty() ? "scale.csv" : o.out);
  add_provenance(out, o, model);
  out.comment("q=" + fluidq::csv::format(o.q));
  out.header({"x", "W_q", "engine"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.row(std::vector<std::string>{fluidq::csv::format(grid[i]),
                                     fluidq::csv::format(values[i]), engine_name});
  std::cout << "wrote " << grid.size() << " rows\n";
  return 0;
}

int cmd_law(const Options& o) {
  const fluidq::LevyModel model = make_model(o);
  fluidq::LawQuery q;
  q.law = fluidq::law_from_name(o.law);
  if (q.law == fluidq::Law::BrownianDensity &&
      model.kind() != fluidq::ModelKind::BrownianLocalTime)
    throw CLI::ValidationError("--law", "BrownianDensity needs --model brownian");
  q.alpha = o.alpha;
  q.beta = o.beta;
  q.x = o.x;
  q.y = o.y;
  q.density = fluidq::density_kind_from_name(o.which);
  q.grid = parse_grid(o.grid);
  const auto values = fluidq::evaluate_law(q, model);
  fluidq::csv::Writer out(o.out.empty() ? "law.csv" : o.out);
  add_provenance(out, o, model);
  out.header({"alpha", "beta", "x", "value", "formula"});
  for (const auto& v : values)
    out.row(std::vector<std::string>{
        fluidq::csv::format(v.alpha), fluidq::csv::format(v.beta),
        fluidq::csv::format(v.x), fluidq::csv::format(v.value), v.meta});
  std::cout << "wrote " << values.size() << " rows\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  fluidq::SimConfig cfg;
  cfg.model = make_model(o);
  cfg.n_cycles = o.cycles;
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  const fluidq::CycleStats stats = fluidq::simulate_cycles(cfg);
  fluidq::write_sample_csv(stats, o.out.empty() ? "samples.csv" : o.out);
  std::cout << "n_cycles=" << cfg.n_cycles << "\n"
            << "censored=" << stats.censored << "\n"
            << "mean_b=" << stats.mean_b() << " se_b=" << stats.se_b() << "\n"
            << "mean_i=" << stats.mean_i() << " se_i=" << stats.se_i() << "\n"
            << "cycle_rate_hat=" << 1.0 / (stats.mean_b() + stats.mean_i()) << "\n"
            << "jump_rate=" << stats.jump_rate
            << " compensated_drift=" << stats.compensated_drift << "\n";
  return 0;
}

int cmd_validate(const Options& o) {
  fluidq::SimConfig cfg;
  cfg.model = make_model(o);
  cfg.n_cycles = o.cycles;
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  const fluidq::ValidationReport report = fluidq::run_validation(cfg);
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": analytic=" << c.analytic
              << " estimate=" << c.estimate << " tol=" << c.tolerance;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
  }
  const std::string path = o.out.empty() ? "validation.json" : o.out;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << report.to_json() << "\n";
  std::cout << (report.overall_pass() ? "overall: PASS" : "overall: FAIL")
            << " (report: " << path << ")\n";
  return report.overall_pass() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"fluidq: excursion laws of local-time fluid queues"};
  app.add_option("--config", o.config_path, "JSON config; flags override file values");
  app.add_option("--command", o.command, "scale | law | simulate | validate")->required(false);
  app.add_option("--model", o.model, "brownian | tempered_stable");
  app.add_option("--c", o.c, "Brownian drift parameter, queue laws need 0<c<1");
  app.add_option("--phi", o.phi, "tempered-stable phi");
  app.add_option("--gamma", o.gamma, "tempered-stable gamma");
  app.add_option("--nu", o.nu, "tempered-stable nu in (0,1)");
  app.add_option("--out", o.out, "output path (CSV or JSON report)");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--cycles", o.cycles, "Monte Carlo cycles");
  app.add_option("--epsilon", o.epsilon, "jump truncation level");
  app.add_option("--workers", o.workers, "simulation worker threads");
  app.add_option("--grid", o.grid, "evaluation grid a:b:n");
  app.add_option("--q", o.q, "scale-function parameter q");
  app.add_option("--engine", o.engine, "auto | closed_form | mittag_leffler | inversion");
  app.add_option("--law", o.law,
                 "TripleLaw|JointBI|BusyLT|IdleLT|QstarCDF|QstarTail|IdleEndpointsLT|"
                 "BusyEndpointsMaxLT|BusyEndpointsLT|QstarCondCDF|BrownianDensity");
  app.add_option("--alpha", o.alpha, "transform argument alpha");
  app.add_option("--beta", o.beta, "transform argument beta");
  app.add_option("--x", o.x, "level / upper bound x (inf allowed)");
  app.add_option("--y", o.y, "second coordinate for the joint density");
  app.add_option("--which", o.which, "brownian density: busy_length|g1|d0_idle|joint_d0_g1");

  try {
    app.parse(argc, argv);
    if (!o.config_path.empty()) {
      apply_config_file(o);
      app.clear();
      app.parse(argc, argv);  // flags take precedence over the file
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const fluidq::LevyModel model = make_model(o);
    const auto violations = fluidq::validate(model);
    if (!violations.empty() && o.command != "scale") {
      std::cerr << "error: invalid model:";
      for (const auto& v : violations) std::cerr << " [" << v << "]";
      std::cerr << "\n";
      return 1;
    }
    if (o.command == "scale") return cmd_scale(o);
    if (o.command == "law") return cmd_law(o);
    if (o.command == "simulate") return cmd_simulate(o);
    if (o.command == "validate") return cmd_validate(o);
    std::cerr << "error: --command must be one of scale|law|simulate|validate\n"
              << app.help();
    return 1;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    // quadrature/inversion failures are evaluation errors; I/O problems are
    // infrastructure
    const std::string msg = e.what();
    if (msg.find("cannot open") != std::string::npos ||
        msg.find("write failure") != std::string::npos) {
      std::cerr << "infrastructure error: " << msg << "\n";
      return 3;
    }
    std::cerr << "evaluation error: " << msg << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "infrastructure error: " << e.what() << "\n";
    return 3;
  }
}
