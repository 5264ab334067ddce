#include "forqlab/cli_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace forqlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double parse_number(const std::string& key, const std::string& raw) {
  std::string v = raw;
  v.erase(0, v.find_first_not_of(" \t"));
  v.erase(v.find_last_not_of(" \t") + 1);
  if (v == "inf" || v == "infinity" || v == "Inf") return kInfinity;
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not a number");
  }
  if (used != v.size()) throw ConfigError("key '" + key + "': '" + raw + "' is not a number");
  return out;
}

int parse_int(const std::string& key, const std::string& raw) {
  const double v = parse_number(key, raw);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError("key '" + key + "': '" + raw + "' is not an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_number(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <class F>
Setter number_into(F field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    field(c) = parse_number(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["params.s"] = number_into([](ExperimentConfig& c) -> double& { return c.params.s; });
    t["params.p"] = number_into([](ExperimentConfig& c) -> double& { return c.params.p; });
    t["params.r"] = number_into([](ExperimentConfig& c) -> double& { return c.params.r; });
    t["params.delta"] = number_into([](ExperimentConfig& c) -> double& { return c.params.delta; });
    t["params.sigma"] = number_into([](ExperimentConfig& c) -> double& { return c.params.sigma; });

    t["experiment.n_values"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.n_values.clear();
      for (double x : parse_list(k, v)) c.n_values.push_back(parse_int(k, format_double(x)));
    };
    t["experiment.times"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.times = parse_list(k, v);
    };
    t["experiment.t_fit_times"] = [](ExperimentConfig& c, const std::string& k,
                                     const std::string& v) { c.t_fit_times = parse_list(k, v); };
    t["experiment.approx_time"] =
        number_into([](ExperimentConfig& c) -> double& { return c.approx_time; });
    t["experiment.sign_compare_time"] =
        number_into([](ExperimentConfig& c) -> double& { return c.sign_compare_time; });
    t["experiment.sign_compare_n"] = [](ExperimentConfig& c, const std::string& k,
                                        const std::string& v) { c.sign_compare_n = parse_int(k, v); };
    t["experiment.workers"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.workers = parse_int(k, v);
    };
    t["experiment.random_fields"] = [](ExperimentConfig& c, const std::string& k,
                                       const std::string& v) { c.random_fields = parse_int(k, v); };
    t["experiment.seed"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      try {
        c.seed = std::stoull(v);
      } catch (const std::exception&) {
        throw ConfigError("key '" + k + "': '" + v + "' is not an unsigned integer");
      }
    };
    t["experiment.w_sign"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      if (v == "minus") c.w_sign = WSign::minus;
      else if (v == "plus") c.w_sign = WSign::plus;
      else throw ConfigError("key '" + k + "' must be plus or minus");
    };

#define FORQLAB_TOL(name) \
  t["tolerances." #name] = number_into([](ExperimentConfig& c) -> double& { return c.tol.name; })
    FORQLAB_TOL(slope);
    FORQLAB_TOL(corollary_slope);
    FORQLAB_TOL(approx_slope);
    FORQLAB_TOL(constant_spread);
    FORQLAB_TOL(closed_form);
    FORQLAB_TOL(max_min_ratio);
    FORQLAB_TOL(partition);
    FORQLAB_TOL(reconstruction);
    FORQLAB_TOL(localization);
    FORQLAB_TOL(c_hat_stability);
    FORQLAB_TOL(separation_factor);
    FORQLAB_TOL(theta_slack);
    FORQLAB_TOL(aux_growth);
    FORQLAB_TOL(d0_ratio);
    FORQLAB_TOL(blocks_ratio_low);
    FORQLAB_TOL(blocks_ratio_high);
    FORQLAB_TOL(mass_drift);
#undef FORQLAB_TOL

    t["solver.dt"] = number_into([](ExperimentConfig& c) -> double& { return c.solver.dt; });
    t["solver.cfl"] = number_into([](ExperimentConfig& c) -> double& { return c.solver.cfl; });
    t["solver.blowup_threshold"] =
        number_into([](ExperimentConfig& c) -> double& { return c.solver.blowup_threshold; });

    t["grid.tail_tol"] = number_into([](ExperimentConfig& c) -> double& { return c.sizing.tail_tol; });
    t["grid.margin"] = number_into([](ExperimentConfig& c) -> double& { return c.sizing.margin; });
    t["grid.min_half_length"] =
        number_into([](ExperimentConfig& c) -> double& { return c.sizing.min_half_length; });
    t["grid.max_points"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      const int e = parse_int(k, v);
      if (e < 4) throw ConfigError("key '" + k + "' must be >= 4");
      c.sizing.max_points = static_cast<std::size_t>(e);
    };
    return t;
  }();
  return table;
}

json config_json(const ExperimentConfig& c) {
  auto num_or_inf = [](double v) -> json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  json tol = {{"slope", c.tol.slope},
              {"corollary_slope", c.tol.corollary_slope},
              {"approx_slope", c.tol.approx_slope},
              {"constant_spread", c.tol.constant_spread},
              {"closed_form", c.tol.closed_form},
              {"max_min_ratio", c.tol.max_min_ratio},
              {"partition", c.tol.partition},
              {"reconstruction", c.tol.reconstruction},
              {"localization", c.tol.localization},
              {"c_hat_stability", c.tol.c_hat_stability},
              {"separation_factor", c.tol.separation_factor},
              {"theta_slack", c.tol.theta_slack},
              {"aux_growth", c.tol.aux_growth},
              {"d0_ratio", c.tol.d0_ratio},
              {"blocks_ratio_low", c.tol.blocks_ratio_low},
              {"blocks_ratio_high", c.tol.blocks_ratio_high},
              {"mass_drift", c.tol.mass_drift}};
  return {{"params",
           {{"s", c.params.s},
            {"p", num_or_inf(c.params.p)},
            {"r", c.params.r},
            {"delta", c.params.delta},
            {"sigma", c.params.sigma}}},
          {"experiment",
           {{"n_values", c.n_values},
            {"times", c.times},
            {"t_fit_times", c.t_fit_times},
            {"approx_time", c.approx_time},
            {"sign_compare_n", c.sign_compare_n},
            {"sign_compare_time", c.sign_compare_time},
            {"w_sign", c.w_sign == WSign::minus ? "minus" : "plus"},
            {"workers", c.workers},
            {"random_fields", c.random_fields},
            {"seed", c.seed}}},
          {"tolerances", tol},
          {"solver",
           {{"dt", c.solver.dt}, {"cfl", c.solver.cfl}, {"blowup_threshold", c.solver.blowup_threshold}}},
          {"grid",
           {{"tail_tol", c.sizing.tail_tol},
            {"margin", c.sizing.margin},
            {"min_half_length", c.sizing.min_half_length},
            {"max_points", c.sizing.max_points}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw std::ios_base::failure("write to " + path.string() + " failed");
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  std::optional<int> n_min, n_max;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' appears outside a section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string value = node.data();
      if (full == "experiment.n_min") {
        n_min = parse_int(full, value);
      } else if (full == "experiment.n_max") {
        n_max = parse_int(full, value);
      } else if (auto it = setters().find(full); it != setters().end()) {
        it->second(cfg, full, value);
      } else {
        throw ConfigError("unknown config key '" + full + "'");
      }
    }
  }
  if (n_min || n_max) {
    const int lo = n_min.value_or(cfg.n_values.front());
    const int hi = n_max.value_or(cfg.n_values.back());
    if (hi < lo) throw ConfigError("n_max must be >= n_min");
    cfg.n_values.clear();
    for (int n = lo; n <= hi; ++n) cfg.n_values.push_back(n);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<ReportRow>& rows) {
  std::string out = "experiment,n,t,quantity,value\n";
  for (const auto& r : rows) {
    out += r.experiment + ',' + std::to_string(r.n) + ',' + format_double(r.t) + ',' + r.quantity +
           ',' + format_double(r.value) + '\n';
  }
  write_text(path, out);
}

std::vector<ReportRow> read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::ios_base::failure("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "experiment,n,t,quantity,value")
    throw std::runtime_error(path.string() + ": missing CSV header");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string e, n, t, q, v;
    if (!std::getline(ss, e, ',') || !std::getline(ss, n, ',') || !std::getline(ss, t, ',') ||
        !std::getline(ss, q, ',') || !std::getline(ss, v))
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    rows.push_back({e, std::stoi(n), std::stod(t), q, std::stod(v)});
  }
  return rows;
}

void write_verdicts(const fs::path& path, const std::vector<Verdict>& verdicts) {
  json arr = json::array();
  for (const auto& v : verdicts) {
    arr.push_back({{"id", v.id},
                   {"measured", finite_or_string(v.measured)},
                   {"expected", finite_or_string(v.expected)},
                   {"tolerance", v.tolerance},
                   {"relation", v.relation},
                   {"pass", v.pass}});
  }
  write_text(path, arr.dump(2) + "\n");
}

void write_fits(const fs::path& path, const std::vector<FitRecord>& fits) {
  json arr = json::array();
  for (const auto& f : fits) {
    arr.push_back({{"experiment", f.experiment},
                   {"quantity", f.quantity},
                   {"slope", f.slope},
                   {"predicted", f.predicted},
                   {"intercept", f.intercept},
                   {"residual", f.residual},
                   {"points", f.points}});
  }
  write_text(path, arr.dump(2) + "\n");
}

namespace {

ExperimentReport exp_evolve(Laboratory& lab, std::vector<ReportRow>& steps) {
  const std::string id = "evolve";
  const ExperimentConfig& cfg = lab.config();
  ExperimentReport rep;
  double worst = 0.0;
  for (Family fam : {Family::u, Family::v}) {
    lab.solve_all(fam);
    const std::string name = fam == Family::u ? "u" : "v";
    for (int n : cfg.n_values) {
      const SolveOutcome& o = lab.solution(fam, n);
      if (!o.trajectory) {
        rep.add_verdict({id + ".no_blowup." + name + ".n=" + std::to_string(n), 1.0, 0.0, 0.0,
                         "at_most", false});
        continue;
      }
      const Trajectory& tr = *o.trajectory;
      for (const auto& d : tr.diagnostics()) {
        steps.push_back({id, n, d.time, name + "_mass", d.mass});
        steps.push_back({id, n, d.time, name + "_linf", d.linf});
        steps.push_back({id, n, d.time, name + "_dx_linf", d.dx_linf});
      }
      for (const auto& snap : tr.snapshots()) {
        const RealField field = tr.initial() + snap.displacement;
        rep.add_row(id, n, snap.time, name + "_Bs", lab.besov(field, cfg.params.s));
        rep.add_row(id, n, snap.time, name + "_Linf", field.max_abs());
        rep.add_row(id, n, snap.time, name + "_minus_initial_Bs",
                    lab.besov(snap.displacement, cfg.params.s));
      }
      // Drift relative to |u0|_{L^1}; the mass of u0n itself vanishes.
      double scale = 0.0;
      for (double x : tr.initial().samples()) scale += std::abs(x);
      scale *= lab.grid().dx();
      if (scale == 0.0) scale = 1.0;
      const double m0 = tr.diagnostics().front().mass;
      double drift = 0.0;
      for (const auto& d : tr.diagnostics()) drift = std::max(drift, std::abs(d.mass - m0) / scale);
      rep.add_row(id, n, 0.0, name + "_mass_rel_drift", drift);
      worst = std::max(worst, drift);
    }
  }
  rep.add_verdict(verdict_below(id + ".mass_drift", worst, cfg.tol.mass_drift));
  return rep;
}

struct Output {
  std::string file;
  std::vector<ReportRow> rows;
};

}  // namespace

int run(const std::string& subcommand, const ExperimentConfig& cfg, const fs::path& out_dir,
        std::ostream& log) {
  const auto& known = subcommands();
  if (std::find(known.begin(), known.end(), subcommand) == known.end())
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");

  fs::create_directories(out_dir);
  Laboratory lab(cfg);
  const Grid& g = lab.grid();

  json manifest = {{"tool", "forqlab"},
                   {"version", kToolVersion},
                   {"subcommand", subcommand},
                   {"config", config_json(cfg)},
                   {"grid",
                    {{"L", g.half_length()},
                     {"N", g.size()},
                     {"K_keep", g.keep_cutoff()},
                     {"q_max", lab.partition().q_max()}}},
                   {"status", "running"},
                   {"experiments", json::array()},
                   {"outputs", json::array()}};
  const fs::path manifest_path = out_dir / "manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");

  ExperimentReport all;
  std::vector<Output> outputs;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    log << "[forqlab] " << name << " ..." << std::endl;
    const auto start = std::chrono::steady_clock::now();
    body();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["experiments"].push_back({{"name", name}, {"wall_seconds", secs}});
    log << "[forqlab] " << name << " done in " << secs << " s" << std::endl;
  };
  auto simple = [&](const std::string& name, const std::string& file,
                    ExperimentReport (*fn)(Laboratory&)) {
    if (subcommand != name && subcommand != "all") return;
    stage(name, [&] {
      ExperimentReport rep = fn(lab);
      outputs.push_back({file, rep.rows()});
      all.append(rep);
    });
  };

  simple("lp-check", "lp_check.csv", exp_lp_check);
  simple("lemma-scalings", "lemma_scalings.csv", exp_lemma_scalings);
  simple("corollary", "corollary.csv", exp_corollary);
  simple("convergence", "convergence.csv", exp_convergence_u);
  simple("approx-error", "approx_error.csv", exp_approx_error);
  simple("lower-bound", "lower_bound.csv", exp_lower_bound);
  if (subcommand == "nonuniform" || subcommand == "all") {
    stage("nonuniform", [&] {
      ExperimentReport rep = exp_nonuniform(lab);
      Output d0{"d0.csv", {}}, dt{"dt.csv", {}};
      for (const auto& r : rep.rows()) {
        if (r.quantity == "d0") d0.rows.push_back(r);
        else if (r.quantity == "d") dt.rows.push_back(r);
        else {
          d0.rows.push_back(r);
          dt.rows.push_back(r);
        }
      }
      outputs.push_back(std::move(d0));
      outputs.push_back(std::move(dt));
      all.append(rep);
    });
  }
  if (subcommand == "evolve" || subcommand == "all") {
    stage("evolve", [&] {
      std::vector<ReportRow> steps;
      ExperimentReport rep = exp_evolve(lab, steps);
      outputs.push_back({"trajectory.csv", std::move(steps)});
      outputs.push_back({"snapshots.csv", rep.rows()});
      all.append(rep);
    });
  }

  for (const auto& o : outputs) {
    write_csv(out_dir / o.file, o.rows);
    manifest["outputs"].push_back(o.file);
  }
  write_verdicts(out_dir / "verdicts.json", all.verdicts());
  write_fits(out_dir / "fits.json", all.fits());
  manifest["outputs"].push_back("verdicts.json");
  manifest["outputs"].push_back("fits.json");

  std::size_t failed = 0;
  for (const auto& v : all.verdicts()) {
    log << (v.pass ? "PASS " : "FAIL ") << v.id << "  measured=" << format_double(v.measured)
        << " " << v.relation << " expected=" << format_double(v.expected)
        << " tol=" << format_double(v.tolerance) << "\n";
    if (!v.pass) ++failed;
  }
  manifest["status"] = failed == 0 ? "pass" : "fail";
  manifest["verdicts"] = {{"total", all.verdicts().size()}, {"failed", failed}};
  write_text(manifest_path, manifest.dump(2) + "\n");
  return failed == 0 ? 0 : 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"forqlab: FORQ non-uniform dependence laboratory"};
  app.name("forqlab");
  std::string subcommand, config_path, out_dir, w_sign;
  int workers = 0;
  app.add_option("subcommand", subcommand, "lp-check | lemma-scalings | corollary | convergence | "
                                           "approx-error | lower-bound | nonuniform | evolve | all")
      ->required();
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "output directory (FORQLAB_OUT overrides)");
  app.add_option("--workers", workers, "parallel solves")->check(CLI::PositiveNumber);
  app.add_option("--w-sign", w_sign, "sign of the approximate solution")
      ->check(CLI::IsMember({"plus", "minus"}));

  const std::string usage = app.help();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << usage;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "forqlab: " << e.what() << "\n" << usage;
    return 2;
  }
  const auto& known = subcommands();
  if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
    err << "forqlab: unknown subcommand '" << subcommand << "'\n" << usage;
    return 2;
  }
  if (const char* env = std::getenv("FORQLAB_OUT"); env && *env) out_dir = env;
  if (out_dir.empty()) {
    err << "forqlab: --out (or FORQLAB_OUT) is required\n" << usage;
    return 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (workers > 0) cfg.workers = workers;
    if (!w_sign.empty()) cfg.w_sign = w_sign == "plus" ? WSign::plus : WSign::minus;
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "forqlab: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "forqlab: invalid configuration: " << e.what() << "\n";
    return 3;
  }

  try {
    return run(subcommand, cfg, out_dir, err);
  } catch (const fs::filesystem_error& e) {
    err << "forqlab: " << e.what() << "\n";
    return 4;
  } catch (const std::ios_base::failure& e) {
    err << "forqlab: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace forqlab
