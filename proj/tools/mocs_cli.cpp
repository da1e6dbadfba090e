// mocs_cli - command-line front end: F tables, ratios, certificates and the
// Monte Carlo experiments. Every subcommand writes a JSON report (stdout or
// --out) and exits 0 iff all of its checks pass.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mocs/harness.hpp"

namespace {

using mocs::harness::Json;

struct Common {
  mocs::harness::ExperimentConfig cfg;
  std::string out;
  std::string config_file;
  bool trials_set = false;
};

void add_common(CLI::App* sub, Common& c, bool monte_carlo) {
  sub->add_option("--p", c.cfg.params.p, "seed-process reset probability");
  sub->add_option("--m", c.cfg.params.m, "selector arity m");
  sub->add_option("--y-max", c.cfg.params.y_max, "seed counter cap");
  sub->add_option("--n", c.cfg.n_max, "largest n tabulated exactly");
  sub->add_option("--seed", c.cfg.seed, "master seed");
  sub->add_option("--out", c.out, "report path (JSON); CSV tables go next to it");
  sub->add_option("--config", c.config_file, "JSON file with any of the above keys");
  if (monte_carlo) {
    sub->add_option("--trials", c.cfg.trials, "Monte Carlo trials")->each([&c](const std::string&) {
      c.trials_set = true;
    });
    sub->add_option("--sigma", c.cfg.sigma, "tolerance in standard errors");
    sub->add_option("--threads", c.cfg.threads, "worker threads (0 = all cores)");
  }
}

/// Config file values first, then explicit flags win: re-parse is avoided by
/// applying the file only to keys whose flag was not given.
void resolve(CLI::App* sub, Common& c) {
  if (c.config_file.empty()) return;
  std::ifstream in(c.config_file);
  if (!in) throw std::runtime_error("cannot open config file " + c.config_file);
  const Json j = Json::parse(in);
  mocs::harness::ExperimentConfig from_file = c.cfg;
  mocs::harness::config_from_json(j, from_file);
  auto given = [sub](const char* flag) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (!given("--p")) c.cfg.params.p = from_file.params.p;
  if (!given("--m")) c.cfg.params.m = from_file.params.m;
  if (!given("--y-max")) c.cfg.params.y_max = from_file.params.y_max;
  if (!given("--n")) c.cfg.n_max = from_file.n_max;
  if (!given("--seed")) c.cfg.seed = from_file.seed;
  if (!c.trials_set) c.cfg.trials = from_file.trials;
  if (!given("--sigma") && j.contains("sigma")) c.cfg.sigma = from_file.sigma;
  if (!given("--threads") && j.contains("threads")) c.cfg.threads = from_file.threads;
}

std::string csv_path(const std::string& out, const std::string& suffix) {
  const auto dot = out.rfind('.');
  const std::string stem = (dot == std::string::npos || out.find('/', dot) != std::string::npos) ? out : out.substr(0, dot);
  return stem + suffix + ".csv";
}

void emit(const Common& c, const Json& report) {
  const std::string text = report.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
}

void emit_csv(const Common& c, const std::string& suffix, const std::string& header,
              const std::vector<std::string>& rows) {
  if (c.out.empty()) return;
  std::ofstream f(csv_path(c.out, suffix), std::ios::binary);
  f << header << "\n";
  for (const auto& r : rows) f << r << "\n";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json ratio_report_json(const mocs::RatioReport& rep) {
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"detail", c.detail}});
  return {{"gamma", rep.gamma}, {"m_bound", rep.m_bound}, {"r_bound", rep.r_bound}, {"checks", checks},
          {"all_pass", rep.all_pass()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiway online correlated selection: tables, ratios and experiments"};
  app.require_subcommand(1);

  Common c;
  double fahrbach = -1.0;
  bool independent = false;
  std::string script_file, instance_file;
  bool with_consistency = false;
  double p2 = -1.0, p3 = -1.0;

  auto* compute_f = app.add_subcommand("compute-f", "tabulate F(0..n)");
  add_common(compute_f, c, false);
  auto* gamma = app.add_subcommand("gamma", "competitive ratio and side conditions");
  add_common(gamma, c, false);
  gamma->add_option("--fahrbach", fahrbach, "use the two-way gamma-OCS parameter function instead");
  gamma->add_flag("--independent", independent, "use F(n) = (1 - 1/m)^n");
  auto* check_small = app.add_subcommand("check-small", "sufficiency certificate for every multiplicity");
  add_common(check_small, c, false);
  auto* sim_ocs = app.add_subcommand("simulate-ocs", "never-win and gap-property Monte Carlo");
  add_common(sim_ocs, c, true);
  sim_ocs->add_option("--script", script_file, "JSON file with a list of scripts");
  sim_ocs->add_flag("--consistency", with_consistency, "also run the tournament consistency and KS checks");
  auto* sim_match = app.add_subcommand("simulate-matching", "matching benchmark against the offline optimum");
  add_common(sim_match, c, true);
  sim_match->add_option("--instance", instance_file, "instance JSON (default: built-in benchmark set)");
  auto* sweep = app.add_subcommand("sweep-p", "Gamma over p = 0.05..0.95");
  add_common(sweep, c, false);
  auto* stress = app.add_subcommand("stress-negative", "two-way impossibility arithmetic and empirical probe");
  add_common(stress, c, true);
  stress->add_option("--p2", p2, "evaluate the arithmetic at (p2, p3) only");
  stress->add_option("--p3", p3, "see --p2");
  auto* na = app.add_subcommand("na-test", "negative-association covariance battery");
  add_common(na, c, true);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    resolve(sub, c);
    const bool mc = sub == sim_ocs || sub == sim_match || sub == stress || sub == na;
    if (!c.trials_set && c.config_file.empty() && sub == sim_match) c.cfg.trials = 10000;
    if (mc) c.cfg.validate();
    else c.cfg.params.validate();
    Json report = {{"command", sub->get_name()}, {"config", mocs::harness::config_to_json(c.cfg)}};
    bool pass = true;

    if (sub == compute_f) {
      const auto table = mocs::compute_F(mocs::build_win_model(c.cfg.params), c.cfg.n_max);
      report["F"] = table.head;
      report["tail_ratio"] = table.tail_ratio;
      std::vector<std::string> rows;
      for (std::size_t n = 0; n < table.head.size(); ++n) rows.push_back(std::to_string(n) + "," + num(table.head[n]));
      emit_csv(c, "", "n,F", rows);
    } else if (sub == gamma) {
      mocs::DiscreteF F;
      if (fahrbach >= 0.0) {
        F = mocs::DiscreteF::fahrbach(fahrbach);
        report["closed_form"] = mocs::gamma_fahrbach(fahrbach);
      } else if (independent) {
        F = mocs::DiscreteF::independent(c.cfg.params.m);
      } else {
        F = mocs::DiscreteF::from_table(mocs::compute_F(mocs::build_win_model(c.cfg.params), c.cfg.n_max));
      }
      const auto rep = mocs::check_conditions(F);
      report["ratio"] = ratio_report_json(rep);
      report["gamma"] = mocs::gamma_discrete(F);
      pass = rep.all_pass();
    } else if (sub == check_small) {
      const auto model = mocs::build_win_model(c.cfg.params);
      Json certs = Json::array();
      std::vector<std::string> rows;
      std::vector<mocs::ExactDistribution> dists;
      for (int r = 1; r < c.cfg.params.m; ++r) {
        const auto cert = mocs::check_small(model, r);
        certs.push_back({{"r", r}, {"holds", cert.holds}, {"min_gap", cert.min_gap}, {"argmin", cert.argmin}});
        pass = pass && cert.holds;
        dists.push_back(mocs::enumerate_prefix(model, r));
      }
      for (int k = 0; k <= 1000; ++k) {
        const double t = k / 1000.0;
        std::string row = num(t);
        for (int r = 1; r < c.cfg.params.m; ++r)
          row += "," + num(mocs::small_gap_at(dists[static_cast<std::size_t>(r - 1)], c.cfg.params.m, r, t));
        rows.push_back(row);
      }
      std::string header = "t";
      for (int r = 1; r < c.cfg.params.m; ++r) header += ",g_r" + std::to_string(r);
      emit_csv(c, "_gap", header, rows);
      report["certificates"] = certs;
    } else if (sub == sim_ocs) {
      const auto model = mocs::build_ocs_model(c.cfg.params);
      const auto table = mocs::compute_F(model->win, c.cfg.n_max);
      std::vector<mocs::harness::SequenceSpec> scripts = mocs::harness::default_scripts();
      if (!script_file.empty()) {
        std::ifstream in(script_file);
        if (!in) throw std::runtime_error("cannot open script file " + script_file);
        scripts.clear();
        for (const auto& s : Json::parse(in)) scripts.push_back(mocs::harness::spec_from_json(s));
      }
      Json never = Json::array();
      for (const auto& s : scripts) {
        const auto r = mocs::harness::mc_never_win(s, model, table, c.cfg);
        never.push_back(mocs::harness::to_json(r));
        pass = pass && r.pass;
      }
      Json gaps = Json::array();
      const auto F = mocs::DiscreteF::from_table(table);
      for (const auto& g : mocs::harness::default_gap_specs()) {
        const auto r = mocs::harness::mc_gap_property(g, model, F, c.cfg);
        gaps.push_back(mocs::harness::to_json(r));
        pass = pass && r.pass;
      }
      report["never_win"] = never;
      report["gap_property"] = gaps;
      if (with_consistency) {
        Json rows = Json::array(), ks = Json::array();
        for (int r = 1; r < model->m(); ++r) {
          for (std::size_t atom : mocs::harness::consistency_atoms(model->coupling(r), 8)) {
            const auto row = mocs::harness::mc_win_given_w(*model, r, atom, c.cfg);
            rows.push_back(mocs::harness::to_json(row));
            pass = pass && row.pass;
          }
          const auto k = mocs::harness::strength_ks(*model, r, c.cfg);
          ks.push_back(mocs::harness::to_json(k));
          pass = pass && k.pass;
        }
        report["consistency"] = rows;
        report["strength_ks"] = ks;
      }
    } else if (sub == sim_match) {
      const auto model = mocs::build_ocs_model(c.cfg.params);
      const auto F = mocs::DiscreteF::from_table(mocs::compute_F(model->win, c.cfg.n_max));
      std::vector<std::pair<std::string, mocs::Instance>> instances;
      if (instance_file.empty()) {
        instances = mocs::harness::benchmark_instances();
      } else {
        std::ifstream in(instance_file);
        if (!in) throw std::runtime_error("cannot open instance file " + instance_file);
        instances.emplace_back(instance_file, mocs::instance_from_json(Json::parse(in)));
      }
      std::size_t longest = 1;
      for (const auto& [name, inst] : instances) longest = std::max(longest, inst.num_online());
      const mocs::DualTables tables(F, static_cast<double>(longest) + 1.0);
      Json reports = Json::array();
      std::vector<std::string> rows, traj;
      for (const auto& [name, inst] : instances) {
        const auto r = mocs::harness::simulate_matching(name, inst, tables, model, c.cfg);
        reports.push_back(mocs::harness::to_json(r));
        pass = pass && r.pass();
        for (std::size_t t = 0; t < r.weights.size(); ++t)
          rows.push_back(name + "," + std::to_string(t) + "," + num(r.weights[t]) + "," + num(r.opt) + "," +
                         num(r.opt > 0 ? r.weights[t] / r.opt : 1.0));
        for (std::size_t j = 0; j < r.plan.steps.size(); ++j)
          traj.push_back(name + "," + std::to_string(j) + "," + num(r.plan.steps[j].primal) + "," +
                         num(r.plan.steps[j].dual));
      }
      emit_csv(c, "_trials", "instance,trial,matched_weight,opt,ratio", rows);
      emit_csv(c, "_trajectory", "instance,step,primal,dual", traj);
      report["instances"] = reports;
    } else if (sub == sweep) {
      const auto rows = mocs::harness::sweep_p(c.cfg.params, c.cfg.n_max);
      report["sweep"] = mocs::harness::sweep_to_json(rows);
      pass = report["sweep"]["pass"].get<bool>();
      std::vector<std::string> lines;
      for (const auto& r : rows) lines.push_back(num(r.p) + "," + num(r.gamma) + "," + (r.small_holds ? "1" : "0"));
      emit_csv(c, "", "p,gamma,small_holds", lines);
    } else if (sub == stress) {
      if (p2 >= 0.0 || p3 >= 0.0) {
        if (p2 < 0.0 || p3 < 0.0) throw std::invalid_argument("--p2 and --p3 go together");
        report["arith"] = mocs::harness::to_json(mocs::harness::negative_arith(p2, p3));
      } else {
        report["stress"] = mocs::harness::stress_negative(c.cfg);
        pass = report["stress"]["pass"].get<bool>();
      }
    } else if (sub == na) {
      report["na"] = mocs::harness::na_test(mocs::build_win_model(c.cfg.params), c.cfg);
      pass = report["na"]["pass"].get<bool>();
    }
    report["pass"] = pass;
    emit(c, report);
    return pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
