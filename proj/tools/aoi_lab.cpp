// aoi_lab: analytic evaluation, chain solving, simulation and three-way
// comparison of discrete-time status-updating queues, as machine-readable
// tables (CSV or JSON).

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aoi/analytic.hpp"
#include "aoi/chain.hpp"
#include "aoi/report.hpp"
#include "aoi/sim.hpp"

namespace {

using namespace aoi;

constexpr int kExitTolerance = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSingular = 3;

struct RunRequest {
  std::string subcommand;
  std::string model_name = "ber-geo-1-1";
  double p = 0.2;
  double gamma = 0.5;
  int n_p = -1;  // -1: pick the smallest valid N_p when needed
  int c = 3;
  std::string service_file;

  int n_max = kDefaultNMax;
  int chain_n = 600;
  long long slots = 5'000'000;
  long long warmup = 10'000;
  std::uint64_t seed = 1;
  std::string sim_mode = "physical";
  int kernel_n = 512;

  double tol = 1e-12;
  long max_iters = 200000;
  std::string method = "auto";
  std::uint64_t state_budget = kDefaultStateBudget;
  std::string dump_kernel_path;

  int violation_k = 0;
  int figure = 0;
  double tv_analytic_chain = 1e-5;
  double tv_sim_analytic = 0.01;

  std::string format = "csv";
  std::string output;

  ServiceDistribution load_service() const {
    std::ifstream in(service_file);
    if (!in) throw InvalidParams("cannot open service pmf file " + service_file);
    std::vector<double> q;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      int j;
      char comma;
      double qj;
      if (!(ls >> j >> comma >> qj) || comma != ',' || j < 1)
        throw InvalidParams("service pmf line must be 'j,q_j': " + line);
      if (j > 100000) throw InvalidParams("service support index too large");
      if (static_cast<int>(q.size()) < j) q.resize(j, 0.0);
      q[j - 1] = qj;
    }
    if (q.empty()) throw InvalidParams("service pmf file is empty");
    double total = 0.0;
    for (double v : q) total += v;
    return ServiceDistribution::general(std::move(q), std::max(0.0, 1.0 - total));
  }

  ModelSpec build_model() const {
    SystemParams params(p, gamma);
    if (model_name == "ber-geo-1-1") return ModelSpec::ber_geo11(params);
    if (model_name == "ber-geo-1-2") return ModelSpec::ber_geo12(params);
    if (model_name == "ber-geo-1-2star") return ModelSpec::ber_geo12_star(params);
    if (model_name == "ber-geo-1-c") return ModelSpec::ber_geo1c(params, c);
    if (model_name == "ber-geo-1-1-gtilde") {
      int np = n_p >= 0 ? n_p : PreemptionPolicy::default_n_p(p);
      return ModelSpec::ber_g11(params, ServiceDistribution::geometric(gamma),
                                PreemptionPolicy::paper_gtilde(np));
    }
    if (model_name == "ber-g-1-1") {
      PreemptionPolicy pre = n_p >= 0 ? PreemptionPolicy::paper_gtilde(n_p)
                                      : PreemptionPolicy::none();
      return ModelSpec::ber_g11(params, load_service(), pre);
    }
    throw InvalidParams("unknown model '" + model_name +
                        "' (expected ber-geo-1-1, ber-geo-1-1-gtilde, ber-g-1-1, "
                        "ber-geo-1-2, ber-geo-1-2star, ber-geo-1-c)");
  }

  SolveMethod solve_method() const {
    if (method == "auto") return SolveMethod::Auto;
    if (method == "power") return SolveMethod::Power;
    if (method == "gauss-seidel") return SolveMethod::GaussSeidel;
    if (method == "direct") return SolveMethod::Direct;
    throw InvalidParams("unknown solve method '" + method + "'");
  }
};

void emit(const RunRequest& req, const ResultTable& table) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!req.output.empty()) {
    file.open(req.output, std::ios::binary);  // LF endings everywhere
    if (!file) throw InvalidParams("cannot open output path " + req.output);
    os = &file;
  }
  if (req.format == "csv")
    write_csv(*os, table);
  else if (req.format == "json")
    write_json(*os, table);
  else
    throw InvalidParams("unknown format '" + req.format + "'");
}

void add_violation_meta(const RunRequest& req, const ModelSpec& model, ResultTable& t) {
  if (req.violation_k <= 0) return;
  ViolationReport rep = violation_report(model, req.violation_k);
  t.meta["violation_k"] = rep.k;
  t.meta["p_violation"] = rep.p_violation;
  t.meta["exponent"] = rep.exponent;
  if (rep.lower_bound) t.meta["exponent_lower_bound"] = *rep.lower_bound;
}

ResultTable figure_table(int figure);

int cmd_analytic(const RunRequest& req) {
  if (req.figure > 0) {
    emit(req, figure_table(req.figure));
    return 0;
  }
  ModelSpec model = req.build_model();
  if (!has_closed_form(model))
    throw InvalidParams("model " + model.name() + " has no closed form; use `chain`");

  ResultTable t;
  t.text_meta["model"] = model.name();
  t.meta["p"] = req.p;
  t.meta["gamma"] = req.gamma;
  Pmf pmf = analytic_aoi_pmf(model, req.n_max);
  t.meta["aoi_tail_bound"] = pmf.tail_bound;

  bool size2 = model.capacity() == 2;
  if (size2) {
    Pmf tm = model.kind() == QueueKind::BerGeo12Star
                 ? ber_geo12star_system_time_pmf(model.params(), req.n_max)
                 : ber_geo12_system_time_pmf(model.params(), req.n_max);
    Pmf wm = model.kind() == QueueKind::BerGeo12Star
                 ? ber_geo12star_waiting_time_pmf(model.params(), req.n_max)
                 : ber_geo12_waiting_time_pmf(model.params(), req.n_max);
    t.headers = {"n", "pmf", "cdf", "system_time_pmf", "waiting_time_pmf"};
    double cdf = 0.0;
    for (int n = 0; n <= req.n_max; ++n) {
      cdf += pmf.at(n);
      t.rows.push_back({static_cast<double>(n), pmf.at(n), cdf, tm.at(n), wm.at(n)});
    }
  } else {
    t.headers = {"n", "pmf", "cdf"};
    double cdf = 0.0;
    for (int n = 1; n <= req.n_max; ++n) {
      cdf += pmf.at(n);
      t.rows.push_back({static_cast<double>(n), pmf.at(n), cdf});
    }
  }
  add_violation_meta(req, model, t);
  emit(req, t);
  return 0;
}

int cmd_chain(const RunRequest& req) {
  ModelSpec model = req.build_model();
  TransitionKernel kernel(model, req.chain_n, req.state_budget);
  if (!req.dump_kernel_path.empty()) {
    std::ofstream dump(req.dump_kernel_path, std::ios::binary);
    if (!dump) throw InvalidParams("cannot open dump path " + req.dump_kernel_path);
    kernel.dump(dump);
  }
  SolveOptions opt;
  opt.tol = req.tol;
  opt.max_iters = req.max_iters;
  opt.method = req.solve_method();
  StationaryTable table = solve_stationary(kernel, opt);

  ResultTable t;
  t.text_meta["model"] = model.name();
  t.text_meta["converged"] = table.converged ? "true" : "false";
  if (!table.note.empty()) t.text_meta["note"] = table.note;
  t.meta["p"] = req.p;
  t.meta["gamma"] = req.gamma;
  t.meta["N"] = req.chain_n;
  t.meta["states"] = static_cast<double>(kernel.state_count());
  t.meta["residual"] = table.residual;
  t.meta["iterations"] = static_cast<double>(table.iterations);
  t.meta["tail_bound"] = table.tail_bound;

  Pmf aoi = marginal(table, 0);
  if (model.state_dimension() >= 3) {
    Pmf tm = marginal(table, 1);
    Pmf wm = marginal(table, 2);
    t.headers = {"n", "pmf", "cdf", "system_time_pmf", "waiting_time_pmf"};
    double cdf = 0.0;
    for (int n = 0; n <= aoi.support_end(); ++n) {
      cdf += aoi.at(n);
      t.rows.push_back({static_cast<double>(n), aoi.at(n), cdf, tm.at(n), wm.at(n)});
    }
  } else {
    t.headers = {"n", "pmf", "cdf"};
    double cdf = 0.0;
    for (int n = 1; n <= aoi.support_end(); ++n) {
      cdf += aoi.at(n);
      t.rows.push_back({static_cast<double>(n), aoi.at(n), cdf});
    }
  }
  emit(req, t);
  return 0;
}

int cmd_simulate(const RunRequest& req) {
  SimConfig cfg(req.build_model());
  cfg.slots = req.slots;
  cfg.warmup_slots = req.warmup;
  cfg.seed = req.seed;
  cfg.kernel_n_cap = req.kernel_n;
  if (req.sim_mode == "physical")
    cfg.mode = SimConfig::Mode::Physical;
  else if (req.sim_mode == "kernel")
    cfg.mode = SimConfig::Mode::KernelSampling;
  else
    throw InvalidParams("unknown simulation mode '" + req.sim_mode + "'");

  SimStats stats = run(cfg);
  Pmf aoi = stats.aoi_pmf();
  Pmf tm = stats.system_time_pmf();
  Pmf wm = stats.waiting_time_pmf();

  ResultTable t;
  t.text_meta["model"] = cfg.model.name();
  t.text_meta["mode"] = req.sim_mode;
  t.meta["p"] = req.p;
  t.meta["gamma"] = req.gamma;
  t.meta["slots"] = static_cast<double>(req.slots);
  t.meta["warmup_slots"] = static_cast<double>(req.warmup);
  t.meta["seed"] = static_cast<double>(req.seed);
  t.meta["mean_aoi"] = stats.mean_aoi;
  t.meta["generated"] = static_cast<double>(stats.generated);
  t.meta["delivered"] = static_cast<double>(stats.delivered);
  t.meta["discarded"] = static_cast<double>(stats.discarded);
  t.meta["replaced"] = static_cast<double>(stats.replaced);
  t.meta["in_flight_end"] = static_cast<double>(stats.in_flight_end);

  t.headers = {"n", "pmf", "cdf", "system_time_pmf", "waiting_time_pmf"};
  double cdf = 0.0;
  int hi = std::max({aoi.support_end(), tm.support_end(), wm.support_end()});
  for (int n = 0; n <= hi; ++n) {
    cdf += aoi.at(n);
    t.rows.push_back({static_cast<double>(n), aoi.at(n), cdf, tm.at(n), wm.at(n)});
  }
  emit(req, t);
  return 0;
}

int cmd_compare(const RunRequest& req) {
  ModelSpec model = req.build_model();
  const bool analytic_available = has_closed_form(model);

  int threads = 3;
  if (const char* env = std::getenv("AOI_LAB_THREADS")) threads = std::max(1, std::atoi(env));

  SimConfig sim_cfg(model);
  sim_cfg.slots = req.slots;
  sim_cfg.warmup_slots = req.warmup;
  sim_cfg.seed = req.seed;

  auto chain_job = [&]() {
    TransitionKernel kernel(model, req.chain_n, req.state_budget);
    SolveOptions opt;
    opt.tol = req.tol;
    opt.max_iters = req.max_iters;
    opt.method = req.solve_method();
    return solve_stationary(kernel, opt);
  };
  auto sim_job = [&]() { return run(sim_cfg); };

  StationaryTable chain_table{AgeStateSpace(2, 3), {}, 0, 0, true, false, 0, 0, ""};
  SimStats sim_stats;
  if (threads >= 2) {
    auto chain_future = std::async(std::launch::async, chain_job);
    auto sim_future = std::async(std::launch::async, sim_job);
    chain_table = chain_future.get();
    sim_stats = sim_future.get();
  } else {
    chain_table = chain_job();
    sim_stats = sim_job();
  }
  Pmf chain_pmf = marginal(chain_table, 0);
  Pmf sim_pmf = sim_stats.aoi_pmf();
  std::optional<Pmf> analytic_pmf;
  if (analytic_available) analytic_pmf = analytic_aoi_pmf(model, req.n_max);

  ResultTable t;
  t.text_meta["model"] = model.name();
  t.meta["p"] = req.p;
  t.meta["gamma"] = req.gamma;
  t.meta["N"] = req.chain_n;
  t.meta["slots"] = static_cast<double>(req.slots);
  t.meta["seed"] = static_cast<double>(req.seed);
  t.meta["chain_residual"] = chain_table.residual;
  t.meta["sim_mean_aoi"] = sim_stats.mean_aoi;

  t.headers = analytic_available ? std::vector<std::string>{"n", "analytic", "chain", "sim"}
                                 : std::vector<std::string>{"n", "chain", "sim"};
  int hi = std::max(chain_pmf.support_end(), sim_pmf.support_end());
  if (analytic_pmf) hi = std::max(hi, analytic_pmf->support_end());
  for (int n = 1; n <= hi; ++n) {
    std::vector<double> row{static_cast<double>(n)};
    if (analytic_pmf) row.push_back(analytic_pmf->at(n));
    row.push_back(chain_pmf.at(n));
    row.push_back(sim_pmf.at(n));
    t.rows.push_back(std::move(row));
  }

  bool pass = true;
  std::ostringstream verdict;
  if (analytic_pmf) {
    double tv_ac = pmf_total_variation(*analytic_pmf, chain_pmf);
    double tv_sa = pmf_total_variation(sim_pmf, *analytic_pmf);
    t.meta["tv_analytic_chain"] = tv_ac;
    t.meta["tv_sim_analytic"] = tv_sa;
    bool ok_ac = tv_ac <= req.tv_analytic_chain;
    bool ok_sa = tv_sa <= req.tv_sim_analytic;
    pass = ok_ac && ok_sa;
    verdict << (ok_ac ? "PASS" : "FAIL") << " analytic-vs-chain tv=" << tv_ac
            << " (tol " << req.tv_analytic_chain << ")\n";
    verdict << (ok_sa ? "PASS" : "FAIL") << " sim-vs-analytic tv=" << tv_sa << " (tol "
            << req.tv_sim_analytic << ")\n";
  } else {
    double tv_cs = pmf_total_variation(sim_pmf, chain_pmf);
    t.meta["tv_sim_chain"] = tv_cs;
    pass = tv_cs <= req.tv_sim_analytic;
    verdict << (pass ? "PASS" : "FAIL") << " sim-vs-chain tv=" << tv_cs << " (tol "
            << req.tv_sim_analytic << ")\n";
  }
  t.text_meta["verdict"] = pass ? "PASS" : "FAIL";
  emit(req, t);
  std::cerr << verdict.str();
  return pass ? 0 : kExitTolerance;
}

// Data tables behind the study plots: fixed parameter sets, long format.
ResultTable figure_table(int figure) {
  ResultTable t;
  auto exp_row = [](const ModelSpec& m, int k) { return violation_report(m, k); };
  switch (figure) {
    case 2: {
      SystemParams pr(0.18, 0.3);
      ModelSpec m = ModelSpec::ber_geo11(pr);
      t.headers = {"k", "exponent", "lower_bound", "p_violation"};
      for (int k = 1; k <= 200; ++k) {
        ViolationReport r = exp_row(m, k);
        t.rows.push_back({static_cast<double>(k), r.exponent, *r.lower_bound, r.p_violation});
      }
      t.text_meta["setup"] = "Ber/Geo/1/1 violation exponent, p=0.18 gamma=0.3";
      return t;
    }
    case 3: {
      SystemParams pr(0.2, 1.0 / 3.0);
      Pmf plain = ber_geo11_aoi_pmf(pr, 60);
      Pmf pre = preemptive_geo_aoi_pmf(pr, 4, 60);
      t.headers = {"n", "pmf_plain", "cdf_plain", "pmf_gtilde", "cdf_gtilde"};
      double c1 = 0.0, c2 = 0.0;
      for (int n = 1; n <= 60; ++n) {
        c1 += plain.at(n);
        c2 += pre.at(n);
        t.rows.push_back({static_cast<double>(n), plain.at(n), c1, pre.at(n), c2});
      }
      t.text_meta["setup"] = "size-1 AoI, p=0.2 gamma=1/3, N_p=4";
      return t;
    }
    case 4: {
      SystemParams pr(0.2, 1.0 / 3.0);
      Pmf a = ber_geo12_aoi_pmf(pr, 60);
      Pmf b = ber_geo12star_aoi_pmf(pr, 60);
      t.headers = {"n", "pmf_queue", "cdf_queue", "pmf_replace", "cdf_replace"};
      double c1 = 0.0, c2 = 0.0;
      for (int n = 1; n <= 60; ++n) {
        c1 += a.at(n);
        c2 += b.at(n);
        t.rows.push_back({static_cast<double>(n), a.at(n), c1, b.at(n), c2});
      }
      t.text_meta["setup"] = "size-2 AoI, p=0.2 gamma=1/3";
      return t;
    }
    case 5: {
      const double gamma = 0.6;
      t.headers = {"rho_d", "n", "pmf_size1", "pmf_queue", "pmf_replace"};
      for (double rho : {0.05, 0.2, 0.4, 0.6, 0.8, 0.99}) {
        SystemParams pr(rho * gamma, gamma);
        Pmf a = ber_geo11_aoi_pmf(pr, 60);
        Pmf b = ber_geo12_aoi_pmf(pr, 60);
        Pmf c = ber_geo12star_aoi_pmf(pr, 60);
        for (int n = 1; n <= 60; ++n)
          t.rows.push_back({rho, static_cast<double>(n), a.at(n), b.at(n), c.at(n)});
      }
      t.text_meta["setup"] = "AoI under load sweep, gamma=0.6";
      return t;
    }
    case 6: {
      SystemParams pr(0.48, 0.6);
      Pmf t12 = ber_geo12_system_time_pmf(pr, 40);
      Pmf w12 = ber_geo12_waiting_time_pmf(pr, 40);
      Pmf t12s = ber_geo12star_system_time_pmf(pr, 40);
      Pmf w12s = ber_geo12star_waiting_time_pmf(pr, 40);
      double nt = 1.0 - t12.at(0), nw = 1.0 - w12.at(0);
      double nts = 1.0 - t12s.at(0), nws = 1.0 - w12s.at(0);
      t.headers = {"m", "t_queue_cond", "w_queue_cond", "t_replace_cond", "w_replace_cond"};
      for (int m = 1; m <= 40; ++m)
        t.rows.push_back({static_cast<double>(m), t12.at(m) / nt, w12.at(m) / nw,
                          t12s.at(m) / nts, w12s.at(m) / nws});
      t.meta["t_queue_at_0"] = t12.at(0);
      t.meta["w_queue_at_0"] = w12.at(0);
      t.meta["t_replace_at_0"] = t12s.at(0);
      t.meta["w_replace_at_0"] = w12s.at(0);
      t.text_meta["setup"] = "system/waiting time conditional on >= 1, p=0.48 gamma=0.6";
      return t;
    }
    case 7: {
      SystemParams pr(0.18, 0.3);
      ModelSpec m1 = ModelSpec::ber_geo11(pr);
      ModelSpec m2 = ModelSpec::ber_geo12(pr);
      ModelSpec m3 = ModelSpec::ber_geo12_star(pr);
      t.headers = {"k", "exponent_size1", "exponent_queue", "exponent_replace"};
      for (int k = 1; k <= 200; ++k)
        t.rows.push_back({static_cast<double>(k), exp_row(m1, k).exponent,
                          exp_row(m2, k).exponent, exp_row(m3, k).exponent});
      t.text_meta["setup"] = "violation exponents, p=0.18 gamma=0.3";
      return t;
    }
    default:
      throw InvalidParams("figures 2 through 7 are available");
  }
}

void add_common(CLI::App* cmd, RunRequest& req) {
  cmd->add_option("--model", req.model_name,
                  "ber-geo-1-1 | ber-geo-1-1-gtilde | ber-g-1-1 | ber-geo-1-2 | "
                  "ber-geo-1-2star | ber-geo-1-c");
  cmd->add_option("--p", req.p, "per-slot arrival probability");
  cmd->add_option("--gamma", req.gamma, "per-slot service completion probability");
  cmd->add_option("--n-p", req.n_p, "N_p of the paper preemption function (-1: auto)");
  cmd->add_option("--c", req.c, "capacity for ber-geo-1-c");
  cmd->add_option("--service-pmf", req.service_file, "file of 'j,q_j' lines for ber-g-1-1");
  cmd->add_option("--format", req.format, "csv | json");
  cmd->add_option("--output", req.output, "output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-Information laboratory for discrete-time status updating queues"};
  app.require_subcommand(1);
  RunRequest req;

  CLI::App* analytic = app.add_subcommand("analytic", "evaluate closed-form distributions");
  add_common(analytic, req);
  analytic->add_option("--n-max", req.n_max, "PMF truncation");
  analytic->add_option("--violation", req.violation_k, "report Pr{AoI > k} and exponent");
  analytic->add_option("--figure", req.figure, "emit the data table of study figure 2..7");

  CLI::App* chain = app.add_subcommand("chain", "solve the truncated age chain");
  add_common(chain, req);
  chain->add_option("--N", req.chain_n, "truncation bound on the AoI component");
  chain->add_option("--tol", req.tol, "solver L1 tolerance");
  chain->add_option("--max-iters", req.max_iters, "solver iteration cap");
  chain->add_option("--method", req.method, "auto | power | gauss-seidel | direct");
  chain->add_option("--state-budget", req.state_budget, "maximum enumerated states");
  chain->add_option("--dump-kernel", req.dump_kernel_path, "write kernel transitions");

  CLI::App* simulate = app.add_subcommand("simulate", "slot-based Monte Carlo run");
  add_common(simulate, req);
  simulate->add_option("--slots", req.slots, "simulated slots");
  simulate->add_option("--warmup", req.warmup, "slots dropped before statistics");
  simulate->add_option("--seed", req.seed, "RNG seed (splitmix64)");
  simulate->add_option("--mode", req.sim_mode, "physical | kernel");
  simulate->add_option("--kernel-N", req.kernel_n, "truncation for kernel mode");

  CLI::App* compare = app.add_subcommand("compare", "run all engines and cross-validate");
  add_common(compare, req);
  compare->add_option("--n-max", req.n_max, "analytic PMF truncation");
  compare->add_option("--N", req.chain_n, "chain truncation");
  compare->add_option("--slots", req.slots, "simulated slots");
  compare->add_option("--warmup", req.warmup, "simulation warmup");
  compare->add_option("--seed", req.seed, "simulation seed");
  compare->add_option("--method", req.method, "chain solve method");
  compare->add_option("--state-budget", req.state_budget, "chain state budget");
  compare->add_option("--tv-analytic-chain", req.tv_analytic_chain,
                      "tolerance on analytic vs chain total variation");
  compare->add_option("--tv-sim-analytic", req.tv_sim_analytic,
                      "tolerance on sim vs analytic total variation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (analytic->parsed()) req.subcommand = "analytic";
    if (chain->parsed()) req.subcommand = "chain";
    if (simulate->parsed()) req.subcommand = "simulate";
    if (compare->parsed()) req.subcommand = "compare";

    if (req.subcommand == "analytic") return cmd_analytic(req);
    if (req.subcommand == "chain") return cmd_chain(req);
    if (req.subcommand == "simulate") return cmd_simulate(req);
    if (req.subcommand == "compare") return cmd_compare(req);
    std::cerr << "error: no subcommand\n";
    return kExitInvalid;
  } catch (const NearSingular& e) {
    std::cerr << "error: near-singular: " << e.what() << '\n';
    return kExitSingular;
  } catch (const Unstable& e) {
    std::cerr << "error: unstable: " << e.what() << '\n';
    return kExitSingular;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}
