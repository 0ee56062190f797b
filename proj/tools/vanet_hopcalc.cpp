// vanet-hopcalc: hop statistics of the maximal shortest path in 1-D vehicle
// components. Subcommands dump CSV; every stochastic command is seeded and
// reproducible (same resolved config => byte-identical output).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopcalc/component_stats.hpp"
#include "hopcalc/errors.hpp"
#include "hopcalc/hop_mc.hpp"
#include "hopcalc/interdistance.hpp"
#include "hopcalc/parallel.hpp"
#include "hopcalc/poisson_analytic.hpp"
#include "hopcalc/relay_kernel.hpp"
#include "hopcalc/road_sim.hpp"
#include "hopcalc/trace_fit.hpp"
#include "hopcalc/version.hpp"

namespace {

using namespace hopcalc;

struct Out {
  std::ofstream file;
  std::ostream* os = &std::cout;

  void open(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw io_error("cannot open output file " + path);
    os = &file;
  }
  template <typename T>
  Out& operator<<(const T& v) {
    *os << v;
    return *this;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_header(Out& out, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& cfg) {
  out << "# vanet-hopcalc " << kVersion << "\n";
  out << "# command: " << command << "\n";
  for (const auto& [k, v] : cfg) out << "# " << k << " = " << v << "\n";
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:step" or a comma list
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, hi, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
      throw std::invalid_argument("grid spec must be lo:hi:step");
    for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

InterdistanceModel load_model(const std::string& spec) {
  // inline "kind=..." text or a path to a file holding it
  if (spec.find("kind=") != std::string::npos) return InterdistanceModel::parse(spec);
  std::ifstream in(spec);
  if (!in) throw io_error("cannot open model file " + spec);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return InterdistanceModel::parse(text);
}

RelayKernel make_kernel(const InterdistanceModel& model, double R) {
  if (model.kind() == ModelKind::Exponential ||
      (model.kind() == ModelKind::Hyperexponential && model.rates().size() == 2))
    return RelayKernel::closed_form(model, R);
  return RelayKernel::numerical(model, R);
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;  // flag or config file
  if (const char* env = std::getenv("VANET_HOPCALC_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    throw std::invalid_argument("VANET_HOPCALC_SEED is not an integer");
  }
  return 1;
}

struct Common {
  std::string out_path;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("-o,--out", out_path, "output CSV path (default stdout)");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--threads", threads, "worker threads (default: hardware)");
  }
  void finalize() {
    seed = resolve_seed(seed_opt, seed);
    if (threads == 0) threads = default_threads();
  }
  std::vector<std::pair<std::string, std::string>> provenance() const {
    return {{"seed", std::to_string(seed)}, {"threads", std::to_string(threads)}};
  }
};

void emit_hop_distribution(Out& out, const HopDistribution& d) {
  out << "k,p,stderr\n";
  for (int k = 1; k <= d.k_max; ++k) {
    const double se = d.se.empty() ? 0.0 : d.se[k - 1];
    out << k << "," << fmt(d.p[k - 1]) << "," << fmt(se) << "\n";
  }
  out << "tail," << fmt(d.tail_mass) << ",\n";
}

int run(int argc, char** argv) {
  CLI::App app{"hop statistics of the maximal shortest path in 1-D vehicle components"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags take precedence");
  app.set_version_flag("--version", std::string("vanet-hopcalc ") + kVersion);

  // ---- pmf
  auto* pmf = app.add_subcommand("pmf", "P(N_b = k): recurrences (Poisson) or chain MC");
  Common pmf_c;
  bool pmf_poisson = false;
  double pmf_lp = 0.0, pmf_R = 0.0;
  std::string pmf_model;
  std::uint64_t pmf_samples = 1000000;
  int pmf_kmax = 1024;
  pmf->add_flag("--poisson", pmf_poisson, "analytic recurrence path");
  pmf->add_option("--lambda-prime", pmf_lp, "lambda * R (with --poisson)");
  pmf->add_option("--model", pmf_model, "model file or inline kind=... spec");
  pmf->add_option("--R", pmf_R, "coverage radius, meters");
  pmf->add_option("--samples", pmf_samples, "Monte-Carlo chain count");
  pmf->add_option("--k-max", pmf_kmax, "truncation");
  pmf_c.attach(pmf);

  // ---- mean-sweep
  auto* sweep = app.add_subcommand("mean-sweep", "E[N_b] over a lambda' or R grid");
  Common sweep_c;
  std::string sweep_lp_grid, sweep_R_grid, sweep_model;
  std::uint64_t sweep_samples = 100000;
  int sweep_kmax = 4096;
  sweep->add_option("--lambda-grid", sweep_lp_grid, "lambda' grid lo:hi:step (closed form)");
  sweep->add_option("--model", sweep_model, "model for the Monte-Carlo path");
  sweep->add_option("--R-grid", sweep_R_grid, "R grid lo:hi:step (with --model)");
  sweep->add_option("--samples", sweep_samples, "chains per grid point");
  sweep->add_option("--k-max", sweep_kmax, "chain truncation");
  sweep_c.attach(sweep);

  // ---- simulate
  auto* sim = app.add_subcommand("simulate", "road simulation statistics");
  Common sim_c;
  std::string sim_model, sim_R_grid;
  std::uint64_t sim_components = 100000;
  sim->add_option("--model", sim_model, "model file or inline spec")->required();
  sim->add_option("--R-grid", sim_R_grid, "R grid lo:hi:step or comma list")->required();
  sim->add_option("--components", sim_components, "interior components per point");
  sim_c.attach(sim);

  // ---- fit
  auto* fit = app.add_subcommand("fit", "hyperexponential EM fit of gap samples");
  Common fit_c;
  std::string fit_input, fit_trace;
  int fit_k = 2;
  double fit_warmup = 0.0, fit_every = 0.0;
  fit->add_option("--input", fit_input, "sample file, one distance per line");
  fit->add_option("--trace", fit_trace, "trace CSV (time_s,vehicle_id,position_m)");
  fit->add_option("--warmup", fit_warmup, "trace warmup seconds");
  fit->add_option("--every", fit_every, "trace sampling period seconds");
  fit->add_option("--k", fit_k, "mixture components");
  fit_c.attach(fit);

  // ---- compare
  auto* cmp = app.add_subcommand("compare", "trace vs fitted model vs simulation");
  Common cmp_c;
  std::string cmp_trace, cmp_R_grid = "10:100:10";
  double cmp_warmup = 600.0, cmp_every = 600.0;
  std::uint64_t cmp_samples = 40000, cmp_components = 20000;
  int cmp_k = 2;
  cmp->add_option("--trace", cmp_trace, "trace CSV")->required();
  cmp->add_option("--R-grid", cmp_R_grid, "R grid");
  cmp->add_option("--warmup", cmp_warmup, "warmup seconds");
  cmp->add_option("--every", cmp_every, "sampling period seconds");
  cmp->add_option("--samples", cmp_samples, "model-column chain count");
  cmp->add_option("--components", cmp_components, "simulation-column component count");
  cmp->add_option("--k", cmp_k, "mixture components");
  cmp_c.attach(cmp);

  // ---- density
  auto* dens = app.add_subcommand("density", "hop density E[N_b] / (E[L_cc]/R)");
  Common dens_c;
  std::string dens_model, dens_R_grid = "10:100:10";
  std::uint64_t dens_samples = 40000;
  int dens_kmax = 4096;
  dens->add_option("--model", dens_model, "model file or inline spec")->required();
  dens->add_option("--R-grid", dens_R_grid, "R grid");
  dens->add_option("--samples", dens_samples, "chains per grid point");
  dens->add_option("--k-max", dens_kmax, "chain truncation");
  dens_c.attach(dens);

  // ---- kernel-dump
  auto* kd = app.add_subcommand("kernel-dump", "tau_1 / conditional tau CDF curve");
  Common kd_c;
  std::string kd_model;
  double kd_R = 100.0, kd_xprev = -1.0, kd_xmax = 0.0, kd_step = 0.0;
  bool kd_numerical = false;
  kd->add_option("--model", kd_model, "model file or inline spec")->required();
  kd->add_option("--R", kd_R, "coverage radius");
  kd->add_option("--x-prev", kd_xprev, "conditioning gap; omit for tau_1");
  kd->add_option("--x-max", kd_xmax, "curve end (default 2R)");
  kd->add_option("--grid-step", kd_step, "output step (default R/500)");
  kd->add_flag("--numerical", kd_numerical, "force the renewal solver");
  kd_c.attach(kd);

  // ---- tables-dump
  auto* td = app.add_subcommand("tables-dump", "M_{alpha,k} recurrence table");
  Common td_c;
  double td_lp = 2.0;
  int td_alpha = 12, td_kmax = 20;
  td->add_option("--lambda-prime", td_lp, "lambda * R")->required();
  td->add_option("--alpha-max", td_alpha, "rows");
  td->add_option("--k-max", td_kmax, "columns");
  td_c.attach(td);

  CLI11_PARSE(app, argc, argv);

  Out out;

  if (pmf->parsed()) {
    pmf_c.finalize();
    out.open(pmf_c.out_path);
    auto cfg = pmf_c.provenance();
    if (pmf_poisson) {
      if (!(pmf_lp > 0.0)) throw std::invalid_argument("pmf --poisson needs --lambda-prime > 0");
      cfg.insert(cfg.begin(), {{"method", "poisson-recurrence"},
                               {"lambda_prime", fmt(pmf_lp)},
                               {"k_max", std::to_string(pmf_kmax)}});
      write_header(out, "pmf", cfg);
      emit_hop_distribution(out, hop_pmf_poisson(PoissonParams(pmf_lp), pmf_kmax));
    } else {
      if (pmf_model.empty() || !(pmf_R > 0.0))
        throw std::invalid_argument("pmf needs --model and --R (or --poisson)");
      auto model = load_model(pmf_model);
      cfg.insert(cfg.begin(), {{"method", "monte-carlo"},
                               {"model", model.serialize()},
                               {"R", fmt(pmf_R)},
                               {"samples", std::to_string(pmf_samples)},
                               {"k_max", std::to_string(pmf_kmax)}});
      write_header(out, "pmf", cfg);
      auto kernel = make_kernel(model, pmf_R);
      emit_hop_distribution(
          out, hop_pmf_montecarlo(kernel, pmf_samples, pmf_kmax, pmf_c.seed, pmf_c.threads));
    }
    return 0;
  }

  if (sweep->parsed()) {
    sweep_c.finalize();
    out.open(sweep_c.out_path);
    auto cfg = sweep_c.provenance();
    if (!sweep_lp_grid.empty()) {
      auto grid = parse_grid(sweep_lp_grid);
      cfg.insert(cfg.begin(), {{"method", "closed-form"}, {"lambda_grid", sweep_lp_grid}});
      write_header(out, "mean-sweep", cfg);
      out << "lambda_prime,mean\n";
      for (double lp : grid)
        out << fmt(lp) << "," << fmt(mean_hops_closed(PoissonParams(lp))) << "\n";
    } else {
      if (sweep_model.empty() || sweep_R_grid.empty())
        throw std::invalid_argument("mean-sweep needs --lambda-grid or --model + --R-grid");
      auto model = load_model(sweep_model);
      auto grid = parse_grid(sweep_R_grid);
      cfg.insert(cfg.begin(), {{"method", "monte-carlo"},
                               {"model", model.serialize()},
                               {"R_grid", sweep_R_grid},
                               {"samples", std::to_string(sweep_samples)}});
      write_header(out, "mean-sweep", cfg);
      out << "R,mean,stderr\n";
      for (double R : grid) {
        auto kernel = make_kernel(model, R);
        auto d = hop_pmf_montecarlo(kernel, sweep_samples, sweep_kmax,
                                    sweep_c.seed, sweep_c.threads);
        auto m = mean_hops(d);
        out << fmt(R) << "," << fmt(m.mean) << "," << fmt(m.se) << "\n";
      }
    }
    return 0;
  }

  if (sim->parsed()) {
    sim_c.finalize();
    out.open(sim_c.out_path);
    auto model = load_model(sim_model);
    auto grid = parse_grid(sim_R_grid);
    auto cfg = sim_c.provenance();
    cfg.insert(cfg.begin(), {{"model", model.serialize()},
                             {"R_grid", sim_R_grid},
                             {"components", std::to_string(sim_components)},
                             {"lcc_convention", "span + R (busy period)"}});
    write_header(out, "simulate", cfg);
    out << "R,mean_nb,ci_lo,ci_hi,mean_lcc,mean_vehicles\n";
    for (double R : grid) {
      auto st = simulate_stats(model, R, sim_components, sim_c.seed, sim_c.threads);
      out << fmt(R) << "," << fmt(st.mean_nb) << "," << fmt(st.nb_ci_lo) << ","
          << fmt(st.nb_ci_hi) << "," << fmt(st.mean_lcc) << "," << fmt(st.mean_vehicles)
          << "\n";
    }
    return 0;
  }

  if (fit->parsed()) {
    fit_c.finalize();
    out.open(fit_c.out_path);
    std::vector<double> samples;
    std::string source;
    if (!fit_input.empty()) {
      std::ifstream in(fit_input);
      if (!in) throw io_error("cannot open sample file " + fit_input);
      double v;
      while (in >> v) samples.push_back(v);
      source = fit_input;
    } else if (!fit_trace.empty()) {
      auto ds = load_traces(fit_trace);
      if (fit_every > 0.0) ds = preprocess(ds, fit_warmup, fit_every);
      samples = interdistances(ds);
      source = fit_trace;
    } else {
      throw std::invalid_argument("fit needs --input or --trace");
    }
    auto r = fit_hyperexponential(samples, fit_k, {.seed = fit_c.seed});
    auto cfg = fit_c.provenance();
    cfg.insert(cfg.begin(), {{"source", source},
                             {"n_samples", std::to_string(samples.size())},
                             {"k", std::to_string(fit_k)},
                             {"iterations", std::to_string(r.iterations)},
                             {"log_likelihood", fmt(r.log_likelihood)}});
    write_header(out, "fit", cfg);
    out << r.model.serialize() << "\n";
    return 0;
  }

  if (cmp->parsed()) {
    cmp_c.finalize();
    out.open(cmp_c.out_path);
    auto ds = preprocess(load_traces(cmp_trace), cmp_warmup, cmp_every);
    auto grid = parse_grid(cmp_R_grid);
    CompareConfig cc;
    cc.mixture_components = cmp_k;
    cc.mc_samples = cmp_samples;
    cc.sim_components = cmp_components;
    cc.seed = cmp_c.seed;
    cc.threads = cmp_c.threads;
    auto rep = compare_report(ds, grid, cc);
    auto cfg = cmp_c.provenance();
    cfg.insert(cfg.begin(), {{"trace", cmp_trace},
                             {"warmup", fmt(cmp_warmup)},
                             {"every", fmt(cmp_every)},
                             {"fitted", rep.fitted.serialize()},
                             {"samples", std::to_string(cmp_samples)},
                             {"components", std::to_string(cmp_components)}});
    write_header(out, "compare", cfg);
    out << "R,mean_nb_trace,mean_nb_model,mean_nb_sim\n";
    for (const auto& row : rep.rows)
      out << fmt(row.R) << "," << fmt(row.mean_nb_trace) << "," << fmt(row.mean_nb_model)
          << "," << fmt(row.mean_nb_sim) << "\n";
    return 0;
  }

  if (dens->parsed()) {
    dens_c.finalize();
    out.open(dens_c.out_path);
    auto model = load_model(dens_model);
    auto grid = parse_grid(dens_R_grid);
    auto cfg = dens_c.provenance();
    cfg.insert(cfg.begin(),
               {{"model", model.serialize()},
                {"R_grid", dens_R_grid},
                {"samples", std::to_string(dens_samples)},
                {"definition", "E[N_b] / (E[L_cc]/R), L_cc = busy-period length"}});
    write_header(out, "density", cfg);
    out << "R,density\n";
    for (double R : grid) {
      auto kernel = make_kernel(model, R);
      auto d = hop_pmf_montecarlo(kernel, dens_samples, dens_kmax, dens_c.seed,
                                  dens_c.threads);
      const double L = mean_component_length(model, R);
      out << fmt(R) << "," << fmt(hop_density(mean_hops(d).mean, L, R)) << "\n";
    }
    return 0;
  }

  if (kd->parsed()) {
    kd_c.finalize();
    out.open(kd_c.out_path);
    auto model = load_model(kd_model);
    auto kernel = kd_numerical ? RelayKernel::numerical(model, kd_R)
                               : make_kernel(model, kd_R);
    const double xmax = kd_xmax > 0.0 ? kd_xmax : 2.0 * kd_R;
    const double step = kd_step > 0.0 ? kd_step : kd_R / 500.0;
    auto cfg = kd_c.provenance();
    cfg.insert(cfg.begin(), {{"model", model.serialize()},
                             {"R", fmt(kd_R)},
                             {"x_prev", kd_xprev > 0.0 ? fmt(kd_xprev) : "none (tau_1)"},
                             {"mode", kd_numerical ? "numerical-renewal" : "closed-form"}});
    write_header(out, "kernel-dump", cfg);
    out << "x,cdf\n";
    for (double x = 0.0; x <= xmax + 1e-9 * step; x += step) {
      const double v =
          kd_xprev > 0.0 ? kernel.tau_cond_cdf(kd_xprev, x) : kernel.tau1_cdf(x);
      out << fmt(x) << "," << fmt(v) << "\n";
    }
    return 0;
  }

  if (td->parsed()) {
    td_c.finalize();
    out.open(td_c.out_path);
    PoissonParams p(td_lp);
    auto t = AnalyticTables::build(p, td_alpha, td_kmax);
    auto cfg = td_c.provenance();
    cfg.insert(cfg.begin(), {{"lambda_prime", fmt(td_lp)},
                             {"alpha_max", std::to_string(td_alpha)},
                             {"k_max", std::to_string(td_kmax)}});
    write_header(out, "tables-dump", cfg);
    out << "alpha,k,M\n";
    for (int k = 0; k <= t.k_max(); ++k)
      for (int a = 0; a <= t.alpha_limit(k); ++a)
        out << a << "," << k << "," << fmt(t.m(a, k)) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hopcalc::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const hopcalc::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
