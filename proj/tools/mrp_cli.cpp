// Command-line front end: test, simulate, qq, oracle, generate.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mrp/data_model.hpp"
#include "mrp/engine.hpp"
#include "mrp/error.hpp"
#include "mrp/numeric.hpp"
#include "mrp/oracle.hpp"
#include "mrp/report.hpp"
#include "mrp/sim.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kInput = 2, kDegenerate = 3, kOracleFail = 4 };

struct KernelFlags {
  std::string kind = "ou";
  double ou_a = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--kernel", kind, "projection kernel")
        ->check(CLI::IsMember({"ou", "wiener"}))
        ->capture_default_str();
    cmd->add_option("--ou-a", ou_a, "OU rate a > 0")->capture_default_str();
  }
  mrp::ProjectionKernel build() const {
    if (kind == "wiener") return mrp::ProjectionKernel::wiener();
    if (!(ou_a > 0.0)) throw mrp::InputError("--ou-a must be positive");
    return mrp::ProjectionKernel::ornstein_uhlenbeck(ou_a);
  }
};

struct SimFlags {
  std::string family = "sim1";
  std::string dep = "I";
  std::size_t n = 25;
  std::size_t m = 25;
  std::size_t p = 20;
  int percent = 100;
  double eps = 0.0;
  double c = 0.5;
  std::size_t reps = 400;
  std::uint64_t seed = 1;
  std::size_t grid = 100;
  double alpha = 0.05;
  int order = 4;
  double knot_rate = 0.5;
  KernelFlags kernel;

  void add(CLI::App* cmd, bool with_signal) {
    cmd->add_option("--family", family)
        ->check(CLI::IsMember({"sim1", "sim2", "sim3"}))
        ->capture_default_str();
    cmd->add_option("--case", dep)->check(CLI::IsMember({"I", "II"}))->capture_default_str();
    cmd->add_option("--n", n)->capture_default_str();
    cmd->add_option("--m", m)->capture_default_str();
    cmd->add_option("--p", p)->capture_default_str();
    if (with_signal) {
      auto* pct = cmd->add_option("--percent", percent, "percent of equal-mean dimensions")
                      ->capture_default_str();
      auto* e = cmd->add_option("--eps", eps, "sparse signal strength")->capture_default_str();
      cmd->add_option("--c", c, "sparsity exponent")->capture_default_str();
      pct->excludes(e);
    }
    cmd->add_option("--reps", reps)->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--grid", grid, "observation points per curve")->capture_default_str();
    cmd->add_option("--alpha", alpha)->capture_default_str();
    cmd->add_option("--order", order, "spline order")->capture_default_str();
    cmd->add_option("--knot-rate", knot_rate, "knot rate r in K = N^r")->capture_default_str();
    kernel.add(cmd);
  }

  mrp::SimConfig build() const {
    mrp::SimConfig cfg;
    cfg.family = family == "sim1" ? mrp::Family::Sim1
                 : family == "sim2" ? mrp::Family::Sim2
                                    : mrp::Family::Sim3;
    cfg.dependence = dep == "I" ? mrp::Dependence::CaseI : mrp::Dependence::CaseII;
    cfg.n = n;
    cfg.m = m;
    cfg.p = p;
    cfg.percent_equal = percent;
    cfg.eps = eps;
    cfg.c = c;
    cfg.replications = reps;
    cfg.seed = seed;
    cfg.grid_size = grid;
    cfg.alpha = alpha;
    cfg.kernel = kernel.build();
    cfg.reconstruction.order = order;
    cfg.reconstruction.knot_rate = knot_rate;
    cfg.validate();
    return cfg;
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void write_json(const std::string& path, const mrp::Json& j) {
  std::ofstream out(path);
  if (!out) throw mrp::InputError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

int classify(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const mrp::ReplicationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    const int code = classify(e.cause());
    return code;
  } catch (const mrp::DegenerateVariance& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const mrp::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample mean test for high-dimensional functional data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mrp::kReportVersion);

  // test
  auto* test = app.add_subcommand("test", "test equality of mean functions of two panels");
  std::string x_path;
  std::string y_path;
  std::string json_path;
  KernelFlags test_kernel;
  int order = 4;
  double knot_rate = 0.5;
  double alpha = 0.05;
  test->add_option("--x", x_path, "long CSV with the rows of group X")->required();
  test->add_option("--y", y_path, "long CSV with the rows of group Y")->required();
  test_kernel.add(test);
  test->add_option("--order", order, "spline order")->capture_default_str();
  test->add_option("--knot-rate", knot_rate, "knot rate r in K = N^r")->capture_default_str();
  test->add_option("--alpha", alpha)->capture_default_str();
  test->add_option("--json", json_path, "write a JSON report");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "empirical size / power of one table cell");
  SimFlags sim;
  std::string sim_out;
  std::string sim_json;
  sim.add(simulate, true);
  simulate->add_option("--out", sim_out, "append a CSV row");
  simulate->add_option("--json", sim_json, "write a JSON report");

  // qq
  auto* qq = app.add_subcommand("qq", "null QQ data (theoretical, empirical)");
  SimFlags qqf;
  qqf.n = 40;
  qqf.m = 40;
  qqf.p = 100;
  std::string qq_out;
  qqf.add(qq, false);
  qq->add_option("--out", qq_out, "CSV output (default stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "verification against independent oracles");
  std::string check;
  std::uint64_t oracle_seed = 1;
  bool tamper = false;
  oracle->add_option("--check", check)->required()->check(CLI::IsMember({"mrp", "itr", "mc"}));
  oracle->add_option("--seed", oracle_seed)->capture_default_str();
  oracle->add_flag("--tamper-gram", tamper, "perturb W (negative control)");

  // generate
  auto* gen = app.add_subcommand("generate", "write one simulated replication as long CSV");
  SimFlags genf;
  std::string gen_out;
  genf.add(gen, true);
  gen->add_option("--out", gen_out, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*test) {
      const mrp::DiscretePanel x = mrp::load_group_csv(std::filesystem::path(x_path), "X");
      const mrp::DiscretePanel y = mrp::load_group_csv(std::filesystem::path(y_path), "Y");
      if (x.dim_labels != y.dim_labels) {
        throw mrp::InputError("dimension mismatch between groups: X has " +
                              std::to_string(x.p()) + " dims, Y has " + std::to_string(y.p()));
      }
      mrp::ReconstructionOptions opts;
      opts.order = order;
      opts.knot_rate = knot_rate;
      const mrp::ProjectionKernel kernel = test_kernel.build();
      const mrp::MrpTestResult r = mrp::run_test(x, y, kernel, alpha, opts);
      std::printf("n=%zu m=%zu p=%zu L=%zu kernel=%s\n", r.n, r.m, r.p, r.L,
                  kernel.describe().c_str());
      std::printf("mrp_hat=%.10g sigma2_hat=%.10g\n", r.mrp_hat, r.sigma2_hat);
      std::printf("Q=%.6f p_value=%.6g alpha=%g decision=%s\n", r.q_stat, r.p_value, r.alpha,
                  r.reject ? "reject H0" : "do not reject H0");
      if (!json_path.empty()) {
        mrp::Json j;
        j["version"] = mrp::kReportVersion;
        j["command"] = "test";
        j["config"] = {{"x", x_path},          {"y", y_path},
                       {"kernel", kernel.describe()}, {"order", order},
                       {"knot_rate", knot_rate}, {"alpha", alpha}};
        j["result"] = mrp::to_json(r);
        j["timing_ms"] = elapsed_ms(start);
        write_json(json_path, j);
      }
      return kOk;
    }
    if (*simulate) {
      const mrp::SimConfig cfg = sim.build();
      const mrp::ExperimentReport rep = mrp::run_size_power(cfg);
      std::printf("%s rate=%.4f se=%.4f (%zu/%zu rejected, L=%zu, %.1fs)\n",
                  mrp::experiment_csv_row(rep).c_str(), rep.rejection_rate,
                  rep.mc_standard_error, rep.rejections, cfg.replications, rep.L,
                  rep.wall_ms / 1000.0);
      if (!sim_out.empty()) mrp::append_experiment_csv(sim_out, rep);
      if (!sim_json.empty()) {
        mrp::Json j;
        j["version"] = mrp::kReportVersion;
        j["command"] = "simulate";
        j["config"] = mrp::to_json(cfg);
        mrp::Json res = mrp::to_json(rep);
        res.erase("config");
        j["result"] = res;
        j["timing_ms"] = elapsed_ms(start);
        write_json(sim_json, j);
      }
      return kOk;
    }
    if (*qq) {
      const mrp::SimConfig cfg = qqf.build();
      const auto points = mrp::run_qq(cfg);
      std::vector<double> q;
      for (const auto& pt : points) q.push_back(pt.empirical);
      const mrp::KsResult ks = mrp::ks_test_standard_normal(q);
      std::ofstream file;
      if (!qq_out.empty()) {
        file.open(qq_out);
        if (!file) throw mrp::InputError("cannot open " + qq_out + " for writing");
      }
      std::ostream& out = qq_out.empty() ? std::cout : file;
      out << "theoretical,empirical\n";
      for (const auto& pt : points) {
        out << mrp::format_double(pt.theoretical) << ',' << mrp::format_double(pt.empirical)
            << '\n';
      }
      std::fprintf(qq_out.empty() ? stderr : stdout, "ks_stat=%.4f ks_p=%.4f slope=%.4f\n",
                   ks.statistic, ks.p_value, mrp::qq_slope(points));
      return kOk;
    }
    if (*oracle) {
      const mrp::OracleCheck res = check == "mc"    ? mrp::check_mc(oracle_seed)
                                   : check == "mrp" ? mrp::check_mrp(oracle_seed, tamper)
                                                    : mrp::check_itr(oracle_seed, tamper);
      for (const auto& line : res.lines) std::printf("  %s\n", line.c_str());
      std::printf("%s oracle %s: worst=%.3g tolerance=%.3g\n", res.pass ? "PASS" : "FAIL",
                  res.name.c_str(), res.worst, res.tolerance);
      return res.pass ? kOk : kOracleFail;
    }
    if (*gen) {
      const mrp::SimConfig cfg = genf.build();
      const mrp::PanelPair panels = mrp::generate(cfg);
      mrp::write_long_csv(std::filesystem::path(gen_out), panels.x, panels.y);
      std::printf("wrote %s: n=%zu m=%zu p=%zu N=%zu\n", gen_out.c_str(), cfg.n, cfg.m, cfg.p,
                  cfg.grid_size);
      return kOk;
    }
  } catch (...) {
    return classify(std::current_exception());
  }
  return kFailure;
}
