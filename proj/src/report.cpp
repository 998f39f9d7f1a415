#include "mrp/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "mrp/error.hpp"

namespace mrp {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const MrpTestResult& r) {
  Json j;
  j["mrp_hat"] = r.mrp_hat;
  j["itr11"] = r.itr11_hat;
  j["itr22"] = r.itr22_hat;
  j["itr12"] = r.itr12_hat;
  j["sigma2_hat"] = r.sigma2_hat;
  j["q_stat"] = r.q_stat;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["reject"] = r.reject;
  j["n"] = r.n;
  j["m"] = r.m;
  j["p"] = r.p;
  j["L"] = r.L;
  return j;
}

Json to_json(const SimConfig& cfg) {
  Json j;
  j["family"] = to_string(cfg.family);
  if (cfg.family != Family::Sim3) j["case"] = to_string(cfg.dependence);
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["p"] = cfg.p;
  j["grid_size"] = cfg.grid_size;
  if (cfg.family == Family::Sim3) {
    j["eps"] = cfg.eps;
    j["c"] = cfg.c;
  } else {
    j["percent"] = cfg.percent_equal;
  }
  j["replications"] = cfg.replications;
  j["alpha"] = cfg.alpha;
  j["kernel"] = cfg.kernel.describe();
  j["order"] = cfg.reconstruction.order;
  j["knot_rate"] = cfg.reconstruction.knot_rate;
  j["seed"] = cfg.seed;
  return j;
}

Json to_json(const ExperimentReport& r, bool include_q_stats) {
  Json j;
  j["config"] = to_json(r.config);
  j["rejection_rate"] = r.rejection_rate;
  j["mc_standard_error"] = r.mc_standard_error;
  j["rejections"] = r.rejections;
  j["L"] = r.L;
  if (include_q_stats) j["q_stats"] = r.q_stats;
  j["wall_ms"] = r.wall_ms;
  return j;
}

std::string experiment_csv_header() {
  return "family,case,kernel,n,m,p,percent,eps,c,reps,seed,rate,se";
}

std::string experiment_csv_row(const ExperimentReport& r) {
  const SimConfig& c = r.config;
  const bool sparse = c.family == Family::Sim3;
  std::string row = to_string(c.family);
  row += ',' + (sparse ? std::string() : to_string(c.dependence));
  row += ',' + c.kernel.describe();
  row += ',' + std::to_string(c.n) + ',' + std::to_string(c.m) + ',' + std::to_string(c.p);
  row += ',' + (sparse ? std::string() : std::to_string(c.percent_equal));
  row += ',' + (sparse ? format_double(c.eps) : std::string());
  row += ',' + (sparse ? format_double(c.c) : std::string());
  row += ',' + std::to_string(c.replications) + ',' + std::to_string(c.seed);
  row += ',' + format_double(r.rejection_rate) + ',' + format_double(r.mc_standard_error);
  return row;
}

void append_experiment_csv(const std::filesystem::path& path, const ExperimentReport& r) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  if (fresh) out << experiment_csv_header() << '\n';
  out << experiment_csv_row(r) << '\n';
}

}  // namespace mrp
