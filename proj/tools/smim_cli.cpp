// smim command line: generate / estimate / complexity / scaling.
// Talks to the library exclusively through the C API in smim/smim.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "smim/smim.h"

namespace {

using json = nlohmann::ordered_json;

// exit codes per the interface contract
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStall = 3;
constexpr int kExitIo = 4;

[[noreturn]] void die(int code, const std::string& msg) {
  std::fprintf(stderr, "smim: %s\n", msg.c_str());
  std::exit(code);
}

int code_of(smim_status st) {
  switch (st) {
    case SMIM_OK: return kExitOk;
    case SMIM_ERR_INVALID: return kExitConfig;
    case SMIM_ERR_IO: return kExitIo;
    case SMIM_ERR_STALL: return kExitStall;
    default: return kExitIo;
  }
}

void check(smim_status st, const std::string& context) {
  if (st != SMIM_OK) die(code_of(st), context + ": " + smim_last_error());
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  smim_string_free(s);
  return out;
}

// Flat key=value config with [section] headers; '#' comments. Same syntax the
// library consumes; the CLI only needs lookups and merging.
struct Cfg {
  std::map<std::string, std::string> kv;

  static Cfg parse(const std::string& text) {
    Cfg c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
      if (line.front() == '[') {
        if (line.back() != ']') die(kExitConfig, "config line " + std::to_string(lineno) + ": bad section");
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        die(kExitConfig, "config line " + std::to_string(lineno) + ": expected key=value");
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      const auto vb = val.find_first_not_of(" \t");
      val = vb == std::string::npos ? "" : val.substr(vb);
      c.kv[section.empty() ? key : section + "." + key] = val;
    }
    return c;
  }

  static Cfg parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) die(kExitIo, "cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string get(const std::string& k, const std::string& dflt = "") const {
    const auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  std::string require(const std::string& k) const {
    const auto it = kv.find(k);
    if (it == kv.end()) die(kExitConfig, "missing required config field '" + k + "'");
    return it->second;
  }
  long long num(const std::string& k, long long dflt) const {
    const auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
      return std::stoll(it->second);
    } catch (...) {
      die(kExitConfig, "config field '" + k + "' is not an integer: " + it->second);
    }
  }
  uint64_t unum(const std::string& k, uint64_t dflt) const {
    const auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
      return std::stoull(it->second);
    } catch (...) {
      die(kExitConfig, "config field '" + k + "' is not an unsigned integer: " + it->second);
    }
  }
  double real(const std::string& k, double dflt) const {
    const auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (...) {
      die(kExitConfig, "config field '" + k + "' is not a number: " + it->second);
    }
  }

  std::string serialize() const {
    std::string cur;
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, value] : kv) {
      const auto dot = key.rfind('.');
      const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
      if (section != cur || first) {
        if (!first) os << "\n";
        if (!section.empty()) os << "[" << section << "]\n";
        cur = section;
        first = false;
      }
      os << name << " = " << value << "\n";
    }
    return os.str();
  }
};

std::vector<long long> parse_grid(const std::string& text, const char* what) {
  std::vector<long long> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoll(tok));
    } catch (...) {
      die(kExitConfig, std::string(what) + ": bad entry '" + tok + "'");
    }
  }
  if (out.empty()) die(kExitConfig, std::string(what) + ": empty grid");
  return out;
}

void write_text(const std::string& path, const std::string& text, const char* what) {
  std::ofstream out(path);
  if (!out) die(kExitIo, std::string("cannot write ") + what + ": " + path);
  out << text;
}

struct Common {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out_dir = ".";
};

Cfg load_config(const Common& c) {
  Cfg cfg = c.config_path.empty() ? Cfg{} : Cfg::parse_file(c.config_path);
  if (c.seed_set) cfg.kv["data.seed"] = std::to_string(c.seed);
  return cfg;
}

int resolve_threads(const Common& c) {
  if (c.threads > 0) return c.threads;
  if (const char* env = std::getenv("SMIM_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (...) {
      die(kExitConfig, "SMIM_THREADS is not an integer");
    }
  }
  return 1;
}

smim_link* make_link(const Cfg& cfg) {
  smim_link* link = nullptr;
  check(smim_link_create(cfg.require("link.spec").c_str(), &link), "link.spec");
  return link;
}

std::string estimator_options(const Cfg& cfg, uint64_t seed_override, bool has_override) {
  // forward the estimator/planner sections verbatim
  std::ostringstream os;
  for (const auto& [k, v] : cfg.kv) {
    if (k.rfind("estimator.", 0) == 0 || k.rfind("planner.", 0) == 0) os << k << " = " << v << "\n";
  }
  if (has_override) os << "estimator.seed = " << seed_override << "\n";
  return os.str();
}

// ---- subcommands -----------------------------------------------------

int cmd_generate(const Common& common) {
  const Cfg cfg = load_config(common);
  smim_link* link = make_link(cfg);
  const int d = static_cast<int>(cfg.num("data.d", -1));
  if (d < 2) die(kExitConfig, "missing or invalid config field 'data.d'");
  const long long n = cfg.num("data.n", -1);
  if (n < 1) die(kExitConfig, "missing or invalid config field 'data.n'");
  const uint64_t seed = cfg.unum("data.seed", 1);
  const bool binary = cfg.get("data.format", "text") == "binary";
  const std::string path = common.out_dir + "/" + cfg.get("output.dataset", "dataset.smim");

  smim_frame* w = nullptr;
  check(smim_frame_random(d, smim_link_index_dim(link), seed ^ 0x9e3779b97f4a7c15ULL, &w),
        "planted frame");
  smim_dataset* data = nullptr;
  check(smim_dataset_generate(link, w, n, seed, &data), "generate");
  check(smim_dataset_save(data, path.c_str(), binary ? 1 : 0), "save dataset");
  check(smim_frame_save(w, (path + ".frame").c_str()), "save sidecar frame");
  std::printf("wrote %s (+.frame sidecar): d=%d n=%lld arity=%d\n", path.c_str(), d,
              static_cast<long long>(n), smim_dataset_arity(data));
  smim_dataset_destroy(data);
  smim_frame_destroy(w);
  smim_link_destroy(link);
  return kExitOk;
}

int cmd_estimate(const Common& common, const std::string& dataset_path) {
  const Cfg cfg = load_config(common);
  smim_dataset* data = nullptr;
  check(smim_dataset_load(dataset_path.c_str(), &data), "load dataset");

  smim_link* link = nullptr;
  if (cfg.has("link.spec")) link = make_link(cfg);

  // validation the library cannot do on its own: the degree list cannot
  // exceed the link's index dimension
  if (link && cfg.has("estimator.degrees")) {
    int steps = 1;
    for (char ch : cfg.get("estimator.degrees"))
      if (ch == ',') ++steps;
    if (steps > smim_link_index_dim(link))
      die(kExitConfig, "estimator.degrees: more steps than the link has indices");
  }

  smim_frame* truth = nullptr;
  const std::string sidecar = dataset_path + ".frame";
  if (std::ifstream(sidecar).good()) check(smim_frame_load(sidecar.c_str(), &truth), "sidecar");

  smim_frame* w_hat = nullptr;
  char* report_raw = nullptr;
  const smim_status st = smim_estimate(data, link, estimator_options(cfg, 0, false).c_str(), truth,
                                       &w_hat, &report_raw);
  if (st != SMIM_OK && st != SMIM_ERR_STALL) die(code_of(st), std::string("estimate: ") + smim_last_error());

  json report = json::parse(take_string(report_raw));
  report["config"] = cfg.serialize();
  const std::string report_path = common.out_dir + "/" + cfg.get("output.report", "estimate.json");
  write_text(report_path, report.dump(2) + "\n", "report");
  const std::string frame_path = common.out_dir + "/" + cfg.get("output.frame", "recovered.frame");
  check(smim_frame_save(w_hat, frame_path.c_str()), "save recovered frame");

  if (report.contains("frame_distance"))
    std::printf("frame_distance = %.6f\n", report["frame_distance"].get<double>());
  std::printf("report: %s\nframe: %s\n", report_path.c_str(), frame_path.c_str());

  smim_frame_destroy(w_hat);
  if (truth) smim_frame_destroy(truth);
  if (link) smim_link_destroy(link);
  smim_dataset_destroy(data);
  return st == SMIM_ERR_STALL ? kExitStall : kExitOk;
}

std::string complexity_table(const json& report) {
  std::ostringstream os;
  os << "mode    step  ell  cost_exp  rank+\n";
  for (const char* mode : {"sample", "query"}) {
    if (!report.contains(mode)) continue;
    const auto& plan = report[mode];
    int step = 0;
    for (const auto& js : plan["steps"]) {
      os << mode;
      os << std::string(8 - std::string(mode).size(), ' ');
      if (js.contains("cost_exponent")) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-5d %-4d %-9.3f %d\n", step, js["ell"].get<int>(),
                      js["cost_exponent"].get<double>(), js["rank_increment"].get<int>());
        os << buf;
      } else {
        os << step << "     (stalled)\n";
      }
      ++step;
    }
  }
  return os.str();
}

int cmd_complexity(const Common& common, bool symbolic) {
  const Cfg cfg = load_config(common);
  std::ostringstream opts;
  for (const auto& [k, v] : cfg.kv)
    if (k.rfind("planner.", 0) == 0 || k.rfind("symbolic.", 0) == 0) opts << k << " = " << v << "\n";

  char* raw = nullptr;
  if (symbolic) {
    check(smim_complexity_symbolic(opts.str().c_str(), &raw), "symbolic planner");
  } else {
    smim_link* link = make_link(cfg);
    smim_frame* planted = nullptr;
    const int d = static_cast<int>(cfg.num("data.d", 30));
    const uint64_t seed = cfg.unum("data.seed", 1);
    check(smim_frame_random(d, smim_link_index_dim(link), seed ^ 0x517cc1b727220a95ULL, &planted),
          "planted frame");
    check(smim_complexity(link, planted, opts.str().c_str(), &raw), "planner");
    smim_frame_destroy(planted);
    smim_link_destroy(link);
  }
  json report = json::parse(take_string(raw));
  report["config"] = cfg.serialize();
  const std::string path = common.out_dir + "/" + cfg.get("output.report", "complexity.json");
  write_text(path, report.dump(2) + "\n", "report");
  if (!symbolic) std::printf("%s", complexity_table(report).c_str());
  std::printf("report: %s\n", path.c_str());
  return kExitOk;
}

struct TrialResult {
  double distance = 1.0;
  double wall_ms = 0.0;
  bool ok = false;
};

int cmd_scaling(const Common& common) {
  const Cfg cfg = load_config(common);
  smim_link* link = make_link(cfg);
  const auto d_grid = parse_grid(cfg.require("scaling.d_grid"), "scaling.d_grid");
  const auto n_grid = parse_grid(cfg.require("scaling.n_grid"), "scaling.n_grid");
  const int trials = static_cast<int>(cfg.num("scaling.trials", 20));
  if (trials < 1) die(kExitConfig, "scaling.trials must be >= 1");
  const double threshold = cfg.real("scaling.success_threshold", 0.3);
  const bool n_is_ratio = cfg.get("scaling.n_unit", "samples") == "per_d";
  const uint64_t master = cfg.unum("data.seed", 1);
  const double budget_sec = cfg.real("scaling.budget_sec", 0.0);
  const int threads = resolve_threads(common);

  const std::string csv_path = common.out_dir + "/" + cfg.get("output.csv", "scaling.csv");
  std::ofstream csv(csv_path);
  if (!csv) die(kExitIo, "cannot write csv: " + csv_path);
  csv << "d,n,trials,success_rate,median_distance,median_wall_ms\n";

  const auto t_begin = std::chrono::steady_clock::now();
  bool budget_hit = false;
  for (long long d : d_grid) {
    for (long long n_raw : n_grid) {
      const long long n = n_is_ratio ? n_raw * d : n_raw;
      if (budget_sec > 0) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
        if (elapsed > budget_sec) {
          csv << "# resume: d=" << d << ",n=" << n << "\n";
          budget_hit = true;
          break;
        }
      }
      std::vector<TrialResult> results(trials);
      std::atomic<int> next{0};
      auto worker = [&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= trials) return;
          // per-trial seed from (master, d, n, trial): parallelism never
          // changes results
          const uint64_t seed = master ^ (0x9e3779b97f4a7c15ULL * (t + 1)) ^
                                (static_cast<uint64_t>(d) << 32) ^ static_cast<uint64_t>(n);
          const auto t0 = std::chrono::steady_clock::now();
          smim_frame* w = nullptr;
          smim_dataset* data = nullptr;
          smim_frame* w_hat = nullptr;
          TrialResult r;
          if (smim_frame_random(static_cast<int>(d), smim_link_index_dim(link), seed ^ 0x55aaULL,
                                &w) == SMIM_OK &&
              smim_dataset_generate(link, w, n, seed, &data) == SMIM_OK) {
            const smim_status st = smim_estimate(
                data, link, estimator_options(cfg, seed ^ 0xa5a5ULL, true).c_str(), w, &w_hat,
                nullptr);
            if (st == SMIM_OK && w_hat) {
              double dist = 1.0;
              if (smim_frame_distance(w_hat, w, &dist) == SMIM_OK) {
                r.distance = dist;
                r.ok = true;
              }
            }
          }
          r.wall_ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
          if (w_hat) smim_frame_destroy(w_hat);
          if (data) smim_dataset_destroy(data);
          if (w) smim_frame_destroy(w);
          results[t] = r;
        }
      };
      if (threads > 1) {
        smim_set_threads(1);  // trial-level parallelism instead
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        smim_set_threads(threads);
      } else {
        worker();
      }

      int successes = 0;
      std::vector<double> dists, walls;
      for (const TrialResult& r : results) {
        if (r.ok && r.distance <= threshold) ++successes;
        dists.push_back(r.ok ? r.distance : 1.0);
        walls.push_back(r.wall_ms);
      }
      std::sort(dists.begin(), dists.end());
      std::sort(walls.begin(), walls.end());
      char line[256];
      std::snprintf(line, sizeof(line), "%lld,%lld,%d,%.17g,%.17g,%.17g\n", d, n, trials,
                    double(successes) / trials, dists[dists.size() / 2], walls[walls.size() / 2]);
      csv << line;
      std::printf("d=%lld n=%lld success=%.2f median_dist=%.3f\n", d, n,
                  double(successes) / trials, dists[dists.size() / 2]);
    }
    if (budget_hit) break;
  }
  smim_link_destroy(link);
  std::printf("csv: %s\n", csv_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical multi-index model estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Common common;
  app.add_option("--config", common.config_path, "configuration file (key=value with [sections])");
  auto* seed_opt = app.add_option("--seed", common.seed, "master seed (overrides data.seed)");
  app.add_option("--threads", common.threads, "worker threads (SMIM_THREADS as fallback)");
  app.add_option("--out", common.out_dir, "output directory");

  auto* cmd_gen = app.add_subcommand("generate", "sample a dataset and write it with a frame sidecar");
  std::string dataset_path;
  auto* cmd_est = app.add_subcommand("estimate", "run harmonic tensor unfolding on a dataset");
  cmd_est->add_option("dataset", dataset_path, "dataset file")->required();
  auto* cmd_cx = app.add_subcommand("complexity", "Monte Carlo / symbolic degree-sequence planner");
  bool symbolic = false;
  cmd_cx->add_flag("--symbolic", symbolic, "symbolic mixture-of-parities mode");
  auto* cmd_sc = app.add_subcommand("scaling", "success-rate grid over (d, n)");

  CLI11_PARSE(app, argc, argv);
  common.seed_set = seed_opt->count() > 0;

  std::error_code ec;
  std::filesystem::create_directories(common.out_dir, ec);
  if (ec) die(kExitIo, "cannot create output directory: " + common.out_dir);

  smim_set_threads(resolve_threads(common));

  try {
    if (cmd_gen->parsed()) return cmd_generate(common);
    if (cmd_est->parsed()) return cmd_estimate(common, dataset_path);
    if (cmd_cx->parsed()) return cmd_complexity(common, symbolic);
    if (cmd_sc->parsed()) return cmd_scaling(common);
  } catch (const std::exception& e) {
    die(kExitIo, e.what());
  }
  return kExitConfig;
}
