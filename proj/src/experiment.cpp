#include "nnpde/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "nnpde/metrics.hpp"

namespace nnpde {

namespace {

const std::vector<std::string> kSections = {"problem", "network", "sampling", "training", "validation", "output"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

class Reader {
 public:
  explicit Reader(std::istream& is) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
          throw ConfigError("[" + section + "]", "unknown section");
        if (doc_.count(section)) throw ConfigError("[" + section + "]", "duplicate section");
        doc_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
      if (section.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": key outside any section");
      const std::string key = trim(line.substr(0, eq));
      if (doc_[section].count(key)) throw ConfigError(name(section, key), "duplicate key");
      doc_[section][key] = {trim(line.substr(eq + 1)), false};
    }
  }

  static std::string name(const std::string& section, const std::string& key) { return section + "." + key; }

  void require_section(const std::string& section) const {
    if (!doc_.count(section)) throw ConfigError("[" + section + "]", "missing section");
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = doc_.find(section);
    return s != doc_.end() && s->second.count(key);
  }

  std::string str(const std::string& section, const std::string& key) {
    if (!has(section, key)) throw ConfigError(name(section, key), "missing required key");
    Entry& e = doc_[section][key];
    e.used = true;
    if (e.value.empty()) throw ConfigError(name(section, key), "empty value");
    return e.value;
  }
  std::string str(const std::string& section, const std::string& key, const std::string& fallback) {
    return has(section, key) ? str(section, key) : fallback;
  }

  double real(const std::string& section, const std::string& key) { return to_real(str(section, key), section, key); }
  double real(const std::string& section, const std::string& key, double fallback) {
    return has(section, key) ? real(section, key) : fallback;
  }
  long integer(const std::string& section, const std::string& key) {
    return to_integer(str(section, key), section, key);
  }
  long integer(const std::string& section, const std::string& key, long fallback) {
    return has(section, key) ? integer(section, key) : fallback;
  }
  bool boolean(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) return fallback;
    const std::string v = str(section, key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(name(section, key), "expected true or false, got '" + v + "'");
  }

  std::vector<int> widths(const std::string& section, const std::string& key) {
    std::vector<int> out;
    for (const std::string& w : split(str(section, key), ',')) {
      const long v = to_integer(w, section, key);
      if (v < 1) throw ConfigError(name(section, key), "widths must be positive");
      out.push_back(int(v));
    }
    return out;
  }

  LRSchedule schedule(const std::string& section, const std::string& lr_key, const std::string& ms_key) {
    LRSchedule s{real(section, lr_key), {}};
    if (!has(section, ms_key)) return s;
    const std::string v = str(section, ms_key);
    if (v == "none") return s;
    for (const std::string& item : split(v, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError(name(section, ms_key), "expected iteration:multiplier");
      s.milestones.emplace_back(to_integer(trim(item.substr(0, colon)), section, ms_key),
                                to_real(trim(item.substr(colon + 1)), section, ms_key));
    }
    return s;
  }

  template <typename F>
  auto parsed(const std::string& section, const std::string& key, F&& parse) {
    const std::string v = str(section, key);
    try {
      return parse(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(name(section, key), e.what());
    }
  }

  template <typename T, typename F>
  T parsed(const std::string& section, const std::string& key, T fallback, F&& parse) {
    return has(section, key) ? T(parsed(section, key, parse)) : fallback;
  }

  void finish() const {
    for (const auto& [section, entries] : doc_)
      for (const auto& [key, e] : entries)
        if (!e.used) throw ConfigError(name(section, key), "unknown key");
  }

 private:
  struct Entry {
    std::string value;
    bool used = false;
  };

  static double to_real(const std::string& v, const std::string& section, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw ConfigError(name(section, key), "expected a number, got '" + v + "'");
    return x;
  }
  static long to_integer(const std::string& v, const std::string& section, const std::string& key) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') throw ConfigError(name(section, key), "expected an integer, got '" + v + "'");
    return x;
  }

  std::map<std::string, std::map<std::string, Entry>> doc_;
};

EarlyStop parse_stop(const std::string& v) {
  std::istringstream is(v);
  std::string kind;
  is >> kind;
  EarlyStop s;
  if (kind == "none") {
  } else if (kind == "fixed") {
    s.kind = EarlyStop::Kind::fixed;
    if (!(is >> s.at)) throw std::invalid_argument("expected 'fixed <iteration>'");
  } else if (kind == "patience") {
    s.kind = EarlyStop::Kind::patience;
    if (!(is >> s.patience)) throw std::invalid_argument("expected 'patience <rows> [min_delta]'");
    if (!(is >> s.min_delta)) s.min_delta = 0.0;
  } else {
    throw std::invalid_argument("expected none, fixed or patience");
  }
  std::string rest;
  if (is >> rest) throw std::invalid_argument("trailing text '" + rest + "'");
  return s;
}

std::string stop_text(const EarlyStop& s) {
  switch (s.kind) {
    case EarlyStop::Kind::none: return "none";
    case EarlyStop::Kind::fixed: return "fixed " + std::to_string(s.at);
    case EarlyStop::Kind::patience: return "patience " + std::to_string(s.patience) + " " + fmt(s.min_delta);
  }
  return "none";
}

std::string hidden_text(const NetworkArch& a) {
  std::string out;
  for (std::size_t i = 1; i + 1 < a.widths.size(); ++i) out += (out.empty() ? "" : ",") + std::to_string(a.widths[i]);
  return out;
}

std::string milestones_text(const LRSchedule& s) {
  if (s.milestones.empty()) return "none";
  std::string out;
  for (const auto& [it, mult] : s.milestones)
    out += (out.empty() ? "" : ",") + std::to_string(it) + ":" + fmt(mult);
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  Reader r(is);
  for (const char* s : {"problem", "network", "sampling", "training"}) r.require_section(s);

  ExperimentConfig c;
  TrainConfig& t = c.train;
  t.problem = r.parsed("problem", "benchmark", benchmark_from_string);
  t.method = r.parsed("problem", "method", method_from_string);
  const int d = builtin(t.problem).dim();
  const bool wan = t.method == Method::wan, vpinn = t.method == Method::vpinn;

  const Activation act = r.parsed("network", "activation", Activation::tanh, activation_from_string);
  t.arch = NetworkArch::mlp(d, r.widths("network", "hidden"), act);
  t.precision = r.parsed("network", "precision", Precision::float32, precision_from_string);

  t.n = r.integer("sampling", "interior");
  if (!vpinn) {
    t.m = r.integer("sampling", "boundary");
    t.alpha = r.real("sampling", "alpha");
  }

  t.iterations = r.integer("training", "iterations");
  t.optimizer.kind = r.parsed("training", "optimizer", optimizer_from_string);
  t.optimizer.beta1 = r.real("training", "adam_beta1", t.optimizer.beta1);
  t.optimizer.beta2 = r.real("training", "adam_beta2", t.optimizer.beta2);
  t.optimizer.adam_eps = r.real("training", "adam_eps", t.optimizer.adam_eps);
  t.optimizer.adagrad_eps = r.real("training", "adagrad_eps", t.optimizer.adagrad_eps);
  t.lr = r.schedule("training", "lr", "lr_milestones");
  t.seed = std::uint64_t(r.integer("training", "seed", 0));
  if (r.has("training", "stop")) t.stop = r.parsed("training", "stop", parse_stop);

  if (wan) {
    WanSettings w;
    w.phi_arch = NetworkArch::mlp(d, r.widths("network", "test_hidden"),
                                  r.parsed("network", "test_activation", act, activation_from_string));
    w.u_steps = int(r.integer("training", "u_steps"));
    w.phi_steps = int(r.integer("training", "test_steps"));
    w.phi_first = r.boolean("training", "test_first", true);
    w.phi_optimizer = t.optimizer;
    w.phi_optimizer.kind = r.parsed("training", "test_optimizer", optimizer_from_string);
    w.phi_lr = r.schedule("training", "test_lr", "test_lr_milestones");
    t.wan = w;
  }
  if (vpinn) {
    VpinnSettings v;
    v.aux_arch = NetworkArch::mlp(2, r.widths("network", "aux_hidden"),
                                  r.parsed("network", "aux_activation", act, activation_from_string));
    v.mesh_nodes = int(r.integer("sampling", "mesh_nodes"));
    v.mc_per_triangle = int(r.integer("sampling", "mc_per_triangle", v.mc_per_triangle));
    v.aux_points = r.integer("sampling", "aux_points", v.aux_points);
    v.pretrain.stop_rel_error = r.real("training", "pretrain_stop_rel_error", v.pretrain.stop_rel_error);
    v.pretrain.max_iterations = r.integer("training", "pretrain_max_iterations", v.pretrain.max_iterations);
    if (r.has("training", "pretrain_lr"))
      v.pretrain.schedule = r.schedule("training", "pretrain_lr", "pretrain_lr_milestones");
    t.vpinn = v;
  }

  t.val_every = r.integer("validation", "every", wan ? 1 : 10);
  t.val_size = r.integer("validation", "size", kValidationSize);
  t.val_seed = std::uint64_t(r.integer("validation", "seed", long(kValidationSeed)));

  c.name = r.str("output", "name", "custom");
  c.out_dir = r.str("output", "dir", "runs/" + c.name);
  c.grid = int(r.integer("output", "grid", 64));
  t.wall_time = r.boolean("output", "wall_time", true);
  r.finish();

  if (c.grid < 2) throw ConfigError("output.grid", "grid resolution must be at least 2");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  const TrainConfig& t = c.train;
  os << "[problem]\n";
  os << "benchmark = " << to_string(t.problem) << "\n";
  os << "method = " << to_string(t.method) << "\n\n";

  os << "[network]\n";
  os << "hidden = " << hidden_text(t.arch) << "\n";
  os << "activation = " << to_string(t.arch.activation) << "\n";
  os << "precision = " << to_string(t.precision) << "\n";
  if (t.wan) {
    os << "test_hidden = " << hidden_text(t.wan->phi_arch) << "\n";
    os << "test_activation = " << to_string(t.wan->phi_arch.activation) << "\n";
  }
  if (t.vpinn) {
    os << "aux_hidden = " << hidden_text(t.vpinn->aux_arch) << "\n";
    os << "aux_activation = " << to_string(t.vpinn->aux_arch.activation) << "\n";
  }
  os << "\n[sampling]\n";
  os << "interior = " << t.n << "\n";
  if (!t.vpinn) {
    os << "boundary = " << t.m << "\n";
    os << "alpha = " << fmt(t.alpha) << "\n";
  } else {
    os << "mesh_nodes = " << t.vpinn->mesh_nodes << "\n";
    os << "mc_per_triangle = " << t.vpinn->mc_per_triangle << "\n";
    os << "aux_points = " << t.vpinn->aux_points << "\n";
  }

  os << "\n[training]\n";
  os << "iterations = " << t.iterations << "\n";
  os << "optimizer = " << to_string(t.optimizer.kind) << "\n";
  os << "lr = " << fmt(t.lr.base_lr) << "\n";
  os << "lr_milestones = " << milestones_text(t.lr) << "\n";
  os << "adam_beta1 = " << fmt(t.optimizer.beta1) << "\n";
  os << "adam_beta2 = " << fmt(t.optimizer.beta2) << "\n";
  os << "adam_eps = " << fmt(t.optimizer.adam_eps) << "\n";
  os << "adagrad_eps = " << fmt(t.optimizer.adagrad_eps) << "\n";
  os << "seed = " << t.seed << "\n";
  os << "stop = " << stop_text(t.stop) << "\n";
  if (t.wan) {
    os << "u_steps = " << t.wan->u_steps << "\n";
    os << "test_steps = " << t.wan->phi_steps << "\n";
    os << "test_first = " << (t.wan->phi_first ? "true" : "false") << "\n";
    os << "test_optimizer = " << to_string(t.wan->phi_optimizer.kind) << "\n";
    os << "test_lr = " << fmt(t.wan->phi_lr.base_lr) << "\n";
    os << "test_lr_milestones = " << milestones_text(t.wan->phi_lr) << "\n";
  }
  if (t.vpinn) {
    os << "pretrain_stop_rel_error = " << fmt(t.vpinn->pretrain.stop_rel_error) << "\n";
    os << "pretrain_max_iterations = " << t.vpinn->pretrain.max_iterations << "\n";
    os << "pretrain_lr = " << fmt(t.vpinn->pretrain.schedule.base_lr) << "\n";
    os << "pretrain_lr_milestones = " << milestones_text(t.vpinn->pretrain.schedule) << "\n";
  }

  os << "\n[validation]\n";
  os << "every = " << t.val_every << "\n";
  os << "size = " << t.val_size << "\n";
  os << "seed = " << t.val_seed << "\n";

  os << "\n[output]\n";
  os << "name = " << c.name << "\n";
  os << "dir = " << c.out_dir.string() << "\n";
  os << "grid = " << c.grid << "\n";
  os << "wall_time = " << (t.wall_time ? "true" : "false") << "\n";
}

// ---------------------------------------------------------------------------

namespace {

struct PresetDef {
  PresetInfo info;
  ExperimentConfig (*make)();
};

ExperimentConfig base(const std::string& name, Method method, BenchmarkId id, std::vector<int> hidden) {
  ExperimentConfig c;
  c.name = name;
  c.out_dir = "runs/" + name;
  TrainConfig& t = c.train;
  t.method = method;
  t.problem = id;
  t.arch = NetworkArch::mlp(builtin(id).dim(), hidden, Activation::tanh);
  t.val_every = method == Method::wan ? 1 : 10;
  return c;
}

// Two-dimensional problems with the step schedule used for the L-shape and weak-solution examples.
ExperimentConfig step_schedule(const std::string& name, Method method, BenchmarkId id, int mesh_nodes) {
  ExperimentConfig c = base(name, method, id, {30, 30, 30, 30});
  TrainConfig& t = c.train;
  t.n = 5000;
  t.m = 1000;
  t.alpha = 100.0;
  t.iterations = 5000;
  t.lr = {1e-3, {{3000, 0.1}, {4000, 0.1}}};
  if (method == Method::vpinn) {
    VpinnSettings v;
    v.mesh_nodes = mesh_nodes;
    v.aux_arch = NetworkArch::mlp(2, {30, 30}, Activation::tanh);
    t.vpinn = v;
  }
  return c;
}

ExperimentConfig wan_weak(const std::string& name, OptimizerKind kind, double lr_u, double lr_phi, int u_steps,
                          int phi_steps) {
  ExperimentConfig c = base(name, Method::wan, BenchmarkId::ex_weak, {30, 30, 30, 30});
  TrainConfig& t = c.train;
  t.n = 5000;
  t.m = 1000;
  t.alpha = 1e6;
  t.iterations = 5000;
  t.optimizer.kind = kind;
  t.lr = {lr_u, {}};
  WanSettings w;
  w.phi_arch = t.arch;
  w.u_steps = u_steps;
  w.phi_steps = phi_steps;
  w.phi_optimizer.kind = kind;
  w.phi_lr = {lr_phi, {}};
  t.wan = w;
  return c;
}

ExperimentConfig ex6d(const std::string& name, Method method) {
  ExperimentConfig c = base(name, method, BenchmarkId::ex6d, {80, 80, 80, 80});
  TrainConfig& t = c.train;
  t.n = 10000;
  t.m = 2000;
  t.alpha = 100.0;
  t.iterations = 10000;
  t.lr = {1e-3, {{5000, 0.1}, {7000, 0.1}}};
  return c;
}

const std::vector<PresetDef>& preset_defs() {
  static const std::vector<PresetDef> defs = {
      {{"pinn-ex2d", "ex2d", "PINN, 2-D convection-diffusion-reaction on the unit square"},
       [] {
         ExperimentConfig c = base("pinn-ex2d", Method::pinn, BenchmarkId::ex2d, {30, 30, 30, 30});
         c.train.n = 4000;
         c.train.m = 1000;
         c.train.alpha = 1000.0;
         c.train.iterations = 5000;
         c.train.lr = {1e-4, {}};
         return c;
       }},
      {{"pinn-lshape", "ex_lshape", "PINN, Poisson on the L-shaped domain"},
       [] { return step_schedule("pinn-lshape", Method::pinn, BenchmarkId::ex_lshape, 0); }},
      {{"drm-lshape", "ex_lshape", "deep Ritz, Poisson on the L-shaped domain"},
       [] { return step_schedule("drm-lshape", Method::drm, BenchmarkId::ex_lshape, 0); }},
      {{"vpinn-lshape", "ex_lshape", "VPINN with P1 test functions on the L-shaped domain"},
       [] { return step_schedule("vpinn-lshape", Method::vpinn, BenchmarkId::ex_lshape, 2113); }},
      {{"pinn-weak", "ex_weak", "PINN, Poisson with a kinked solution"},
       [] { return step_schedule("pinn-weak", Method::pinn, BenchmarkId::ex_weak, 0); }},
      {{"drm-weak", "ex_weak", "deep Ritz, Poisson with a kinked solution"},
       [] { return step_schedule("drm-weak", Method::drm, BenchmarkId::ex_weak, 0); }},
      {{"vpinn-weak", "ex_weak", "VPINN, Poisson with a kinked solution"},
       [] { return step_schedule("vpinn-weak", Method::vpinn, BenchmarkId::ex_weak, 1264); }},
      {{"wan-weak", "ex_weak", "WAN, Poisson with a kinked solution"},
       [] { return wan_weak("wan-weak", OptimizerKind::adagrad, 0.015, 0.04, 3, 1); }},
      {{"pinn-ex4d", "ex4d", "PINN, 4-D Poisson on the unit hypercube"},
       [] {
         ExperimentConfig c = base("pinn-ex4d", Method::pinn, BenchmarkId::ex4d, {80, 80, 80, 80});
         c.train.n = 20000;
         c.train.m = 5000;
         c.train.alpha = 200.0;
         c.train.iterations = 20000;
         c.train.lr = {1e-4, {}};
         return c;
       }},
      {{"pinn-ex6d", "ex6d", "PINN, 6-D Poisson on the unit hypercube"},
       [] { return ex6d("pinn-ex6d", Method::pinn); }},
      {{"drm-ex6d", "ex6d", "deep Ritz, 6-D Poisson on the unit hypercube"},
       [] { return ex6d("drm-ex6d", Method::drm); }},
      {{"wan-ex6d", "ex6d", "WAN, 6-D Poisson, stopped at outer iteration 2800"},
       [] {
         ExperimentConfig c = ex6d("wan-ex6d", Method::wan);
         TrainConfig& t = c.train;
         t.alpha = 1e6;
         t.iterations = 5000;
         t.optimizer.kind = OptimizerKind::adagrad;
         t.lr = {0.015, {}};
         t.val_every = 1;
         t.stop = EarlyStop::fixed_at(2800);
         WanSettings w;
         w.phi_arch = t.arch;
         w.phi_lr = {0.04, {}};
         t.wan = w;
         return c;
       }},
      {{"wan-test1", "ex_weak", "WAN instability, AdaGrad 0.015/0.04, 3 solution and 1 test step"},
       [] { return wan_weak("wan-test1", OptimizerKind::adagrad, 0.015, 0.04, 3, 1); }},
      {{"wan-test2", "ex_weak", "WAN instability, Adam 1e-4/1e-3, 3 solution and 1 test step"},
       [] { return wan_weak("wan-test2", OptimizerKind::adam, 1e-4, 1e-3, 3, 1); }},
      {{"wan-test3", "ex_weak", "WAN instability, Adam 1e-4/1e-3, 6 solution and 2 test steps"},
       [] { return wan_weak("wan-test3", OptimizerKind::adam, 1e-4, 1e-3, 6, 2); }},
  };
  return defs;
}

}  // namespace

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list = [] {
    std::vector<PresetInfo> out;
    for (const PresetDef& d : preset_defs()) out.push_back(d.info);
    return out;
  }();
  return list;
}

bool is_preset(const std::string& name) {
  for (const PresetDef& d : preset_defs())
    if (d.info.name == name) return true;
  return false;
}

ExperimentConfig preset(const std::string& name) {
  for (const PresetDef& d : preset_defs())
    if (d.info.name == name) {
      ExperimentConfig c = d.make();
      c.train.validate();
      return c;
    }
  throw ConfigError("", "unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir, std::ostream* log) {
  const TrainConfig& t = config.train;
  t.validate();
  const PDEProblem problem = builtin(t.problem);
  std::filesystem::create_directories(dir);
  {
    std::ofstream rc(dir / "resolved_config.ini");
    write_config(rc, config);
  }
  std::ofstream record(dir / "record.csv");
  record << kRecordHeader << '\n';
  std::ofstream notes(dir / "notes.txt");

  const long progress_every = std::max<long>(t.val_every, (t.iterations / 20 / t.val_every) * t.val_every);
  TrainSinks sinks;
  sinks.on_row = [&](const TrainRow& r) {
    write_csv_row(record, r);
    record.flush();
    if (log && (r.iter % progress_every == 0 || r.iter == t.iterations)) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%s seed %llu  iter %6ld  loss %.4e  val %.4f%%  %.0fs\n", config.name.c_str(),
                    (unsigned long long)t.seed, r.iter, r.loss, 100 * r.val_rel_l2, r.seconds);
      *log << buf << std::flush;
    }
  };
  sinks.on_note = [&](const std::string& s) {
    notes << s << '\n';
    if (log) *log << config.name << ": " << s << '\n' << std::flush;
  };

  RunSummary out;
  out.result = train(t, problem, sinks);
  const TrainRecord& rec = out.result.record;
  out.final_val = rec.rows.back().val_rel_l2;
  out.best_val = rec.best().val_rel_l2;
  out.best_iter = rec.best().iter;
  if (out.result.aborted) notes << "aborted: " << out.result.abort_reason << '\n';

  {
    std::ofstream fm(dir / "final_metrics.csv");
    fm << "method,seed,final_val_rel_l2,best_val_rel_l2,best_iter,iterations_run,aborted\n";
    fm << to_string(t.method) << ',' << t.seed << ',' << fmt(out.final_val) << ',' << fmt(out.best_val) << ','
       << out.best_iter << ',' << out.result.iterations_run << ',' << (out.result.aborted ? 1 : 0) << '\n';
  }
  const GridSpec spec = GridSpec::for_domain(problem.domain, config.grid);
  const FieldGrid exact = field_grid(problem.exact, problem.domain, spec);
  const FieldGrid approx = field_grid(*out.result.solution, problem.domain, spec);
  {
    std::ofstream f(dir / "exact.csv");
    write_csv(f, exact);
  }
  {
    std::ofstream f(dir / "approx.csv");
    write_csv(f, approx);
  }
  {
    std::ofstream f(dir / "abs_error.csv");
    write_csv(f, abs_error(approx, exact));
  }
  return out;
}

}  // namespace nnpde
