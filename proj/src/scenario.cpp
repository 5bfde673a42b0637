#include "kinop/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace kinop {

std::string to_string(Model m) { return m == Model::Controlled ? "controlled" : "uncontrolled"; }

std::string to_string(Solver s) {
  switch (s) {
    case Solver::Mc: return "mc";
    case Solver::FpH: return "fp-h";
    case Solver::FpG: return "fp-g";
    case Solver::Fp2d: return "fp-2d";
    case Solver::Characteristics: return "characteristics";
  }
  return "?";
}

std::string to_string(MeanMode m) { return m == MeanMode::ClosedForm ? "closed-form" : "self-consistent"; }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

InteractionKernels Scenario::kernels() const {
  if (influence == "unit") return InteractionKernels::standard();
  return InteractionKernels::bounded_confidence(std::stod(influence.substr(influence.find(':') + 1)));
}

namespace {

const std::set<std::string> kSections = {"scenario", "params", "kernels", "leaders", "initial",
                                         "run",      "grid",   "compare", "classify"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

class Document {
 public:
  explicit Document(const std::string& text) {
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find_first_of("#;");
      const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!kSections.count(section))
          throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
      if (section.empty()) throw ConfigError("line " + std::to_string(line) + ": key outside any section");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
      auto& sec = sections_[section];
      if (sec.count(key)) throw ConfigError(where(section, key) + ": duplicate key");
      sec[key] = Entry{trim(s.substr(eq + 1)), line};
    }
  }

  static std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
  }

  const std::string* get(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second.value;
  }

  const std::string& require(const std::string& section, const std::string& key) {
    const std::string* v = get(section, key);
    if (!v) throw ConfigError(where(section, key) + ": missing required key");
    return *v;
  }

  void reject_unused() const {
    for (const auto& [name, sec] : sections_)
      for (const auto& [key, e] : sec)
        if (!e.used) throw ConfigError(where(name, key) + ": unknown key (line " + std::to_string(e.line) + ")");
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

double to_number(const std::string& v, const std::string& where) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
    throw ConfigError(where + ": expected a finite number, got '" + v + "'");
  return x;
}

template <typename Int>
Int to_integer(const std::string& v, const std::string& where) {
  Int x = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return x;
}

template <typename Enum>
Enum to_enum(const std::string& v, const std::string& where, const std::vector<std::pair<std::string, Enum>>& names) {
  std::string allowed;
  for (const auto& [name, e] : names) {
    if (name == v) return e;
    allowed += (allowed.empty() ? "" : ", ") + name;
  }
  throw ConfigError(where + ": expected one of {" + allowed + "}, got '" + v + "'");
}

const std::vector<std::pair<std::string, Solver>> kSolvers = {{"mc", Solver::Mc},
                                                              {"fp-h", Solver::FpH},
                                                              {"fp-g", Solver::FpG},
                                                              {"fp-2d", Solver::Fp2d},
                                                              {"characteristics", Solver::Characteristics}};

class Reader {
 public:
  explicit Reader(Document& doc) : doc_(doc) {}

  void number(const std::string& sec, const std::string& key, double& out) {
    if (const std::string* v = doc_.get(sec, key)) out = to_number(*v, Document::where(sec, key));
  }
  template <typename Int>
  void integer(const std::string& sec, const std::string& key, Int& out) {
    if (const std::string* v = doc_.get(sec, key)) out = to_integer<Int>(*v, Document::where(sec, key));
  }
  template <typename Enum>
  void choice(const std::string& sec, const std::string& key, Enum& out,
              const std::vector<std::pair<std::string, Enum>>& names) {
    if (const std::string* v = doc_.get(sec, key)) out = to_enum(*v, Document::where(sec, key), names);
  }
  void list(const std::string& sec, const std::string& key, std::vector<double>& out) {
    const std::string* v = doc_.get(sec, key);
    if (!v) return;
    out.clear();
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(Document::where(sec, key) + ": empty list item");
      out.push_back(to_number(item, Document::where(sec, key)));
    }
  }
  std::optional<double> optional_number(const std::string& sec, const std::string& key) {
    const std::string* v = doc_.get(sec, key);
    if (!v) return std::nullopt;
    return to_number(*v, Document::where(sec, key));
  }

 private:
  Document& doc_;
};

void load_table(InitialSpec& init) {
  std::ifstream in(init.table);
  if (!in) throw ConfigError("[initial] table: cannot read '" + init.table + "'");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string s = trim(line.substr(0, line.find('#')));
    if (s.empty()) continue;
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("[initial] table: line " + std::to_string(n) + " needs w,density");
    const std::string a = trim(s.substr(0, comma)), b = trim(s.substr(comma + 1));
    double w = 0.0, d = 0.0;
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), w);
    if (ra.ec != std::errc() && init.table_w.empty()) continue;  // header row
    const std::string where = "[initial] table line " + std::to_string(n);
    w = to_number(a, where);
    d = to_number(b, where);
    if (w < -1.0 || w > 1.0) throw ConfigError(where + ": w must lie in [-1,1]");
    if (d < 0.0) throw ConfigError(where + ": density must be nonnegative");
    if (!init.table_w.empty() && !(w > init.table_w.back()))
      throw ConfigError(where + ": w must increase strictly");
    init.table_w.push_back(w);
    init.table_density.push_back(d);
  }
  if (init.table_w.size() < 2) throw ConfigError("[initial] table: at least two rows required");
  double integral = 0.0;
  for (std::size_t i = 1; i < init.table_w.size(); ++i)
    integral += 0.5 * (init.table_density[i] + init.table_density[i - 1]) * (init.table_w[i] - init.table_w[i - 1]);
  if (!(integral > 0.0)) throw ConfigError("[initial] table: density has zero mass");
}

bool has_opinion(Solver s) { return s == Solver::Mc || s == Solver::FpH || s == Solver::Fp2d; }
bool has_activity(Solver s) { return s != Solver::FpH; }

void check(bool ok, const std::string& where, const std::string& rule) {
  if (!ok) throw ConfigError(where + ": " + rule);
}

}  // namespace

void validate(const Scenario& s) {
  try {
    s.params.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[params] ") + e.what());
  }
  check(s.influence == "unit" || s.influence.rfind("bounded:", 0) == 0, "[kernels] influence",
        "expected 'unit' or 'bounded:<radius>'");
  if (s.influence != "unit") {
    const double r = to_number(s.influence.substr(8), "[kernels] influence");
    check(r > 0.0, "[kernels] influence", "radius must be positive");
  }
  check(!(s.solver == Solver::Mc && s.channels == Channels::Leaders), "[scenario] channels",
        "leaders-only dynamics are not available with solver = mc");

  const RunSpec& r = s.run;
  check(r.t_final >= 0.0, "[run] t_final", "must be nonnegative");
  check(r.output_every >= 0.0, "[run] output_every", "must be nonnegative");
  check(r.dt >= 0.0, "[run] dt", "must be nonnegative");
  check(r.agents >= 2 && r.agents % 2 == 0, "[run] agents", "must be even and at least 2");
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    check(r.snapshots[i] >= 0.0 && r.snapshots[i] <= r.t_final, "[run] snapshots", "times must lie in [0, t_final]");
    check(i == 0 || r.snapshots[i] > r.snapshots[i - 1], "[run] snapshots", "times must increase strictly");
  }

  const GridSpec& g = s.grid;
  check(g.w_cells >= 2, "[grid] w_cells", "must be at least 2");
  check(g.a_cells_per_gamma >= 1, "[grid] a_cells_per_gamma", "must be at least 1");
  check(g.a_min < g.a_max, "[grid] a_max", "must exceed a_min");

  const InitialSpec& in = s.initial;
  using K = InitialSpec::Kind;
  if (in.kind == K::Uniform) {
    check(in.w_min >= -1.0 && in.w_max <= 1.0 && in.w_min < in.w_max, "[initial] w_min",
          "need -1 <= w_min < w_max <= 1");
  }
  if (in.kind == K::Beta) check(in.b1 > 0.0 && in.b2 > 0.0, "[initial] b1", "Beta exponents must be positive");
  if (in.kind == K::Point) {
    check(in.w0 >= -1.0 && in.w0 <= 1.0, "[initial] w0", "must lie in [-1,1]");
    check(in.a0 >= g.a_min && in.a0 <= g.a_max, "[initial] a0", "must lie in [grid.a_min, grid.a_max]");
  } else {
    check(in.a_min < in.a_max, "[initial] a_max", "must exceed a_min");
    check(in.a_min >= g.a_min && in.a_max <= g.a_max, "[initial] a_min",
          "activity box must lie in [grid.a_min, grid.a_max]");
  }
  check(in.kind == K::Table || in.table.empty(), "[initial] table", "only allowed with kind = table");
  check(in.kind != K::Table || !in.table_w.empty(), "[initial] table", "missing for kind = table");

  check(s.leaders.concentration > 0.0, "[leaders] concentration", "must be positive");
  check(s.leaders.kind == LeaderSpec::Kind::Point || std::abs(s.params.mu_l) < 1.0, "[leaders] kind",
        "beta leaders need |mu_l| < 1");

  const CompareSpec& c = s.compare;
  check(c.first != c.second, "[compare] second", "must differ from first");
  check(c.bins >= 1, "[compare] bins", "must be positive");
  check(g.w_cells % c.bins == 0, "[compare] bins", "must divide grid.w_cells");
  check((has_opinion(c.first) && has_opinion(c.second)) || (has_activity(c.first) && has_activity(c.second)),
        "[compare] second", "the two solvers share no marginal");

  check(s.classify.rho_bar.has_value() == s.classify.m_bar.has_value(), "[classify] m_bar",
        "rho_bar and m_bar must be given together");
  if (s.classify.rho_bar) {
    check(*s.classify.rho_bar > 0.0, "[classify] rho_bar", "must be positive");
    check(std::abs(*s.classify.m_bar) < *s.classify.rho_bar, "[classify] m_bar", "need |m_bar| < rho_bar");
  }
}

Scenario parse_config_text(const std::string& text, const std::string& base_dir) {
  Document doc(text);
  Reader rd(doc);
  Scenario s;

  rd.choice("scenario", "model", s.model, {{"uncontrolled", Model::Uncontrolled}, {"controlled", Model::Controlled}});
  rd.choice("scenario", "channels", s.channels,
            {{"agents", Channels::Agents}, {"leaders", Channels::Leaders}, {"both", Channels::Both}});
  s.solver = to_enum(doc.require("scenario", "solver"), "[scenario] solver", kSolvers);
  rd.choice("scenario", "mean_mode", s.mean_mode,
            {{"closed-form", MeanMode::ClosedForm}, {"self-consistent", MeanMode::SelfConsistent}});

  ModelParams& p = s.params;
  const std::pair<const char*, double*> fields[] = {
      {"lambda_p", &p.lambda_p}, {"lambda_l", &p.lambda_l}, {"lambda_A", &p.lambda_A}, {"lambda_c", &p.lambda_c},
      {"sigma2_p", &p.sigma2_p}, {"sigma2_l", &p.sigma2_l}, {"omega_p", &p.omega_p},   {"omega_l", &p.omega_l},
      {"eps_floor", &p.eps_floor}, {"gamma", &p.gamma},     {"theta", &p.theta},       {"qi_scale", &p.qi_scale},
      {"mu_l", &p.mu_l}};
  for (const auto& [key, ptr] : fields) rd.number("params", key, *ptr);
  p.a_p = default_fade(p.omega_p, p.eps_floor);
  p.a_l = default_fade(p.omega_l, p.eps_floor);
  rd.number("params", "a_p", p.a_p);
  rd.number("params", "a_l", p.a_l);

  if (const std::string* v = doc.get("kernels", "influence")) s.influence = *v;

  rd.choice("leaders", "kind", s.leaders.kind, {{"point", LeaderSpec::Kind::Point}, {"beta", LeaderSpec::Kind::Beta}});
  rd.number("leaders", "concentration", s.leaders.concentration);

  InitialSpec& in = s.initial;
  rd.choice("initial", "kind", in.kind,
            {{"uniform", InitialSpec::Kind::Uniform},
             {"beta", InitialSpec::Kind::Beta},
             {"point", InitialSpec::Kind::Point},
             {"table", InitialSpec::Kind::Table}});
  rd.number("initial", "w_min", in.w_min);
  rd.number("initial", "w_max", in.w_max);
  rd.number("initial", "a_min", in.a_min);
  rd.number("initial", "a_max", in.a_max);
  rd.number("initial", "b1", in.b1);
  rd.number("initial", "b2", in.b2);
  rd.number("initial", "w0", in.w0);
  rd.number("initial", "a0", in.a0);
  if (const std::string* v = doc.get("initial", "table")) {
    std::filesystem::path path(*v);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    in.table = std::filesystem::weakly_canonical(path).string();
    load_table(in);
  }

  s.run.t_final = to_number(doc.require("run", "t_final"), "[run] t_final");
  rd.number("run", "output_every", s.run.output_every);
  rd.list("run", "snapshots", s.run.snapshots);
  rd.integer("run", "seed", s.run.seed);
  rd.integer("run", "agents", s.run.agents);
  rd.number("run", "dt", s.run.dt);

  rd.integer("grid", "w_cells", s.grid.w_cells);
  rd.integer("grid", "a_cells_per_gamma", s.grid.a_cells_per_gamma);
  rd.number("grid", "a_min", s.grid.a_min);
  rd.number("grid", "a_max", s.grid.a_max);

  rd.choice("compare", "first", s.compare.first, kSolvers);
  rd.choice("compare", "second", s.compare.second, kSolvers);
  rd.integer("compare", "bins", s.compare.bins);

  s.classify.rho_bar = rd.optional_number("classify", "rho_bar");
  s.classify.m_bar = rd.optional_number("classify", "m_bar");

  doc.reject_unused();
  validate(s);
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string serialize_config(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&o](const char* key, const std::string& v) { o << key << " = " << v << '\n'; };
  auto num = [&kv](const char* key, double v) { kv(key, format_double(v)); };
  const ModelParams& p = s.params;

  o << "[scenario]\n";
  kv("model", to_string(s.model));
  kv("channels", to_string(s.channels));
  kv("solver", to_string(s.solver));
  kv("mean_mode", to_string(s.mean_mode));

  o << "\n[params]\n";
  num("lambda_p", p.lambda_p);
  num("lambda_l", p.lambda_l);
  num("lambda_A", p.lambda_A);
  num("lambda_c", p.lambda_c);
  num("sigma2_p", p.sigma2_p);
  num("sigma2_l", p.sigma2_l);
  num("omega_p", p.omega_p);
  num("omega_l", p.omega_l);
  num("eps_floor", p.eps_floor);
  num("gamma", p.gamma);
  num("a_p", p.a_p);
  num("a_l", p.a_l);
  num("theta", p.theta);
  num("qi_scale", p.qi_scale);
  num("mu_l", p.mu_l);

  o << "\n[kernels]\n";
  kv("influence", s.influence);

  o << "\n[leaders]\n";
  kv("kind", s.leaders.kind == LeaderSpec::Kind::Point ? "point" : "beta");
  num("concentration", s.leaders.concentration);

  const InitialSpec& in = s.initial;
  o << "\n[initial]\n";
  static const char* kinds[] = {"uniform", "beta", "point", "table"};
  kv("kind", kinds[static_cast<int>(in.kind)]);
  num("w_min", in.w_min);
  num("w_max", in.w_max);
  num("a_min", in.a_min);
  num("a_max", in.a_max);
  num("b1", in.b1);
  num("b2", in.b2);
  num("w0", in.w0);
  num("a0", in.a0);
  if (!in.table.empty()) kv("table", in.table);

  o << "\n[run]\n";
  num("t_final", s.run.t_final);
  num("output_every", s.run.output_every);
  std::string snaps;
  for (double t : s.run.snapshots) snaps += (snaps.empty() ? "" : ", ") + format_double(t);
  if (!snaps.empty()) kv("snapshots", snaps);
  kv("seed", std::to_string(s.run.seed));
  kv("agents", std::to_string(s.run.agents));
  num("dt", s.run.dt);

  o << "\n[grid]\n";
  kv("w_cells", std::to_string(s.grid.w_cells));
  kv("a_cells_per_gamma", std::to_string(s.grid.a_cells_per_gamma));
  num("a_min", s.grid.a_min);
  num("a_max", s.grid.a_max);

  o << "\n[compare]\n";
  kv("first", to_string(s.compare.first));
  kv("second", to_string(s.compare.second));
  kv("bins", std::to_string(s.compare.bins));

  if (s.classify.rho_bar) {
    o << "\n[classify]\n";
    num("rho_bar", *s.classify.rho_bar);
    num("m_bar", *s.classify.m_bar);
  }
  return o.str();
}

}  // namespace kinop
