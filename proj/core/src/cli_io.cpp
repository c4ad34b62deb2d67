#include "tfe/cli_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "tfe/error.hpp"
#include "tfe/experiments.hpp"
#include "tfe/free_boundary.hpp"

namespace tfe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& rule) {
  throw Error(ErrorKind::config, field + " " + rule);
}

// ---------------------------------------------------------------------------
// Enum spellings.

const std::map<std::string, MobilityKind>& mobility_names() {
  static const std::map<std::string, MobilityKind> m{
      {"entropy_consistent", MobilityKind::entropy_consistent},
      {"arithmetic_mean", MobilityKind::arithmetic_mean},
      {"regularized", MobilityKind::regularized},
      {"upwind", MobilityKind::upwind},
      {"upwind_limited", MobilityKind::upwind_limited}};
  return m;
}

const std::map<std::string, BallMode>& ball_names() {
  static const std::map<std::string, BallMode> m{{"full", BallMode::full}, {"one_sided", BallMode::one_sided}};
  return m;
}

const std::map<std::string, SlippageMode>& slippage_names() {
  static const std::map<std::string, SlippageMode> m{{"weak", SlippageMode::weak},
                                                     {"strong", SlippageMode::strong}};
  return m;
}

const std::set<std::string> kInitialKinds{"power_law", "oscillatory", "concentrated", "source_n1",
                                          "drop",      "zero",        "file"};
const std::set<std::string> kStudyKinds{"kappa", "beta", "convergence", "counterexample", "inequalities"};

template <class E>
std::string enum_choices(const std::map<std::string, E>& names) {
  std::string s;
  for (const auto& [k, v] : names) s += (s.empty() ? "" : ", ") + k;
  return s;
}

// ---------------------------------------------------------------------------
// Strict section reader: every key must be known and well typed.

bool convert(const json& v, double& out) {
  if (!v.is_number()) return false;
  out = v.get<double>();
  return true;
}
bool convert(const json& v, int& out) {
  if (!v.is_number_integer()) return false;
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(x);
  return true;
}
bool convert(const json& v, std::size_t& out) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) return false;
  out = v.get<std::size_t>();
  return true;
}
bool convert(const json& v, bool& out) {
  if (!v.is_boolean()) return false;
  out = v.get<bool>();
  return true;
}
bool convert(const json& v, std::string& out) {
  if (!v.is_string()) return false;
  out = v.get<std::string>();
  return true;
}
bool convert(const json& v, std::optional<double>& out) {
  if (v.is_null()) {
    out.reset();
    return true;
  }
  double x = 0.0;
  if (!convert(v, x)) return false;
  out = x;
  return true;
}
template <class T>
bool convert(const json& v, std::vector<T>& out) {
  if (!v.is_array()) return false;
  std::vector<T> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!convert(v[i], r[i])) return false;
  }
  out = std::move(r);
  return true;
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, double>) return "a number";
  if constexpr (std::is_same_v<T, int>) return "an integer";
  if constexpr (std::is_same_v<T, std::size_t>) return "a nonnegative integer";
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  if constexpr (std::is_same_v<T, std::string>) return "a string";
  if constexpr (std::is_same_v<T, std::optional<double>>) return "a number or null";
  if constexpr (std::is_same_v<T, std::vector<double>>) return "an array of numbers";
  if constexpr (std::is_same_v<T, std::vector<int>>) return "an array of integers";
  if constexpr (std::is_same_v<T, std::vector<std::size_t>>) return "an array of nonnegative integers";
  return "a value";
}

class SectionReader {
 public:
  SectionReader(const json& root, const std::string& name) : name_(name) {
    const auto it = root.find(name);
    if (it == root.end() || it->is_null()) return;
    if (!it->is_object()) config_error(name, "must be an object");
    obj_ = &*it;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    const json* v = lookup(key);
    if (v == nullptr) return;
    if (!convert(*v, out)) config_error(field(key), std::string("must be ") + type_name<T>());
  }

  template <class E>
  void read_enum(const std::string& key, E& out, const std::map<std::string, E>& names) {
    const json* v = lookup(key);
    if (v == nullptr) return;
    const auto it = v->is_string() ? names.find(v->get<std::string>()) : names.end();
    if (it == names.end()) config_error(field(key), "must be one of: " + enum_choices(names));
    out = it->second;
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [k, v] : obj_->items()) {
      if (!seen_.contains(k)) config_error(field(k), "is not a known key");
    }
  }

 private:
  const json* lookup(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr) return nullptr;
    const auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string what = e.what();
    if (const auto p = what.find(": ", what.find("column")); p != std::string::npos) what = what.substr(p + 2);
    throw Error(ErrorKind::config,
                "malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

Config config_from_json(const json& root) {
  if (!root.is_object()) config_error("config", "must be a JSON object");
  static const std::set<std::string> sections{"grid", "initial_data", "solver", "diagnostics", "output", "study"};
  for (const auto& [k, v] : root.items()) {
    if (!sections.contains(k)) config_error(k, "is not a known section");
  }

  Config c;
  {
    SectionReader r(root, "grid");
    r.read("x_min", c.grid.x_min);
    r.read("x_max", c.grid.x_max);
    r.read("n_nodes", c.grid.n_nodes);
    r.finish();
  }
  {
    auto& d = c.initial_data;
    SectionReader r(root, "initial_data");
    r.read("kind", d.kind);
    r.read("x0", d.x0);
    r.read("beta", d.beta);
    r.read("amplitude", d.amplitude);
    r.read("width", d.width);
    r.read("n", d.n);
    r.read("delta", d.delta);
    r.read("k_max", d.k_max);
    r.read("a", d.a);
    r.read("t0", d.t0);
    r.read("path", d.path);
    r.finish();
  }
  {
    auto& s = c.solver;
    SectionReader r(root, "solver");
    r.read("n", s.n);
    r.read("dt_init", s.dt_init);
    r.read("dt_min", s.dt_min);
    r.read("dt_max", s.dt_max);
    r.read("newton_tol", s.newton_tol);
    r.read("newton_max_iter", s.newton_max_iter);
    r.read_enum("mobility", s.mobility.kind, mobility_names());
    r.read("mobility_eps", s.mobility.eps);
    r.read("support_threshold_rel", s.support_threshold_rel);
    r.read("positivity_floor", s.positivity_floor);
    r.read("dt_shrink", s.dt_shrink);
    r.read("dt_grow", s.dt_grow);
    r.read("easy_iters", s.easy_iters);
    r.finish();
  }
  {
    auto& d = c.diagnostics;
    SectionReader r(root, "diagnostics");
    r.read("x0", d.x0);
    r.read("radius", d.radius);
    r.read("min_cells", d.min_cells);
    r.read_enum("ball", d.ball, ball_names());
    r.read("p_exp", d.p_exp);
    r.read("c_est", d.c_est);
    r.read("C_est", d.C_est);
    r.read("theta", d.theta);
    r.read("margin", d.margin);
    r.read("monotonicity", d.monotonicity);
    r.read("monotonicity_x0", d.monotonicity_x0);
    r.read("cascade", d.cascade);
    r.read_enum("cascade_mode", d.cascade_mode, slippage_names());
    r.read("cascade_k_max", d.cascade_k_max);
    r.read("cascade_T", d.cascade_T);
    r.read("cascade_eps", d.cascade_eps);
    r.read("cascade_beta", d.cascade_beta);
    r.read("cascade_delta", d.cascade_delta);
    r.read("cascade_alpha", d.cascade_alpha);
    r.read("energy_balance", d.energy_balance);
    r.read("cutoff_center", d.cutoff_center);
    r.read("cutoff_inner", d.cutoff_inner);
    r.read("cutoff_outer", d.cutoff_outer);
    r.read("energy_beta", d.energy_beta);
    r.read("energy_rel_tol", d.energy_rel_tol);
    r.finish();
  }
  {
    auto& o = c.output;
    SectionReader r(root, "output");
    r.read("t_end", o.t_end);
    r.read("observe_every", o.observe_every);
    r.read("snapshots", o.snapshots);
    r.finish();
  }
  {
    auto& s = c.study;
    SectionReader r(root, "study");
    r.read("kind", s.kind);
    r.read("kappas", s.kappas);
    r.read("betas", s.betas);
    r.read("grids", s.grids);
    r.read("thetas", s.thetas);
    r.read("k_max", s.k_max);
    r.read("t_max", s.t_max);
    r.read("matched", s.matched);
    r.read("delta_fraction", s.delta_fraction);
    r.read("a", s.a);
    r.read("t0", s.t0);
    r.read("t1", s.t1);
    r.read("dt_factor", s.dt_factor);
    r.read("corpus_size", s.corpus_size);
    r.read("workers", s.workers);
    r.finish();
  }
  return c;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

json config_to_json(const Config& c) {
  json j;
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n_nodes", c.grid.n_nodes}};
  const auto& d0 = c.initial_data;
  j["initial_data"] = {{"kind", d0.kind},   {"x0", d0.x0},       {"beta", d0.beta},   {"amplitude", d0.amplitude},
                       {"width", d0.width}, {"n", d0.n},         {"delta", d0.delta}, {"k_max", d0.k_max},
                       {"a", d0.a},         {"t0", d0.t0},       {"path", d0.path}};
  const auto& s = c.solver;
  j["solver"] = {{"n", s.n},
                 {"dt_init", s.dt_init},
                 {"dt_min", s.dt_min},
                 {"dt_max", s.dt_max},
                 {"newton_tol", s.newton_tol},
                 {"newton_max_iter", s.newton_max_iter},
                 {"mobility", to_string(s.mobility.kind)},
                 {"mobility_eps", s.mobility.eps},
                 {"support_threshold_rel", s.support_threshold_rel},
                 {"positivity_floor", s.positivity_floor},
                 {"dt_shrink", s.dt_shrink},
                 {"dt_grow", s.dt_grow},
                 {"easy_iters", s.easy_iters}};
  const auto& d = c.diagnostics;
  j["diagnostics"] = {{"x0", d.x0},
                      {"radius", d.radius},
                      {"min_cells", d.min_cells},
                      {"ball", to_string(d.ball)},
                      {"p_exp", d.p_exp},
                      {"c_est", d.c_est},
                      {"C_est", d.C_est},
                      {"theta", d.theta},
                      {"margin", d.margin},
                      {"monotonicity", d.monotonicity},
                      {"monotonicity_x0", d.monotonicity_x0},
                      {"cascade", d.cascade},
                      {"cascade_mode", to_string(d.cascade_mode)},
                      {"cascade_k_max", d.cascade_k_max},
                      {"cascade_T", d.cascade_T},
                      {"cascade_eps", d.cascade_eps},
                      {"cascade_beta", optional_json(d.cascade_beta)},
                      {"cascade_delta", optional_json(d.cascade_delta)},
                      {"cascade_alpha", d.cascade_alpha},
                      {"energy_balance", d.energy_balance},
                      {"cutoff_center", d.cutoff_center},
                      {"cutoff_inner", optional_json(d.cutoff_inner)},
                      {"cutoff_outer", optional_json(d.cutoff_outer)},
                      {"energy_beta", d.energy_beta},
                      {"energy_rel_tol", d.energy_rel_tol}};
  j["output"] = {{"t_end", c.output.t_end},
                 {"observe_every", c.output.observe_every},
                 {"snapshots", c.output.snapshots}};
  const auto& st = c.study;
  j["study"] = {{"kind", st.kind},
                {"kappas", st.kappas},
                {"betas", st.betas},
                {"grids", st.grids},
                {"thetas", st.thetas},
                {"k_max", st.k_max},
                {"t_max", st.t_max},
                {"matched", st.matched},
                {"delta_fraction", st.delta_fraction},
                {"a", st.a},
                {"t0", st.t0},
                {"t1", st.t1},
                {"dt_factor", st.dt_factor},
                {"corpus_size", st.corpus_size},
                {"workers", st.workers}};
  return j;
}

void require_finite(const std::string& field, double v) {
  if (!std::isfinite(v)) config_error(field, "must be finite");
}

// ---------------------------------------------------------------------------
// Output files.

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(); }

class Artifacts {
 public:
  explicit Artifacts(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) throw Error(ErrorKind::io, "cannot write " + p.string());
    files_[rel] = {sha256_hex(content), content.size()};
  }

  template <class Fn>
  void write_with(const std::string& rel, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write(rel, os.str());
  }

  json inventory() const {
    json a = json::array();
    for (const auto& [path, info] : files_) {
      a.push_back({{"path", path}, {"sha256", info.first}, {"bytes", info.second}});
    }
    return a;
  }

 private:
  fs::path root_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

struct ErrorEntry {
  std::string kind;
  std::string message;
};

ErrorEntry entry_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {std::string(to_string(err->kind())), err->what()};
  return {"internal", e.what()};
}

void write_errors(Artifacts& art, const std::string& phase, const std::vector<ErrorEntry>& errors) {
  json list = json::array();
  for (const auto& e : errors) list.push_back({{"kind", e.kind}, {"message", e.message}});
  art.write("errors.json", json{{"phase", phase}, {"errors", list}}.dump(2) + "\n");
}

// Kinds that describe bad input rather than a failed computation.
bool is_input_error(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return false;
  switch (err->kind()) {
    case ErrorKind::config:
    case ErrorKind::invalid_grid:
    case ErrorKind::invalid_profile:
    case ErrorKind::out_of_domain:
    case ErrorKind::under_resolved:
    case ErrorKind::invalid_argument:
    case ErrorKind::unsupported_range:
    case ErrorKind::singular_weight:
    case ErrorKind::io:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Initial data and series columns.

Profile drop_profile(const Grid1D& g, double x0, double amplitude, double width) {
  std::vector<double> u(g.n_nodes, 0.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double s = (g.x(i) - x0) / width;
    if (std::abs(s) < 1.0) u[i] = amplitude * (1.0 - s * s) * (1.0 - s * s);
  }
  Profile p(g, std::move(u));
  if (!p.boundary_clear()) throw Error(ErrorKind::out_of_domain, "drop support reaches the grid boundary");
  return p;
}

bool uses_initial_profile(Command cmd, const Config& cfg) {
  return cmd == Command::run || cmd == Command::criteria || cmd == Command::diagnose ||
         cfg.study.kind == "kappa";
}

json input_descriptor(Command cmd, const Config& cfg) {
  if (!uses_initial_profile(cmd, cfg)) return {{"generator", "study:" + cfg.study.kind}};
  const auto& d = cfg.initial_data;
  json j{{"generator", d.kind}};
  if (d.kind == "power_law") {
    j["parameters"] = {{"x0", d.x0}, {"beta", d.beta}, {"amplitude", d.amplitude}, {"width", d.width}};
  } else if (d.kind == "oscillatory") {
    j["parameters"] = {{"x0", d.x0}, {"n", d.n}, {"amplitude", d.amplitude}, {"width", d.width}};
  } else if (d.kind == "concentrated") {
    j["parameters"] = {{"x0", d.x0},       {"n", d.n},         {"delta", d.delta},
                       {"k_max", d.k_max}, {"amplitude", d.amplitude}, {"width", d.width}};
  } else if (d.kind == "source_n1") {
    j["parameters"] = {{"a", d.a}, {"t0", d.t0}};
  } else if (d.kind == "drop") {
    j["parameters"] = {{"x0", d.x0}, {"amplitude", d.amplitude}, {"width", d.width}};
  } else if (d.kind == "file") {
    std::ifstream f(d.path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    j["path"] = d.path;
    j["sha256"] = sha256_hex(os.str());
  }
  return j;
}

/// Exponents of the entropy columns: the monotonicity branch for 2 < n < 3,
/// otherwise alpha = (1 - n)/2 with no weight.
struct EntropyExponents {
  double alpha = 0.0;
  std::optional<double> gamma;
};

EntropyExponents entropy_exponents(double n) {
  if (n > 2.0 && n < 3.0) {
    const auto m = monotonicity_params(n);
    return {m.alpha, m.gamma};
  }
  return {(1.0 - n) / 2.0, std::nullopt};
}

double alpha_entropy(const Profile& p, double alpha) {
  const Grid1D& g = p.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) continue;
    const double w = (i == 0 || i + 1 == p.size()) ? 0.5 : 1.0;
    s += w * g.h * std::pow(p[i], 1.0 + alpha);
  }
  return s;
}

std::vector<Observer> series_observers(const Config& cfg) {
  const auto ex = entropy_exponents(cfg.solver.n);
  const double theta = cfg.solver.support_threshold_rel;
  const double x0 = cfg.diagnostics.monotonicity_x0;
  std::vector<Observer> obs;
  obs.push_back({"entropy", [ex](double, const Profile& p) { return alpha_entropy(p, ex.alpha); }});
  obs.push_back({"weighted_entropy", [ex, x0](double, const Profile& p) {
                   if (!ex.gamma) return std::numeric_limits<double>::quiet_NaN();
                   try {
                     return weighted_entropy(p, x0, ex.alpha, *ex.gamma);
                   } catch (const Error&) {
                     return std::numeric_limits<double>::quiet_NaN();
                   }
                 }});
  obs.push_back({"left", [theta](double, const Profile& p) {
                   const auto s = support_interval(p, theta);
                   return s.empty ? std::numeric_limits<double>::quiet_NaN() : s.left;
                 }});
  obs.push_back({"right", [theta](double, const Profile& p) {
                   const auto s = support_interval(p, theta);
                   return s.empty ? std::numeric_limits<double>::quiet_NaN() : s.right;
                 }});
  return obs;
}

constexpr const char* kSeriesColumns[] = {"mass", "energy", "entropy", "weighted_entropy", "left", "right"};

std::string series_csv(const TimeSeries& s) {
  std::ostringstream os;
  os << "t";
  for (const char* c : kSeriesColumns) os << ',' << c;
  os << '\n';
  for (const auto& r : s.records) {
    os << num(r.t);
    for (const char* c : kSeriesColumns) {
      const auto it = r.scalars.find(c);
      os << ',' << num(it == r.scalars.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    os << '\n';
  }
  return os.str();
}

json run_summary(const TimeSeries& s) {
  json j;
  j["status"] = to_string(s.status);
  j["failure"] = s.failure;
  j["accepted_steps"] = s.accepted_steps;
  j["rejected_steps"] = s.rejected_steps;
  j["records"] = s.records.size();
  j["t_final"] = s.t_end();
  if (!s.records.empty()) {
    const double m0 = s.records.front().scalars.at("mass");
    const double m1 = s.records.back().scalars.at("mass");
    j["mass_initial"] = m0;
    j["mass_final"] = m1;
    j["mass_drift"] = m0 > 0.0 ? std::abs(m1 - m0) / m0 : std::abs(m1 - m0);
    j["energy_initial"] = s.records.front().scalars.at("energy");
    j["energy_final"] = s.records.back().scalars.at("energy");
  }
  return j;
}

void write_series(Artifacts& art, const TimeSeries& s, bool snapshots) {
  art.write("series.csv", series_csv(s));
  if (!snapshots) return;
  std::ostringstream index;
  index << "index,t,file\n";
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "snapshots/u_%06zu.csv", i);
    art.write_with(name, [&](std::ostream& os) { write_profile_csv(os, s.records[i].profile); });
    index << i << ',' << num(s.records[i].t) << ',' << name << '\n';
  }
  art.write("snapshots/index.csv", index.str());
}

double effective_margin(const Config& cfg, const Grid1D& g) {
  return cfg.diagnostics.margin > 0.0 ? cfg.diagnostics.margin : 4.0 * g.h;
}

TimeSeries simulate(const Config& cfg, const Profile& u0) {
  return run(u0, cfg.solver, cfg.output.t_end, cfg.output.observe_every, series_observers(cfg));
}

// ---------------------------------------------------------------------------
// Commands.

int do_run(const Config& cfg, const Profile& u0, Artifacts& art) {
  const TimeSeries s = simulate(cfg, u0);
  write_series(art, s, cfg.output.snapshots);
  art.write("summary.json", run_summary(s).dump(2) + "\n");
  if (!s.ok()) {
    write_errors(art, "run", {{std::string(to_string(s.status)), s.failure}});
    return kExitRunFailure;
  }
  return kExitOk;
}

int do_criteria(const Config& cfg, const Profile& u0, Artifacts& art) {
  const auto& d = cfg.diagnostics;
  const double n = cfg.solver.n;
  const auto radii = dyadic_radii(u0.grid(), d.radius, d.min_cells);
  if (radii.empty()) config_error("diagnostics.radius", "is below min_cells * h");
  const auto mass_r = criterion_mass(u0, d.x0, n, radii, d.ball);
  const auto energy_r = criterion_energy(u0, d.x0, n, radii, d.ball);
  const auto pnorm_r = criterion_pnorm(u0, d.x0, n, d.p_exp, radii, d.ball);
  art.write_with("criteria_mass.csv", [&](std::ostream& os) { write_criterion_csv(os, mass_r); });
  art.write_with("criteria_energy.csv", [&](std::ostream& os) { write_criterion_csv(os, energy_r); });
  art.write_with("criteria_pnorm.csv", [&](std::ostream& os) { write_criterion_csv(os, pnorm_r); });

  const auto entry = [](const CriterionReport& r) {
    return json{{"supremum", r.supremum}, {"r_min", r.r_min()}, {"radii", r.radii.size()}};
  };
  json j;
  j["x0"] = d.x0;
  j["n"] = n;
  j["ball"] = to_string(d.ball);
  j["p_exp"] = d.p_exp;
  j["supremum"] = mass_r.supremum;
  j["mass"] = entry(mass_r);
  j["energy"] = entry(energy_r);
  j["pnorm"] = entry(pnorm_r);
  if (n > 1.0 && n < 3.0) {
    const auto b = theorem_bounds(mass_r.supremum, n, d.c_est, d.C_est);
    j["bounds"] = {{"kappa", b.kappa},
                   {"lower_T", num_json(b.lower_T)},
                   {"upper_T", num_json(b.upper_T)},
                   {"no_forward_motion_implied", b.no_forward_motion_implied}};
  } else {
    j["bounds"] = json();
  }
  art.write("summary.json", j.dump(2) + "\n");
  return kExitOk;
}

json waiting_json(const WaitingTimeEstimate& e) {
  json j{{"x0", e.x0},
         {"mode", to_string(e.mode)},
         {"theta", e.theta_used},
         {"margin", e.margin_used},
         {"censored", e.censored},
         {"t_star", num_json(e.t_star)},
         {"t_last", e.t_last}};
  if (!e.censored) j["bracket"] = {e.t_prev, e.t_hit};
  return j;
}

int do_diagnose(const Config& cfg, const Profile& u0, Artifacts& art) {
  const auto& d = cfg.diagnostics;
  const double n = cfg.solver.n;
  const TimeSeries s = simulate(cfg, u0);
  write_series(art, s, cfg.output.snapshots);
  art.write_with("interface.csv", [&](std::ostream& os) { write_interface_csv(os, s, d.theta); });

  json summary;
  summary["run"] = run_summary(s);
  if (!s.ok()) {
    art.write("summary.json", summary.dump(2) + "\n");
    write_errors(art, "run", {{std::string(to_string(s.status)), s.failure}});
    return kExitRunFailure;
  }

  const auto wt = waiting_time(s, d.x0, d.theta, effective_margin(cfg, u0.grid()));
  art.write_with("waiting_time.json", [&](std::ostream& os) { write_waiting_time_json(os, wt); });
  summary["waiting_time"] = waiting_json(wt);

  summary["monotonicity"] = json();
  if (d.monotonicity) {
    const auto m = monotonicity_monitor(s, d.monotonicity_x0, n);
    art.write_with("monotonicity.csv", [&](std::ostream& os) { write_monotonicity_csv(os, m); });
    art.write_with("monotonicity.json", [&](std::ostream& os) { write_monotonicity_json(os, m); });
    summary["monotonicity"] = {{"alpha", m.params.alpha},
                               {"gamma", m.params.gamma},
                               {"violations", m.violations},
                               {"entries", m.entries.size()},
                               {"hypothesis_lost_at", optional_json(m.hypothesis_lost_at)}};
  }

  summary["cascade"] = json();
  if (d.cascade) {
    const auto def = cascade_defaults(d.cascade_mode, n);
    const double T = d.cascade_T > 0.0 ? d.cascade_T : cfg.output.t_end;
    const CylinderMode mode{d.cascade_mode, d.cascade_alpha};
    const auto c = degeneracy_cascade(s, d.x0, d.radius, d.cascade_k_max, T, d.cascade_beta.value_or(def.beta),
                                      d.cascade_eps, d.cascade_delta.value_or(def.delta), n, mode,
                                      cfg.solver.positivity_floor);
    art.write_with("cascade.csv", [&](std::ostream& os) { write_cascade_csv(os, c); });
    art.write_with("cascade.json", [&](std::ostream& os) { write_cascade_json(os, c); });
    summary["cascade"] = {{"all_pass", c.all_pass}, {"levels", c.levels.size()}};
  }

  summary["energy_balance"] = json();
  if (d.energy_balance) {
    const Cutoff cut = d.cutoff_inner ? Cutoff::plateau(d.cutoff_center, *d.cutoff_inner, *d.cutoff_outer)
                                      : Cutoff::unit();
    EnergyBalanceOptions eo;
    eo.n = n;
    eo.beta = d.energy_beta;
    eo.mobility = cfg.solver.mobility;
    eo.rel_tol = d.energy_rel_tol;
    const auto e = energy_balance_monitor(s, cut, eo);
    art.write_with("energy_balance.csv", [&](std::ostream& os) { write_energy_balance_csv(os, e); });
    art.write_with("energy_balance.json", [&](std::ostream& os) { write_energy_balance_json(os, e); });
    summary["energy_balance"] = {{"intervals", e.intervals.size()}, {"satisfied_fraction", e.satisfied_fraction}};
  }

  art.write("summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

// Acceptance property evaluated by `validate`.
struct Check {
  std::string name;
  double value = 0.0;
  std::string bound;
  bool pass = false;
};

std::string fmt_index(std::size_t i) {
  char b[16];
  std::snprintf(b, sizeof b, "%02zu", i);
  return b;
}

void study_kappa(const Config& cfg, const Profile& shape, int workers, Artifacts& art, std::vector<Check>& checks) {
  KappaSweepOptions o;
  o.n = cfg.solver.n;
  o.kappas = cfg.study.kappas;
  o.x0 = cfg.diagnostics.x0;
  o.thetas = cfg.study.thetas;
  o.margin = cfg.diagnostics.margin;
  o.t_max = cfg.study.t_max;
  o.radius = cfg.diagnostics.radius;
  o.solver = cfg.solver;
  o.matched = cfg.study.matched;
  o.workers = workers;
  const auto r = kappa_sweep(shape, o);
  for (std::size_t k = 0; k < r.tracks.size(); ++k) {
    art.write_with("runs/kappa_" + fmt_index(k) + ".csv", [&](std::ostream& os) { write_track_csv(os, r.tracks[k]); });
  }
  art.write_with("summary.csv", [&](std::ostream& os) { write_kappa_summary_csv(os, r); });
  art.write_with("summary.json", [&](std::ostream& os) { write_kappa_summary_json(os, r); });

  for (const auto& res : r.by_theta) {
    const std::string tag = "theta=" + label(res.theta);
    const double slope = res.fit ? res.fit->slope : std::numeric_limits<double>::quiet_NaN();
    checks.push_back({"kappa slope " + tag, slope, "-n +/- 0.15", std::abs(slope + r.n) <= 0.15});
    const double spread = res.c_est > 0.0 ? res.C_est / res.c_est : std::numeric_limits<double>::infinity();
    checks.push_back({"t* kappa^n spread " + tag, spread, "<= 5", spread <= 5.0});
  }
}

void study_beta(const Config& cfg, int workers, Artifacts& art, std::vector<Check>& checks) {
  BetaSweepOptions o;
  o.n = cfg.solver.n;
  o.betas = cfg.study.betas;
  o.grids = cfg.study.grids;
  o.x_min = cfg.grid.x_min;
  o.x_max = cfg.grid.x_max;
  o.x0 = cfg.initial_data.x0;
  o.width = cfg.initial_data.width;
  o.thetas = cfg.study.thetas;
  o.t_max = cfg.study.t_max;
  o.solver = cfg.solver;
  o.workers = workers;
  const auto r = beta_sweep(o);
  for (std::size_t k = 0; k < r.tracks.size(); ++k) {
    art.write_with("runs/beta_" + fmt_index(k) + "_" + std::to_string(r.points[k].n_nodes) + ".csv",
                   [&](std::ostream& os) { write_track_csv(os, r.tracks[k]); });
  }
  art.write_with("summary.csv", [&](std::ostream& os) { write_beta_summary_csv(os, r); });
  art.write_with("summary.json", [&](std::ostream& os) { write_beta_summary_json(os, r); });

  const double critical = 4.0 / r.n;
  for (const auto& c : r.classes) {
    if (c.beta == critical) continue;
    // Profiles steeper than the critical power (beta < 4/n) move at once;
    // flatter ones wait.
    const MotionClass want = c.beta < critical ? MotionClass::instantaneous : MotionClass::waiting;
    checks.push_back({"beta=" + label(c.beta) + " theta=" + label(c.theta) + " is " + std::string(to_string(want)),
                      c.trend.slope, std::string(to_string(want)), c.trend.motion == want});
  }
}

void study_convergence(const Config& cfg, int workers, Artifacts& art, std::vector<Check>& checks) {
  ConvergenceOptions o;
  o.grids = cfg.study.grids;
  o.x_min = cfg.grid.x_min;
  o.x_max = cfg.grid.x_max;
  o.a = cfg.study.a;
  o.t0 = cfg.study.t0;
  o.t1 = cfg.study.t1;
  o.dt_factor = cfg.study.dt_factor;
  o.mobility = cfg.solver.mobility;
  o.workers = workers;
  const auto r = convergence_study(o);
  for (const auto& row : r.rows) {
    art.write_with("runs/grid_" + std::to_string(row.n_nodes) + ".csv", [&](std::ostream& os) {
      const Profile& u = row.final_profile;
      os << "x,u,exact\n";
      for (std::size_t i = 0; i < u.size(); ++i) {
        os << num(u.grid().x(i)) << ',' << num(u[i]) << ',' << num(exact_source_n1(u.grid().x(i), o.t1, o.a))
           << '\n';
      }
    });
  }
  art.write_with("summary.csv", [&](std::ostream& os) { write_convergence_summary_csv(os, r); });
  art.write_with("summary.json", [&](std::ostream& os) { write_convergence_summary_json(os, r); });

  for (std::size_t k = 0; k < r.l1_orders.size(); ++k) {
    const std::string pair = std::to_string(r.rows[k].n_nodes) + "->" + std::to_string(r.rows[k + 1].n_nodes);
    const double q = r.l1_orders[k];
    checks.push_back({"L1 order " + pair, q, "[1.7, 2.3]", q >= 1.7 && q <= 2.3});
  }
  for (const auto& row : r.rows) {
    checks.push_back({"mass drift N=" + std::to_string(row.n_nodes), row.mass_drift, "<= 1e-10",
                      row.mass_drift <= 1e-10});
  }
}

void study_counterexample(const Config& cfg, int workers, Artifacts& art, std::vector<Check>& checks) {
  CounterexampleOptions o;
  o.n = cfg.solver.n;
  o.x_min = cfg.grid.x_min;
  o.x_max = cfg.grid.x_max;
  o.x0 = cfg.initial_data.x0;
  o.width = cfg.initial_data.width;
  o.radius = cfg.diagnostics.radius;
  o.grids = cfg.study.grids;
  o.k_max = cfg.study.k_max;
  o.delta_fraction = cfg.study.delta_fraction;
  o.p_exp = cfg.diagnostics.p_exp;
  o.thetas = cfg.study.thetas;
  o.t_max = cfg.study.t_max;
  o.solver = cfg.solver;
  o.workers = workers;
  const auto r = counterexample_study(o);
  const auto crit = [&](const std::string& name, const CriterionReport& c) {
    art.write_with("runs/" + name + ".csv", [&](std::ostream& os) { write_criterion_csv(os, c); });
  };
  crit("oscillatory_mass", r.oscillatory.mass);
  crit("oscillatory_energy", r.oscillatory.energy);
  crit("baseline_mass", r.oscillatory.baseline_mass);
  for (const auto& lvl : r.concentrated.levels) {
    crit("concentrated_k" + std::to_string(lvl.k_max) + "_mass", lvl.mass);
    crit("concentrated_k" + std::to_string(lvl.k_max) + "_pnorm", lvl.pnorm);
  }
  art.write_with("summary.csv", [&](std::ostream& os) { write_counterexample_summary_csv(os, r); });
  art.write_with("summary.json", [&](std::ostream& os) { write_counterexample_summary_json(os, r); });

  const auto& osc = r.oscillatory;
  checks.push_back({"oscillatory mass ratio min", osc.mass_ratio_min, ">= 1", osc.mass_ratio_min >= 1.0});
  checks.push_back({"oscillatory mass ratio max", osc.mass_ratio_max, "<= 3", osc.mass_ratio_max <= 3.0});
  checks.push_back({"oscillatory energy growing", static_cast<double>(osc.energy_resolved_radii), "true",
                    osc.energy_growing});
  checks.push_back({"oscillatory waiting time stable", osc.trend.finest_ratio, "waiting",
                    osc.trend.motion == MotionClass::waiting});
  checks.push_back({"concentrated mass increasing in k_max", r.concentrated.delta, "true",
                    r.concentrated.mass_increasing});
  checks.push_back({"concentrated t* decreasing in k_max", r.concentrated.delta, "true",
                    r.concentrated.t_star_decreasing});
}

void study_inequalities(const Config& cfg, std::uint64_t seed, Artifacts& art, std::vector<Check>& checks) {
  InequalityOptions o;
  o.n = cfg.solver.n;
  o.corpus_size = cfg.study.corpus_size;
  o.seed = seed;
  o.n_nodes = cfg.grid.n_nodes;
  if (cfg.diagnostics.cutoff_inner) {
    o.cutoff_inner = *cfg.diagnostics.cutoff_inner;
    o.cutoff_outer = *cfg.diagnostics.cutoff_outer;
  }
  o.balance_t_end = cfg.output.t_end;
  o.balance_nodes = cfg.grid.n_nodes;
  const auto r = inequality_study(o);
  art.write_with("runs/energy_balance.csv", [&](std::ostream& os) { write_energy_balance_csv(os, r.balance); });
  art.write_with("summary.csv", [&](std::ostream& os) { write_inequality_summary_csv(os, r); });
  art.write_with("summary.json", [&](std::ostream& os) { write_inequality_summary_json(os, r); });

  checks.push_back({"gns theta (1,1,2,6,2)", r.gns_theta_reference, "== 1/3", r.gns_theta_reference == 1.0 / 3.0});
  checks.push_back({"bernis-gruen refinement drift", r.bernis_gruen_drift, "<= 0.1", r.bernis_gruen_drift <= 0.1});
  checks.push_back({"energy balance satisfied fraction", r.balance.satisfied_fraction, ">= 0.95",
                    r.balance.satisfied_fraction >= 0.95});
}

int do_study(const Config& cfg, const Profile* shape, const ExecuteOptions& opt, Artifacts& art, bool validate) {
  const int workers = opt.workers.value_or(cfg.study.workers);
  std::vector<Check> checks;
  const auto& kind = cfg.study.kind;
  if (kind == "kappa") {
    study_kappa(cfg, *shape, workers, art, checks);
  } else if (kind == "beta") {
    study_beta(cfg, workers, art, checks);
  } else if (kind == "convergence") {
    study_convergence(cfg, workers, art, checks);
  } else if (kind == "counterexample") {
    study_counterexample(cfg, workers, art, checks);
  } else {
    study_inequalities(cfg, opt.seed, art, checks);
  }
  if (!validate) return kExitOk;

  bool all = !checks.empty();
  json list = json::array();
  std::vector<ErrorEntry> failed;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"value", num_json(c.value)}, {"bound", c.bound}, {"pass", c.pass}});
    if (!c.pass) {
      all = false;
      failed.push_back({"validation", c.name + ": " + num(c.value) + " (want " + c.bound + ")"});
    }
  }
  art.write("validation.json", json{{"study", kind}, {"pass", all}, {"checks", list}}.dump(2) + "\n");
  if (!all) {
    write_errors(art, "validate", failed);
    return kExitRunFailure;
  }
  return kExitOk;
}

void write_manifest(const fs::path& out, Command cmd, const Config& cfg, const ExecuteOptions& opt,
                    const std::string& hash, const Artifacts& art) {
  json m;
  m["tool"] = "tfe";
  m["version"] = kToolVersion;
  m["schema_version"] = kSchemaVersion;
  m["command"] = to_string(cmd);
  m["config"] = config_to_json(cfg);
  m["input"] = input_descriptor(cmd, cfg);
  m["seed"] = opt.seed;
  m["content_hash"] = hash;
  m["outputs"] = art.inventory();
  std::ofstream f(out / "manifest.json", std::ios::binary | std::ios::trunc);
  f << m.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------

Config parse_config(std::string_view text) {
  Config c = config_from_json(parse_document(text));
  validate_config(c);
  return c;
}

std::string serialize_config(const Config& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

void validate_config(const Config& cfg) {
  require_finite("grid.x_min", cfg.grid.x_min);
  require_finite("grid.x_max", cfg.grid.x_max);
  if (!(cfg.grid.x_max > cfg.grid.x_min)) config_error("grid.x_max", "must exceed grid.x_min");
  if (cfg.grid.n_nodes < kMinNodes) config_error("grid.n_nodes", "must be >= " + std::to_string(kMinNodes));

  const auto& d0 = cfg.initial_data;
  if (!kInitialKinds.contains(d0.kind)) {
    config_error("initial_data.kind",
                 "must be one of: power_law, oscillatory, concentrated, source_n1, drop, zero, file");
  }
  for (const auto& [name, v] : {std::pair{"x0", d0.x0}, {"beta", d0.beta}, {"amplitude", d0.amplitude},
                                {"width", d0.width}, {"n", d0.n}, {"delta", d0.delta}, {"a", d0.a}, {"t0", d0.t0}}) {
    require_finite(std::string("initial_data.") + name, v);
  }
  if (!(d0.amplitude >= 0.0)) config_error("initial_data.amplitude", "must be >= 0");
  if (!(d0.width > 0.0)) config_error("initial_data.width", "must be > 0");
  if (d0.kind == "file" && d0.path.empty()) config_error("initial_data.path", "is required for kind file");

  cfg.solver.validate();

  const auto& d = cfg.diagnostics;
  if (!(d.radius > 0.0) || !std::isfinite(d.radius)) config_error("diagnostics.radius", "must be > 0");
  if (!(d.min_cells > 0.0)) config_error("diagnostics.min_cells", "must be > 0");
  if (!(d.p_exp > 0.0 && d.p_exp < 1.0)) config_error("diagnostics.p_exp", "must lie in (0,1)");
  if (!(d.c_est >= 0.0 && d.C_est >= d.c_est)) config_error("diagnostics.C_est", "must be >= c_est >= 0");
  if (!(d.theta > 0.0 && d.theta < 1.0)) config_error("diagnostics.theta", "must lie in (0,1)");
  if (!(d.margin >= 0.0)) config_error("diagnostics.margin", "must be >= 0");
  require_finite("diagnostics.x0", d.x0);
  require_finite("diagnostics.monotonicity_x0", d.monotonicity_x0);
  if (d.monotonicity && !(cfg.solver.n > 2.0 && cfg.solver.n < 3.0)) {
    config_error("diagnostics.monotonicity", "needs solver.n in (2,3)");
  }
  if (d.cascade_k_max < 1) config_error("diagnostics.cascade_k_max", "must be >= 1");
  if (!(d.cascade_T >= 0.0)) config_error("diagnostics.cascade_T", "must be >= 0");
  if (d.cascade && d.cascade_T > cfg.output.t_end) config_error("diagnostics.cascade_T", "must not exceed output.t_end");
  if (!(d.cascade_eps > 0.0)) config_error("diagnostics.cascade_eps", "must be > 0");
  if (d.cascade_beta && !(*d.cascade_beta >= 0.0)) config_error("diagnostics.cascade_beta", "must be >= 0");
  if (d.cascade_delta && !(*d.cascade_delta > 0.0)) config_error("diagnostics.cascade_delta", "must be > 0");
  if (!(d.cascade_alpha > 0.0)) config_error("diagnostics.cascade_alpha", "must be > 0");
  if (d.cutoff_inner.has_value() != d.cutoff_outer.has_value()) {
    config_error("diagnostics.cutoff_outer", "must be set together with cutoff_inner");
  }
  if (d.cutoff_inner && !(*d.cutoff_inner >= 0.0 && *d.cutoff_outer > *d.cutoff_inner)) {
    config_error("diagnostics.cutoff_outer", "must exceed cutoff_inner >= 0");
  }
  if (!(d.energy_beta >= 0.0)) config_error("diagnostics.energy_beta", "must be >= 0");
  if (!(d.energy_rel_tol > 0.0)) config_error("diagnostics.energy_rel_tol", "must be > 0");

  const auto& o = cfg.output;
  if (!(o.t_end >= 0.0) || !std::isfinite(o.t_end)) config_error("output.t_end", "must be a finite value >= 0");
  if (!(o.observe_every >= 0.0) || !std::isfinite(o.observe_every)) {
    config_error("output.observe_every", "must be a finite value >= 0");
  }

  const auto& s = cfg.study;
  if (!kStudyKinds.contains(s.kind)) {
    config_error("study.kind", "must be one of: kappa, beta, convergence, counterexample, inequalities");
  }
  for (double k : s.kappas) {
    if (!(k > 0.0) || !std::isfinite(k)) config_error("study.kappas", "entries must be finite and > 0");
  }
  for (double b : s.betas) {
    if (!(b > 0.0) || !std::isfinite(b)) config_error("study.betas", "entries must be finite and > 0");
  }
  for (std::size_t g : s.grids) {
    if (g < kMinNodes) config_error("study.grids", "entries must be >= " + std::to_string(kMinNodes));
  }
  if (s.thetas.empty()) config_error("study.thetas", "must not be empty");
  for (double t : s.thetas) {
    if (!(t > 0.0 && t < 1.0)) config_error("study.thetas", "entries must lie in (0,1)");
  }
  for (int k : s.k_max) {
    if (k < 2) config_error("study.k_max", "entries must be >= 2");
  }
  if (!(s.t_max > 0.0) || !std::isfinite(s.t_max)) config_error("study.t_max", "must be finite and > 0");
  if (!(s.delta_fraction >= 0.0 && s.delta_fraction < 1.0)) config_error("study.delta_fraction", "must lie in [0,1)");
  if (!(s.a > 0.0)) config_error("study.a", "must be > 0");
  if (!(s.t0 > 0.0 && s.t1 >= s.t0)) config_error("study.t1", "must satisfy 0 < t0 <= t1");
  if (!(s.dt_factor > 0.0)) config_error("study.dt_factor", "must be > 0");
  if (s.corpus_size < 1) config_error("study.corpus_size", "must be >= 1");
  if (s.workers < 1) config_error("study.workers", "must be >= 1");
}

Profile make_initial_profile(const Config& cfg) {
  const auto& d = cfg.initial_data;
  if (d.kind == "file") {
    std::ifstream f(d.path);
    if (!f) throw Error(ErrorKind::io, "cannot open initial_data.path " + d.path);
    return read_profile_csv(f);
  }
  const Grid1D g = make_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_nodes);
  if (d.kind == "power_law") return power_law(g, d.x0, d.beta, d.amplitude, d.width);
  if (d.kind == "oscillatory") return oscillatory(g, d.x0, d.n, d.width).scaled(d.amplitude);
  if (d.kind == "concentrated") return concentrated(g, d.x0, d.n, d.delta, d.k_max, d.width).scaled(d.amplitude);
  if (d.kind == "source_n1") return exact_source_profile(g, d.t0, d.a);
  if (d.kind == "drop") return drop_profile(g, d.x0, d.amplitude, d.width);
  if (d.kind == "zero") return Profile(g);
  config_error("initial_data.kind", "is unknown: " + d.kind);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    s[2 * i] = hex[md[i] >> 4];
    s[2 * i + 1] = hex[md[i] & 0xf];
  }
  return s;
}

std::string content_hash(const Config& cfg, const Profile& u0) {
  std::ostringstream os;
  os << serialize_config(cfg);
  if (u0.size() > 0) write_profile_csv(os, u0);
  return sha256_hex(os.str());
}

std::optional<Command> parse_command(std::string_view name) {
  if (name == "run") return Command::run;
  if (name == "criteria") return Command::criteria;
  if (name == "diagnose") return Command::diagnose;
  if (name == "sweep") return Command::sweep;
  if (name == "validate") return Command::validate;
  return std::nullopt;
}

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::run: return "run";
    case Command::criteria: return "criteria";
    case Command::diagnose: return "diagnose";
    case Command::sweep: return "sweep";
    case Command::validate: return "validate";
  }
  return "unknown";
}

int execute(Command command, const Config& cfg, const fs::path& out_dir, const ExecuteOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) return kExitConfigError;
  Artifacts art(out_dir);

  Profile u0;
  std::string hash;
  try {
    validate_config(cfg);
    if (options.workers && *options.workers < 1) config_error("--workers", "must be >= 1");
    if (uses_initial_profile(command, cfg)) u0 = make_initial_profile(cfg);
    if (command == Command::diagnose) {
      WaitingTimeDetector probe(u0, cfg.diagnostics.x0, cfg.diagnostics.theta, effective_margin(cfg, u0.grid()));
    }
    hash = content_hash(cfg, u0);
  } catch (const std::exception& e) {
    write_errors(art, "config", {entry_for(e)});
    return kExitConfigError;
  }

  int code = kExitOk;
  try {
    switch (command) {
      case Command::run: code = do_run(cfg, u0, art); break;
      case Command::criteria: code = do_criteria(cfg, u0, art); break;
      case Command::diagnose: code = do_diagnose(cfg, u0, art); break;
      case Command::sweep: code = do_study(cfg, &u0, options, art, false); break;
      case Command::validate: code = do_study(cfg, &u0, options, art, true); break;
    }
  } catch (const std::exception& e) {
    const bool input = is_input_error(e);
    write_errors(art, input ? "config" : "run", {entry_for(e)});
    code = input ? kExitConfigError : kExitRunFailure;
  }
  write_manifest(out_dir, command, cfg, options, hash, art);
  return code;
}

int execute_file(Command command, const fs::path& config_path, const fs::path& out_dir,
                 const ExecuteOptions& options) {
  Config cfg;
  ExecuteOptions opt = options;
  try {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot read config " + config_path.string());
    std::ostringstream os;
    os << f.rdbuf();
    const std::string text = os.str();
    const json doc = parse_document(text);
    // A manifest re-runs its recorded config and seed.
    if (doc.is_object() && doc.contains("content_hash") && doc.contains("config")) {
      cfg = config_from_json(doc.at("config"));
      if (doc.contains("seed") && doc.at("seed").is_number_unsigned()) opt.seed = doc.at("seed").get<std::uint64_t>();
    } else {
      cfg = config_from_json(doc);
    }
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) {
      Artifacts art(out_dir);
      write_errors(art, "config", {entry_for(e)});
    }
    return kExitConfigError;
  }
  return execute(command, cfg, out_dir, opt);
}

}  // namespace tfe
