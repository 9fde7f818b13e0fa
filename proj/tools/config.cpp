#include "config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include "furst/bitmask_io.hpp"
#include "furst/error.hpp"

namespace furst::app {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) { throw ConfigError(where(n), what); }

json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Scalar:
      return n.Scalar();
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.Scalar()] = to_json(kv.second);
      return o;
    }
    default:
      return nullptr;
  }
}

void allow_keys(const YAML::Node& n, std::initializer_list<const char*> keys) {
  if (!n.IsMap()) fail(n, "expected a mapping");
  for (const auto& kv : n) {
    const auto k = kv.first.Scalar();
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      fail(kv.first, "unknown key '" + k + "'");
    }
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, what + ": cannot read '" + n.Scalar() + "'");
  }
}

YAML::Node required(const YAML::Node& n, const std::string& key) {
  if (!n.IsMap() || !n[key]) fail(n, "missing key '" + key + "'");
  return n[key];
}

std::string name_ref(const YAML::Node& n, const std::string& what) { return scalar<std::string>(n, what); }

RealParam real(const YAML::Node& n, const std::string& what) {
  const auto text = scalar<std::string>(n, what);
  try {
    return RealParam::parse(text);
  } catch (const std::exception& e) {
    fail(n, what + ": " + e.what());
  }
}

GroupElement element(const YAML::Node& n, const GroupSpec& g) {
  if (n.IsScalar()) {
    if (g.rank() != 1) fail(n, "element of " + g.name() + " needs " + std::to_string(g.rank()) + " coordinates");
    return GroupElement(g, {scalar<std::int64_t>(n, "coordinate")});
  }
  if (!n.IsSequence() || n.size() != g.rank()) {
    fail(n, "element of " + g.name() + " needs " + std::to_string(g.rank()) + " coordinates");
  }
  std::vector<std::int64_t> c;
  for (const auto& e : n) c.push_back(scalar<std::int64_t>(e, "coordinate"));
  return GroupElement(g, c);
}

Coords coords(const YAML::Node& n, const GroupSpec& g) { return element(n, g).coords(); }

CorrelationQuery query(const YAML::Node& n, const GroupSpec& g) {
  if (!n.IsSequence() || n.size() == 0) fail(n, "a query is a nonempty list of shifts");
  std::vector<GroupElement> shifts;
  for (const auto& s : n) shifts.push_back(element(s, g));
  return CorrelationQuery(std::move(shifts));
}

std::vector<CorrelationQuery> queries(const YAML::Node& task, const GroupSpec& g) {
  std::vector<CorrelationQuery> out;
  if (task["shifts"]) out.push_back(query(task["shifts"], g));
  if (task["queries"]) {
    if (!task["queries"].IsSequence()) fail(task["queries"], "queries must be a list");
    for (const auto& q : task["queries"]) out.push_back(query(q, g));
  }
  if (out.empty()) fail(task, "task needs 'shifts' or 'queries'");
  return out;
}

Schedule schedule(const YAML::Node& n) {
  Schedule s;
  if (n.IsMap()) {
    allow_keys(n, {"dyadic"});
    const auto d = required(n, "dyadic");
    if (!d.IsSequence() || d.size() != 2) fail(d, "dyadic takes [lo, hi] exponents");
    const int lo = scalar<int>(d[0], "exponent");
    const int hi = scalar<int>(d[1], "exponent");
    if (lo < 0 || hi < lo || hi > 40) fail(d, "dyadic exponents must satisfy 0 <= lo <= hi <= 40");
    s = dyadic_schedule(lo, hi);
  } else if (n.IsSequence()) {
    for (const auto& e : n) s.push_back(scalar<std::uint64_t>(e, "schedule entry"));
  } else {
    s.push_back(scalar<std::uint64_t>(n, "schedule entry"));
  }
  if (s.empty() || s.front() == 0 || !std::is_sorted(s.begin(), s.end()) ||
      std::adjacent_find(s.begin(), s.end()) != s.end()) {
    fail(n, "schedule must be nonempty, positive and strictly increasing");
  }
  return s;
}

class Parser {
 public:
  Parser(const YAML::Node& root, std::filesystem::path base, std::optional<std::uint64_t> seed_override)
      : root_(root), cfg_{} {
    cfg_.base_dir = std::move(base);
    cfg_.canonical = to_json(root);
    if (seed_override) cfg_.canonical["seed"] = std::to_string(*seed_override);
    cfg_.seed = seed_override;
  }

  ExperimentConfig run() {
    if (!root_.IsMap()) fail(root_, "config must be a mapping");
    allow_keys(root_, {"group", "folner", "schedule", "tolerances", "caps", "seed", "sets", "systems", "schemes",
                       "functions", "tasks"});
    cfg_.group = root_["group"] ? group(root_["group"]) : GroupSpec::integers();
    cfg_.folner = root_["folner"] ? folner(root_["folner"]) : default_folner();
    cfg_.schedule = root_["schedule"] ? schedule(root_["schedule"]) : dyadic_schedule(10, 20);
    if (!cfg_.seed && root_["seed"]) cfg_.seed = scalar<std::uint64_t>(root_["seed"], "seed");
    if (root_["tolerances"]) tolerances(root_["tolerances"]);
    if (root_["caps"]) caps(root_["caps"]);
    if (root_["systems"]) each(root_["systems"], [&](const std::string& k, const YAML::Node& v) { system(k, v); });
    if (root_["sets"]) {
      each(root_["sets"], [&](const std::string& k, const YAML::Node&) { set(k); });
    }
    if (root_["schemes"]) each(root_["schemes"], [&](const std::string& k, const YAML::Node& v) { scheme(k, v); });
    if (root_["functions"]) {
      each(root_["functions"], [&](const std::string& k, const YAML::Node&) { function(k); });
    }
    if (!root_["tasks"] || !root_["tasks"].IsSequence()) fail(root_, "config needs a 'tasks' list");
    for (const auto& t : root_["tasks"]) task(t);
    cfg_.digest = sha256_hex(cfg_.canonical.dump());
    return std::move(cfg_);
  }

 private:
  template <class F>
  void each(const YAML::Node& n, F&& f) {
    if (!n.IsMap()) fail(n, "expected a mapping of names");
    for (const auto& kv : n) f(kv.first.Scalar(), kv.second);
  }

  GroupSpec group(const YAML::Node& n) {
    try {
      return GroupSpec::parse(scalar<std::string>(n, "group"));
    } catch (const Error& e) {
      fail(n, e.what());
    }
  }

  FolnerSpec default_folner() const {
    switch (cfg_.group.kind()) {
      case GroupKind::integers:
        return FolnerSpec::interval(1);
      case GroupKind::lattice:
        return FolnerSpec::box(identity(cfg_.group));
      case GroupKind::heisenberg:
        return FolnerSpec::heisenberg_box();
    }
    return FolnerSpec::interval(1);
  }

  FolnerSpec folner(const YAML::Node& n) {
    allow_keys(n, {"shape", "start", "anchor"});
    const auto shape = scalar<std::string>(required(n, "shape"), "shape");
    FolnerSpec f = FolnerSpec::interval(1);
    if (shape == "interval") {
      f = FolnerSpec::interval(n["start"] ? scalar<std::int64_t>(n["start"], "start") : 1);
    } else if (shape == "box") {
      f = FolnerSpec::box(n["anchor"] ? element(n["anchor"], cfg_.group) : identity(cfg_.group));
    } else if (shape == "heisenberg_box") {
      f = FolnerSpec::heisenberg_box();
    } else {
      fail(n["shape"], "unknown Folner shape '" + shape + "'");
    }
    if (!(f.group() == cfg_.group)) fail(n, "Folner shape '" + shape + "' does not live on " + cfg_.group.name());
    return f;
  }

  void tolerances(const YAML::Node& n) {
    allow_keys(n, {"eps", "tau", "rotation", "sigmas", "oracle", "normalization"});
    auto& t = cfg_.tolerances;
    auto read = [&](const char* k, double& v) {
      if (!n[k]) return;
      v = scalar<double>(n[k], k);
      if (!(v >= 0)) fail(n[k], std::string(k) + " must be nonnegative");
    };
    read("eps", t.eps);
    read("tau", t.tau);
    read("rotation", t.rotation);
    read("sigmas", t.sigmas);
    read("oracle", t.oracle);
    read("normalization", t.normalization);
  }

  void caps(const YAML::Node& n) {
    allow_keys(n, {"window_bits", "cylinders", "tuples"});
    if (n["window_bits"]) cfg_.caps.window_bits = scalar<std::uint64_t>(n["window_bits"], "window_bits");
    if (n["cylinders"]) cfg_.caps.cylinders = scalar<std::uint64_t>(n["cylinders"], "cylinders");
    if (n["tuples"]) cfg_.caps.tuples = scalar<std::uint64_t>(n["tuples"], "tuples");
  }

  void need_seed(const YAML::Node& n, const std::string& what) {
    if (!cfg_.seed) fail(n, what + " needs a seed (config 'seed' or --seed)");
  }

  void system(const std::string& name, const YAML::Node& n) {
    if (!n.IsMap() || n.size() != 1) fail(n, "system '" + name + "' needs exactly one kind");
    const auto kind = n.begin()->first.Scalar();
    const YAML::Node v = n.begin()->second;
    try {
      if (kind == "rotation") {
        allow_keys(v, {"alpha", "beta"});
        cfg_.systems.emplace(name, OracleSystem::rotation(real(required(v, "alpha"), "alpha"),
                                                          real(required(v, "beta"), "beta")));
      } else if (kind == "markov") {
        allow_keys(v, {"transition", "accept", "stationary"});
        need_seed(n, "Markov system '" + name + "'");
        const auto t = required(v, "transition");
        if (!t.IsSequence() || t.size() == 0) fail(t, "transition must be a square matrix");
        const auto k = static_cast<Eigen::Index>(t.size());
        Eigen::MatrixXd p(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
          const auto row = t[static_cast<std::size_t>(i)];
          if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != k) fail(row, "transition must be square");
          for (Eigen::Index j = 0; j < k; ++j) p(i, j) = scalar<double>(row[static_cast<std::size_t>(j)], "entry");
        }
        std::vector<int> accept;
        for (const auto& a : required(v, "accept")) accept.push_back(scalar<int>(a, "state"));
        std::optional<Eigen::RowVectorXd> pi;
        if (v["stationary"]) {
          const auto s = v["stationary"];
          if (!s.IsSequence() || static_cast<Eigen::Index>(s.size()) != k) fail(s, "stationary needs one entry per state");
          pi = Eigen::RowVectorXd(k);
          for (Eigen::Index j = 0; j < k; ++j) (*pi)(j) = scalar<double>(s[static_cast<std::size_t>(j)], "entry");
        }
        cfg_.systems.emplace(name, OracleSystem::markov(p, std::move(accept), pi));
      } else if (kind == "periodic") {
        std::vector<bool> pattern;
        if (v.IsScalar()) {
          for (char c : v.Scalar()) {
            if (c != '0' && c != '1') fail(v, "periodic pattern is a string of 0 and 1");
            pattern.push_back(c == '1');
          }
        } else {
          for (const auto& b : v) pattern.push_back(scalar<int>(b, "pattern bit") != 0);
        }
        cfg_.systems.emplace(name, OracleSystem::periodic(std::move(pattern)));
      } else {
        fail(n, "unknown system kind '" + kind + "'");
      }
    } catch (const Error& e) {
      fail(n, "system '" + name + "': " + e.what());
    }
    if (cfg_.group.kind() != GroupKind::integers) fail(n, "oracle systems are Z-actions; group must be Z");
  }

  OrbitStart orbit_start(const YAML::Node& v, const OracleSystem& sys) {
    OrbitStart s;
    if (std::holds_alternative<systems::Rotation>(sys.kind())) {
      s.point = v["start"] ? real(v["start"], "start") : RealParam::parse("0");
    } else if (std::holds_alternative<systems::Periodic>(sys.kind())) {
      s.residue = v["start"] ? scalar<std::int64_t>(v["start"], "start") : 0;
    } else {
      s.seed = v["seed"] ? scalar<std::uint64_t>(v["seed"], "seed") : *cfg_.seed;
    }
    return s;
  }

  const OracleSystem& system_ref(const YAML::Node& n) {
    const auto name = name_ref(n, "system");
    const auto it = cfg_.systems.find(name);
    if (it == cfg_.systems.end()) fail(n, "undefined system '" + name + "'");
    return it->second;
  }

  // `at` is the referencing node, used to locate an undefined name.
  const SetDef& set(const std::string& name, const YAML::Node& at = YAML::Node()) {
    if (const auto it = cfg_.sets.find(name); it != cfg_.sets.end()) return it->second;
    // Const lookups: operator[] on a mutable node would insert the key.
    const YAML::Node& root = root_;
    const YAML::Node sets = root["sets"];
    const YAML::Node n = sets ? std::as_const(sets)[name] : YAML::Node(YAML::NodeType::Undefined);
    if (!n) fail(at.IsDefined() && at.Mark().line >= 0 ? at : root_, "undefined set '" + name + "'");
    if (!resolving_.insert(name).second) fail(n, "set '" + name + "' is defined in terms of itself");
    SetDef def = set_def(name, n);
    resolving_.erase(name);
    return cfg_.sets.emplace(name, std::move(def)).first->second;
  }

  SetDef set_def(const std::string& name, const YAML::Node& n) {
    if (n.IsScalar() && n.Scalar() == "dyadic_blocks") return on_group(n, SetSpec::dyadic_blocks());
    if (!n.IsMap() || n.size() != 1) fail(n, "set '" + name + "' needs exactly one kind");
    const auto kind = n.begin()->first.Scalar();
    const YAML::Node v = n.begin()->second;
    try {
      if (kind == "congruence") {
        if (v.IsSequence() && v.size() == 2) {
          return on_group(n, SetSpec::congruence(scalar<std::int64_t>(v[0], "residue"),
                                                 scalar<std::int64_t>(v[1], "modulus")));
        }
        allow_keys(v, {"residue", "modulus"});
        return on_group(n, SetSpec::congruence(scalar<std::int64_t>(required(v, "residue"), "residue"),
                                               scalar<std::int64_t>(required(v, "modulus"), "modulus")));
      }
      if (kind == "rotation") {
        allow_keys(v, {"alpha", "beta", "start"});
        return on_group(n, SetSpec::rotation(real(required(v, "alpha"), "alpha"), real(required(v, "beta"), "beta"),
                                             v["start"] ? real(v["start"], "start") : RealParam::parse("0")));
      }
      if (kind == "dyadic_blocks") return on_group(n, SetSpec::dyadic_blocks());
      if (kind == "componentwise") {
        allow_keys(v, {"residue", "modulus"});
        return on_group(n, SetSpec::componentwise(cfg_.group, coords(required(v, "residue"), cfg_.group),
                                                  coords(required(v, "modulus"), cfg_.group)));
      }
      if (kind == "bitmask") {
        const auto rel = scalar<std::string>(v, "bitmask path");
        const auto path = cfg_.base_dir / rel;
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(v, "cannot read bitmask file '" + path.string() + "'");
        std::ostringstream bytes;
        bytes << in.rdbuf();
        cfg_.canonical["sets"][name]["sha256"] = sha256_hex(bytes.str());
        return on_group(n, SetSpec::bitmask(parse_bitmask(bytes.str()), "bitmask:" + rel));
      }
      if (kind == "orbit") {
        allow_keys(v, {"system", "start", "seed", "lo", "hi"});
        const auto sys_node = required(v, "system");
        const auto& sys = system_ref(sys_node);
        SetDef::Orbit o{name_ref(sys_node, "system"), orbit_start(v, sys),
                        scalar<std::int64_t>(required(v, "lo"), "lo"), scalar<std::int64_t>(required(v, "hi"), "hi")};
        if (o.hi < o.lo) fail(v, "orbit window needs lo <= hi");
        return SetDef{std::move(o)};
      }
      if (kind == "complement") {
        const auto& inner = set(name_ref(v, "complement"), v);
        if (const auto* s = std::get_if<SetSpec>(&inner.source)) return SetDef{s->complement()};
        fail(v, "complement of an orbit set is not supported; complement the system's accept set instead");
      }
    } catch (const Error& e) {
      fail(n, "set '" + name + "': " + e.what());
    }
    fail(n, "unknown set kind '" + kind + "'");
  }

  SetDef on_group(const YAML::Node& n, SetSpec s) {
    if (!(s.group() == cfg_.group)) fail(n, "set lives on " + s.group().name() + ", config group is " + cfg_.group.name());
    return SetDef{std::move(s)};
  }

  const SetDef& set_ref(const YAML::Node& n) { return set(name_ref(n, "set"), n); }

  void scheme(const std::string& name, const YAML::Node& n) {
    allow_keys(n, {"weight", "normalizer"});
    AveragingScheme s = AveragingScheme::uniform(cfg_.folner);
    if (const auto w = n["weight"]) {
      const std::string k = w.IsMap() && w.size() == 1 ? w.begin()->first.Scalar() : scalar<std::string>(w, "weight");
      const YAML::Node v = w.IsMap() ? w.begin()->second : YAML::Node(YAML::NodeType::Undefined);
      if (k == "constant") {
        s.weight = weights::Constant{v ? scalar<double>(v, "constant") : 1.0};
      } else if (k == "linear") {
        s.weight = weights::Linear{};
      } else if (k == "logarithmic") {
        s.weight = weights::Logarithmic{};
      } else if (k == "exponential_decay") {
        s.weight = weights::ExponentialDecay{scalar<double>(v, "rate")};
      } else {
        fail(w, "unknown weight '" + k + "'");
      }
    }
    if (const auto b = n["normalizer"]) {
      const std::string k = b.IsMap() && b.size() == 1 ? b.begin()->first.Scalar() : scalar<std::string>(b, "normalizer");
      const YAML::Node v = b.IsMap() ? b.begin()->second : YAML::Node(YAML::NodeType::Undefined);
      if (k == "constant") {
        s.normalizer = normalizers::Constant{v ? scalar<double>(v, "constant") : 1.0};
      } else if (k == "mean") {
        s.normalizer = normalizers::Mean{};
      } else if (k == "log_over_n") {
        s.normalizer = normalizers::LogOverN{};
      } else if (k == "table") {
        normalizers::Table t;
        if (!v.IsMap()) fail(v, "normalizer table maps N to b(N)");
        for (const auto& kv : v) t.values[scalar<std::uint64_t>(kv.first, "N")] = scalar<double>(kv.second, "b(N)");
        s.normalizer = std::move(t);
      } else {
        fail(b, "unknown normalizer '" + k + "'");
      }
    }
    cfg_.schemes.emplace(name, std::move(s));
  }

  const FunctionSpec& function(const std::string& name, const YAML::Node& at = YAML::Node()) {
    if (const auto it = cfg_.functions.find(name); it != cfg_.functions.end()) return it->second;
    const YAML::Node& root = root_;
    const YAML::Node funcs = root["functions"];
    const YAML::Node n = funcs ? std::as_const(funcs)[name] : YAML::Node(YAML::NodeType::Undefined);
    if (!n) fail(at.IsDefined() && at.Mark().line >= 0 ? at : root_, "undefined function '" + name + "'");
    if (!resolving_.insert("f:" + name).second) fail(n, "function '" + name + "' is defined in terms of itself");
    if (!n.IsMap() || n.size() != 1) fail(n, "function '" + name + "' needs exactly one kind");
    const auto kind = n.begin()->first.Scalar();
    const YAML::Node v = n.begin()->second;
    std::optional<FunctionSpec> f;
    try {
      if (kind == "exponential") {
        if (cfg_.group.kind() != GroupKind::integers) fail(n, "exponential functions live on Z");
        f = FunctionSpec::exponential(real(v, "theta"));
      } else if (kind == "indicator") {
        const auto& def = set_ref(v);
        const auto* s = std::get_if<SetSpec>(&def.source);
        if (!s) fail(v, "indicator of an orbit set is not supported");
        f = FunctionSpec::indicator(*s);
      } else if (kind == "random_disk") {
        need_seed(n, "function '" + name + "'");
        // FNV-1a of the name: stable across platforms, unlike std::hash.
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const unsigned char c : name) h = (h ^ c) * 0x100000001b3ull;
        f = FunctionSpec::random_disk(cfg_.group, *cfg_.seed ^ h);
      } else if (kind == "constant") {
        if (v.IsSequence() && v.size() == 2) {
          f = FunctionSpec::constant(cfg_.group, {scalar<double>(v[0], "re"), scalar<double>(v[1], "im")});
        } else {
          f = FunctionSpec::constant(cfg_.group, scalar<double>(v, "constant"));
        }
      } else if (kind == "product") {
        std::vector<FunctionSpec> parts;
        for (const auto& p : v) parts.push_back(function(name_ref(p, "function"), p));
        f = FunctionSpec::product(std::move(parts));
      } else if (kind == "conjugate") {
        f = FunctionSpec::conjugate(function(name_ref(v, "function"), v));
      } else {
        fail(n, "unknown function kind '" + kind + "'");
      }
    } catch (const Error& e) {
      fail(n, "function '" + name + "': " + e.what());
    }
    resolving_.erase("f:" + name);
    return cfg_.functions.emplace(name, *f).first->second;
  }

  template <class T>
  T positive(const YAML::Node& task, const char* key, T fallback) {
    if (!task[key]) return fallback;
    const T v = scalar<T>(task[key], key);
    if (v < 1) fail(task[key], std::string(key) + " must be >= 1");
    return v;
  }

  Schedule task_schedule(const YAML::Node& t) { return t["schedule"] ? schedule(t["schedule"]) : cfg_.schedule; }

  void task(const YAML::Node& n) {
    if (!n.IsMap() || n.size() != 1) fail(n, "each task is a one-key mapping 'kind: {parameters}'");
    const auto kind = n.begin()->first.Scalar();
    const YAML::Node t = n.begin()->second;
    Task out{kind, DensityTask{}, to_json(n)};
    const auto& g = cfg_.group;
    if (kind == "density") {
      allow_keys(t, {"set", "shifts", "queries", "schedule"});
      set_ref(required(t, "set"));
      out.params = DensityTask{name_ref(t["set"], "set"), queries(t, g), task_schedule(t)};
    } else if (kind == "spectrum" || kind == "cylinders") {
      allow_keys(t, {"set", "depth", "radius", "schedule", "patterns"});
      set_ref(required(t, "set"));
      const auto depth = positive<int>(t, "depth", 1);
      const auto radius = positive<std::int64_t>(t, "radius", 1);
      if (kind == "spectrum") {
        if (t["patterns"]) fail(t["patterns"], "'patterns' applies to cylinders tasks");
        out.params = SpectrumTask{name_ref(t["set"], "set"), depth, radius, task_schedule(t)};
      } else {
        out.params = CylindersTask{name_ref(t["set"], "set"), depth, radius, task_schedule(t),
                                   t["patterns"] && scalar<bool>(t["patterns"], "patterns")};
      }
    } else if (kind == "verify") {
      allow_keys(t, {"system", "start", "seed", "shifts", "queries", "schedule"});
      const auto& sys = system_ref(required(t, "system"));
      out.params = VerifyTask{name_ref(t["system"], "system"), orbit_start(t, sys), queries(t, g), task_schedule(t)};
    } else if (kind == "compare") {
      allow_keys(t, {"first", "second", "depth", "radius", "schedule", "expect"});
      set_ref(required(t, "first"));
      set_ref(required(t, "second"));
      std::optional<Verdict> expect;
      if (t["expect"]) {
        const auto e = scalar<std::string>(t["expect"], "expect");
        if (e == "consistent") {
          expect = Verdict::consistent;
        } else if (e == "distinguished") {
          expect = Verdict::distinguished;
        } else {
          fail(t["expect"], "expect is 'consistent' or 'distinguished'");
        }
      }
      out.params = CompareTask{name_ref(t["first"], "set"), name_ref(t["second"], "set"), positive<int>(t, "depth", 1),
                               positive<std::int64_t>(t, "radius", 1), task_schedule(t), expect};
    } else if (kind == "moments") {
      allow_keys(t, {"functions", "scheme", "queries", "schedule", "conj_depth", "oracle"});
      MomentsTask m;
      const auto fs = required(t, "functions");
      if (!fs.IsSequence() || fs.size() == 0) fail(fs, "functions is a nonempty list of names");
      std::map<std::string, std::size_t> index;
      for (const auto& f : fs) {
        const auto name = name_ref(f, "function");
        function(name, f);
        if (!index.emplace(name, m.functions.size()).second) fail(f, "function '" + name + "' listed twice");
        m.functions.push_back(name);
      }
      m.scheme = scalar<std::string>(required(t, "scheme"), "scheme");
      if (!cfg_.schemes.count(m.scheme)) fail(t["scheme"], "undefined scheme '" + m.scheme + "'");
      const auto qs = required(t, "queries");
      if (!qs.IsSequence() || qs.size() == 0) fail(qs, "queries is a nonempty list");
      for (const auto& q : qs) {
        if (!q.IsSequence() || q.size() == 0) fail(q, "a moment query is a nonempty list of factors");
        std::vector<MomentFactor> factors;
        for (const auto& fac : q) {
          allow_keys(fac, {"f", "shift", "conj"});
          const auto fname = name_ref(required(fac, "f"), "function");
          const auto it = index.find(fname);
          if (it == index.end()) fail(fac["f"], "function '" + fname + "' is not in this task's family");
          factors.push_back(MomentFactor{it->second, fac["conj"] && scalar<bool>(fac["conj"], "conj"),
                                         fac["shift"] ? element(fac["shift"], g) : identity(g)});
        }
        m.queries.emplace_back(std::move(factors));
      }
      m.schedule = task_schedule(t);
      m.conj_depth = t["conj_depth"] ? scalar<int>(t["conj_depth"], "conj_depth") : 3;
      m.oracle = t["oracle"] && scalar<bool>(t["oracle"], "oracle");
      if (m.oracle) {
        for (const auto& name : m.functions) {
          if (!std::holds_alternative<FunctionSpec::Exponential>(cfg_.functions.at(name).rule())) {
            fail(t["oracle"], "the oracle needs exponential functions only; '" + name + "' is not");
          }
        }
        if (!cfg_.schemes.at(m.scheme).is_unweighted_integer_scheme()) {
          fail(t["oracle"], "the oracle needs an unweighted scheme on an interval Folner sequence of Z");
        }
      }
      out.params = std::move(m);
    } else if (kind == "normcheck") {
      allow_keys(t, {"scheme", "schedule"});
      const auto name = scalar<std::string>(required(t, "scheme"), "scheme");
      if (!cfg_.schemes.count(name)) fail(t["scheme"], "undefined scheme '" + name + "'");
      out.params = NormcheckTask{name, task_schedule(t)};
    } else if (kind == "export") {
      allow_keys(t, {"set", "lo", "hi", "path"});
      set_ref(required(t, "set"));
      Box b{g, coords(required(t, "lo"), g), coords(required(t, "hi"), g)};
      out.params = ExportTask{name_ref(t["set"], "set"), b, scalar<std::string>(required(t, "path"), "path")};
    } else {
      fail(n, "unknown task kind '" + kind + "'");
    }
    cfg_.tasks.push_back(std::move(out));
  }

  YAML::Node root_;
  ExperimentConfig cfg_;
  std::set<std::string> resolving_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1), e.msg);
  }
  return Parser(root, base_dir, seed_override).run();
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), path.parent_path(), seed_override);
  } catch (const ConfigError& e) {
    throw ConfigError(path.filename().string(), e.what());
  }
}

}  // namespace furst::app
