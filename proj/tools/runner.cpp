#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "cache.hpp"
#include "furst/bitmask_io.hpp"
#include "furst/error.hpp"

namespace furst::app {

json rational_json(const Rational& r) { return {{"num", r.num()}, {"den", r.den()}, {"decimal", r.decimal(12)}}; }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json element_json(const GroupElement& g) {
  if (g.rank() == 1) return g[0];
  json a = json::array();
  for (std::size_t i = 0; i < g.rank(); ++i) a.push_back(g[i]);
  return a;
}

json shifts_json(const std::vector<GroupElement>& shifts) {
  json a = json::array();
  for (const auto& s : shifts) a.push_back(element_json(s));
  return a;
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

std::string hex(const std::string& bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

std::string unhex(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i + 1 < text.size(); i += 2) {
    out += static_cast<char>(std::stoi(text.substr(i, 2), nullptr, 16));
  }
  return out;
}

json subsequence_json(const Subsequence& s) {
  json osc = json::array();
  for (const auto& o : s.oscillation) osc.push_back(rational_json(o));
  return {{"indices", s.indices}, {"target", rational_json(s.target)}, {"oscillation", osc}};
}

class Executor {
 public:
  Executor(const ExperimentConfig& cfg) : cfg_(cfg) {}

  json execute(std::size_t index, const Task& task) {
    return std::visit([&](const auto& p) { return run(index, p); }, task.params);
  }

 private:
  SetSpec realize(const std::string& name) {
    const auto& def = cfg_.sets.at(name);
    if (const auto* s = std::get_if<SetSpec>(&def.source)) return *s;
    std::lock_guard lock(orbit_mutex_);
    if (const auto it = orbits_.find(name); it != orbits_.end()) return it->second;
    const auto& o = std::get<SetDef::Orbit>(def.source);
    const auto handle = orbit_set(cfg_.systems.at(o.system), o.start, o.lo, o.hi, cfg_.caps.window_bits);
    return orbits_.emplace(name, handle.set()).first->second;
  }

  json run(std::size_t, const DensityTask& t) {
    const SetSpec set = realize(t.set);
    std::vector<std::vector<DensityRow>> per_query;
    json queries = json::array();
    for (const auto& q : t.queries) {
      const auto window = windows_.get(set, query_window(cfg_.folner, t.schedule, q.shifts()));
      auto rows = density_rows(*window, q, cfg_.folner, t.schedule);
      json jr = json::array();
      Rational limsup = rows.front().ratio;
      for (const auto& r : rows) {
        jr.push_back({{"n", r.n}, {"count", r.count}, {"size", r.size}, {"ratio", rational_json(r.ratio)}});
        limsup = std::max(limsup, r.ratio);
      }
      std::vector<std::uint64_t> attaining;
      for (const auto& r : rows) {
        if ((limsup - r.ratio).to_double() <= cfg_.tolerances.tau) attaining.push_back(r.n);
      }
      queries.push_back({{"shifts", shifts_json(q.shifts())},
                         {"rows", jr},
                         {"limsup_estimate", rational_json(limsup)},
                         {"attaining", attaining}});
      per_query.push_back(std::move(rows));
    }
    json table{{"set", t.set}, {"folner", cfg_.folner.str()}, {"queries", queries}};
    try {
      table["subsequence"] = subsequence_json(extract_subsequence(per_query, cfg_.tolerances.eps));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_convergence) throw;
      table["subsequence"] = nullptr;
      table["subsequence_error"] = e.what();
    }
    return {{"table", table}, {"pass", nullptr}, {"files", json::object()}};
  }

  json run(std::size_t index, const SpectrumTask& t) {
    const auto spectrum =
        correlation_spectrum(realize(t.set), cfg_.folner, t.depth, t.radius, t.schedule, cfg_.caps.tuples);
    const std::string file = "spectrum_" + std::to_string(index) + ".csv";
    json table{{"set", t.set},       {"folner", cfg_.folner.str()}, {"depth", t.depth},
               {"radius", t.radius}, {"schedule", t.schedule},      {"tuples", spectrum.entries.size()},
               {"csv", file}};
    return {{"table", table}, {"pass", nullptr}, {"files", {{file, {{"text", spectrum_csv(spectrum)}}}}}};
  }

  json run(std::size_t, const CylindersTask& t) {
    ReportOptions opt;
    opt.radius = t.radius;
    opt.max_depth = t.depth;
    opt.schedule = t.schedule;
    opt.cylinder_cap = cfg_.caps.cylinders;
    opt.eps = cfg_.tolerances.eps;
    opt.tau = cfg_.tolerances.tau;
    opt.patterns = t.patterns;
    const MeasureTable m = furstenberg_report(realize(t.set), cfg_.folner, opt);

    json rows = json::array();
    std::unordered_map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      const auto& r = m.rows[i];
      by_name.emplace(r.cylinder.str(), i);
      rows.push_back({{"cylinder", r.cylinder.str()},
                      {"counts", r.counts},
                      {"final", rational_json(r.values.back())},
                      {"oscillation", rational_json(r.oscillation)}});
    }
    // Kolmogorov consistency on the table itself: nu(C) = nu(C + h->0) + nu(C + h->1).
    std::uint64_t checked = 0, failures = 0;
    for (const auto& r : m.rows) {
      if (static_cast<int>(r.cylinder.constraints().size()) >= t.depth) continue;
      for (const auto& h : m.support) {
        if (r.cylinder.constrains(h)) continue;
        const auto zero = by_name.at(r.cylinder.with(h, false).str());
        const auto one = by_name.at(r.cylinder.with(h, true).str());
        for (std::size_t k = 0; k < r.counts.size(); ++k) {
          ++checked;
          if (r.counts[k] != m.rows[zero].counts[k] + m.rows[one].counts[k]) ++failures;
        }
      }
    }
    json table{{"set", t.set},
               {"folner", cfg_.folner.str()},
               {"depth", t.depth},
               {"radius", t.radius},
               {"schedule", t.schedule},
               {"support", shifts_json(m.support)},
               {"rows", rows},
               {"base_measure", rational_json(m.base_measure)},
               {"upper_density_estimate", rational_json(m.upper_density_estimate)},
               {"attaining", m.attaining},
               {"additivity", {{"checked", checked}, {"failures", failures}}}};
    if (m.subsequence) {
      table["subsequence"] = subsequence_json(*m.subsequence);
    } else {
      table["subsequence"] = nullptr;
      table["subsequence_error"] = m.subsequence_error;
    }
    if (t.patterns) table["observed_patterns"] = m.observed_patterns;
    return {{"table", table}, {"pass", failures == 0}, {"files", json::object()}};
  }

  json run(std::size_t, const VerifyTask& t) {
    CorrespondenceOptions opt;
    opt.rotation_tolerance = cfg_.tolerances.rotation;
    opt.markov_sigmas = cfg_.tolerances.sigmas;
    opt.window_cap = cfg_.caps.window_bits;
    const auto rep = verify_correspondence(cfg_.systems.at(t.system), t.start, t.queries, cfg_.folner, t.schedule, opt);
    json queries = json::array();
    for (const auto& q : rep.queries) {
      json rows = json::array();
      for (const auto& r : q.rows) {
        rows.push_back({{"n", r.n}, {"density", rational_json(r.density)}, {"deviation", r.deviation}});
      }
      json measure{{"value", q.measure.value}};
      if (q.measure.exact) measure["exact"] = rational_json(*q.measure.exact);
      queries.push_back({{"shifts", q.shifts},
                         {"measure", measure},
                         {"rows", rows},
                         {"final_deviation", q.final_deviation},
                         {"tolerance", q.tolerance},
                         {"sigma", q.sigma},
                         {"pass", q.pass}});
    }
    json table{{"system", t.system}, {"description", cfg_.systems.at(t.system).str()}, {"queries", queries},
               {"note", rep.note}};
    return {{"table", table}, {"pass", rep.pass}, {"files", json::object()}};
  }

  json run(std::size_t, const CompareTask& t) {
    const auto c = compare_pairs({realize(t.first), cfg_.folner}, {realize(t.second), cfg_.folner}, t.depth, t.radius,
                                 t.schedule, cfg_.tolerances.eps);
    json inconclusive = json::array();
    for (const auto& tuple : c.inconclusive) inconclusive.push_back(tuple_str(tuple));
    json table{{"first", t.first},
               {"second", t.second},
               {"depth", t.depth},
               {"radius", t.radius},
               {"schedule", t.schedule},
               {"verdict", to_string(c.verdict)},
               {"max_discrepancy", rational_json(c.max_discrepancy)},
               {"max_tuple", tuple_str(c.max_tuple)},
               {"witness", tuple_str(c.witness)},
               {"witness_discrepancy", rational_json(c.witness_discrepancy)},
               {"inconclusive", inconclusive},
               {"compared", c.compared}};
    bool pass = c.verdict != Verdict::inconclusive;
    if (t.expect) {
      table["expect"] = to_string(*t.expect);
      pass = c.verdict == *t.expect;
    }
    return {{"table", table}, {"pass", pass}, {"files", json::object()}};
  }

  json run(std::size_t, const MomentsTask& t) {
    std::vector<FunctionSpec> family;
    for (const auto& name : t.functions) family.push_back(cfg_.functions.at(name));
    const auto& scheme = cfg_.schemes.at(t.scheme);
    const auto rep = accordance_check(family, t.queries, scheme, t.schedule, cfg_.tolerances.eps, t.conj_depth);
    bool pass = rep.accordant;
    json queries = json::array();
    for (std::size_t qi = 0; qi < rep.queries.size(); ++qi) {
      const auto& aq = rep.queries[qi];
      json patterns = json::array();
      for (const auto& p : aq.patterns) {
        json values = json::array();
        for (const auto& v : p.values) values.push_back(complex_json(v));
        patterns.push_back({{"conjugates", p.conjugates}, {"values", values}, {"oscillation", p.oscillation}});
      }
      json jq{{"query", aq.query.str()},
              {"patterns", patterns},
              {"oscillation", aq.oscillation},
              {"accordant", aq.accordant}};
      if (t.oracle) {
        std::vector<RealParam> thetas;
        for (const auto& f : family) thetas.push_back(std::get<FunctionSpec::Exponential>(f.rule()).theta);
        const auto limit = exponential_oracle(thetas, t.queries[qi], scheme);
        const auto value = weighted_moment(family, t.queries[qi], scheme, t.schedule.back());
        const double err = std::abs(value.value - limit);
        const bool ok = err <= cfg_.tolerances.oracle;
        jq["oracle"] = {{"limit", complex_json(limit)},
                        {"value", complex_json(value.value)},
                        {"error", err},
                        {"pass", ok}};
        pass = pass && ok;
      }
      queries.push_back(std::move(jq));
    }
    json table{{"functions", t.functions}, {"scheme", t.scheme}, {"schedule", t.schedule}, {"queries", queries}};
    return {{"table", table}, {"pass", pass}, {"files", json::object()}};
  }

  json run(std::size_t, const NormcheckTask& t) {
    const auto& scheme = cfg_.schemes.at(t.scheme);
    const double tol = cfg_.tolerances.normalization;
    bool pass = true;
    json rows = json::array();
    for (auto n : t.schedule) {
      const auto norm = scheme_normalization(scheme, n);
      json row{{"n", n}, {"value", norm.value}};
      bool ok = false;
      if (norm.exact) {
        row["exact"] = rational_json(*norm.exact);
        ok = tol == 0 ? *norm.exact == Rational(1) : std::abs(norm.exact->to_double() - 1) <= tol;
      } else {
        ok = std::abs(norm.value - 1) <= std::max(tol, 1e-12);
      }
      row["pass"] = ok;
      pass = pass && ok;
      rows.push_back(std::move(row));
    }
    return {{"table", {{"scheme", t.scheme}, {"rows", rows}}}, {"pass", pass}, {"files", json::object()}};
  }

  json run(std::size_t, const ExportTask& t) {
    const IndicatorWindow w = indicator_window(realize(t.set), t.window);
    json table{{"set", t.set}, {"path", t.path}, {"bits", w.bits.size()}, {"ones", w.bits.count()}};
    return {{"table", table}, {"pass", nullptr}, {"files", {{t.path, {{"hex", hex(serialize_bitmask(w))}}}}}};
  }

  const ExperimentConfig& cfg_;
  WindowCache windows_;
  std::mutex orbit_mutex_;
  std::map<std::string, SetSpec> orbits_;
};

int exit_class(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::cap_exceeded:
    case ErrorKind::window_exceeded:
    case ErrorKind::overflow:
      return 3;
    default:
      return 2;
  }
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string csv_line(std::initializer_list<json> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += csv_cell(c);
    first = false;
  }
  return s + "\n";
}

/// Flat per-task table for --format csv.
std::string task_csv(const std::string& kind, const json& table) {
  std::string out;
  if (kind == "density") {
    out = "query,n,count,size,numerator,denominator\n";
    for (const auto& q : table["queries"]) {
      for (const auto& r : q["rows"]) {
        out += csv_line({q["shifts"].dump(), r["n"], r["count"], r["size"], r["ratio"]["num"], r["ratio"]["den"]});
      }
    }
  } else if (kind == "cylinders") {
    out = "cylinder,n,count\n";
    for (const auto& r : table["rows"]) {
      for (std::size_t k = 0; k < r["counts"].size(); ++k) {
        out += csv_line({r["cylinder"], table["schedule"][k], r["counts"][k]});
      }
    }
  } else if (kind == "verify") {
    out = "query,n,numerator,denominator,measure,deviation\n";
    for (const auto& q : table["queries"]) {
      for (const auto& r : q["rows"]) {
        out += csv_line({q["shifts"].dump(), r["n"], r["density"]["num"], r["density"]["den"], q["measure"]["value"],
                         r["deviation"]});
      }
    }
  } else if (kind == "moments") {
    out = "query,conjugates,n,re,im\n";
    const auto& schedule = table["schedule"];
    for (const auto& q : table["queries"]) {
      for (const auto& p : q["patterns"]) {
        for (std::size_t k = 0; k < p["values"].size(); ++k) {
          out += csv_line({q["query"], p["conjugates"].dump(), schedule[k], p["values"][k][0], p["values"][k][1]});
        }
      }
    }
  } else if (kind == "normcheck") {
    out = "n,value,numerator,denominator\n";
    for (const auto& r : table["rows"]) {
      const bool exact = r.contains("exact");
      out += csv_line({r["n"], r["value"], exact ? r["exact"]["num"] : json(""), exact ? r["exact"]["den"] : json("")});
    }
  } else {
    out = "field,value\n";
    for (const auto& [k, v] : table.items()) out += csv_line({k, v});
  }
  return out;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, const RunOptions& options) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    if (!options.only_kind || cfg.tasks[i].kind == *options.only_kind) selected.push_back(i);
  }
  std::filesystem::create_directories(options.out_dir);
  ResultCache cache(options.out_dir / "cache");
  Executor exec(cfg);
  std::vector<TaskOutcome> outcomes(selected.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < selected.size();) {
      const std::size_t i = selected[k];
      const Task& task = cfg.tasks[i];
      TaskOutcome& out = outcomes[k];
      out.index = i;
      out.kind = task.kind;
      const auto start = std::chrono::steady_clock::now();
      const std::string key = sha256_hex(std::string(kToolVersion) + "\n" + cfg.digest + "\n" + std::to_string(i) +
                                         "\n" + task.canonical.dump());
      try {
        if (options.use_cache) {
          if (auto hit = cache.get(key)) {
            out.payload = std::move(*hit);
            out.cache_hit = true;
          }
        }
        if (!out.cache_hit) {
          out.payload = exec.execute(i, task);
          if (options.use_cache) cache.put(key, out.payload);
        }
        if (out.payload["pass"].is_boolean() && !out.payload["pass"].get<bool>()) out.exit_class = 1;
      } catch (const Error& e) {
        out.exit_class = exit_class(e);
        out.error = e.what();
      } catch (const std::exception& e) {
        out.exit_class = 1;
        out.error = e.what();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(selected.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Report, assembled in task order.
  RunResult result;
  bool pass = true;
  json tasks = json::array();
  json info = json::array();
  std::string summary = "index,kind,verdict,error\n";
  for (auto& out : outcomes) {
    std::string verdict = "NONE";
    json entry{{"index", out.index}, {"kind", out.kind}};
    if (!out.error.empty()) {
      verdict = "ERROR";
      entry["error"] = out.error;
    } else {
      if (out.payload["pass"].is_boolean()) verdict = out.payload["pass"].get<bool>() ? "PASS" : "FAIL";
      entry["table"] = out.payload["table"];
      for (const auto& [name, content] : out.payload["files"].items()) {
        write_file(options.out_dir / name, content.contains("hex") ? unhex(content["hex"].get<std::string>())
                                                                   : content["text"].get<std::string>());
      }
      if (options.format == ReportFormat::csv && out.kind != "spectrum") {
        write_file(options.out_dir / ("task_" + std::to_string(out.index) + "_" + out.kind + ".csv"),
                   task_csv(out.kind, out.payload["table"]));
      }
    }
    entry["verdict"] = verdict;
    pass = pass && out.exit_class == 0;
    // Cap errors outrank config errors, which outrank verdict failures.
    result.exit_code = std::max(result.exit_code, out.exit_class);
    summary += csv_line({out.index, out.kind, verdict, out.error});
    tasks.push_back(std::move(entry));
    info.push_back({{"index", out.index}, {"seconds", out.seconds}, {"cache", out.cache_hit ? "hit" : "miss"}});
    std::cout << "task " << out.index << " " << out.kind << ": " << verdict << (out.cache_hit ? " (cached)" : "")
              << (out.error.empty() ? "" : " - " + out.error) << "\n";
  }
  const json report{{"tool", "furst"},
                    {"version", kToolVersion},
                    {"config_digest", cfg.digest},
                    {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                    {"tasks", tasks},
                    {"pass", pass}};
  if (options.format == ReportFormat::json) {
    write_file(options.out_dir / "report.json", report.dump(2) + "\n");
  } else {
    write_file(options.out_dir / "summary.csv", summary);
  }
  write_file(options.out_dir / "run_info.json",
             json{{"threads", k}, {"cache_enabled", options.use_cache}, {"tasks", info}}.dump(2) + "\n");
  result.tasks = std::move(outcomes);
  return result;
}

}  // namespace furst::app
