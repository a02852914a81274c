#include "wsn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace wsn {

namespace {

namespace pt = boost::property_tree;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Line of `key` inside `[section]`, 0 when not found.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  std::string current;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

struct Context {
  const std::string& text;
  const std::string& source;
  std::string section;
  std::string key;
  std::string value;

  [[noreturn]] void fail(const std::string& what) const {
    std::string where = source;
    if (const int line = locate(text, section, key); line > 0) where += ":" + std::to_string(line);
    throw PlanParseError(where + ": " + section + "." + key + ": " + what);
  }
};

// Parses a decimal number times 10^shift. The shift is applied to the
// decimal exponent before conversion, so "50" with shift -9 yields exactly
// the double nearest 50e-9.
double to_double(const Context& ctx, const std::string& s, int shift = 0) {
  auto parse = [&](const std::string& t) {
    double v = 0.0;
    const auto* end = t.data() + t.size();
    const auto [p, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || p != end) ctx.fail("expected a number, got '" + s + "'");
    return v;
  };
  const std::string t(trim(s));
  const double v = parse(t);
  if (shift == 0 || !std::isfinite(v)) return v;
  const auto e = t.find_first_of("eE");
  long long exponent = 0;
  if (e != std::string::npos) std::from_chars(t.data() + e + 1 + (t[e + 1] == '+'), t.data() + t.size(), exponent);
  return parse(t.substr(0, e) + "e" + std::to_string(exponent + shift));
}

long long to_integer(const Context& ctx, const std::string& s) {
  const auto t = trim(s);
  long long v = 0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || p != end) ctx.fail("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const Context& ctx, const std::string& s) {
  const auto t = lower(trim(s));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  ctx.fail("expected a boolean, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Area to_area(const Context& ctx, const std::string& s) {
  const auto t = lower(trim(s));
  const auto x = t.find('x');
  if (x == std::string::npos) ctx.fail("expected WIDTHxHEIGHT, got '" + s + "'");
  return {to_double(ctx, t.substr(0, x)), to_double(ctx, t.substr(x + 1))};
}

/// Accepts `a`, or an inclusive range `a:b`.
std::vector<std::uint64_t> to_seeds(const Context& ctx, const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    const auto colon = item.find(':');
    const auto lo = to_integer(ctx, item.substr(0, colon));
    const auto hi = colon == std::string::npos ? lo : to_integer(ctx, item.substr(colon + 1));
    if (lo < 0 || hi < lo) ctx.fail("bad seed entry '" + item + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

using Setter = std::function<void(ExperimentPlan&, const Context&)>;

struct SectionSpec {
  std::vector<std::string> names;  // accepted spellings, compared case-insensitively
  std::map<std::string, Setter> keys;  // lower-cased key -> setter
};

std::vector<SectionSpec> build_sections(const std::filesystem::path& base_dir) {
  auto num = [](double ScenarioConfig::*field, double scale = 1.0) {
    return [field, scale](ExperimentPlan& p, const Context& c) {
      p.base.*field = to_double(c, c.value) * scale;
    };
  };
  auto integer = [](int ScenarioConfig::*field) {
    return [field](ExperimentPlan& p, const Context& c) {
      p.base.*field = static_cast<int>(to_integer(c, c.value));
    };
  };

  SectionSpec scenario{{"scenario", "scenarioconfig"}, {}};
  auto& s = scenario.keys;
  s["mode"] = [](ExperimentPlan& p, const Context& c) {
    try {
      p.modes = {parse_mode(trim(c.value))};
    } catch (const ConfigError& e) {
      c.fail(e.what());
    }
  };
  s["width"] = num(&ScenarioConfig::width);
  s["height"] = num(&ScenarioConfig::height);
  s["area"] = [](ExperimentPlan& p, const Context& c) {
    const auto a = to_area(c, c.value);
    p.base.width = a.width;
    p.base.height = a.height;
  };
  s["node_count"] = s["n"] = integer(&ScenarioConfig::node_count);
  s["malicious_fraction"] = num(&ScenarioConfig::malicious_fraction);
  s["bs_x"] = [](ExperimentPlan& p, const Context& c) {
    auto pos = p.base.bs_position.value_or(Position{kUnset, kUnset});
    pos.x = to_double(c, c.value);
    p.base.bs_position = pos;
  };
  s["bs_y"] = [](ExperimentPlan& p, const Context& c) {
    auto pos = p.base.bs_position.value_or(Position{kUnset, kUnset});
    pos.y = to_double(c, c.value);
    p.base.bs_position = pos;
  };
  s["bs_offset"] = num(&ScenarioConfig::bs_offset);
  s["e_0"] = s["initial_energy"] = num(&ScenarioConfig::initial_energy);
  s["packet_bits"] = integer(&ScenarioConfig::packet_bits);
  s["control_bits"] = integer(&ScenarioConfig::control_bits);
  s["p_int"] = num(&ScenarioConfig::p_int);
  s["n_nch"] = integer(&ScenarioConfig::n_nch);
  s["w"] = num(&ScenarioConfig::w);
  s["rounds_per_cycle"] = integer(&ScenarioConfig::rounds_per_cycle);
  s["broadcast_radius"] = [](ExperimentPlan& p, const Context& c) {
    p.base.broadcast_radius = to_double(c, c.value);
  };
  s["immediate_overhear_s"] = num(&ScenarioConfig::immediate_overhear_s);
  s["past_heads_cap"] = integer(&ScenarioConfig::past_heads_cap);
  s["evidence_window"] = [](ExperimentPlan& p, const Context& c) {
    const auto v = to_integer(c, c.value);
    if (v < 0) c.fail("must be non-negative");
    p.base.evidence_window = static_cast<std::size_t>(v);
  };
  s["max_rounds"] = [](ExperimentPlan& p, const Context& c) {
    p.base.max_rounds = to_integer(c, c.value);
  };
  s["ideal_channel"] = [](ExperimentPlan& p, const Context& c) {
    p.base.ideal_channel = to_bool(c, c.value);
  };
  s["fuzzy_sets"] = [base_dir](ExperimentPlan& p, const Context& c) {
    std::filesystem::path path = trim(c.value);
    if (path.is_relative()) path = base_dir / path;
    p.base.fuzzy_sets = path;
  };

  SectionSpec game{{"game", "electionpolicy", "gamecontext"}, {}};
  game.keys["p_int"] = s["p_int"];
  game.keys["n_nch"] = s["n_nch"];
  game.keys["w"] = s["w"];

  auto radio_num = [](double RadioParams::*field, int shift) {
    return [field, shift](ExperimentPlan& p, const Context& c) {
      p.base.radio.*field = to_double(c, c.value, shift);
    };
  };
  SectionSpec radio{{"radio", "radioparams"}, {}};
  radio.keys["e_elec_nj_per_bit"] = radio_num(&RadioParams::e_elec, -9);
  radio.keys["eps_fs_pj_per_bit_m2"] = radio_num(&RadioParams::eps_fs, -12);
  radio.keys["eps_amp_pj_per_bit_m4"] = radio_num(&RadioParams::eps_amp, -12);
  radio.keys["e_da_nj_per_bit"] = radio_num(&RadioParams::e_da, -9);
  radio.keys["e_h_nj_per_bit"] = radio_num(&RadioParams::e_h, -9);
  radio.keys["e_m_nj_per_s"] = radio_num(&RadioParams::e_m, -9);
  radio.keys["d_m_s"] = radio.keys["d_m"] = radio_num(&RadioParams::d_max_overhear, 0);

  SectionSpec channel{{"channel", "channelmodel"}, {}};
  channel.keys["alpha_0"] = [](ExperimentPlan& p, const Context& c) {
    p.base.channel.alpha_bad = to_double(c, c.value);
  };
  channel.keys["alpha_1"] = [](ExperimentPlan& p, const Context& c) {
    p.base.channel.alpha_good = to_double(c, c.value);
  };

  SectionSpec outlier{{"outlier", "outlierthresholds"}, {}};
  outlier.keys["d_m"] = [](ExperimentPlan& p, const Context& c) {
    p.base.outlier.d_m = to_double(c, c.value);
  };
  outlier.keys["d_mbg"] = [](ExperimentPlan& p, const Context& c) {
    p.base.outlier.d_mbg = to_double(c, c.value);
  };
  outlier.keys["t_s"] = [](ExperimentPlan& p, const Context& c) {
    p.base.outlier.t_s = static_cast<int>(to_integer(c, c.value));
  };

  SectionSpec attack{{"attack", "attackprofile"}, {}};
  attack.keys["p_dp"] = [](ExperimentPlan& p, const Context& c) {
    p.base.attack.p_dp = to_double(c, c.value);
  };
  attack.keys["p_dl"] = [](ExperimentPlan& p, const Context& c) {
    p.base.attack.p_dl = to_double(c, c.value);
  };
  attack.keys["d_m"] = attack.keys["d_m_s"] = [](ExperimentPlan& p, const Context& c) {
    p.base.attack.d_max = to_double(c, c.value);
  };

  SectionSpec noise{{"noise", "noiseprofile"}, {}};
  noise.keys["p_los"] = [](ExperimentPlan& p, const Context& c) {
    p.base.noise.p_los = to_double(c, c.value);
  };
  noise.keys["p_del"] = [](ExperimentPlan& p, const Context& c) {
    p.base.noise.p_del = to_double(c, c.value);
  };

  SectionSpec experiment{{"experiment", "experimentplan"}, {}};
  auto& e = experiment.keys;
  e["name"] = [](ExperimentPlan& p, const Context& c) { p.name = trim(c.value); };
  e["seeds"] = [](ExperimentPlan& p, const Context& c) { p.seeds = to_seeds(c, c.value); };
  e["modes"] = [](ExperimentPlan& p, const Context& c) {
    p.modes.clear();
    for (const auto& m : split_list(c.value)) {
      try {
        p.modes.push_back(parse_mode(m));
      } catch (const ConfigError& err) {
        c.fail(err.what());
      }
    }
  };
  e["malicious_fractions"] = [](ExperimentPlan& p, const Context& c) {
    p.malicious_fractions.clear();
    for (const auto& v : split_list(c.value)) p.malicious_fractions.push_back(to_double(c, v));
  };
  e["areas"] = [](ExperimentPlan& p, const Context& c) {
    p.areas.clear();
    for (const auto& v : split_list(c.value)) p.areas.push_back(to_area(c, v));
  };
  e["node_counts"] = [](ExperimentPlan& p, const Context& c) {
    p.node_counts.clear();
    for (const auto& v : split_list(c.value)) p.node_counts.push_back(static_cast<int>(to_integer(c, v)));
  };
  e["trace_nodes"] = [](ExperimentPlan& p, const Context& c) { p.trace.nodes = to_bool(c, c.value); };
  e["trace_energy"] = [](ExperimentPlan& p, const Context& c) {
    p.trace.energy_events = to_bool(c, c.value);
  };
  e["trust_every"] = [](ExperimentPlan& p, const Context& c) {
    p.trace.trust_every = static_cast<int>(to_integer(c, c.value));
  };

  return {scenario, game, radio, channel, outlier, attack, noise, experiment};
}

ExperimentPlan parse_plan_in(const std::string& text, const std::string& source,
                             const std::filesystem::path& base_dir, const std::string& default_name) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    throw PlanParseError(source + ":" + std::to_string(err.line()) + ": " + err.message());
  }

  const auto sections = build_sections(base_dir);
  ExperimentPlan plan;
  plan.name = default_name;
  for (const auto& [section_name, body] : tree) {
    if (body.empty()) {
      Context ctx{text, source, "", section_name, body.data()};
      ctx.fail("key outside any section");
    }
    const auto wanted = lower(section_name);
    const SectionSpec* spec = nullptr;
    for (const auto& candidate : sections) {
      if (std::find(candidate.names.begin(), candidate.names.end(), wanted) != candidate.names.end()) {
        spec = &candidate;
      }
    }
    if (spec == nullptr) {
      throw PlanParseError(source + ":" + std::to_string(locate(text, section_name, "")) +
                           ": unknown section [" + section_name + "]");
    }
    for (const auto& [key, leaf] : body) {
      Context ctx{text, source, section_name, key, leaf.data()};
      const auto it = spec->keys.find(lower(key));
      if (it == spec->keys.end()) ctx.fail("unknown key");
      it->second(plan, ctx);
    }
  }

  if (auto& bs = plan.base.bs_position) {
    // A lone bs_x or bs_y keeps the other default coordinate.
    if (std::isnan(bs->x)) bs->x = plan.base.width + plan.base.bs_offset;
    if (std::isnan(bs->y)) bs->y = plan.base.height / 2.0;
  }

  if (const auto problems = plan.violations(); !problems.empty()) {
    std::string msg = source + ": invalid plan";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw PlanValidationError(msg);
  }
  return plan;
}

}  // namespace

std::vector<ScenarioConfig> ExperimentPlan::scenarios() const {
  const auto fractions = malicious_fractions.empty() ? std::vector<double>{base.malicious_fraction}
                                                     : malicious_fractions;
  const auto sizes = areas.empty() ? std::vector<Area>{{base.width, base.height}} : areas;
  const auto counts = node_counts.empty() ? std::vector<int>{base.node_count} : node_counts;
  std::vector<ScenarioConfig> out;
  for (auto mode : modes) {
    for (double mf : fractions) {
      for (const auto& a : sizes) {
        for (int n : counts) {
          ScenarioConfig c = base;
          c.mode = mode;
          c.malicious_fraction = mf;
          c.width = a.width;
          c.height = a.height;
          c.node_count = n;
          c.name = scenario_label(name, c);
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

std::vector<std::string> ExperimentPlan::violations() const {
  std::vector<std::string> out;
  if (seeds.empty()) out.emplace_back("experiment.seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    out.emplace_back("experiment.seeds must be distinct");
  }
  if (modes.empty()) out.emplace_back("experiment.modes must not be empty");
  if (std::set<ProtocolMode>(modes.begin(), modes.end()).size() != modes.size()) {
    out.emplace_back("experiment.modes must be distinct");
  }
  if (trace.trust_every < 0) out.emplace_back("experiment.trust_every must be non-negative");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    out.emplace_back("experiment.name must be non-empty and contain no path separators");
  }
  std::set<std::string> labels;
  for (const auto& c : scenarios()) {
    if (!labels.insert(c.name).second) out.push_back(c.name + ": duplicate sweep point");
    for (const auto& v : c.violations()) out.push_back(c.name + ": " + v);
  }
  return out;
}

ExperimentPlan parse_plan(const std::string& text, const std::string& source) {
  return parse_plan_in(text, source, std::filesystem::current_path(), "plan");
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PlanParseError(path.string() + ": cannot open plan file");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_plan_in(buf.str(), path.string(), std::filesystem::absolute(path).parent_path(),
                       path.stem().string());
}

std::string scenario_label(const std::string& plan_name, const ScenarioConfig& c) {
  return plan_name + "-" + to_string(c.mode) + "-mf" + fmt_g(c.malicious_fraction * 100.0) + "-" +
         fmt_g(c.width) + "x" + fmt_g(c.height) + "-n" + std::to_string(c.node_count);
}

Stat describe(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

bool AggregateReport::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.ok; });
}

AggregateReport aggregate(const std::vector<ScenarioConfig>& scenarios,
                          const std::vector<RunOutcome>& runs, const std::string& plan_name) {
  AggregateReport report;
  report.plan = plan_name;
  report.runs = runs;
  for (const auto& c : scenarios) {
    GroupReport g;
    g.scenario = c.name;
    g.mode = c.mode;
    g.malicious_fraction = c.malicious_fraction;
    g.width = c.width;
    g.height = c.height;
    g.node_count = c.node_count;
    g.benign_count = c.node_count - c.malicious_count();
    std::vector<double> lifetime, throughput, drops, delays, total, timely, effective;
    std::vector<std::vector<double>> cycles;
    for (const auto& r : runs) {
      if (r.scenario != c.name) continue;
      if (!r.ok) {
        ++g.failed;
        continue;
      }
      ++g.completed;
      const auto& s = r.summary;
      lifetime.push_back(static_cast<double>(s.lifetime));
      throughput.push_back(static_cast<double>(s.throughput));
      drops.push_back(static_cast<double>(s.drop_attacks));
      delays.push_back(static_cast<double>(s.delay_attacks));
      total.push_back(static_cast<double>(s.drop_attacks + s.delay_attacks));
      timely.push_back(s.timely_rate);
      effective.push_back(s.effective_energy_rate);
      for (std::size_t i = 0; i < r.cycles.size(); ++i) {
        if (cycles.size() <= i) cycles.resize(i + 1);
        cycles[i].push_back(r.cycles[i].avg_malicious_clusters);
      }
    }
    g.lifetime = describe(lifetime);
    g.throughput = describe(throughput);
    g.drop_attacks = describe(drops);
    g.delay_attacks = describe(delays);
    g.total_attacks = describe(total);
    g.timely_rate = describe(timely);
    g.effective_energy_rate = describe(effective);
    for (const auto& values : cycles) g.cycles.push_back(describe(values));
    report.groups.push_back(std::move(g));
  }
  return report;
}

std::filesystem::path resolve_out_dir(const std::string& cli) {
  if (!cli.empty()) return cli;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "out";
}

AggregateReport execute(const ExperimentPlan& plan, const ExecuteOptions& options) {
  const auto scenarios = plan.scenarios();
  struct Job {
    ScenarioConfig config;
  };
  std::vector<Job> jobs;
  for (const auto& c : scenarios) {
    for (auto seed : plan.seeds) {
      Job j{c};
      j.config.seed = seed;
      jobs.push_back(std::move(j));
    }
  }

  const auto raw_dir = options.out_dir / "raw";
  std::filesystem::create_directories(raw_dir);
  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& cfg = jobs[i].config;
      auto& out = outcomes[i];
      out.scenario = cfg.name;
      out.seed = cfg.seed;
      const auto stem = run_stem(cfg);
      try {
        Simulation sim(cfg, plan.trace);
        const auto record = sim.run();
        out.rounds_csv = "raw/" + stem + ".csv";
        out.summary_json = "raw/" + stem + ".summary.json";
        write_rounds_csv(record, options.out_dir / out.rounds_csv);
        write_summary_json(record, options.out_dir / out.summary_json);
        if (plan.trace.nodes) write_node_trace_csv(record, raw_dir / (stem + ".nodes.csv"));
        if (plan.trace.trust_every > 0) write_trust_trace_csv(record, raw_dir / (stem + ".trust.csv"));
        out.summary = record.summary;
        out.cycles = record.cycles;
        out.ok = true;
      } catch (const std::exception& err) {
        out.ok = false;
        out.error = err.what();
      }
      if (!options.quiet) {
        std::lock_guard lock(log_mutex);
        std::fprintf(stderr, "[%s] %s%s%s\n", out.ok ? "done" : "FAIL", stem.c_str(),
                     out.ok ? "" : ": ", out.error.c_str());
      }
    }
  };

  unsigned n_threads = options.jobs > 0 ? options.jobs : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  auto report = aggregate(scenarios, outcomes, plan.name);
  write_report_json(report, options.out_dir / "report.json");
  return report;
}

namespace {

nlohmann::ordered_json stat_json(const Stat& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}};
}

Stat stat_from(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("n").get<int>()};
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_report_json(const AggregateReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["plan"] = report.plan;
  j["run_count"] = report.runs.size();
  j["failed"] = std::count_if(report.runs.begin(), report.runs.end(),
                              [](const RunOutcome& r) { return !r.ok; });
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : report.groups) {
    nlohmann::ordered_json gj;
    gj["scenario"] = g.scenario;
    gj["mode"] = to_string(g.mode);
    gj["malicious_fraction"] = g.malicious_fraction;
    gj["width"] = g.width;
    gj["height"] = g.height;
    gj["node_count"] = g.node_count;
    gj["benign_count"] = g.benign_count;
    gj["completed"] = g.completed;
    gj["failed"] = g.failed;
    gj["lifetime"] = stat_json(g.lifetime);
    gj["throughput"] = stat_json(g.throughput);
    gj["drop_attacks"] = stat_json(g.drop_attacks);
    gj["delay_attacks"] = stat_json(g.delay_attacks);
    gj["total_attacks"] = stat_json(g.total_attacks);
    gj["timely_rate"] = stat_json(g.timely_rate);
    gj["effective_energy_rate"] = stat_json(g.effective_energy_rate);
    auto cycles = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < g.cycles.size(); ++i) {
      auto cj = stat_json(g.cycles[i]);
      cycles.push_back({{"cycle", i}, {"mean", cj["mean"]}, {"std", cj["std"]}, {"n", cj["n"]}});
    }
    gj["malicious_clusters_per_cycle"] = std::move(cycles);
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.runs) {
    nlohmann::ordered_json rj;
    rj["scenario"] = r.scenario;
    rj["seed"] = r.seed;
    rj["ok"] = r.ok;
    if (!r.ok) rj["error"] = r.error;
    if (r.ok) {
      rj["rounds_csv"] = r.rounds_csv;
      rj["summary_json"] = r.summary_json;
      rj["rounds"] = r.summary.rounds;
      rj["lifetime"] = r.summary.lifetime;
      rj["throughput"] = r.summary.throughput;
      rj["drop_attacks"] = r.summary.drop_attacks;
      rj["delay_attacks"] = r.summary.delay_attacks;
      rj["timely_rate"] = r.summary.timely_rate;
      rj["effective_energy_rate"] = r.summary.effective_energy_rate;
    }
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

AggregateReport read_report_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    f >> j;
    AggregateReport report;
    report.plan = j.at("plan").get<std::string>();
    for (const auto& gj : j.at("groups")) {
      GroupReport g;
      g.scenario = gj.at("scenario").get<std::string>();
      g.mode = parse_mode(gj.at("mode").get<std::string>());
      g.malicious_fraction = gj.at("malicious_fraction").get<double>();
      g.width = gj.at("width").get<double>();
      g.height = gj.at("height").get<double>();
      g.node_count = gj.at("node_count").get<int>();
      g.benign_count = gj.at("benign_count").get<int>();
      g.completed = gj.at("completed").get<int>();
      g.failed = gj.at("failed").get<int>();
      g.lifetime = stat_from(gj.at("lifetime"));
      g.throughput = stat_from(gj.at("throughput"));
      g.drop_attacks = stat_from(gj.at("drop_attacks"));
      g.delay_attacks = stat_from(gj.at("delay_attacks"));
      g.total_attacks = stat_from(gj.at("total_attacks"));
      g.timely_rate = stat_from(gj.at("timely_rate"));
      g.effective_energy_rate = stat_from(gj.at("effective_energy_rate"));
      for (const auto& cj : gj.at("malicious_clusters_per_cycle")) g.cycles.push_back(stat_from(cj));
      report.groups.push_back(std::move(g));
    }
    for (const auto& rj : j.at("runs")) {
      RunOutcome r;
      r.scenario = rj.at("scenario").get<std::string>();
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.ok = rj.at("ok").get<bool>();
      if (!r.ok) {
        r.error = rj.value("error", "");
      } else {
        r.rounds_csv = rj.at("rounds_csv").get<std::string>();
        r.summary_json = rj.at("summary_json").get<std::string>();
        r.summary.rounds = rj.at("rounds").get<Round>();
        r.summary.lifetime = rj.at("lifetime").get<Round>();
        r.summary.throughput = rj.at("throughput").get<long long>();
        r.summary.drop_attacks = rj.at("drop_attacks").get<long long>();
        r.summary.delay_attacks = rj.at("delay_attacks").get<long long>();
        r.summary.timely_rate = rj.at("timely_rate").get<double>();
        r.summary.effective_energy_rate = rj.at("effective_energy_rate").get<double>();
      }
      report.runs.push_back(std::move(r));
    }
    return report;
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(path.string() + ": malformed report: " + err.what());
  } catch (const ConfigError& err) {
    throw std::runtime_error(path.string() + ": malformed report: " + err.what());
  }
}

std::vector<std::string> plot_file_names() {
  return {"malicious_clusters_vs_cycle.csv", "drop_attacks_vs_malicious_fraction.csv",
          "delay_attacks_vs_malicious_fraction.csv", "lifetime.csv", "throughput.csv",
          "timely_rate.csv", "effective_energy_rate.csv", "size_density_grid.csv"};
}

namespace {

constexpr const char* kKeyColumns = "scenario,mode,malicious_fraction,width,height,node_count";

void key_cells(std::ostream& f, const GroupReport& g) {
  f << g.scenario << ',' << to_string(g.mode) << ',' << fmt_double(g.malicious_fraction) << ','
    << fmt_double(g.width) << ',' << fmt_double(g.height) << ',' << g.node_count;
}

void stat_cells(std::ostream& f, const Stat& s) {
  f << ',' << fmt_double(s.mean) << ',' << fmt_double(s.stddev) << ',' << s.n;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const AggregateReport& report,
                                              const std::filesystem::path& dir) {
  const auto names = plot_file_names();
  std::vector<std::filesystem::path> written;

  auto per_group = [&](const std::string& name, Stat GroupReport::*field) {
    const auto path = dir / name;
    auto f = open_out(path);
    f << kKeyColumns << ",mean,std,n\n";
    for (const auto& g : report.groups) {
      key_cells(f, g);
      stat_cells(f, g.*field);
      f << '\n';
    }
    written.push_back(path);
  };

  {
    const auto path = dir / names[0];
    auto f = open_out(path);
    f << kKeyColumns << ",cycle,mean,std,n\n";
    for (const auto& g : report.groups) {
      for (std::size_t i = 0; i < g.cycles.size(); ++i) {
        key_cells(f, g);
        f << ',' << i;
        stat_cells(f, g.cycles[i]);
        f << '\n';
      }
    }
    written.push_back(path);
  }
  per_group(names[1], &GroupReport::drop_attacks);
  per_group(names[2], &GroupReport::delay_attacks);
  per_group(names[3], &GroupReport::lifetime);
  per_group(names[4], &GroupReport::throughput);
  per_group(names[5], &GroupReport::timely_rate);
  per_group(names[6], &GroupReport::effective_energy_rate);
  {
    const auto path = dir / names[7];
    auto f = open_out(path);
    f << kKeyColumns
      << ",density_per_m2,lifetime_mean,throughput_mean,total_attacks_mean,timely_rate_mean,"
         "effective_energy_rate_mean,n\n";
    for (const auto& g : report.groups) {
      key_cells(f, g);
      f << ',' << fmt_double(g.node_count / (g.width * g.height)) << ','
        << fmt_double(g.lifetime.mean) << ',' << fmt_double(g.throughput.mean) << ','
        << fmt_double(g.total_attacks.mean) << ',' << fmt_double(g.timely_rate.mean) << ','
        << fmt_double(g.effective_energy_rate.mean) << ',' << g.completed << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace wsn
