#include "lcns/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "lcns/control.hpp"
#include "lcns/counterexamples.hpp"
#include "lcns/errors.hpp"
#include "lcns/evolution.hpp"
#include "lcns/fields.hpp"
#include "lcns/observability.hpp"
#include "lcns/oracle.hpp"
#include "lcns/spectrum.hpp"

namespace lcns::cli {

using io::Json;
namespace fs = std::filesystem;

namespace {

KnobSpec knob_int(std::string name, std::optional<std::string> def, double lo, double hi) {
  return {std::move(name), KnobType::Int, std::move(def), lo, hi, false, {}};
}
KnobSpec knob_real(std::string name, std::optional<std::string> def, double lo, double hi, bool lo_open = false) {
  return {std::move(name), KnobType::Real, std::move(def), lo, hi, lo_open, {}};
}
KnobSpec knob_text(std::string name, std::string def, std::vector<std::string> choices) {
  return {std::move(name), KnobType::Text, std::move(def), 0, 0, false, std::move(choices)};
}
KnobSpec knob_list(std::string name, std::string def, double lo, double hi) {
  return {std::move(name), KnobType::IntList, std::move(def), lo, hi, false, {}};
}
KnobSpec knob_bool(std::string name, std::string def) {
  return {std::move(name), KnobType::Bool, std::move(def), 0, 0, false, {}};
}

const std::vector<std::string> kChannels = {"density", "velocity", "temperature"};
const double kSeedMax = 9007199254740992.0;  // 2^53, exact in a double

struct CommandTable {
  std::string name;
  std::vector<KnobSpec> knobs;
};

const std::vector<CommandTable>& tables() {
  static const std::vector<CommandTable> t = {
      {"spectrum", {knob_int("N", "8", 1, 5000), knob_real("clustering_tol", "1e-8", 1e-14, 1e-2)}},
      {"closeness", {knob_int("N_start", "0", 0, 1e6), knob_int("N_end", "200", 1, 1e6)}},
      {"observe",
       {knob_real("T", std::nullopt, 0, 1e3, true), knob_int("N", "24", 1, 512), knob_text("channel", "density", kChannels),
        knob_int("seed", "0", 0, kSeedMax), knob_int("trials", "1", 1, 100000), knob_int("panels_per_period", "8", 4, 64),
        knob_real("decay", "0", 0, 10), knob_int("signal_points", "1001", 2, 1e6), knob_text("norm_orders", "", {})}},
      {"ingham",
       {knob_int("N", "100", 2, 5000), knob_real("T", "8", 0, 1e3, true), knob_int("biorthogonal_K", "10", 0, 200)}},
      {"synthesize",
       {knob_real("T", std::nullopt, 0, 1e3, true), knob_int("N", "8", 1, 64), knob_int("N_verify", "0", 0, 512),
        knob_text("channel", "density", kChannels), knob_int("seed", "0", 0, kSeedMax), knob_real("decay", "0", 0, 10),
        knob_real("svd_threshold", "1e-30", 1e-45, 1e-2), knob_int("points", "1001", 2, 1e6)}},
      {"witness-smalltime",
       {knob_real("T", std::nullopt, 0, 1e3, true), knob_list("N_list", "8,12,16,24", 1, 200),
        knob_int("seed", "0", 0, kSeedMax), knob_int("pieces", "3", 1, 16), knob_int("spline_order", "0", 0, 2000)}},
      {"witness-degenerate",
       {knob_text("channel", "density", kChannels), knob_int("N", "4", 1, 1000), knob_real("T", "1", 0, 1e3, true),
        knob_int("grid", "2001", 2, 1e7)}},
      {"witness-regularity",
       {knob_text("channel", "velocity", kChannels), knob_real("s", "0", 0, 0.999999), knob_list("n_list", "4,8,16,32", 1, 1e6),
        knob_real("T", "1", 0, 1e3, true)}},
      {"validate-fdm",
       {knob_real("T", "0.4", 0, 10, true), knob_int("N", "16", 0, 256), knob_int("M", "1024", 64, 1 << 20),
        knob_real("dt", "1e-4", 0, 1, true), knob_int("seed", "0", 0, kSeedMax), knob_real("decay", "2", 0, 10),
        knob_bool("convergence", "true"), knob_bool("trajectory", "false"), knob_int("record_every", "100", 1, 1e9)}},
  };
  return t;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Line of `key` inside `[section]`, or of the section header when key is empty; 0 when absent.
int find_line(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream is(text);
  std::string line, current;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return no;
      continue;
    }
    if (current != section) continue;
    const auto eq = t.find('=');
    if (eq != std::string::npos && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

[[noreturn]] void config_fail(const std::string& text, const std::string& section, const std::string& key,
                              const std::string& what) {
  const int line = find_line(text, section, key);
  const std::string where = key.empty() ? fmt::format("[{}]", section) : fmt::format("key '{}' in [{}]", key, section);
  if (line > 0) throw ConfigError(fmt::format("line {}: {}: {}", line, where, what));
  throw ConfigError(fmt::format("{}: {}", where, what));
}

double parse_number(const std::string& text, const std::string& section, const std::string& key,
                    const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    config_fail(text, section, key, fmt::format("'{}' is not a number", value));
  }
  if (used != value.size() || !std::isfinite(v)) config_fail(text, section, key, fmt::format("'{}' is not a finite number", value));
  return v;
}

long long parse_integer(const std::string& text, const std::string& section, const std::string& key,
                        const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    config_fail(text, section, key, fmt::format("'{}' is not an integer", value));
  }
  if (used != value.size()) config_fail(text, section, key, fmt::format("'{}' is not an integer", value));
  return v;
}

void check_range(const std::string& text, const KnobSpec& k, double v) {
  const bool low_ok = k.lo_open ? v > k.lo : v >= k.lo;
  if (!low_ok || v > k.hi)
    config_fail(text, "command", k.name,
                fmt::format("value {} outside {}{}, {}]", v, k.lo_open ? "(" : "[", k.lo, k.hi));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

// Canonical text form of one knob value after validation.
std::string canonical(const std::string& text, const KnobSpec& k, const std::string& raw) {
  switch (k.type) {
    case KnobType::Int: {
      const long long v = parse_integer(text, "command", k.name, raw);
      check_range(text, k, static_cast<double>(v));
      return std::to_string(v);
    }
    case KnobType::Real: {
      const double v = parse_number(text, "command", k.name, raw);
      check_range(text, k, v);
      return io::fmt17(v);
    }
    case KnobType::Text:
      if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), raw) == k.choices.end())
        config_fail(text, "command", k.name, fmt::format("'{}' is not one of {}", raw, fmt::join(k.choices, ", ")));
      return raw;
    case KnobType::IntList: {
      std::vector<std::string> parts;
      for (const auto& s : split_list(raw)) {
        const long long v = parse_integer(text, "command", k.name, s);
        check_range(text, k, static_cast<double>(v));
        parts.push_back(std::to_string(v));
      }
      if (parts.empty()) config_fail(text, "command", k.name, "empty list");
      return fmt::format("{}", fmt::join(parts, ","));
    }
    case KnobType::Bool:
      if (raw == "true" || raw == "1" || raw == "yes") return "true";
      if (raw == "false" || raw == "0" || raw == "no") return "false";
      config_fail(text, "command", k.name, fmt::format("'{}' is not a boolean", raw));
  }
  return raw;
}

SystemParams parse_params(const std::string& text, const std::string& system, const boost::property_tree::ptree& sec) {
  std::vector<std::string> allowed;
  std::vector<std::vector<std::string>> alternatives;
  if (system == "barotropic") {
    alternatives = {{"rho_bar", "u_bar", "mu0", "b"}, {"rho_bar", "u_bar", "a", "gamma", "lambda", "mu"}};
  } else {
    alternatives = {{"rho_bar", "u_bar", "theta_bar", "lambda0", "kappa0", "R", "c0"}};
  }
  std::map<std::string, double> vals;
  for (const auto& [key, node] : sec) {
    bool known = false;
    for (const auto& alt : alternatives) known = known || std::find(alt.begin(), alt.end(), key) != alt.end();
    if (!known) config_fail(text, "params", key, fmt::format("unknown parameter for the {} system", system));
    vals[key] = parse_number(text, "params", key, trim(node.get_value<std::string>()));
  }
  // Pick the alternative that shares the most keys, then require all of them and nothing else.
  const std::vector<std::string>* pick = &alternatives.front();
  std::size_t best = 0;
  for (const auto& alt : alternatives) {
    std::size_t hits = 0;
    for (const auto& k : alt) hits += vals.count(k);
    if (hits > best) {
      best = hits;
      pick = &alt;
    }
  }
  for (const auto& k : *pick)
    if (!vals.count(k)) config_fail(text, "params", "", fmt::format("missing key '{}'", k));
  for (const auto& [k, v] : vals)
    if (std::find(pick->begin(), pick->end(), k) == pick->end())
      config_fail(text, "params", k, fmt::format("cannot be combined with '{}'", fmt::join(*pick, ", ")));
  try {
    if (system == "barotropic") {
      if (vals.count("mu0")) return make_barotropic(vals["rho_bar"], vals["u_bar"], vals["mu0"], vals["b"]);
      return derive_barotropic(vals["rho_bar"], vals["u_bar"], vals["a"], vals["gamma"], vals["lambda"], vals["mu"]);
    }
    return make_nonbarotropic(vals["rho_bar"], vals["u_bar"], vals["theta_bar"], vals["lambda0"], vals["kappa0"],
                              vals["R"], vals["c0"]);
  } catch (const DomainError& e) {
    config_fail(text, "params", "", e.what());
  }
}

Json hypothesis_json(const HypothesisCheck& h) {
  Json j;
  j["name"] = h.name;
  j["pass"] = h.pass;
  j["value"] = h.value;
  j["witness_a"] = h.witness_a;
  j["witness_b"] = h.witness_b;
  j["note"] = h.note;
  return j;
}

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

// Files written by one run, in write order, with their hashes.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& bytes) {
    io::write_file(dir_ / name, bytes);
    entries_.push_back({name, io::sha256_hex(bytes), bytes.size()});
  }
  void add_json(const std::string& name, const Json& j) { add(name, io::dump_json(j) + "\n"); }

  Json manifest_entries() const {
    Json a = Json::array();
    for (const auto& e : entries_) {
      Json j;
      j["file"] = e.name;
      j["sha256"] = e.sha;
      j["bytes"] = e.bytes;
      a.push_back(j);
    }
    return a;
  }
  std::vector<std::string> names() const {
    std::vector<std::string> v;
    for (const auto& e : entries_) v.push_back(e.name);
    return v;
  }

 private:
  struct Entry {
    std::string name, sha;
    std::size_t bytes;
  };
  fs::path dir_;
  std::vector<Entry> entries_;
};

struct Context {
  RunConfig& cfg;
  Artifacts& art;
  int threads = 1;
  bool verify = false;
  std::vector<Check> checks;
  Json summary;  // echoed to stdout and folded into the manifest
};

Channel channel_knob(const RunConfig& cfg) { return channel_from_string(cfg.get("channel")); }

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

// ---- commands ----

void cmd_spectrum(Context& ctx) {
  const auto& p = ctx.cfg.params;
  const int N = static_cast<int>(ctx.cfg.integer("N"));
  const SpectrumSlice slice = build_slice(p, N, ctx.cfg.real("clustering_tol"));
  std::string csv = "n,branch,re,im,alg_mult,residual\n";
  double max_res = 0.0, max_re = -INFINITY, max_trace = 0.0;
  for (const auto& ms : slice.modes) {
    cplx sum = 0.0;
    for (const auto& e : ms.pairs) {
      csv += fmt::format("{},{},{},{},{},{}\n", ms.n, branch_tag(e.branch), io::fmt17(e.value.real()),
                         io::fmt17(e.value.imag()), e.alg_mult, io::fmt17(e.residual));
      max_res = std::max(max_res, e.residual);
      max_re = std::max(max_re, e.value.real());
      sum += e.value;
    }
    const CMat m = mode_matrix(p, ms.n).entries;
    max_trace = std::max(max_trace, std::abs(sum - m.trace()) / std::max(1.0, m.norm()));
  }
  ctx.art.add("spectrum.csv", csv);

  Json deg;
  if (is_barotropic(p)) {
    const auto r = check_degeneracy_barotropic(barotropic(p));
    deg["n0"] = r.n0;
    deg["n0_natural"] = r.n0_natural;
    deg["n1"] = r.n1 ? Json(*r.n1) : Json(nullptr);
    deg["n1_natural"] = r.n1_natural;
    deg["verdict"] = to_string(r.verdict);
  } else {
    const auto& q = nonbarotropic(p);
    const auto s = check_s_membership(q.lambda0, q.kappa0);
    deg["ratio"] = s.ratio;
    deg["in_s"] = s.in_s();
    deg["rational_hit"] = s.rational_hit ? Json::array({s.rational_hit->first, s.rational_hit->second}) : Json(nullptr);
    deg["fitted_M"] = s.fitted_M;
    deg["strict_M"] = s.strict_M;
  }
  Json co = Json::array();
  for (const auto& c : slice.coincidences) {
    Json j;
    j["n1"] = c.n1;
    j["b1"] = branch_tag(c.b1);
    j["n2"] = c.n2;
    j["b2"] = branch_tag(c.b2);
    j["value"] = io::to_json(c.value);
    j["distance"] = c.distance;
    co.push_back(j);
  }
  Json rep;
  rep["N"] = N;
  rep["degeneracy"] = deg;
  rep["coincidences"] = co;
  rep["unclassified"] = slice.equal_diffusivities;
  rep["max_residual"] = max_res;
  ctx.art.add_json("spectrum.json", rep);
  ctx.summary = rep;
  ctx.summary.erase("coincidences");
  if (ctx.verify) {
    ctx.checks.push_back({"eigen_residual", max_res <= 1e-10, max_res, 1e-10});
    ctx.checks.push_back({"negative_real_part", max_re < 0.0, max_re, 0.0});
    ctx.checks.push_back({"trace_consistency", max_trace <= 1e-10, max_trace, 1e-10});
  }
}

void cmd_closeness(Context& ctx) {
  const auto& p = ctx.cfg.params;
  int start = static_cast<int>(ctx.cfg.integer("N_start"));
  if (start == 0) {
    start = riesz_threshold(p);
    ctx.cfg.set("N_start", std::to_string(start));
  }
  const int end = static_cast<int>(ctx.cfg.integer("N_end"));
  const auto pts = riesz_closeness(p, start, end);
  std::string csv = "N,S,increment\n";
  for (const auto& c : pts) csv += fmt::format("{},{},{}\n", c.N, io::fmt17(c.S), io::fmt17(c.increment));
  ctx.art.add("closeness.csv", csv);
  // C of the increment ≤ C/n² fit.
  double C = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    C = std::max(C, static_cast<double>(pts[i].N) * pts[i].N * pts[i].increment);
    if (i > 0 && pts[i].S < pts[i - 1].S) monotone = false;
  }
  ctx.summary["N_start"] = start;
  ctx.summary["N_end"] = end;
  ctx.summary["S_final"] = pts.empty() ? 0.0 : pts.back().S;
  ctx.summary["fit_C"] = C;
  if (ctx.verify) {
    double worst_late = 0.0, worst_early = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = static_cast<double>(pts[i].N) * pts[i].N * pts[i].increment;
      (2 * i >= pts.size() ? worst_late : worst_early) = std::max(2 * i >= pts.size() ? worst_late : worst_early, v);
    }
    ctx.checks.push_back({"partial_sums_nondecreasing", monotone, 0.0, 0.0});
    const double ratio = worst_early > 0 ? worst_late / worst_early : 0.0;
    ctx.checks.push_back({"increment_n2_bounded", ratio <= 2.0, ratio, 2.0});
  }
}

void cmd_observe(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const double T = cfg.real("T");
  const int N = static_cast<int>(cfg.integer("N"));
  const Channel c = channel_knob(cfg);
  check_channel(c, dim(p));
  const int trials = static_cast<int>(cfg.integer("trials"));
  const int ppp = static_cast<int>(cfg.integer("panels_per_period"));
  const double decay = cfg.real("decay");
  NormSpec norm = channel_norm(p, c);
  if (!cfg.get("norm_orders").empty()) {
    std::vector<double> orders;
    for (const auto& s : split_list(cfg.get("norm_orders"))) orders.push_back(parse_number(cfg.text, "command", "norm_orders", s));
    if (static_cast<int>(orders.size()) != dim(p))
      config_fail(cfg.text, "command", "norm_orders", fmt::format("needs {} entries", dim(p)));
    norm = NormSpec::with_orders(p, orders);
    norm.nonstandard = true;
  }
  const SpectrumSlice slice = build_slice(p, N);
  std::vector<ObservabilityReport> reps(static_cast<std::size_t>(trials));
  std::vector<SpectralField> fields(static_cast<std::size_t>(trials));
  io::parallel_for(trials, ctx.threads, [&](int i) {
    auto rng = trial_rng(cfg.seed(), static_cast<std::uint64_t>(i));
    fields[static_cast<std::size_t>(i)] = random_field(dim(p), N, rng, decay);
    reps[static_cast<std::size_t>(i)] = observability_quotient(fields[static_cast<std::size_t>(i)], c, T, norm, slice, ppp);
  });
  std::size_t worst = 0;
  for (std::size_t i = 1; i < reps.size(); ++i)
    if (reps[i].quotient < reps[worst].quotient) worst = i;
  const auto& r = reps[worst];
  const auto audit = ingham_audit(slice, T);

  Json hyp;
  for (const auto* h : {&audit.H1, &audit.H2, &audit.P1, &audit.P2, &audit.P3, &audit.P4, &audit.disjoint})
    hyp[h->name] = h->pass;
  hyp["standard_pass"] = audit.standard_pass();
  hyp["relaxed_pass"] = audit.relaxed_pass();
  hyp["time_above_critical"] = audit.time_above_critical;
  hyp["below_critical_time"] = r.below_critical_time;
  hyp["nonstandard_norm"] = r.nonstandard_norm;
  hyp["quadrature_flagged"] = r.flagged;

  std::vector<double> qs;
  for (const auto& x : reps) qs.push_back(x.quotient);
  std::vector<double> sorted = qs;
  std::sort(sorted.begin(), sorted.end());

  Json rep;
  rep["channel"] = to_string(c);
  rep["T"] = T;
  rep["N"] = N;
  rep["energy"] = r.energy;
  rep["energy_err"] = r.energy_err;
  rep["norm"] = r.norm;
  rep["quotient"] = r.quotient;
  rep["hypotheses"] = hyp;
  rep["seed"] = cfg.seed();
  rep["trials"] = trials;
  rep["min_trial"] = worst;
  rep["median_quotient"] = sorted[sorted.size() / 2];
  rep["max_quotient"] = sorted.back();
  rep["quotients"] = qs;
  ctx.art.add_json("report.json", rep);

  const auto e = expand_in_eigenbasis(fields[worst], slice);
  const auto y = observation_signal(e, slice, c, T);
  std::ostringstream sig;
  write_signal_csv(sig, y, static_cast<int>(cfg.integer("signal_points")));
  ctx.art.add("signal.csv", sig.str());

  ctx.summary["min_quotient"] = r.quotient;
  ctx.summary["min_trial"] = worst;
  if (ctx.verify) {
    ctx.checks.push_back({"quotients_positive", sorted.front() > 0.0, sorted.front(), 0.0});
    double worst_err = 0.0;
    for (const auto& x : reps) worst_err = std::max(worst_err, x.energy_err / std::max(x.energy, 1e-300));
    ctx.checks.push_back({"quadrature_error_relative", worst_err <= 1e-3, worst_err, 1e-3});
    const double closed = closed_form_energy(y);
    const double dev = std::abs(closed - r.energy) / std::max(closed, 1e-300);
    ctx.checks.push_back({"closed_form_vs_quadrature", dev <= 1e-8, dev, 1e-8});
  }
}

void cmd_ingham(Context& ctx) {
  const auto& p = ctx.cfg.params;
  const int N = static_cast<int>(ctx.cfg.integer("N"));
  const double T = ctx.cfg.real("T");
  const SpectrumSlice slice = build_slice(p, N);
  const auto a = ingham_audit(slice, T);
  Json rep;
  rep["N"] = a.N;
  rep["T"] = a.T;
  rep["tail_start"] = a.tail_start;
  rep["beta"] = Json::array({a.beta_re, a.beta_im});
  rep["tau"] = a.tau;
  rep["r"] = a.r;
  rep["gap_half_window"] = a.gap_half_window;
  rep["eps"] = a.eps;
  rep["A0"] = a.A0;
  rep["B0"] = a.B0;
  rep["time_above_critical"] = a.time_above_critical;
  rep["standard_pass"] = a.standard_pass();
  rep["relaxed_pass"] = a.relaxed_pass();
  Json checks = Json::array();
  for (const auto* h : {&a.H1, &a.H2, &a.P1, &a.P2, &a.P3, &a.P4, &a.disjoint}) checks.push_back(hypothesis_json(*h));
  rep["checks"] = checks;
  Json relaxed = Json::array();
  for (const auto* h : {&a.relaxed_sector, &a.relaxed_gap, &a.relaxed_summable}) relaxed.push_back(hypothesis_json(*h));
  rep["relaxed"] = relaxed;
  Json cross = Json::array();
  for (const auto& h : a.cross_branch) cross.push_back(hypothesis_json(h));
  rep["cross_branch"] = cross;
  rep["residual_partial_sums"] = a.residual_partial_sums;
  rep["inverse_modulus_partial_sums"] = a.inverse_modulus_partial_sums;

  const int K = static_cast<int>(std::min<long long>(ctx.cfg.integer("biorthogonal_K"), N));
  if (K > 0) {
    std::vector<cplx> rates;
    for (int n = 1; n <= K; ++n)
      for (int sg : {-1, 1})
        for (const auto& e : slice.mode(sg * n).pairs)
          if (e.branch != Branch::Hyperbolic) rates.push_back(e.value);
    Json bio;
    bio["K"] = K;
    bio["family"] = "parabolic";
    try {
      const auto d = biorthogonal_gram(rates, T);
      bio["rank"] = d.rank;
      bio["size"] = static_cast<int>(rates.size());
      bio["condition"] = d.condition;
      bio["singular_values"] = d.singular_values;
      bio["coefficient_bounds"] = d.coefficient_bounds;
    } catch (const DomainError& e) {
      if (e.kind() != "DuplicateRate") throw;
      bio["error"] = e.what();
    }
    rep["biorthogonal"] = bio;
  }
  ctx.art.add_json("report.json", rep);
  ctx.summary["standard_pass"] = a.standard_pass();
  ctx.summary["relaxed_pass"] = a.relaxed_pass();
  ctx.summary["beta"] = Json::array({a.beta_re, a.beta_im});
  ctx.summary["tau"] = a.tau;
  if (ctx.verify) {
    bool mono = std::is_sorted(a.residual_partial_sums.begin(), a.residual_partial_sums.end()) &&
                std::is_sorted(a.inverse_modulus_partial_sums.begin(), a.inverse_modulus_partial_sums.end());
    ctx.checks.push_back({"partial_sums_nondecreasing", mono, 0.0, 0.0});
    const auto again = ingham_audit(slice, T);
    const bool same = again.standard_pass() == a.standard_pass() && again.tau == a.tau && again.beta_re == a.beta_re;
    ctx.checks.push_back({"audit_reproducible", same, 0.0, 0.0});
  }
}

void cmd_synthesize(Context& ctx) {
  auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const double T = cfg.real("T");
  const int N = static_cast<int>(cfg.integer("N"));
  int Nv = static_cast<int>(cfg.integer("N_verify"));
  if (Nv == 0) {
    Nv = 2 * N;
    cfg.set("N_verify", std::to_string(Nv));
  }
  if (Nv < N) config_fail(cfg.text, "command", "N_verify", "must be at least N");
  const Channel c = channel_knob(cfg);
  check_channel(c, dim(p));
  auto rng = trial_rng(cfg.seed(), 0);
  const SpectralField U0 = random_field(dim(p), N, rng, cfg.real("decay"), true);
  const SpectrumSlice slice = build_slice(p, Nv);
  const MomentSystem sys = build_moment_system(U0, c, T, slice, N);
  const ControlSolution u = synthesize_control(sys, cfg.real("svd_threshold"));
  const VerificationRecord v = verify_terminal(U0, u, sys, slice, Nv);

  std::ostringstream csv;
  write_control_csv(csv, u, static_cast<int>(cfg.integer("points")));
  ctx.art.add("control.csv", csv.str());
  std::ostringstream field;
  write_field_csv(field, U0);
  ctx.art.add("initial.csv", field.str());

  Json j;
  j["in_trunc_residual"] = v.in_trunc_residual;
  j["spillover"] = v.spillover;
  j["control_norm"] = v.control_norm;
  j["rank"] = v.rank;
  j["discarded_svals"] = v.discarded_svals;
  j["moment_residual"] = u.residual;
  j["in_trunc_absolute"] = v.in_trunc_absolute;
  j["spillover_absolute"] = v.spillover_absolute;
  j["svd_threshold"] = u.svd_threshold;
  j["rows"] = static_cast<int>(sys.rows.size());
  j["below_critical_time"] = sys.below_critical_time;
  j["rank_deficiency_flag"] = sys.rank_deficiency_flag;
  Json prop = Json::array();
  for (const auto& [a, b] : sys.proportional_rows) prop.push_back(Json::array({a, b}));
  j["proportional_rows"] = prop;
  j["singular_values"] = u.singular_values;
  Json modes = Json::array();
  for (const auto& m : v.modes) {
    Json x;
    x["n"] = m.n;
    x["projected_norm"] = m.projected_norm;
    x["free_norm"] = m.free_norm;
    modes.push_back(x);
  }
  j["modes"] = modes;
  ctx.art.add_json("verification.json", j);
  ctx.summary["moment_residual"] = u.residual;
  ctx.summary["in_trunc_residual"] = v.in_trunc_residual;
  ctx.summary["control_norm"] = v.control_norm;
  if (ctx.verify) {
    ctx.checks.push_back({"moment_residual", u.residual <= 1e-8, u.residual, 1e-8});
    ctx.checks.push_back({"in_trunc_residual", v.in_trunc_residual <= 1e-6, v.in_trunc_residual, 1e-6});
    double worst = 0.0, scale = 0.0;
    for (const auto& r : sys.rows) scale = std::max(scale, std::abs(r.target));
    for (const auto& r : sys.rows) worst = std::max(worst, std::abs(control_moment(u, r.kernel) - r.target));
    const double rel = scale > 0 ? worst / scale : worst;
    ctx.checks.push_back({"moment_roundtrip", rel <= 1e-8, rel, 1e-8});
  }
}

Json smalltime_json(const SystemParams& p, const SmallTimeWitnessReport& r) {
  Json j;
  j["type"] = "small-time";
  j["params"] = params_json(p);
  j["channel"] = to_string(r.channel);
  Json table = Json::array();
  for (const auto& row : r.rows) {
    Json x;
    x["N"] = row.N;
    x["quotient"] = row.quotient;
    x["energy"] = row.energy;
    x["norm"] = row.norm;
    x["energy_err"] = row.energy_err;
    x["transport_gap"] = row.transport_gap;
    table.push_back(x);
  }
  j["table"] = table;
  j["slope"] = r.slope;
  j["seed"] = r.seed;
  j["T"] = r.T;
  j["transport_slope"] = r.transport_slope;
  j["transport_C"] = r.transport_C;
  j["support"] = Json::array({r.x_left, r.x_right});
  j["spline_order"] = r.spline_order;
  j["cutoff"] = r.cutoff;
  j["tail"] = r.tail;
  Json pieces = Json::array();
  for (const auto& b : r.pieces) pieces.push_back(Json::array({b.centre, b.width, b.amplitude}));
  j["pieces"] = pieces;
  return j;
}

void cmd_smalltime(Context& ctx) {
  const auto& cfg = ctx.cfg;
  BumpSpec bump;
  bump.seed = cfg.seed();
  bump.pieces = static_cast<int>(cfg.integer("pieces"));
  bump.spline_order = static_cast<int>(cfg.integer("spline_order"));
  const auto r = small_time_witness(cfg.params, cfg.real("T"), cfg.int_list("N_list"), bump);
  ctx.art.add_json("witness.json", smalltime_json(cfg.params, r));
  ctx.summary["slope"] = r.slope;
  ctx.summary["tail"] = r.tail;
  if (ctx.verify) {
    double worst = 0.0, qmin = INFINITY;
    for (const auto& row : r.rows) {
      worst = std::max(worst, row.energy_err / std::max(row.energy, 1e-300));
      qmin = std::min(qmin, row.quotient);
    }
    ctx.checks.push_back({"quotients_positive", qmin > 0.0, qmin, 0.0});
    ctx.checks.push_back({"quadrature_error_relative", worst <= 1e-3, worst, 1e-3});
    ctx.checks.push_back({"bump_truncation_tail", r.tail <= 1e-12, r.tail, 1e-12});
  }
}

void cmd_degenerate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const Channel c = channel_knob(cfg);
  const SpectrumSlice slice = build_slice(p, static_cast<int>(cfg.integer("N")));
  const auto w = degenerate_uc_witness(p, c, slice, cfg.real("T"), static_cast<int>(cfg.integer("grid")));
  Json j;
  j["type"] = "degenerate";
  j["params"] = params_json(p);
  j["channel"] = to_string(c);
  Json row;
  row["n_plus"] = w.n_plus;
  row["branch_plus"] = branch_tag(w.b_plus);
  row["n_minus"] = w.n_minus;
  row["branch_minus"] = branch_tag(w.b_minus);
  row["value"] = io::to_json(w.value);
  row["C"] = io::to_json(w.C);
  row["D"] = io::to_json(w.D);
  row["max_abs_y"] = w.max_abs_y;
  row["scale"] = w.scale;
  row["state_norm_t0"] = w.state_norm_t0;
  row["min_state_norm"] = w.min_state_norm;
  j["table"] = Json::array({row});
  j["slope"] = nullptr;
  j["seed"] = 0;
  j["T"] = w.T;
  j["sound"] = w.sound();
  ctx.art.add_json("witness.json", j);
  std::ostringstream f;
  write_field_csv(f, w.terminal);
  ctx.art.add("terminal.csv", f.str());
  ctx.summary["sound"] = w.sound();
  ctx.summary["max_abs_y"] = w.max_abs_y;
  if (ctx.verify) {
    ctx.checks.push_back({"observation_vanishes", w.max_abs_y <= 1e-9 * w.scale, w.max_abs_y, 1e-9 * w.scale});
    const double cd = std::abs(w.C) + std::abs(w.D);
    ctx.checks.push_back({"state_bounded_below", w.state_norm_t0 > 1e-3 * cd, w.state_norm_t0, 1e-3 * cd});
  }
}

void cmd_regularity(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto r = regularity_gap_witness(cfg.params, channel_knob(cfg), cfg.real("s"), cfg.int_list("n_list"), cfg.real("T"));
  Json j;
  j["type"] = "regularity";
  j["params"] = params_json(cfg.params);
  j["channel"] = to_string(r.channel);
  Json table = Json::array();
  for (const auto& row : r.rows) {
    Json x;
    x["N"] = row.n;
    x["quotient"] = row.quotient;
    x["energy"] = row.energy;
    x["norm"] = row.norm;
    x["scaled"] = row.scaled;
    table.push_back(x);
  }
  j["table"] = table;
  j["slope"] = r.slope;
  j["seed"] = 0;
  j["s"] = r.s;
  j["T"] = r.T;
  j["expected_slope"] = r.expected_slope;
  j["scaled_spread"] = r.scaled_spread;
  j["quotient_decreasing"] = r.quotient_decreasing;
  ctx.art.add_json("witness.json", j);
  ctx.summary["slope"] = r.slope;
  ctx.summary["expected_slope"] = r.expected_slope;
  if (ctx.verify) ctx.checks.push_back({"quotient_decreasing", r.quotient_decreasing, 0.0, 0.0});
}

void cmd_fdm(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const double T = cfg.real("T"), dt = cfg.real("dt");
  const int M = static_cast<int>(cfg.integer("M"));
  auto rng = trial_rng(cfg.seed(), 0);
  const SpectralField init = random_field(dim(p), static_cast<int>(cfg.integer("N")), rng, cfg.real("decay"), true);
  const auto cmp = compare_spectral_fdm(p, init, T, M, dt);
  Json j;
  j["type"] = "fdm-oracle";
  j["label"] = "homogeneous";
  j["params"] = params_json(p);
  j["N"] = init.N;
  j["M"] = M;
  j["dt"] = dt;
  j["T"] = T;
  j["seed"] = cfg.seed();
  Json cps = Json::array();
  for (std::size_t k = 0; k < cmp.times.size(); ++k) {
    Json x;
    x["t"] = cmp.times[k];
    x["rel_error"] = cmp.rel_errors[k];
    cps.push_back(x);
  }
  j["checkpoints"] = cps;
  j["max_mass_drift"] = cmp.max_mass_drift;
  j["max_energy_increase"] = cmp.max_energy_increase;
  j["energy_non_increasing"] = cmp.energy_non_increasing;
  const double worst = *std::max_element(cmp.rel_errors.begin(), cmp.rel_errors.end());
  if (cfg.flag("convergence")) {
    const auto coarse = compare_spectral_fdm(p, init, T, M / 2, 2.0 * dt);
    const double cw = *std::max_element(coarse.rel_errors.begin(), coarse.rel_errors.end());
    j["coarse_max_error"] = cw;
    j["convergence_ratio"] = worst > 0 ? cw / worst : 0.0;
  }
  ctx.art.add_json("fdm.json", j);
  if (cfg.flag("trajectory")) {
    const auto res = fdm_evolve(p, sample_on_grid(init, M), T, dt, {}, std::nullopt,
                                static_cast<int>(cfg.integer("record_every")));
    std::ostringstream os;
    write_trajectory_csv(os, res.trajectory);
    ctx.art.add("trajectory.csv", os.str());
  }
  ctx.summary["max_rel_error"] = worst;
  ctx.summary["max_mass_drift"] = cmp.max_mass_drift;
  if (ctx.verify) {
    ctx.checks.push_back({"mass_conservation", cmp.max_mass_drift <= 1e-12, cmp.max_mass_drift, 1e-12});
    ctx.checks.push_back({"energy_non_increasing", cmp.energy_non_increasing, cmp.max_energy_increase, 1e-10});
  }
}

void dispatch(Context& ctx) {
  const std::string& c = ctx.cfg.command;
  if (c == "spectrum") return cmd_spectrum(ctx);
  if (c == "closeness") return cmd_closeness(ctx);
  if (c == "observe") return cmd_observe(ctx);
  if (c == "ingham") return cmd_ingham(ctx);
  if (c == "synthesize") return cmd_synthesize(ctx);
  if (c == "witness-smalltime") return cmd_smalltime(ctx);
  if (c == "witness-degenerate") return cmd_degenerate(ctx);
  if (c == "witness-regularity") return cmd_regularity(ctx);
  if (c == "validate-fdm") return cmd_fdm(ctx);
  throw ConfigError(fmt::format("unknown command '{}'", c));
}

Json knob_json(const KnobSpec& k, const std::string& v) {
  switch (k.type) {
    case KnobType::Int: return std::stoll(v);
    case KnobType::Real: return std::stod(v);
    case KnobType::Bool: return v == "true";
    case KnobType::IntList: {
      Json a = Json::array();
      for (const auto& s : split_list(v)) a.push_back(std::stoll(s));
      return a;
    }
    case KnobType::Text: break;
  }
  return v;
}

int exit_code_for(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::Config: return 1;
    case ErrorClass::Domain: return 2;
    case ErrorClass::Numerical: return 3;
  }
  return 3;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& t : tables()) v.push_back(t.name);
    return v;
  }();
  return names;
}

const std::vector<KnobSpec>& command_knobs(const std::string& command) {
  for (const auto& t : tables())
    if (t.name == command) return t.knobs;
  throw ConfigError(fmt::format("unknown command '{}'", command));
}

const std::string& RunConfig::get(const std::string& key) const {
  for (const auto& [k, v] : knobs)
    if (k == key) return v;
  throw ConfigError(fmt::format("command '{}' has no knob '{}'", command, key));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : knobs)
    if (k == key) {
      v = value;
      return;
    }
  throw ConfigError(fmt::format("command '{}' has no knob '{}'", command, key));
}

long long RunConfig::integer(const std::string& key) const { return std::stoll(get(key)); }
double RunConfig::real(const std::string& key) const { return std::stod(get(key)); }
bool RunConfig::flag(const std::string& key) const { return get(key) == "true"; }

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : split_list(get(key))) out.push_back(std::stoi(s));
  return out;
}

std::uint64_t RunConfig::seed() const {
  for (const auto& [k, v] : knobs)
    if (k == "seed") return std::stoull(v);
  return 0;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  // The INI reader only knows ';' comments; blank out '#' lines so line numbers stay aligned.
  std::string cleaned;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const std::string t = trim(line);
      cleaned += (!t.empty() && t[0] == '#') ? "" : line;
      cleaned += '\n';
    }
  }
  pt::ptree tree;
  try {
    std::istringstream is(cleaned);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }
  for (const auto& [name, sec] : tree) {
    if (name != "system" && name != "params" && name != "command" && name != "output")
      config_fail(text, name, "", "unknown section");
    if (sec.empty() && !sec.data().empty()) config_fail(text, name, "", "key outside any section");
  }
  for (const char* s : {"system", "params", "command"})
    if (!tree.get_child_optional(s)) throw ConfigError(fmt::format("missing section [{}]", s));

  RunConfig cfg;
  cfg.text = text;
  const auto& sys = tree.get_child("system");
  for (const auto& [k, v] : sys)
    if (k != "kind") config_fail(text, "system", k, "unknown key");
  const auto kind = sys.get_optional<std::string>("kind");
  if (!kind) config_fail(text, "system", "", "missing key 'kind'");
  cfg.system = trim(*kind);
  if (cfg.system != "barotropic" && cfg.system != "nonbarotropic")
    config_fail(text, "system", "kind", fmt::format("'{}' is not barotropic or nonbarotropic", cfg.system));
  cfg.params = parse_params(text, cfg.system, tree.get_child("params"));

  const auto& cmd = tree.get_child("command");
  const auto name = cmd.get_optional<std::string>("name");
  if (!name) config_fail(text, "command", "", "missing key 'name'");
  cfg.command = trim(*name);
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cfg.command) == names.end())
    config_fail(text, "command", "name", fmt::format("unknown command '{}'", cfg.command));
  const auto& specs = command_knobs(cfg.command);
  for (const auto& [k, v] : cmd) {
    if (k == "name") continue;
    if (std::none_of(specs.begin(), specs.end(), [&](const KnobSpec& s) { return s.name == k; }))
      config_fail(text, "command", k, fmt::format("unknown knob for '{}'", cfg.command));
  }
  for (const auto& s : specs) {
    const auto raw = cmd.get_optional<std::string>(s.name);
    if (!raw && !s.default_value)
      config_fail(text, "command", "", fmt::format("missing key '{}' required by '{}'", s.name, cfg.command));
    cfg.knobs.emplace_back(s.name, canonical(text, s, raw ? trim(*raw) : *s.default_value));
  }

  if (const auto out = tree.get_child_optional("output")) {
    for (const auto& [k, v] : *out)
      if (k != "dir") config_fail(text, "output", k, "unknown key");
    if (const auto d = out->get_optional<std::string>("dir")) cfg.out_dir = trim(*d);
  }
  return cfg;
}

Json params_json(const SystemParams& p) {
  Json j;
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    j["system"] = "barotropic";
    j["rho_bar"] = q.rho_bar;
    j["u_bar"] = q.u_bar;
    j["mu0"] = q.mu0;
    j["b"] = q.b;
    j["omega0"] = q.omega0;
  } else {
    const auto& q = nonbarotropic(p);
    j["system"] = "nonbarotropic";
    j["rho_bar"] = q.rho_bar;
    j["u_bar"] = q.u_bar;
    j["theta_bar"] = q.theta_bar;
    j["lambda0"] = q.lambda0;
    j["kappa0"] = q.kappa0;
    j["R"] = q.R;
    j["c0"] = q.c0;
    j["omega_bar"] = q.omega_bar;
  }
  return j;
}

RunResult run_config(const RunConfig& cfg_in, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  RunResult result;
  RunConfig cfg = cfg_in;
  try {
    const fs::path dir = opt.out_dir ? fs::path(*opt.out_dir) : fs::path(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
      throw ConfigError(fmt::format("cannot create output directory '{}'", dir.string()));
    Artifacts art(dir);
    Context ctx{cfg, art, std::max(1, opt.threads), opt.verify, {}, Json::object()};
    dispatch(ctx);

    bool verify_ok = true;
    if (opt.verify) {
      Json v;
      v["command"] = cfg.command;
      Json checks = Json::array();
      for (const auto& c : ctx.checks) {
        Json x;
        x["name"] = c.name;
        x["pass"] = c.pass;
        x["value"] = c.value;
        x["limit"] = c.limit;
        checks.push_back(x);
        verify_ok = verify_ok && c.pass;
      }
      v["pass"] = verify_ok;
      v["checks"] = checks;
      art.add_json("verify.json", v);
    }

    Json m;
    m["version"] = kVersion;
    m["command"] = cfg.command;
    m["config_sha256"] = io::sha256_hex(cfg.text);
    m["seed"] = cfg.seed();
    m["params"] = params_json(cfg.params);
    Json knobs;
    const auto& specs = command_knobs(cfg.command);
    for (std::size_t i = 0; i < specs.size(); ++i) knobs[specs[i].name] = knob_json(specs[i], cfg.knobs[i].second);
    m["knobs"] = knobs;
    m["verify"] = opt.verify;
    m["summary"] = ctx.summary;
    m["outputs"] = art.manifest_entries();
    art.add_json("manifest.json", m);

    result.files = art.names();
    out << fmt::format("{}: wrote {} files to {}\n", cfg.command, result.files.size(), dir.string());
    out << io::dump_json(ctx.summary) << "\n";
    if (!verify_ok) {
      for (const auto& c : ctx.checks)
        if (!c.pass) err << fmt::format("verify failed: {} = {} (limit {})\n", c.name, io::fmt17(c.value), io::fmt17(c.limit));
      result.exit_code = 3;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    result.exit_code = exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: ConfigError: " << e.what() << "\n";
    result.exit_code = 1;
  }
  return result;
}

RunResult run(const std::string& config_path, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(io::read_file(config_path));
    return run_config(cfg, opt, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return {exit_code_for(e), {}};
  }
}

int main(int argc, char** argv) {
  ::CLI::App app{"Linearized compressible Navier–Stokes controllability experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config;
  std::string out_dir;
  RunOptions opt;
  run_cmd->add_option("config", config, "INI config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  run_cmd->add_option("--threads", opt.threads, "Worker threads for independent sweep points")
      ->check(::CLI::Range(1, 256));
  run_cmd->add_flag("--verify", opt.verify, "Re-run invariant checks after the experiment; exit 3 if any fails");
  auto* list_cmd = app.add_subcommand("commands", "List experiment commands and their knobs");
  try {
    app.parse(argc, argv);
  } catch (const ::CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (list_cmd->parsed()) {
    for (const auto& name : command_names()) {
      std::cout << name << "\n";
      for (const auto& k : command_knobs(name))
        std::cout << fmt::format("  {} = {}\n", k.name, k.default_value ? *k.default_value : "(required)");
    }
    return 0;
  }
  if (!out_dir.empty()) opt.out_dir = out_dir;
  return run(config, opt, std::cout, std::cerr).exit_code;
}

}  // namespace lcns::cli
