// Copyright 2026 The amen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amen/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "amen/ergodic.hpp"
#include "amen/group.hpp"
#include "amen/process.hpp"
#include "amen/spectral.hpp"
#include "amen/tiling.hpp"

namespace amen {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- utilities

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size())
      throw std::runtime_error("csv: row " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                               " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }
  Csv& row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("csv row width");
    line(fields);
    return *this;
  }
  const std::string& text() const { return text_; }

 private:
  void line(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) text_ += (i ? "," : "") + csv_quote(fields[i]);
    text_ += "\n";
  }
  size_t width_;
  std::string text_;
};

std::string num(double x) { return format_number(x); }
std::string num(int64_t x) { return std::to_string(x); }
std::string num(size_t x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "1" : "0"; }

// ------------------------------------------------------------ config reader

// Reads one object level, records defaults, rejects unknown keys.
class Reader {
 public:
  Reader(const json& obj, std::string path, json& out, std::vector<std::string>& defaulted)
      : obj_(obj), path_(std::move(path)), out_(out), defaulted_(defaulted) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, double def, double lo, double hi, bool open_lo = false,
                bool open_hi = false) {
    double v = def;
    if (has(key)) {
      const auto& j = obj_.at(key);
      if (!j.is_number()) throw ConfigError(at(key), "expected a number");
      v = j.get<double>();
    } else {
      mark_default(key);
    }
    const bool below = open_lo ? !(v > lo) : !(v >= lo);
    const bool above = open_hi ? !(v < hi) : !(v <= hi);
    if (below || above)
      throw ConfigError(at(key), "value " + format_number(v) + " outside " + (open_lo ? "(" : "[") +
                                     format_number(lo) + ", " + format_number(hi) + (open_hi ? ")" : "]"));
    out_[key] = v;
    return v;
  }

  int64_t integer(const std::string& key, int64_t def, int64_t lo, int64_t hi) {
    int64_t v = def;
    if (has(key)) {
      const auto& j = obj_.at(key);
      if (!j.is_number_integer()) throw ConfigError(at(key), "expected an integer");
      v = j.get<int64_t>();
    } else {
      mark_default(key);
    }
    if (v < lo || v > hi)
      throw ConfigError(at(key), "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (has(key)) {
      if (!obj_.at(key).is_boolean()) throw ConfigError(at(key), "expected true or false");
      v = obj_.at(key).get<bool>();
    } else {
      mark_default(key);
    }
    out_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    std::string v = def;
    if (has(key)) {
      if (!obj_.at(key).is_string()) throw ConfigError(at(key), "expected a string");
      v = obj_.at(key).get<std::string>();
    } else {
      mark_default(key);
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(at(key), "'" + v + "' is not one of " + list);
    }
    out_[key] = v;
    return v;
  }

  std::vector<int64_t> integers(const std::string& key, std::vector<int64_t> def, int64_t lo, int64_t hi,
                                bool ascending = false) {
    std::vector<int64_t> v = std::move(def);
    if (has(key)) {
      const auto& j = obj_.at(key);
      if (!j.is_array() || j.empty()) throw ConfigError(at(key), "expected a nonempty list of integers");
      v.clear();
      for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
        v.push_back(j[i].get<int64_t>());
      }
    } else {
      mark_default(key);
    }
    for (size_t i = 0; i < v.size(); ++i) {
      if (v[i] < lo || v[i] > hi)
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]",
                          "value " + std::to_string(v[i]) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
      if (ascending && i > 0 && v[i] <= v[i - 1])
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "list must be strictly increasing");
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    std::vector<double> v = std::move(def);
    if (has(key)) {
      const auto& j = obj_.at(key);
      if (!j.is_array() || j.empty()) throw ConfigError(at(key), "expected a nonempty list of numbers");
      v.clear();
      for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        v.push_back(j[i].get<double>());
      }
    } else {
      mark_default(key);
    }
    out_[key] = v;
    return v;
  }

  // Nested object; missing means all defaults.
  Reader child(const std::string& key) {
    static const json kEmpty = json::object();
    if (!out_.contains(key)) out_[key] = json::object();
    const json& src = has(key) ? obj_.at(key) : kEmpty;
    if (!has(key)) mark_default(key);
    seen_.insert(key);
    return Reader(src, at(key), out_[key], defaulted_);
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k) && !out_.contains(k)) throw ConfigError(at(k), "unknown key");
  }

 private:
  void mark_default(const std::string& key) { defaulted_.push_back(at(key)); }
  const json& obj_;
  std::string path_;
  json& out_;
  std::vector<std::string>& defaulted_;
  std::set<std::string> seen_;
};

Group read_group(Reader& r, const std::vector<std::string>& families) {
  auto g = r.child("group");
  const auto fam = g.choice("family", "zd", families);
  Group out = Group::zd(1);
  if (fam == "zd") {
    out = Group::zd(static_cast<int>(g.integer("dim", 1, 1, 4)));
  } else if (fam == "heisenberg") {
    out = Group::heisenberg();
  } else {
    out = Group::lamplighter();
  }
  g.finish();
  return out;
}

StepNorm read_norm(Reader r, const std::string& def_mode) {
  const auto mode = r.choice("mode", def_mode, {"sup", "lp"});
  const double p = r.number("p", 2, 1, 1e6);
  const double lo = r.number("lo", -5, -1e6, 1e6);
  const double hi = r.number("hi", 5, -1e6, 1e6);
  r.finish();
  if (mode == "sup") return StepNorm::sup();
  if (!(lo < hi)) throw ConfigError(r.at("hi"), "interval needs lo < hi");
  return StepNorm::lp(p, lo, hi);
}

// ------------------------------------------------------------- experiments

struct Check {
  std::string name;
  bool pass = true;
  double measured = 0;
  double limit = 0;
  std::string detail;
};

struct Produced {
  std::vector<std::pair<std::string, std::string>> files;  // results.csv first
  std::vector<Check> checks;
  json diagnostics = json::object();
};

Produced run_tiling(const Group& g, const json& c) {
  const double eps = c["epsilon"], beta = c["beta"], zeta = c["zeta"];
  const auto params = tiling_params(eps, beta, zeta, c["strict"].get<bool>());
  const auto seq = folner_generator(g);
  std::vector<FiniteGroupSet> basis;
  for (int64_t n : c["basis"].get<std::vector<int64_t>>()) basis.push_back(seq(static_cast<int>(n)));
  if (static_cast<int>(basis.size()) != params.N)
    throw ConfigError("tiling.basis", "needs exactly N = " + std::to_string(params.N) + " Folner indices for epsilon " +
                                          format_number(eps));
  const auto target = seq(c["target"].get<int>());
  const auto q = quasi_tile(g, target, basis, params);
  const auto rep = verify_tiling(q);

  Produced out;
  Csv csv({"stage", "basis_size", "centers", "density", "eta", "deviation", "beta", "exhausted"});
  for (const auto& s : q.stages)
    csv.row({num(s.stage), num(basis[static_cast<size_t>(s.stage - 1)].size()),
             num(q.centers[static_cast<size_t>(s.stage - 1)].size()), num(s.density), num(s.target),
             num(std::abs(s.density - s.target)), num(beta), flag(s.exhausted)});
  out.files.push_back({"results.csv", csv.text()});
  out.files.push_back({"tiling.json", tiling_to_json(q) + "\n"});
  for (const auto& ch : rep.checks) out.checks.push_back({ch.name, ch.pass, ch.measured, ch.limit, ch.detail});
  out.diagnostics["covered"] = static_cast<double>(q.covered().size()) / static_cast<double>(target.size());
  out.diagnostics["warnings"] = q.warnings;
  out.diagnostics["precondition_ratio"] = q.precondition_ratio;
  return out;
}

OperatorEnsemble read_ensemble(const Group& g, const json& e) {
  if (g.family() != Family::kZd) throw ConfigError("group.family", "operator ensembles live on zd only");
  const std::string kernel = e["kernel"];
  OperatorEnsemble ens = kernel == "free" ? free_ensemble(g.dim())
                                          : anderson_ensemble(g.dim(), e["lo"].get<double>(), e["hi"].get<double>());
  return ens;
}

Produced run_ergodic(const Group& g, const json& c) {
  Produced out;
  const auto js = c["js"].get<std::vector<int64_t>>();
  std::vector<int> grid(js.begin(), js.end());
  const auto seq = folner_generator(g);
  Csv csv({"j", "size", "norm", "dist_prev"});
  if (c["function"] == "additive") {
    const VectorValue v{c["vector"].get<std::vector<double>>()};
    const auto f = additive_set_function(v, c["p"].get<double>());
    const auto av = folner_averages(f, seq, grid);
    for (size_t k = 0; k < av.rows.size(); ++k)
      csv.row({num(av.rows[k].j), num(av.rows[k].size), num(av.rows[k].norm),
               k ? num(av.consecutive[k - 1]) : std::string("")});
    const double eps = c["epsilon"];
    const auto params = tiling_params(eps, 0.1, 0.1);
    std::vector<FiniteGroupSet> basis;
    for (int i = 1; i <= params.N; ++i) basis.push_back(seq(i));
    const auto est = tiling_limit_estimate(f, params, basis, seq(1));
    const auto closed = scale(v, 1 - std::pow(1 - eps, params.N));
    const double rel = norm(sub(est, closed), 0) / std::max(norm(closed, 0), 1e-300);
    out.checks.push_back({"closed_form_limit", rel <= 1e-12, rel, 1e-12, "tiling_limit_estimate vs (1-(1-eps)^N) v"});
  } else {
    const auto e = c["ensemble"];
    const auto ens = read_ensemble(g, e);
    const auto omega = ens.omega(e["seed"].get<uint64_t>());
    const StepNorm mode = c["norm"]["mode"] == "sup" ? StepNorm::sup()
                                                     : StepNorm::lp(c["norm"]["p"], c["norm"]["lo"], c["norm"]["hi"]);
    const auto f = counting_set_function(ens, omega, mode);
    const auto av = folner_averages(f, seq, grid);
    bool monotone = true;
    for (size_t k = 0; k < av.rows.size(); ++k) {
      monotone = monotone && av.rows[k].value.nondecreasing();
      csv.row({num(av.rows[k].j), num(av.rows[k].size), num(av.rows[k].norm),
               k ? num(av.consecutive[k - 1]) : std::string("")});
    }
    out.checks.push_back({"counting_monotone", monotone, monotone ? 1.0 : 0.0, 1, ""});
  }
  out.files.insert(out.files.begin(), {"results.csv", csv.text()});
  return out;
}

Produced run_ids(const Group& g, const json& c) {
  const auto ens = read_ensemble(g, c);
  IdsOptions o;
  o.ns.clear();
  for (int64_t n : c["ns"].get<std::vector<int64_t>>()) o.ns.push_back(static_cast<int>(n));
  o.seeds = c["seeds"].get<std::vector<uint64_t>>();
  auto mode = [](const json& m) {
    return m["mode"] == "sup" ? StepNorm::sup() : StepNorm::lp(m["p"], m["lo"], m["hi"]);
  };
  o.consecutive_norm = mode(c["consecutive_norm"]);
  o.cross_norm = mode(c["cross_norm"]);
  o.cap = c["cap"];
  const auto rep = ids_experiment(ens, folner_generator(g), o);

  Produced out;
  Csv csv({"seed", "n", "dim", "dist_prev", "dist_oracle"});
  bool monotone = true;
  for (const auto& r : rep.rows) {
    monotone = monotone && r.normalized.nondecreasing();
    csv.row({num(static_cast<int64_t>(r.seed)), num(r.n), num(r.dim), r.dist_prev < 0 ? "" : num(r.dist_prev),
             r.dist_oracle < 0 ? "" : num(r.dist_oracle)});
  }
  out.files.push_back({"results.csv", csv.text()});
  out.checks.push_back({"counting_monotone", monotone, monotone ? 1.0 : 0.0, 1, ""});
  json cross = json::object();
  for (const auto& [n, d] : rep.cross_seed) cross[std::to_string(n)] = d;
  out.diagnostics["cross_seed"] = cross;
  json dec = json::object();
  for (uint64_t s : o.seeds) dec[std::to_string(s)] = rep.consecutive_decreasing(s);
  out.diagnostics["consecutive_decreasing"] = dec;
  out.diagnostics["truncated"] = rep.truncated;

  const int samples = c["limit"]["samples"];
  if (samples > 0) {
    std::vector<double> energies;
    const int ne = c["limit"]["energies"];
    const double lo = c["limit"]["lo"], hi = c["limit"]["hi"];
    for (int k = 0; k < ne; ++k) energies.push_back(lo + (hi - lo) * k / std::max(ne - 1, 1));
    const auto est = ensemble_limit_estimate(ens, energies, samples, c["limit"]["radius"]);
    Csv lim({"energy", "profile", "std_error"});
    for (size_t k = 0; k < energies.size(); ++k)
      lim.row({num(energies[k]), num(est.profile[k]), num(est.std_error[k])});
    out.files.push_back({"limit.csv", lim.text()});
    out.diagnostics["limit_boundary_diagnostic"] = est.boundary_diagnostic;
    json gap = json::object();
    for (const auto& [n, mean] : rep.mean) gap[std::to_string(n)] = grid_sup_distance(est, mean);
    out.diagnostics["limit_vs_mean"] = gap;
  }
  return out;
}

Produced run_process(const Group& g, const json& c) {
  ProcessParams pp;
  pp.base_seed = c["seed"];
  const std::string kind = c["kind"];
  if (kind == "bernoulli-point-count") {
    pp.p = c["p"];
  } else {
    pp.law = SiteLaw::uniform(c["law"]["lo"], c["law"]["hi"]);
    pp.f = cylinder_threshold(c["threshold"], pp.law);
  }
  const auto f = make_process(kind, pp, g);
  const auto seq = folner_generator(g);
  const int m = c["M"], jmax = c["J"], samples = c["samples"];

  Produced out;
  Csv csv({"lambda", "tail", "tail_sigma", "sup_l1", "sup_l1_sigma", "kappa_tilde", "bound", "clamped_bound",
           "plausible"});
  for (double lambda : c["lambdas"].get<std::vector<double>>()) {
    const auto t = maximal_tail_estimate(f, seq, lambda, m, jmax, samples);
    csv.row({num(lambda), num(t.tail), num(t.tail_sigma), num(t.sup_l1), num(t.sup_l1_sigma), num(t.kappa_tilde),
             num(t.bound), num(t.clamped_bound()), flag(t.plausible())});
    out.checks.push_back({"tail_plausible(lambda=" + format_number(lambda) + ")", t.plausible(), t.tail,
                          t.clamped_bound(), "3 sigma slack on tail and bound"});
  }
  out.files.push_back({"results.csv", csv.text()});

  const auto js64 = c["trajectory"]["js"].get<std::vector<int64_t>>();
  const std::vector<int> js(js64.begin(), js64.end());
  const int n_traj = c["trajectory"]["samples"];
  std::vector<std::vector<double>> traj(static_cast<size_t>(n_traj));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n_traj; ++s)
    traj[static_cast<size_t>(s)] = pointwise_trajectory(f, f.sample(static_cast<uint64_t>(s)), seq, js);
  Csv tc({"sample", "j", "value"});
  double worst = 0;
  for (int s = 0; s < n_traj; ++s) {
    for (size_t k = 0; k < js.size(); ++k) tc.row({num(s), num(js[k]), num(traj[static_cast<size_t>(s)][k])});
    worst = std::max(worst, std::abs(traj[static_cast<size_t>(s)].back() - f.kernel_mean));
  }
  if (n_traj > 0) {
    out.files.push_back({"trajectory.csv", tc.text()});
    out.diagnostics["trajectory_tail_max_gap"] = worst;
    out.diagnostics["kernel_mean"] = f.kernel_mean;
  }
  return out;
}

Produced run_covering(const Group& g, const json& c) {
  const int instances = c["instances"], m = c["M"], n = c["N"], size = c["set_size"], radius = c["radius"];
  const auto seq = folner_generator(g);
  std::vector<FiniteGroupSet> levels;
  for (int j = m; j <= n; ++j) levels.push_back(seq(j));
  // Instances are drawn serially, then solved independently.
  std::mt19937_64 rng(c["seed"].get<uint64_t>());
  std::uniform_int_distribution<int64_t> coord(-radius, radius);
  std::uniform_int_distribution<int> lvl(m, n), sz(1, size);
  std::vector<std::vector<Element>> bs(static_cast<size_t>(instances));
  std::vector<std::vector<int>> thetas(static_cast<size_t>(instances));
  for (int t = 0; t < instances; ++t) {
    std::vector<Element> v;
    const int k = sz(rng);
    for (int i = 0; i < k; ++i) {
      Element e;
      if (g.family() == Family::kHeisenberg)
        e = g.heis(coord(rng), coord(rng), coord(rng));
      else
        for (int a = 0; a < g.dim(); ++a) e.c[static_cast<size_t>(a)] = coord(rng);
      v.push_back(e);
    }
    const FiniteGroupSet b(std::move(v));
    bs[static_cast<size_t>(t)] = b.elements();
    for (size_t i = 0; i < b.size(); ++i) thetas[static_cast<size_t>(t)].push_back(lvl(rng));
  }
  std::vector<VitaliCover> res(static_cast<size_t>(instances));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < instances; ++t)
    res[static_cast<size_t>(t)] = vitali_cover(g, bs[static_cast<size_t>(t)], thetas[static_cast<size_t>(t)], levels, m);

  Produced out;
  Csv csv({"instance", "b_size", "chosen", "disjoint", "covers"});
  int passes = 0;
  for (int t = 0; t < instances; ++t) {
    const auto& r = res[static_cast<size_t>(t)];
    passes += r.disjoint && r.covers;
    csv.row({num(t), num(bs[static_cast<size_t>(t)].size()), num(r.chosen.size()), flag(r.disjoint), flag(r.covers)});
  }
  out.files.push_back({"results.csv", csv.text()});
  out.checks.push_back({"postconditions", passes == instances, static_cast<double>(passes),
                        static_cast<double>(instances), std::to_string(passes) + "/" + std::to_string(instances)});
  out.diagnostics["postcondition_passes"] = std::to_string(passes) + "/" + std::to_string(instances);
  return out;
}

// ------------------------------------------------------------------ cache

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << data;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks)
    a.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"limit", c.limit}, {"detail", c.detail}});
  return a;
}

std::vector<Check> checks_from_json(const json& a) {
  std::vector<Check> out;
  for (const auto& c : a)
    out.push_back({c.at("name"), c.at("pass"), c.at("measured"), c.at("limit"), c.at("detail")});
  return out;
}

// Cache entry: produced files plus an index with their digests.
bool load_cache(const fs::path& dir, Produced& p) {
  const auto index_path = dir / "index.json";
  if (!fs::exists(index_path)) return false;
  try {
    const json idx = json::parse(read_file(index_path));
    Produced got;
    for (const auto& f : idx.at("files")) {
      const std::string name = f.at("name");
      const std::string data = read_file(dir / name);
      if (sha256_hex(data) != f.at("sha256").get<std::string>()) throw std::runtime_error(name + " digest mismatch");
      got.files.push_back({name, data});
    }
    got.checks = checks_from_json(idx.at("checks"));
    got.diagnostics = idx.at("diagnostics");
    p = std::move(got);
    return true;
  } catch (const std::exception& e) {
    std::cerr << "warning: cache entry " << dir.string() << " is corrupt (" << e.what() << "); recomputing\n";
    return false;
  }
}

void store_cache(const fs::path& dir, const Produced& p) {
  fs::create_directories(dir);
  json idx;
  idx["files"] = json::array();
  for (const auto& [name, data] : p.files) {
    write_file(dir / name, data);
    idx["files"].push_back({{"name", name}, {"sha256", sha256_hex(data)}});
  }
  idx["checks"] = checks_json(p.checks);
  idx["diagnostics"] = p.diagnostics;
  write_file(dir / "index.json", idx.dump(2) + "\n");
}

}  // namespace

// ------------------------------------------------------------ public entry

ExperimentConfig parse_config(const json& raw) {
  ExperimentConfig cfg;
  json resolved = json::object();
  if (!raw.is_object()) throw ConfigError("<root>", "expected an object");
  if (!raw.contains("kind")) throw ConfigError("kind", "required");
  Reader root(raw, "", resolved, cfg.defaulted);
  cfg.kind = root.choice("kind", "", {"tiling", "ergodic", "ids", "process", "covering"});
  cfg.output = root.choice("output", "out", {});
  cfg.cache = root.boolean("cache", true);

  if (cfg.kind == "tiling") {
    const Group g = read_group(root, {"zd", "heisenberg", "lamplighter"});
    auto t = root.child("tiling");
    const double eps = t.number("epsilon", 0.25, 0, 0.5, true, true);
    const double beta = t.number("beta", std::ldexp(eps, -5), 0, 1, true, false);
    t.number("zeta", beta, 0, 1, true, false);
    t.boolean("strict", false);
    const int64_t target = t.integer("target", 1000, 1, 1 << 20);
    const int n = tile_count(eps);
    std::vector<int64_t> def;
    for (int i = 1; i <= n; ++i) def.push_back(i);
    const auto basis = t.integers("basis", def, 1, target, true);
    if (static_cast<int>(basis.size()) != n)
      throw ConfigError(t.at("basis"), "needs exactly N = " + std::to_string(n) + " entries for epsilon " +
                                           format_number(eps));
    t.finish();
    (void)g;
  } else if (cfg.kind == "ergodic") {
    read_group(root, {"zd", "heisenberg", "lamplighter"});
    auto e = root.child("ergodic");
    const auto fn = e.choice("function", "additive", {"additive", "counting"});
    e.integers("js", {1, 2, 4, 8, 16, 32}, 1, 1 << 16, true);
    e.numbers("vector", {1.0});
    e.number("p", 2, 0, 1e6);
    e.number("epsilon", 0.1, 0, 0.5, true, true);
    auto ens = e.child("ensemble");
    ens.choice("kernel", "free", {"free", "anderson"});
    const double lo = ens.number("lo", 0, -1e6, 1e6);
    ens.number("hi", 1, lo, 1e6, true, false);
    ens.integer("seed", 1, 0, int64_t{1} << 62);
    ens.finish();
    read_norm(e.child("norm"), "sup");
    e.finish();
    if (fn == "counting" && resolved["group"]["family"] != "zd")
      throw ConfigError("group.family", "counting functions need zd");
  } else if (cfg.kind == "ids") {
    const Group g = read_group(root, {"zd"});
    auto i = root.child("ids");
    i.choice("kernel", "anderson", {"free", "anderson"});
    const double lo = i.number("lo", 0, -1e6, 1e6);
    i.number("hi", 1, lo, 1e6, true, false);
    i.integer("R", 1, 1, 1);
    i.integers("ns", {8, 16, 32, 48}, 1, 1 << 20, true);
    i.integers("seeds", {1, 2}, 0, int64_t{1} << 62);
    read_norm(i.child("consecutive_norm"), "sup");
    read_norm(i.child("cross_norm"), "lp");
    i.integer("cap", kDenseCap, 1, kDenseCap);
    auto l = i.child("limit");
    l.integer("samples", 0, 0, 1 << 20);
    l.integer("radius", 6, 1, 64);
    l.integer("energies", 81, 1, 100000);
    const double elo = l.number("lo", -5, -1e6, 1e6);
    l.number("hi", 5, elo, 1e6, true, false);
    l.finish();
    i.finish();
    if (resolved["ids"]["limit"]["samples"].get<int64_t>() > 0 && resolved["ids"]["limit"]["samples"].get<int64_t>() < 10)
      throw ConfigError("ids.limit.samples", "needs 0 (off) or at least 10");
    (void)g;
  } else if (cfg.kind == "process") {
    read_group(root, {"zd", "heisenberg", "lamplighter"});
    auto p = root.child("process");
    p.choice("kind", "bernoulli-point-count", {"bernoulli-point-count", "absolutely-continuous"});
    p.number("p", 0.5, 0, 1);
    auto law = p.child("law");
    const double lo = law.number("lo", 0, -1e6, 1e6);
    law.number("hi", 1, lo, 1e6, true, false);
    law.finish();
    p.number("threshold", 0.9, -1e6, 1e6);
    p.numbers("lambdas", {0.5});
    for (double l : resolved["process"]["lambdas"])
      if (!(l > 0)) throw ConfigError("process.lambdas", "every lambda must be > 0");
    const int64_t m = p.integer("M", 1, 1, 1 << 16);
    p.integer("J", 16, std::max<int64_t>(m, 2), 1 << 16);
    p.integer("samples", 10000, 100, 1 << 24);
    p.integer("seed", 0, 0, int64_t{1} << 62);
    auto tr = p.child("trajectory");
    tr.integer("samples", 0, 0, 1 << 16);
    tr.integers("js", {10, 100, 1000}, 1, 1 << 24, true);
    tr.finish();
    p.finish();
  } else {
    read_group(root, {"zd", "heisenberg"});
    auto c = root.child("covering");
    c.integer("instances", 100, 1, 1 << 20);
    const int64_t m = c.integer("M", 1, 1, 64);
    c.integer("N", 4, m, 64);
    c.integer("set_size", 25, 1, 1 << 12);
    c.integer("radius", 6, 0, 1 << 12);
    c.integer("seed", 1, 0, int64_t{1} << 62);
    c.finish();
  }
  root.finish();
  cfg.resolved = std::move(resolved);
  return cfg;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  const json& r = cfg.resolved;
  Group g = Group::zd(1);
  {
    const auto& gj = r.at("group");
    const std::string fam = gj.at("family");
    g = fam == "zd" ? Group::zd(gj.at("dim").get<int>()) : fam == "heisenberg" ? Group::heisenberg()
                                                                                : Group::lamplighter();
  }
  // The cache key covers everything that affects results, not where they go.
  json keyed = r;
  keyed.erase("output");
  keyed.erase("cache");
  const std::string key = sha256_hex(keyed.dump() + "|" + kToolVersion);
  const fs::path out_dir(cfg.output);
  fs::create_directories(out_dir);
  const fs::path cache_dir = out_dir / ".cache" / key;

  Produced p;
  bool hit = false;
  if (cfg.cache) hit = load_cache(cache_dir, p);
  const auto t1 = clock::now();
  if (!hit) {
    if (cfg.kind == "tiling")
      p = run_tiling(g, r.at("tiling"));
    else if (cfg.kind == "ergodic")
      p = run_ergodic(g, r.at("ergodic"));
    else if (cfg.kind == "ids")
      p = run_ids(g, r.at("ids"));
    else if (cfg.kind == "process")
      p = run_process(g, r.at("process"));
    else
      p = run_covering(g, r.at("covering"));
    if (cfg.cache) store_cache(cache_dir, p);
  }
  const auto t2 = clock::now();

  RunOutcome outcome;
  for (const auto& c : p.checks)
    if (!c.pass) outcome.failures.push_back(c.name);
  outcome.exit_code = outcome.failures.empty() ? 0 : 1;

  json summary;
  summary["kind"] = cfg.kind;
  summary["checks"] = checks_json(p.checks);
  summary["failures"] = outcome.failures;
  summary["all_pass"] = outcome.failures.empty();
  summary["diagnostics"] = p.diagnostics;
  std::vector<std::string> outputs;
  for (const auto& [name, data] : p.files) {
    write_file(out_dir / name, data);
    outputs.push_back(name);
  }
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  outputs.push_back("summary.json");
  outputs.push_back("manifest.json");
  const auto t3 = clock::now();

  json m;
  m["tool"] = "amen";
  m["version"] = kToolVersion;
  m["config"] = r;
  m["defaults"] = cfg.defaulted;
  m["timings"] = {{"cache_lookup", seconds(t0, t1)}, {"compute", hit ? 0.0 : seconds(t1, t2)}, {"write", seconds(t2, t3)}};
  m["cache"] = {{"enabled", cfg.cache}, {"key", key}, {"hits", hit ? 1 : 0}, {"misses", hit ? 0 : 1},
                {"full_reuse", hit}};
  m["outputs"] = outputs;
  m["invariants"] = {{"checked", p.checks.size()},
                     {"passed", p.checks.size() - outcome.failures.size()},
                     {"failed", outcome.failures},
                     {"all_pass", outcome.failures.empty()}};
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
  outcome.manifest = std::move(m);
  return outcome;
}

void emit_plotdata(const std::string& csv_text, const json& spec, std::ostream& out) {
  const CsvTable t = parse_csv(csv_text);
  if (!spec.is_object() || !spec.contains("x") || !spec.contains("y"))
    throw ConfigError("spec", "needs \"x\" and \"y\"");
  auto column = [&](const std::string& name) -> size_t {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw ConfigError("spec", "missing column '" + name + "' in results");
    return static_cast<size_t>(it - t.header.begin());
  };
  std::vector<std::string> ys;
  if (spec["y"].is_string())
    ys.push_back(spec["y"]);
  else
    for (const auto& y : spec["y"]) ys.push_back(y);
  const std::string xname = spec["x"];
  // An empty results file has no header to check columns against.
  if (t.header.empty()) {
    out << xname;
    if (!spec.contains("series"))
      for (const auto& y : ys) out << '\t' << y;
    out << '\n';
    return;
  }
  const size_t xc = column(xname);
  std::vector<size_t> ycs;
  for (const auto& y : ys) ycs.push_back(column(y));

  if (!spec.contains("series")) {
    out << xname;
    for (const auto& y : ys) out << '\t' << y;
    out << '\n';
    for (const auto& row : t.rows) {
      out << row[xc];
      for (size_t yc : ycs) out << '\t' << row[yc];
      out << '\n';
    }
    return;
  }
  const size_t sc = column(spec["series"]);
  // Series and x values keep first-appearance order, which is deterministic
  // because results.csv rows are.
  std::vector<std::string> series, xs;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> cell;
  for (const auto& row : t.rows) {
    if (std::find(series.begin(), series.end(), row[sc]) == series.end()) series.push_back(row[sc]);
    if (std::find(xs.begin(), xs.end(), row[xc]) == xs.end()) xs.push_back(row[xc]);
    std::vector<std::string> v;
    for (size_t yc : ycs) v.push_back(row[yc]);
    cell[{row[xc], row[sc]}] = v;
  }
  out << xname;
  for (const auto& s : series)
    for (const auto& y : ys) out << '\t' << (ys.size() == 1 ? t.header[sc] + "=" + s : y + "@" + t.header[sc] + "=" + s);
  out << '\n';
  for (const auto& x : xs) {
    out << x;
    for (const auto& s : series) {
      const auto it = cell.find({x, s});
      for (size_t k = 0; k < ys.size(); ++k) out << '\t' << (it == cell.end() ? "" : it->second[k]);
    }
    out << '\n';
  }
}

}  // namespace amen
