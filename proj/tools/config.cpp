#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "ohmgrad/error.hpp"

namespace ohmgrad::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(Errc::config_error, msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      bad("unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad("'" + key + "' must be finite");
  return v;
}

std::uint64_t unsigned_int(const json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  bad("'" + key + "' must be a non-negative integer");
}

std::size_t count(const json& j, const std::string& key, std::size_t lo) {
  const std::uint64_t v = unsigned_int(j, key);
  if (v < lo) bad("'" + key + "' = " + std::to_string(v) + " must be >= " + std::to_string(lo));
  return static_cast<std::size_t>(v);
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) bad("'" + key + "' must be a string");
  return j.get<std::string>();
}

std::vector<std::size_t> index_list(const json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of edge indices");
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(static_cast<std::size_t>(unsigned_int(v, key)));
  return out;
}

double positive(const json& j, const std::string& key) {
  const double v = number(j, key);
  if (!(v > 0.0)) bad("'" + key + "' = " + std::to_string(v) + " must be > 0");
  return v;
}

}  // namespace

bool needs_topology(const std::string& command) {
  return command != "verify" && command != "gep-verify";
}

Estimator parse_estimator(const std::string& name) {
  for (const Estimator e : {Estimator::analytical, Estimator::two_phase, Estimator::two_phase_limit, Estimator::hinge,
                            Estimator::hinge_two_phase})
    if (name == to_string(e)) return e;
  bad("unknown estimator '" + name +
      "' (valid: analytical, two-phase, two-phase-limit, hinge-analytical, hinge-two-phase)");
}

json parse_kv_list(const std::string& textv) {
  json out = json::object();
  std::stringstream ss(textv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) bad("expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    std::uint64_t u = 0;
    const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), u);
    if (ec == std::errc() && p == val.data() + val.size()) {
      out[key] = u;
      continue;
    }
    double d = 0.0;
    const auto [p2, ec2] = std::from_chars(val.data(), val.data() + val.size(), d);
    if (ec2 == std::errc() && p2 == val.data() + val.size())
      out[key] = d;
    else
      out[key] = val;
  }
  return out;
}

json parse_grid(const std::string& textv) {
  const auto sep = textv.find_first_of("x,");
  if (sep == std::string::npos) bad("grid must look like ROWSxCOLS, got '" + textv + "'");
  const json kv = parse_kv_list("r=" + textv.substr(0, sep) + ",c=" + textv.substr(sep + 1));
  return json::array({kv["r"], kv["c"]});
}

RunConfig parse_config(const json& j) {
  check_keys(j, {"command", "grid", "nanowire", "graph_file", "selectors", "data", "estimator", "eta", "beta", "gamma",
                 "steps", "r_min", "r_max", "r0", "p_freeze", "record_every", "seed", "out", "threads", "sweep",
                 "bias", "verify", "landscape"},
             "configuration");
  RunConfig c;
  c.source = j;
  if (!j.contains("command")) bad("missing 'command'");
  c.command = text(j["command"], "command");
  if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
    bad("unknown command '" + c.command + "' (valid: gen, train, freeze-sweep, bias-exp, gep-verify, verify, landscape)");
  if (j.contains("seed")) c.seed = unsigned_int(j["seed"], "seed");
  if (j.contains("out")) c.out = text(j["out"], "out");
  if (j.contains("threads")) c.threads = count(j["threads"], "threads", 1);

  // Topology: exactly one source.
  int sources = 0;
  for (const char* k : {"grid", "nanowire", "graph_file"}) sources += j.contains(k) ? 1 : 0;
  if (sources > 1) bad("conflicting topology sources: give exactly one of 'grid', 'nanowire', 'graph_file'");
  if (sources == 0 && needs_topology(c.command)) bad("command '" + c.command + "' needs a topology ('grid', 'nanowire' or 'graph_file')");
  auto& t = c.topology;
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_array() || g.size() != 2) bad("'grid' must be [rows, cols]");
    t.kind = TopologySpec::Kind::grid;
    t.rows = count(g[0], "grid rows", 1);
    t.cols = count(g[1], "grid cols", 1);
  } else if (j.contains("nanowire")) {
    const json& n = j["nanowire"];
    check_keys(n, {"n", "l", "seed"}, "'nanowire'");
    t.kind = TopologySpec::Kind::nanowire;
    if (!n.contains("n")) bad("'nanowire' needs 'n'");
    t.n = count(n["n"], "nanowire n", 2);
    if (n.contains("l")) t.l = positive(n["l"], "nanowire l");
    t.seed = n.contains("seed") ? unsigned_int(n["seed"], "nanowire seed") : c.seed;
  } else if (j.contains("graph_file")) {
    t.kind = TopologySpec::Kind::file;
    t.path = text(j["graph_file"], "graph_file");
  }

  // Data.
  auto& d = c.data;
  d.seed = c.seed;
  if (j.contains("data")) {
    const json& dj = j["data"];
    check_keys(dj, {"kind", "inputs", "outputs", "sigma", "count", "seed", "path", "pca", "train_fraction"}, "'data'");
    const std::string kind = dj.contains("kind") ? text(dj["kind"], "data.kind") : "regression";
    if (kind == "regression")
      d.kind = DataSpec::Kind::regression;
    else if (kind == "wdbc")
      d.kind = DataSpec::Kind::wdbc;
    else
      bad("unknown data kind '" + kind + "' (valid: regression, wdbc)");
    if (dj.contains("inputs")) d.inputs = count(dj["inputs"], "data.inputs", 1);
    if (dj.contains("outputs")) d.outputs = count(dj["outputs"], "data.outputs", 1);
    if (dj.contains("sigma")) {
      d.sigma = number(dj["sigma"], "data.sigma");
      if (d.sigma < 0.0) bad("'data.sigma' must be >= 0");
    }
    if (dj.contains("count")) d.count = count(dj["count"], "data.count", 1);
    if (dj.contains("seed")) d.seed = unsigned_int(dj["seed"], "data.seed");
    if (dj.contains("path")) d.path = text(dj["path"], "data.path");
    if (dj.contains("pca")) d.pca = count(dj["pca"], "data.pca", 1);
    if (dj.contains("train_fraction")) {
      d.train_fraction = number(dj["train_fraction"], "data.train_fraction");
      if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0)) bad("'data.train_fraction' must lie in (0, 1)");
    }
    if (d.kind == DataSpec::Kind::wdbc && d.path.empty()) bad("'data.path' is required for wdbc data");
  }
  if (d.kind == DataSpec::Kind::wdbc) {
    d.inputs = d.pca;
    d.outputs = 1;
  }

  // Selectors.
  auto& s = c.selectors;
  s.n_in = d.inputs;
  s.n_out = d.outputs;
  s.seed = c.seed;
  if (j.contains("selectors")) {
    c.selectors_given = true;
    const json& sj = j["selectors"];
    check_keys(sj, {"input", "output", "inputs", "outputs", "seed"}, "'selectors'");
    const bool explicit_idx = sj.contains("input") || sj.contains("output");
    const bool auto_counts = sj.contains("inputs") || sj.contains("outputs") || sj.contains("seed");
    if (explicit_idx && auto_counts)
      bad("'selectors' mixes explicit indices ('input'/'output') with automatic choice ('inputs'/'outputs'/'seed')");
    if (explicit_idx) {
      if (!sj.contains("input") || !sj.contains("output")) bad("explicit selectors need both 'input' and 'output'");
      s.automatic = false;
      s.input = index_list(sj["input"], "selectors.input");
      s.output = index_list(sj["output"], "selectors.output");
    } else {
      if (sj.contains("inputs")) s.n_in = count(sj["inputs"], "selectors.inputs", 0);
      if (sj.contains("outputs")) s.n_out = count(sj["outputs"], "selectors.outputs", 0);
      if (sj.contains("seed")) s.seed = unsigned_int(sj["seed"], "selectors.seed");
      if (s.n_in + s.n_out == 0) bad("'selectors' must request at least one edge");
    }
  }

  // Training.
  auto& tr = c.train;
  tr.seed = c.seed;
  if (j.contains("estimator")) tr.estimator = parse_estimator(text(j["estimator"], "estimator"));
  else if (d.kind == DataSpec::Kind::wdbc) tr.estimator = Estimator::hinge;
  const bool two_phase = tr.estimator == Estimator::two_phase || tr.estimator == Estimator::hinge_two_phase;
  tr.eta = two_phase ? 1.0 : 0.3;
  tr.beta = 0.3;
  if (j.contains("eta")) {
    tr.eta = number(j["eta"], "eta");
    if (tr.eta < 0.0) bad("'eta' = " + std::to_string(tr.eta) + " must be >= 0");
  }
  if (j.contains("beta")) {
    tr.beta = number(j["beta"], "beta");
    if (two_phase && !(tr.beta > 0.0))
      bad("'beta' = " + std::to_string(tr.beta) + " must be > 0 for estimator " + to_string(tr.estimator));
  }
  if (j.contains("gamma")) tr.gamma = number(j["gamma"], "gamma");
  if (j.contains("steps")) tr.steps = count(j["steps"], "steps", 0);
  if (j.contains("r_min")) tr.bounds.min = positive(j["r_min"], "r_min");
  if (j.contains("r_max")) tr.bounds.max = positive(j["r_max"], "r_max");
  if (j.contains("r0")) tr.r0 = positive(j["r0"], "r0");
  if (j.contains("p_freeze")) tr.p_freeze = number(j["p_freeze"], "p_freeze");
  if (j.contains("record_every")) tr.record_every = count(j["record_every"], "record_every", 0);
  else if (c.command == "landscape") tr.record_every = std::max<std::size_t>(1, tr.steps / 50);
  else tr.record_every = std::max<std::size_t>(1, tr.steps / 100);
  if (tr.bounds.max < tr.bounds.min) bad("'r_max' must be >= 'r_min'");
  tr.validate();

  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    check_keys(sw, {"p_list", "trials", "estimators"}, "'sweep'");
    if (sw.contains("p_list")) {
      if (!sw["p_list"].is_array() || sw["p_list"].empty()) bad("'sweep.p_list' must be a non-empty array");
      c.p_list.clear();
      for (const auto& p : sw["p_list"]) {
        const double v = number(p, "sweep.p_list");
        if (v < 0.0 || v > 1.0) bad("'sweep.p_list' entries must lie in [0, 1]");
        c.p_list.push_back(v);
      }
    }
    if (sw.contains("trials")) c.trials = count(sw["trials"], "sweep.trials", 1);
    if (sw.contains("estimators")) {
      if (!sw["estimators"].is_array()) bad("'sweep.estimators' must be an array");
      for (const auto& e : sw["estimators"]) c.estimators.push_back(parse_estimator(text(e, "sweep.estimators")));
    }
  }
  if (c.estimators.empty()) c.estimators.push_back(tr.estimator);

  if (j.contains("bias")) {
    const json& b = j["bias"];
    check_keys(b, {"samples", "sigma"}, "'bias'");
    if (b.contains("samples")) c.samples = count(b["samples"], "bias.samples", 2);
    if (b.contains("sigma")) {
      c.noise_sigma = number(b["sigma"], "bias.sigma");
      if (c.noise_sigma < 0.0) bad("'bias.sigma' must be >= 0");
    }
  }
  if (c.command == "bias-exp" && !(tr.beta > 0.0)) bad("'beta' must be > 0 for bias-exp");

  if (j.contains("verify")) {
    const json& v = j["verify"];
    check_keys(v, {"graphs", "max_nodes"}, "'verify'");
    if (v.contains("graphs")) c.graphs = count(v["graphs"], "verify.graphs", 1);
    if (v.contains("max_nodes")) c.max_nodes = count(v["max_nodes"], "verify.max_nodes", 3);
  }
  if (j.contains("landscape")) {
    const json& l = j["landscape"];
    check_keys(l, {"resolution", "range"}, "'landscape'");
    if (l.contains("resolution")) c.resolution = count(l["resolution"], "landscape.resolution", 1);
    if (l.contains("range")) c.range = positive(l["range"], "landscape.range");
  }
  return c;
}

}  // namespace ohmgrad::cli
