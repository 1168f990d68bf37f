// guichard: batch front end over catalog, construction, evolution and verification.
// Exit codes: 0 pass, 1 usage or configuration error, 2 inadmissible data, 3 instability abort.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guichard/guichard.hpp"

namespace fs = std::filesystem;
using namespace guichard;

namespace {

enum Exit { kPass = 0, kUsage = 1, kInadmissible = 2, kInstability = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---- data sources ----

struct Source {
  std::string catalog;
  bool class_a = false, class_b = false;
  std::string bundle;
  std::string zeta, D, C, eta, phi0;
  std::vector<double> c_values;
  std::optional<double> lambda;
  int n = 33;
  double lo = -0.25, hi = 0.25;
  bool grid_given = false;
  int degree = kDefaultJetDegree;
  double tol = kClosedFormTol;
  std::map<std::string, double> numeric;  // catalog parameters given as flags
  std::vector<std::string> extra;         // --param key=value
  double perturb = 0.0;
};

const std::vector<std::string> kCatalogNumeric = {"a", "b", "c1", "c2", "c3", "c4", "g0", "alpha", "beta"};

void add_source_options(CLI::App* cmd, Source& s, std::map<std::string, std::optional<double>>& nums) {
  auto* g = cmd->add_option_group("source", "where the initial data come from");
  g->add_option("--catalog", s.catalog, "catalog entry name");
  g->add_flag("--class-a", s.class_a, "class A data from --zeta and --D (or --C)");
  g->add_flag("--class-b", s.class_b, "class B data from --zeta, --eta and --phi0");
  g->add_option("--bundle", s.bundle, "initial-data bundle (JSON)");
  g->require_option(1);
  cmd->add_option("--zeta", s.zeta, "zeta expression (x for class B and the D variant, y for the C variant)");
  cmd->add_option("--D", s.D, "D(y) expression (class A)");
  cmd->add_option("--C", s.C, "C(x) expression (class A, mirrored variant)");
  cmd->add_option("--eta", s.eta, "eta(y) expression (class B)");
  cmd->add_option("--phi0", s.phi0, "phi at z = 0 as an expression in x, y (class B)");
  cmd->add_option("--c", s.c_values, "family parameter(s)")->delimiter(',');
  cmd->add_option("--lambda", s.lambda, "phi at the origin (selects the band)");
  cmd->add_option("--param", s.extra, "catalog parameter key=value");
  for (const auto& k : kCatalogNumeric) cmd->add_option("--" + k, nums[k], "catalog parameter " + k);
  cmd->add_option("--n", s.n, "samples per axis")->check(CLI::Range(8, 4096));
  cmd->add_option("--lo", s.lo, "patch lower bound");
  cmd->add_option("--hi", s.hi, "patch upper bound");
  cmd->add_option("--degree", s.degree, "jet degree used during construction")->check(CLI::Range(4, 24));
  cmd->add_option("--tol", s.tol, "construction tolerance")->check(CLI::PositiveNumber);
}

void finish_source(CLI::App* cmd, Source& s, const std::map<std::string, std::optional<double>>& nums) {
  for (const auto& [k, v] : nums)
    if (v) s.numeric[k] = *v;
  s.grid_given = cmd->count("--n") + cmd->count("--lo") + cmd->count("--hi") > 0;
  for (double c : s.c_values)
    if (c == 0.0) throw UsageError("c values must be nonzero");
}

json catalog_params_json(const Source& s, std::optional<double> c) {
  json p = json::object();
  const auto specs = catalog_params(s.catalog);
  auto known = [&](const std::string& k) {
    for (const auto& sp : specs)
      if (sp.name == k) return true;
    return false;
  };
  auto put = [&](const std::string& k, const json& v) {
    if (!known(k)) throw UsageError("catalog entry " + s.catalog + " has no parameter '" + k + "'");
    p[k] = v;
  };
  for (const auto& [k, v] : s.numeric) put(k, v);
  if (!s.zeta.empty()) put("zeta", s.zeta);
  if (s.grid_given) {
    put("n", s.n);
    put("lo", s.lo);
    put("hi", s.hi);
  }
  for (const auto& kv : s.extra) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
    const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      put(k, d);
    } catch (const std::invalid_argument&) {
      put(k, v);
    }
  }
  if (c) put("c", *c);
  return p;
}

struct Built {
  InitialData data;
  json report;
};

json classification_json(const Classification& c) {
  return {{"label", to_string(c.label)}, {"sup", c.sup}, {"min", c.min}};
}

json construction_report(const Construction& k) {
  json r;
  r["residuals"] = residuals_to_json(k.residuals);
  r["classification"] = classification_json(k.classification);
  r["has_metric"] = k.has_metric;
  return r;
}

// inadmissible data surface as InadmissibleError from here
Built build_one(const Source& s, std::optional<double> c) {
  Built b;
  const double cv = c.value_or(1.0);
  if (!s.catalog.empty()) {
    const CatalogEntry e = build_example(s.catalog, catalog_params_json(s, c));
    if (e.has_initial_data()) {
      b.data = e.initial_data();
      ResidualMap r;
      const auto cls = classify_AB(b.data.phi0, *b.data.lattice);
      b.report["classification"] = classification_json(cls);
      b.report["has_metric"] = e.metric.has_value();
      json res = json::object();
      if (e.metric)
        for (const auto& [k, v] : reconstruction_residuals(*e.metric, b.data)) res[k] = v;
      try {
        check_gate(b.data, s.tol, r);
      } catch (const InadmissibleError&) {
        for (const auto& [k, v] : gate_residuals(b.data)) res[k] = v;
        b.report["residuals"] = res;
        throw;
      }
      for (const auto& [k, v] : r) res[k] = v;
      b.report["residuals"] = res;
    } else if (e.metric) {
      const Construction k = construct_from_metric(*e.metric, e.lambda, e.c, e.lattice, s.degree, 1.0, s.tol);
      b.data = k.data;
      b.data.provenance = {{"source", "catalog"}, {"name", e.name}, {"params", e.params}};
      b.report = construction_report(k);
    } else {
      throw InadmissibleError("psi0", 0.0, e.name + ": no admissible psi");
    }
    b.report["source"] = {{"catalog", e.name}, {"params", e.params}};
  } else if (s.class_a) {
    if (s.zeta.empty() || (s.D.empty() == s.C.empty())) throw UsageError("class A needs --zeta and exactly one of --D, --C");
    const bool mirrored = !s.C.empty();
    const std::string dtext = mirrored ? s.C : s.D;
    const Expr ze = Expr::parse(s.zeta), de = Expr::parse(dtext);
    ClassAParams p{ze.univariate(mirrored ? 1 : 0), de.univariate(mirrored ? 0 : 1), mirrored, s.zeta, dtext};
    const auto lat = Lattice::square(s.n, s.lo, s.hi);
    const Construction k =
        class_a_build(p, cv, lat, s.degree, s.lambda.value_or(std::numeric_limits<double>::quiet_NaN()), s.tol);
    b.data = k.data;
    b.data.provenance = {{"source", "class_a"}, {"zeta", s.zeta}, {mirrored ? "C" : "D", dtext}};
    b.report = construction_report(k);
    b.report["source"] = b.data.provenance;
  } else if (s.class_b) {
    if (s.zeta.empty() || s.eta.empty() || s.phi0.empty()) throw UsageError("class B needs --zeta, --eta and --phi0");
    ClassBParams p{Expr::parse(s.zeta).univariate(0), Expr::parse(s.eta).univariate(1), Expr::parse(s.phi0).field(2),
                   {}, {}, s.zeta, s.eta};
    const auto lat = Lattice::square(s.n, s.lo, s.hi);
    const Construction k = class_b_build(p, cv, lat, s.degree, s.tol);
    b.data = k.data;
    b.data.provenance = {{"source", "class_b"}, {"zeta", s.zeta}, {"eta", s.eta}, {"phi0", s.phi0}};
    b.report = construction_report(k);
    b.report["source"] = b.data.provenance;
  } else {
    b.data = bundle_from_json(read_json(s.bundle));
    if (c && *c != b.data.c) throw UsageError("a bundle carries its own c; drop --c");
    ResidualMap r = gate_residuals(b.data);
    b.report["residuals"] = residuals_to_json(r);
    b.report["classification"] = classification_json(classify_AB(b.data.phi0, *b.data.lattice));
    b.report["source"] = {{"bundle", fs::path(s.bundle).filename().string()}};
  }
  if (s.perturb != 0.0) {
    // breaks admissibility while keeping the data smooth
    const double eps = s.perturb;
    b.data.psi0 = b.data.psi0 + eps * Expr::parse("x*y").field(2);
    b.data.phi_z0 = b.data.phi_z0 * (1.0 + eps * Expr::parse("x").field(2));
    b.data.provenance["perturbation"] = eps;
    b.report["perturbation"] = eps;
  }
  b.report["c"] = b.data.c;
  return b;
}

std::vector<std::optional<double>> c_list(const Source& s) {
  if (s.c_values.empty()) return {std::nullopt};
  return {s.c_values.begin(), s.c_values.end()};
}

std::string run_name(double c) { return "c_" + fmt(c); }

json inadmissible_json(const InadmissibleError& e) {
  return {{"admissible", false}, {"failing_residual", e.residual}, {"value", e.value}, {"message", e.what()}};
}

// ---- commands ----

int cmd_catalog_list() {
  json out = json::array();
  for (const auto& n : catalog_names()) out.push_back({{"name", n}, {"schema", catalog_schema(n)}});
  print(out);
  return kPass;
}

int cmd_catalog_show(const std::string& name, const std::vector<std::string>& params) {
  Source s;
  s.catalog = name;
  s.extra = params;
  print(entry_to_json(build_example(name, catalog_params_json(s, std::nullopt))));
  return kPass;
}

int cmd_construct(const Source& s, const std::string& out, int bundle_degree) {
  json runs = json::array();
  int code = kPass;
  for (const auto& c : c_list(s)) {
    json rep;
    try {
      Built b = build_one(s, c);
      rep = b.report;
      rep["admissible"] = true;
      const fs::path dir = fs::path(out) / run_name(b.data.c);
      write_json(dir / "bundle.json", bundle_to_json(b.data, bundle_degree));
      write_json(dir / "report.json", rep);
      rep["bundle"] = (fs::path(run_name(b.data.c)) / "bundle.json").string();
    } catch (const InadmissibleError& e) {
      rep = inadmissible_json(e);
      if (c) rep["c"] = *c;
      code = kInadmissible;
    }
    runs.push_back(rep);
  }
  const json summary = {{"command", "construct"}, {"runs", runs}};
  write_json(fs::path(out) / "construct.json", summary);
  print(summary);
  return code;
}

struct EvolveOptions {
  EvolutionConfig cfg;
  std::string scheme = "rk4", space = "jets";
  bool filter = false, no_filter = false, no_gate = false;
  FilterConfig filt;
  bool plots = false;
};

void add_evolve_options(CLI::App* cmd, EvolveOptions& o) {
  cmd->add_option("--z-max", o.cfg.z_max, "evolution distance");
  cmd->add_option("--steps", o.cfg.steps, "number of z steps");
  cmd->add_option("--scheme", o.scheme, "rk4 or taylor")->check(CLI::IsMember({"rk4", "taylor"}));
  cmd->add_option("--taylor-order", o.cfg.taylor_order, "order of the Taylor scheme");
  cmd->add_option("--space", o.space, "jets (exact spatial derivatives) or grid")->check(CLI::IsMember({"jets", "grid"}));
  cmd->add_option("--jet-degree", o.cfg.jet_degree, "jet degree carried through the evolution");
  cmd->add_flag("--filter", o.filter, "enable the spectral low-pass filter (grid mode)");
  cmd->add_option("--filter-strength", o.filt.strength, "filter strength");
  cmd->add_option("--filter-order", o.filt.order, "filter order");
  cmd->add_option("--filter-cutoff", o.filt.cutoff, "filter cutoff fraction")->check(CLI::Range(0.0, 0.99));
  cmd->add_option("--tripwire", o.cfg.tripwire, "abort when any field exceeds this magnitude");
  cmd->add_option("--gate-tol", o.cfg.gate_tol, "admissibility gate tolerance");
  cmd->add_flag("--no-gate", o.no_gate, "skip the admissibility gate");
  cmd->add_option("--snapshot-every", o.cfg.snapshot_every, "store full states every k steps");
  cmd->add_flag("--emit-plots", o.plots, "write per-field plot scripts next to the CSVs");
}

void finish_evolve(EvolveOptions& o) {
  o.cfg.scheme = scheme_from_string(o.scheme);
  o.cfg.space = space_from_string(o.space);
  o.cfg.gate = !o.no_gate;
  if (o.filter) {
    o.filt.enabled = true;
    o.cfg.filter = o.filt;
  }
  o.cfg.validate();
}

void emit_plots(const fs::path& dir, std::size_t levels) {
  for (const char* field : {"phi", "psi", "phi_z", "psi_z"}) {
    std::string py;
    py += "import sys\nimport numpy as np\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n";
    py += "level = int(sys.argv[1]) if len(sys.argv) > 1 else " + std::to_string(levels - 1) + "\n";
    py += "d = np.loadtxt('level_%04d_" + std::string(field) + ".csv' % level, delimiter=',', skiprows=1)\n";
    py += "fig, ax = plt.subplots(figsize=(5, 4))\n";
    py += "t = ax.tricontourf(d[:, 0], d[:, 1], d[:, 2], 40)\n";
    py += "fig.colorbar(t)\nax.set_xlabel('x')\nax.set_ylabel('y')\n";
    py += "ax.set_title('" + std::string(field) + " at level %d' % level)\n";
    py += "fig.savefig('" + std::string(field) + "_%04d.png' % level, dpi=120)\n";
    write_text(dir / ("plot_" + std::string(field) + ".py"), py);
  }
}

double final_distance(const Trajectory& a, const Trajectory& b) {
  const auto& u = a.levels.back().phi;
  const auto& v = b.levels.back().phi;
  if (u.size() != v.size()) return std::numeric_limits<double>::quiet_NaN();
  double d = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) d = std::max(d, std::abs(u[t] - v[t]));
  return d;
}

json trajectory_summary(const Trajectory& tr) {
  std::array<double, 4> mon{};
  for (const auto& l : tr.levels)
    for (int k = 0; k < 4; ++k) mon[k] = std::max(mon[k], l.monitor_sup[k]);
  return {{"c", tr.c},
          {"levels", tr.levels.size()},
          {"z_final", tr.levels.back().z},
          {"aborted", tr.aborted},
          {"abort_reason", tr.abort_reason},
          {"monitor_max", {{"Ix", mon[0]}, {"Iy", mon[1]}, {"J", mon[2]}, {"K", mon[3]}}}};
}

int cmd_evolve(const Source& s, const EvolveOptions& o, const std::string& out, bool verify, double vtol) {
  std::vector<Trajectory> done;
  json runs = json::array();
  int code = kPass;
  for (const auto& c : c_list(s)) {
    json rep;
    try {
      Built b = build_one(s, c);
      Trajectory tr = evolve(b.data, o.cfg);
      const fs::path dir = fs::path(out) / run_name(tr.c);
      write_trajectory(dir, tr);
      if (o.plots) emit_plots(dir, tr.levels.size());
      rep = trajectory_summary(tr);
      rep["directory"] = run_name(tr.c);
      if (tr.aborted) code = std::max(code, static_cast<int>(kInstability));
      if (verify && !tr.aborted) {
        const auto v = verify_trajectory(tr, vtol);
        write_json(dir / "verification.json", verification_to_json(v));
        rep["verification"] = v.pass() ? "PASS" : "FAIL";
        if (!v.pass() && code == kPass) code = kInadmissible;
      }
      done.push_back(std::move(tr));
    } catch (const InadmissibleError& e) {
      rep = inadmissible_json(e);
      if (c) rep["c"] = *c;
      if (code != kInstability) code = kInadmissible;
    }
    runs.push_back(rep);
  }
  json dist = json::array();
  for (std::size_t i = 0; i < done.size(); ++i)
    for (std::size_t j = i + 1; j < done.size(); ++j)
      dist.push_back({{"c_a", done[i].c}, {"c_b", done[j].c}, {"sup_phi_final", final_distance(done[i], done[j])}});
  const json summary = {{"command", verify ? "sweep" : "evolve"},
                        {"config", config_to_json(o.cfg)},
                        {"runs", runs},
                        {"pairwise_distance", dist}};
  write_json(fs::path(out) / "summary.json", summary);
  print(summary);
  return code;
}

int cmd_verify(const std::string& dir, double tol, const std::string& out) {
  const Trajectory tr = read_trajectory(dir);
  const auto v = verify_trajectory(tr, tol);
  json j = verification_to_json(v);
  if (!out.empty()) write_json(out, j);
  print(j);
  return v.pass() ? kPass : kInadmissible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guichard nets: build Cauchy data from curvature -1 metrics, evolve in z, verify conformal flatness"};
  app.set_config("--config", "", "TOML or INI configuration file");
  app.require_subcommand(1);

  auto* cat = app.add_subcommand("catalog", "list or show catalog entries");
  cat->require_subcommand(1);
  auto* cat_list = cat->add_subcommand("list", "entry names with parameter schemas");
  auto* cat_show = cat->add_subcommand("show", "one entry with its expected diagnostics");
  std::string show_name;
  std::vector<std::string> show_params;
  cat_show->add_option("name", show_name, "entry name")->required();
  cat_show->add_option("--param", show_params, "parameter key=value");

  Source src_c, src_e, src_s;
  std::map<std::string, std::optional<double>> nums_c, nums_e, nums_s;
  std::string out_c = "construct_out", out_e = "evolve_out", out_s = "sweep_out";
  int bundle_degree = 8;

  auto* construct = app.add_subcommand("construct", "build initial-data bundles, one per c");
  add_source_options(construct, src_c, nums_c);
  construct->add_option("--out", out_c, "output directory");
  construct->add_option("--bundle-jet-degree", bundle_degree, "jet degree stored in bundles (-1: values only)");

  EvolveOptions eo, so;
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve initial data in z, one trajectory per c");
  add_source_options(evolve_cmd, src_e, nums_e);
  add_evolve_options(evolve_cmd, eo);
  evolve_cmd->add_option("--out", out_e, "output directory");
  evolve_cmd->add_option("--perturb", src_e.perturb, "add an admissibility-breaking perturbation of this size");

  std::string vdir, vout;
  double vtol = 1e-6, stol = 1e-6;
  auto* verify = app.add_subcommand("verify", "flatness report for a trajectory directory");
  verify->add_option("trajectory", vdir, "trajectory directory")->required();
  verify->add_option("--tol", vtol, "pass tolerance")->check(CLI::PositiveNumber);
  verify->add_option("--out", vout, "also write the report here");

  auto* sweep = app.add_subcommand("sweep", "construct, evolve and verify for a list of c values");
  add_source_options(sweep, src_s, nums_s);
  add_evolve_options(sweep, so);
  sweep->add_option("--out", out_s, "output directory");
  sweep->add_option("--verify-tol", stol, "verification tolerance")->check(CLI::PositiveNumber);
  sweep->add_option("--perturb", src_s.perturb, "add an admissibility-breaking perturbation of this size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*cat_list) return cmd_catalog_list();
    if (*cat_show) return cmd_catalog_show(show_name, show_params);
    if (*construct) {
      finish_source(construct, src_c, nums_c);
      return cmd_construct(src_c, out_c, bundle_degree);
    }
    if (*evolve_cmd) {
      finish_source(evolve_cmd, src_e, nums_e);
      finish_evolve(eo);
      return cmd_evolve(src_e, eo, out_e, false, 0.0);
    }
    if (*verify) return cmd_verify(vdir, vtol, vout);
    if (*sweep) {
      finish_source(sweep, src_s, nums_s);
      if (src_s.c_values.empty()) src_s.c_values = {0.5, 1.0, 2.0};
      finish_evolve(so);
      return cmd_evolve(src_s, so, out_s, true, stol);
    }
  } catch (const InadmissibleError& e) {
    print(inadmissible_json(e));
    return kInadmissible;
  } catch (const InstabilityError& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return kInstability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
