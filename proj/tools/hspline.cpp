#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hspline/hspline.hpp"

using namespace hspline;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kNumerical = 3 };

struct Check {
  std::string name;
  double measured = 0.0;
  std::optional<double> expected;
  std::optional<double> tolerance;
  bool pass = true;
  std::string note;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;
  json config = json::object();
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  // |measured - expected| <= tol
  void near(std::string name, double measured, double expected, double tol, std::string note = {}) {
    checks.push_back({std::move(name), measured, expected, tol, std::abs(measured - expected) <= tol, std::move(note)});
  }
  // measured <= bound
  void at_most(std::string name, double measured, double bound, std::string note = {}) {
    checks.push_back({std::move(name), measured, std::nullopt, bound, measured <= bound, std::move(note)});
  }
  // measured > bound
  void above(std::string name, double measured, double bound, std::string note = {}) {
    checks.push_back({std::move(name), measured, std::nullopt, bound, measured > bound, std::move(note)});
  }
  void info(std::string name, double measured, std::string note = {}) {
    checks.push_back({std::move(name), measured, std::nullopt, std::nullopt, true, std::move(note)});
  }
};

struct RunConfig {
  std::string config_path;
  std::string format = "table";
  std::uint64_t seed = 20240611;
  std::string cache_dir;
  double abs_tol = 1e-8;
  double rel_tol = 1e-10;
  double r_tol = 1e-10;
  double lambda_cutoff = 200.0;
  int per_unit = 16;

  // eval
  int n = 1;
  std::vector<std::string> points;
  std::string grid;
  int random_points = 0;
  std::string strategy = "auto";

  // verify
  std::string suite;
  std::vector<int> orders;
  int window = 1;
  int count = 0;
  std::vector<double> lambdas;
  double h = 1e-4;
  std::string form = "printed";

  // riesz
  std::string separable;
  int p = 3;
  bool phi2_bounds = false;
  bool psi_min = false;
  int lambda_grid = 101;
  int fields = 100;

  // dual
  std::string dual_separable;
  int phi = 0;
  double perturb = 0.0;
  int samples = 11;
  std::string dual_window = "overlap";

  QuadSpec quad() const {
    QuadSpec q = QuadSpec::default_3d();
    q.abs_tol = abs_tol;
    q.rel_tol = rel_tol;
    q.validate();
    return q;
  }
  std::filesystem::path cache() const { return cache_dir.empty() ? hspline::cache_dir() : std::filesystem::path(cache_dir); }
};

std::string fmt(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::vector<double> parse_list(const std::string& s, size_t expect) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.size() != expect) throw CLI::ValidationError("expected " + std::to_string(expect) + " comma-separated numbers: " + s);
  return out;
}

// ---------------------------------------------------------------------------
// output

void emit_table(const Report& r, std::ostream& os) {
  os << r.command << "\n";
  if (!r.checks.empty()) {
    os << std::left << std::setw(44) << "check" << std::setw(18) << "measured" << std::setw(18) << "expected"
       << std::setw(12) << "tolerance" << "status\n";
    for (const auto& c : r.checks) {
      os << std::left << std::setw(44) << c.name << std::setw(18) << fmt(c.measured, 10) << std::setw(18)
         << (c.expected ? fmt(*c.expected, 10) : "-") << std::setw(12) << (c.tolerance ? fmt(*c.tolerance, 3) : "-")
         << (c.tolerance ? (c.pass ? "PASS" : "FAIL") : "info");
      if (!c.note.empty()) os << "  " << c.note;
      os << "\n";
    }
  }
  for (const auto& t : r.tables) {
    os << "\n[" << t.name << "]\n";
    for (const auto& c : t.columns) os << std::left << std::setw(20) << c;
    os << "\n";
    for (const auto& row : t.rows) {
      for (double v : row) os << std::left << std::setw(20) << fmt(v, 10);
      os << "\n";
    }
  }
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  os << (r.pass() ? "overall PASS" : "overall FAIL") << "\n";
}

void emit_csv(const Report& r, std::ostream& os) {
  os << "name,measured,expected,tolerance,status\n";
  for (const auto& c : r.checks)
    os << c.name << ',' << fmt(c.measured, 17) << ',' << (c.expected ? fmt(*c.expected, 17) : "") << ','
       << (c.tolerance ? fmt(*c.tolerance, 17) : "") << ',' << (c.tolerance ? (c.pass ? "PASS" : "FAIL") : "info")
       << "\n";
  for (const auto& t : r.tables) {
    os << "\n# " << t.name << "\n";
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
      for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i], 17);
      os << "\n";
    }
  }
}

void emit_json(const Report& r, std::ostream& os) {
  json j;
  j["tool"] = "hspline";
  j["command"] = r.command;
  j["config"] = r.config;
  j["pass"] = r.pass();
  j["checks"] = json::array();
  for (const auto& c : r.checks) {
    json e{{"name", c.name}, {"measured", c.measured}, {"status", c.tolerance ? (c.pass ? "PASS" : "FAIL") : "info"}};
    e["expected"] = c.expected ? json(*c.expected) : json(nullptr);
    e["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
    if (!c.note.empty()) e["note"] = c.note;
    j["checks"].push_back(e);
  }
  j["tables"] = json::array();
  for (const auto& t : r.tables) j["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  j["notes"] = r.notes;
  os << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// eval

Report cmd_eval(const RunConfig& cfg) {
  Report r;
  r.command = "eval";
  if (cfg.n < 1 || cfg.n > 3) throw CLI::ValidationError("--n", "unknown order " + std::to_string(cfg.n) + " (1, 2 or 3)");
  Strategy s = Strategy::nested_quadrature;
  if (cfg.strategy == "slice") s = Strategy::slice_transform;
  if (cfg.strategy == "closed") s = Strategy::closed_form;
  if (s == Strategy::slice_transform && cfg.n != 2) throw CLI::ValidationError("--strategy", "slice is only for n = 2");
  if (s == Strategy::closed_form && cfg.n != 1) throw CLI::ValidationError("--strategy", "closed is only for n = 1");
  std::shared_ptr<const Phi3Evaluator> phi3;
  if (cfg.n == 3) phi3 = std::make_shared<Phi3Evaluator>(load_phi2_tables(cfg.cache(), cfg.per_unit));
  InversionOptions inv;
  inv.Lambda = cfg.lambda_cutoff;
  const SplineModel model(cfg.n, s, phi3);
  auto value = [&](const HPoint& p) {
    return s == Strategy::slice_transform ? phi2_eval(p, inv) : model(p);
  };

  std::vector<HPoint> pts;
  for (const auto& text : cfg.points) {
    const auto v = parse_list(text, 3);
    pts.push_back({v[0], v[1], v[2]});
  }
  if (cfg.random_points > 0) {
    std::mt19937_64 rng(cfg.seed);
    const Box3 b = model.support();
    std::uniform_real_distribution<double> X(b[0].lo, b[0].hi), Y(b[1].lo, b[1].hi), T(b[2].lo, b[2].hi);
    for (int i = 0; i < cfg.random_points; ++i) {
      const double x = X(rng), y = Y(rng), t = T(rng);
      pts.push_back({x, y, t});
    }
  }
  if (!pts.empty()) {
    Table t{"values", {"x", "y", "t", "value"}, {}};
    for (const auto& p : pts) t.rows.push_back({p.x, p.y, p.t, value(p)});
    r.tables.push_back(std::move(t));
  }
  if (!cfg.grid.empty()) {
    const auto v = parse_list(cfg.grid, 3);
    const std::array<int, 3> shape{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
    for (int a : shape)
      if (a < 2) throw CLI::ValidationError("--grid", "each grid dimension needs at least 2 samples");
    GridCacheFile probe;
    probe.kind = s == Strategy::slice_transform ? "phi-slice" : "phi";
    probe.order = cfg.n;
    probe.tolerance = s == Strategy::slice_transform ? inv.tail_tol : 0.0;
    probe.grid = Grid3D{model.support(), shape, {}};
    const auto f = load_or_compute(cfg.cache(), probe, [&] { return fill_grid(value, model.support(), shape); });
    double mx = 0.0, sum = 0.0;
    for (double x : f.grid.samples) {
      mx = std::max(mx, x);
      sum += x;
    }
    r.info("grid samples", static_cast<double>(f.grid.samples.size()));
    r.info("grid max", mx);
    r.info("grid mean", sum / f.grid.samples.size());
    r.notes.push_back("cache file " + (cfg.cache() / probe.key()).string());
  }
  if (pts.empty() && cfg.grid.empty()) throw CLI::ValidationError("eval", "give --point, --random or --grid");
  return r;
}

// ---------------------------------------------------------------------------
// verify

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> d) { return v.empty() ? d : v; }

void verify_group(const RunConfig& cfg, Report& r) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  auto rnd = [&] { return HPoint{U(rng), U(rng), U(rng)}; };
  auto dist = [](const HPoint& a, const HPoint& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t)});
  };
  const int N = cfg.count > 0 ? cfg.count : 1000;
  double assoc = 0, ident = 0, inv = 0;
  for (int i = 0; i < N; ++i) {
    const HPoint a = rnd(), b = rnd(), c = rnd();
    assoc = std::max(assoc, dist(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c))));
    ident = std::max({ident, dist(group_mul(a, identity()), a), dist(group_mul(identity(), a), a)});
    inv = std::max({inv, dist(group_mul(a, group_inv(a)), identity()), dist(group_mul(group_inv(a), a), identity())});
  }
  r.at_most("associativity", assoc, 1e-12);
  r.at_most("identity", ident, 1e-12);
  r.at_most("inverse", inv, 1e-12);
}

void verify_integrals(const RunConfig& cfg, Report& r) {
  std::vector<int> orders = cfg.orders.empty() ? std::vector<int>{1, 2} : cfg.orders;
  for (int n : orders) {
    if (n < 1 || n > 3) throw CLI::ValidationError("--n", "integrals: orders 1, 2, 3");
    std::unique_ptr<Phi3Evaluator> e;
    if (n == 3) e = std::make_unique<Phi3Evaluator>(load_phi2_tables(cfg.cache(), cfg.per_unit));
    const double tol = n == 1 ? 1e-14 : (n == 2 ? 1e-6 : 1e-3);
    r.near("integral phi" + std::to_string(n), spline_integral(n, e.get()), std::pow(std::numbers::sqrt2, n), tol);
  }
}

void verify_periodization(const RunConfig& cfg, Report& r) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> X(0.0, 2.0), Y(0.0, 1.0);
  const int N = cfg.count > 0 ? cfg.count : 20;
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = X(rng), y = Y(rng);
    d1 = std::max(d1, std::abs(periodization_check(1, x, y) - inv_sqrt2));
    d2 = std::max(d2, std::abs(periodization_check(2, x, y) - 1.0));
  }
  r.at_most("periodization phi1 max |v - 1/sqrt2|", d1, 1e-10);
  r.at_most("periodization phi2 max |v - 1|", d2, 1e-4);
}

void verify_orthonormality(const RunConfig& cfg, Report& r) {
  if (cfg.window < 1 || cfg.window > 3) throw CLI::ValidationError("--window", "orthonormality: window 1..3");
  r.at_most("max |Gram - I| window " + std::to_string(cfg.window), orthonormality_check_phi1(cfg.window), 1e-8);
}

void verify_kernels(const RunConfig& cfg, Report& r) {
  for (double lam : or_default(cfg.lambdas, {0.25, 0.37, 0.8})) {
    const Kernel2D a = kernel_recursion(kernel_phi1(lam), lam);
    const Kernel2D b = kernel_from_slice(phi2_slice(lam));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double xi = -1.0 + 4.0 * (i + 0.5) / 20.0, eta = -1.0 + 4.0 * (j + 0.5) / 20.0;
        worst = std::max(worst, std::abs(a(xi, eta) - b(xi, eta)));
      }
    r.at_most("kernel paths lambda=" + fmt(lam, 4), worst, 1e-4);
  }
}

void verify_weyl(const RunConfig& cfg, Report& r) {
  for (double lam : or_default(cfg.lambdas, {0.25, 0.37, 0.5, 0.8, 2.3})) {
    for (int n : {1, 2}) {
      const WeylCheck w = weyl_norm_check(n == 1 ? phi1_slice(lam) : phi2_slice(lam));
      const double rel = std::abs(w.lhs - w.rhs) / std::max(std::abs(w.lhs), 1e-300);
      r.at_most("weyl phi" + std::to_string(n) + " lambda=" + fmt(lam, 4), rel, 1e-6,
                "lhs " + fmt(w.lhs, 10) + " rhs " + fmt(w.rhs, 10));
    }
  }
}

void verify_phi2_oracle(const RunConfig& cfg, Report& r) {
  std::mt19937_64 rng(cfg.seed);
  const Box3 b = support_box(2);
  std::uniform_real_distribution<double> X(0.05, 3.95), Y(0.05, 1.95), T(b[2].lo, b[2].hi);
  InversionOptions inv;
  inv.Lambda = cfg.lambda_cutoff;
  const int N = cfg.count > 0 ? cfg.count : 50;
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    const HPoint p{X(rng), Y(rng), T(rng)};
    worst = std::max(worst, std::abs(phi2_eval(p, inv) - phi2_direct(p)));
  }
  r.at_most("phi2 slice transform vs direct convolution", worst, 1e-3);
}

void verify_vector_fields(const RunConfig& cfg, Report& r) {
  std::mt19937_64 rng(cfg.seed);
  const int N = cfg.count > 0 ? cfg.count : 10;
  const auto pts = admissible_points(N, cfg.h, rng);
  const FieldForm form = cfg.form == "corrected" ? FieldForm::corrected : FieldForm::printed;
  Table t{"vector fields", {"x", "y", "t", "field", "lhs", "rhs_printed", "rhs_corrected"}, {}};
  for (Field f : {Field::T, Field::X, Field::Y}) {
    double worst = 0.0;
    for (const auto& p : pts) {
      const FieldCheck a = vector_field_check(1, f, p, cfg.h, form);
      worst = std::max(worst, a.residual);
      t.rows.push_back({p.x, p.y, p.t, static_cast<double>(f), a.lhs, vector_field_rhs(f, p, FieldForm::printed),
                        vector_field_rhs(f, p, FieldForm::corrected)});
    }
    const char* name = f == Field::T ? "T" : (f == Field::X ? "X" : "Y");
    r.at_most(std::string("field ") + name + " (" + cfg.form + ") max residual", worst, 1e-3);
  }
  r.tables.push_back(std::move(t));
}

inline constexpr double nonsymmetry_threshold = 1e-3;

void verify_nonsymmetry(const RunConfig& cfg, Report& r) {
  std::vector<int> orders = cfg.orders.empty() ? std::vector<int>{1, 2} : cfg.orders;
  for (int n : orders) {
    if (n == 1) {
      r.at_most("phi1 residual at alpha=1/2", nonsymmetry_residual(1, 0.5), 1e-8);
    } else if (n == 2) {
      const NonsymmetryMin m = nonsymmetry_minimize(2);
      r.above("phi2 min over alpha of residual", m.residual, nonsymmetry_threshold, "argmin alpha " + fmt(m.alpha, 6));
    } else {
      throw CLI::ValidationError("--n", "nonsymmetry: orders 1 and 2");
    }
  }
}

Report cmd_verify(const RunConfig& cfg) {
  Report r;
  r.command = "verify " + cfg.suite;
  if (cfg.suite == "group") verify_group(cfg, r);
  else if (cfg.suite == "integrals") verify_integrals(cfg, r);
  else if (cfg.suite == "periodization") verify_periodization(cfg, r);
  else if (cfg.suite == "orthonormality") verify_orthonormality(cfg, r);
  else if (cfg.suite == "kernels") verify_kernels(cfg, r);
  else if (cfg.suite == "weyl") verify_weyl(cfg, r);
  else if (cfg.suite == "phi2-oracle") verify_phi2_oracle(cfg, r);
  else if (cfg.suite == "vector-fields") verify_vector_fields(cfg, r);
  else if (cfg.suite == "nonsymmetry") verify_nonsymmetry(cfg, r);
  else throw CLI::ValidationError("suite", "unknown suite " + cfg.suite);
  return r;
}

// ---------------------------------------------------------------------------
// riesz

struct SeparableSpec {
  std::function<cplx(double)> h_hat;
  Decay decay;
};

SeparableSpec separable_spec(const std::string& name, int p) {
  if (name == "B1" || name == "B2" || name == "B3") {
    const int n = name[1] - '0';
    Decay d;
    d.power = 2.0 * n;
    d.pure_power = true;
    return {[n](double w) { return classical_bspline_hat(n, w); }, d};
  }
  if (name == "chi") {
    if (p < 1) throw CLI::ValidationError("--p", "p must be positive");
    Decay d;
    d.compact_radius = p + 1;
    return {[p](double w) { return cplx(w >= 0.0 && w < p ? 1.0 : 0.0); }, d};
  }
  throw CLI::ValidationError("--separable", "unknown generator " + name);
}

// Plain partial sum over |r| <= R; the oracle for the symbol.
double brute_symbol(const std::function<cplx(double)>& h_hat, double lambda, int R) {
  double s = 0.0;
  for (int r = -R; r <= R; ++r) s += std::norm(h_hat(-(lambda - r)));
  return s;
}

void riesz_separable(const RunConfig& cfg, Report& r) {
  const SeparableSpec sp = separable_spec(cfg.separable, cfg.p);
  const SeparableBounds b = riesz_bounds_separable(sp.h_hat, sp.decay, 1e-12, cfg.lambda_grid);
  const int R = 20000;
  double omin = INFINITY, omax = -INFINITY;
  Table t{"symbol", {"lambda", "S", "S_bruteforce"}, {}};
  for (int i = 1; i <= cfg.lambda_grid; ++i) {
    const double lam = static_cast<double>(i) / cfg.lambda_grid;
    const double o = brute_symbol(sp.h_hat, lam, R);
    omin = std::min(omin, o);
    omax = std::max(omax, o);
    t.rows.push_back({lam, separable_symbol(sp.h_hat, lam, sp.decay, 1e-12), o});
  }
  for (double lam : {b.lambda_min, b.lambda_max}) {
    const double o = brute_symbol(sp.h_hat, lam, R);
    omin = std::min(omin, o);
    omax = std::max(omax, o);
  }
  // The truncated oracle misses at most 2 sum_{r > R} (pi (r - 1))^{-p}.
  const double slack = sp.decay.compact_radius ? 0.0 : 4.0 / (std::pow(pi, sp.decay.power) * (sp.decay.power - 1.0) *
                                                              std::pow(R - 1.0, sp.decay.power - 1.0));
  r.near("A vs truncated r-sum oracle", b.A, 2.0 * omin, 1e-6 + slack, "at lambda " + fmt(b.lambda_min, 8));
  r.near("B vs truncated r-sum oracle", b.B, 2.0 * omax, 1e-6 + slack, "at lambda " + fmt(b.lambda_max, 8));
  if (cfg.separable == "B1") {
    r.near("A", b.A, 2.0, 1e-8);
    r.near("B", b.B, 2.0, 1e-8);
  } else if (cfg.separable == "B2") {
    r.near("A", b.A, 2.0 / 3.0, 1e-6);
    r.near("B", b.B, 2.0, 1e-6);
  } else if (cfg.separable == "B3") {
    r.near("A", b.A, 4.0 / 15.0, 1e-6);
    r.near("B", b.B, 2.0, 1e-6);
  } else {
    r.near("min S", 0.5 * b.A, cfg.p, 0.0);
    r.near("max S", 0.5 * b.B, cfg.p, 0.0);
  }
  r.tables.push_back(std::move(t));
}

void riesz_phi2(const RunConfig& cfg, Report& r) {
  const UpperBoundTerms ub = upper_bound_terms_phi2();
  r.near("upper bound B", ub.total, 1.715, 0.01);
  const double bound1 = 2.0 / 27.0 - 16.0 / (9.0 * std::pow(pi, 4));
  double worst = -INFINITY;
  for (int i = 1; i <= cfg.lambda_grid; ++i) {
    const double lam = static_cast<double>(i) / cfg.lambda_grid;
    worst = std::max(worst, I_abs_sum(1, lam, cfg.r_tol) - bound1);
  }
  r.at_most("max sum_r |I_1| - (2/27 - 16/(9 pi^4))", worst, 0.0);
  const LowerEstimates le = lower_estimates_phi2(cfg.lambda_grid, std::max(cfg.r_tol, 1e-9));
  const double printed[5] = {0.0552, 0.1691, 0.1348, 0.1465, 0.6867};
  Table t{"lower estimates", {"j", "min_abs_sum", "argmin_lambda", "printed"}, {}};
  for (size_t q = 0; q < 5; ++q) {
    r.near("lower estimate I_" + std::to_string(I_indices[q]), le.min_abs[q], printed[q], 0.05 * printed[q]);
    t.rows.push_back({static_cast<double>(I_indices[q]), le.min_abs[q], le.argmin[q], printed[q]});
  }
  r.tables.push_back(std::move(t));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> L(0.02, 1.0);
  const int per_lambda = 20;
  double conj_defect = 0.0, imag_rel = 0.0, ratio = 0.0;
  std::optional<Phi2GramSums> sums;
  for (int i = 0; i < cfg.fields; ++i) {
    if (i % per_lambda == 0) sums = phi2_gram_sums(L(rng), cfg.r_tol);
    const CoeffField c = CoeffField::random(2, rng);
    const Phi2GramTerms terms = phi2_gram_form(*sums, c);
    conj_defect = std::max(conj_defect, m_conjugacy_defect(terms));
    imag_rel = std::max(imag_rel, std::abs(terms.imag) / c.norm_sq());
    ratio = std::max(ratio, terms.value / (ub.total * c.norm_sq()));
  }
  r.at_most("M conjugacy defect", conj_defect, 1e-8);
  r.at_most("|Im form| / ||c||^2", imag_rel, 1e-8);
  r.at_most("max form / (B ||c||^2)", ratio, 1.0);
}

void riesz_psi(const RunConfig&, Report& r) {
  const PsiMin m = psi_minimize();
  r.near("lambda0", m.lambda0, 0.762714, 1e-4);
  r.near("Psi(lambda0)", m.psi, 0.638135, 1e-4);
  r.near("Psi''(lambda0)", m.psi_second, 12.8421, 1e-2);
  double worst = 0.0;
  for (int p : {3, 4, 5, 8, 12})
    for (int i = 1; i <= 99; ++i) {
      const double lam = i / 100.0;
      worst = std::max(worst, std::abs(A_p(p, lam) - A_p_direct(p, lam)));
    }
  r.at_most("A_p closed form vs finite sum", worst, 1e-10);
  r.near("A_3(1)", A_p(3, 1.0), 2.0, 1e-6);
  r.near("A_3(0+)", A_p(3, 1e-9), 0.0, 1e-6);
}

Report cmd_riesz(const RunConfig& cfg) {
  Report r;
  r.command = "riesz";
  int chosen = 0;
  if (!cfg.separable.empty()) ++chosen, r.command += " --separable " + cfg.separable, riesz_separable(cfg, r);
  if (cfg.phi2_bounds) ++chosen, r.command += " --phi2-bounds", riesz_phi2(cfg, r);
  if (cfg.psi_min) ++chosen, r.command += " --psi-min", riesz_psi(cfg, r);
  if (!chosen) throw CLI::ValidationError("riesz", "choose --separable, --phi2-bounds or --psi-min");
  return r;
}

// ---------------------------------------------------------------------------
// dual

Report cmd_dual(const RunConfig& cfg) {
  Report r;
  Generator phi;
  if (!cfg.dual_separable.empty()) {
    if (cfg.dual_separable != "B1" && cfg.dual_separable != "B2" && cfg.dual_separable != "B3")
      throw CLI::ValidationError("--separable", "unknown generator " + cfg.dual_separable);
    phi = bspline_generator(cfg.dual_separable[1] - '0');
    r.command = "dual --separable " + cfg.dual_separable;
  } else if (cfg.phi == 1) {
    phi = phi1_generator_generic();
    r.command = "dual --phi 1";
  } else {
    throw CLI::ValidationError("dual", "choose --separable B1|B2|B3 or --phi 1");
  }
  const QuadSpec q = cfg.quad();
  std::vector<LatticeIndex> window;
  if (cfg.dual_window == "overlap") window = overlap_window(phi.support);
  else if (cfg.dual_window == "printed") window = index_window(1, std::max(std::abs(phi.support[2].lo), phi.support[2].hi));
  else window = index_window_general(1);

  const MomentSystem sys = assemble_moment_system(phi, window, q);
  DualGenerator dual;
  try {
    dual = solve_dual(sys, phi);
  } catch (const UnsolvableMoment& e) {
    r.checks.push_back({"moment system solvable", 0.0, std::nullopt, std::nullopt, false,
                        std::string(e.what()) + " (the generator restricted to Q is a combination of the others)"});
    return r;
  }
  if (cfg.perturb != 0.0) {
    auto d = dual.d;
    d[pivot_index(window)] += cfg.perturb;
    dual = dual_with_coefficients(phi, window, d);
    r.notes.push_back("coefficient at (0,0,0) perturbed by " + fmt(cfg.perturb, 6));
  }
  Table dt{"coefficients", {"k", "l", "m", "d"}, {}};
  for (size_t i = 0; i < window.size(); ++i)
    dt.rows.push_back({1.0 * window[i].k, 1.0 * window[i].l, 1.0 * window[i].m, dual.d[i]});
  r.tables.push_back(dt);
  r.info("rank", sys.matrix.rows() ? dual.report.rank : 0);
  r.info("condition number", dual.report.condition);

  const bool b3 = cfg.dual_separable == "B3";
  if (b3 && cfg.dual_window == "overlap") {
    auto d_at = [&](int m) {
      for (size_t i = 0; i < window.size(); ++i)
        if (window[i] == LatticeIndex{0, 0, m}) return dual.d[i];
      return 0.0;
    };
    const double d0 = d_at(0), d1 = d_at(-1), d2 = d_at(-2);
    r.near("6 d0 + 13 d-1 + d-2", 6 * d0 + 13 * d1 + d2, 60.0, 1e-10);
    r.near("d0 + 54/13 d-1 + d-2", d0 + 54.0 / 13.0 * d1 + d2, 0.0, 1e-10);
    r.near("d0 + 13 d-1 + 6 d-2", d0 + 13 * d1 + 6 * d2, 0.0, 1e-10);
  }
  const int S = std::max(cfg.samples, 2);
  Table st{"dual samples", b3 ? std::vector<std::string>{"t", "dual", "closed_form"} : std::vector<std::string>{"t", "dual"}, {}};
  double sample_dev = 0.0;
  for (int i = 0; i < S; ++i) {
    const double t = std::min(i / (S - 1.0), 1.0 - 1e-12);
    const double v = dual({1.0, 0.5, t});
    if (b3) {
      const double c = 1.5 * (40 * t * t - 36 * t + 5);
      sample_dev = std::max(sample_dev, std::abs(v - c));
      st.rows.push_back({t, v, c});
    } else {
      st.rows.push_back({t, v});
    }
  }
  r.tables.push_back(st);
  if (b3) r.at_most("max |dual - 1.5(40t^2-36t+5)|", sample_dev, 1e-8);

  const double bio = verify_biorthogonality(phi, dual, window, q);
  r.at_most("biorthogonality deviation", bio, phi.separable ? 1e-6 : 1e-8);
  r.at_most("dual orthogonality", dual_orthogonality(dual, window, q), 1e-8);

  Combination f1;
  f1.coeffs[{0, 0, 1}] = 1.0;
  Combination f2;
  f2.coeffs[{0, 0, 0}] = 2.0;
  f2.coeffs[{1, 0, 0}] = -3.0;
  double rec = 0.0, idem = 0.0;
  for (const auto& f : {f1, f2}) {
    const Combination once = reconstruct(f, phi, dual, q);
    rec = std::max(rec, coefficient_distance(once, f));
    idem = std::max(idem, coefficient_distance(reconstruct(once, phi, dual, q), once));
  }
  r.at_most("reconstruction coefficient error", rec, 1e-6);
  r.at_most("reconstruction idempotence", idem, 1e-8);
  return r;
}

// ---------------------------------------------------------------------------

void apply_config(CLI::App& app, CLI::App* sub, const std::string& path, json& echo) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "expected a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt) throw CLI::ValidationError("--config", "unknown key " + key);
    std::vector<std::string> vals;
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array())
      for (const auto& v : value) vals.push_back(text(v));
    else
      vals.push_back(text(value));
    opt->clear();
    for (auto& v : vals) opt->add_result(v);
    opt->run_callback();
    echo[key] = value;
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Heisenberg-group B-splines: evaluation, verification suites, Riesz bounds and duals"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "CSV output: first block name,measured,expected,tolerance,status (status PASS, FAIL or info);\n"
      "each data table follows after a blank line as '# <table name>', a header row and numeric rows.\n"
      "Exit codes: 0 pass, 1 assertion failure, 2 usage error, 3 numerical non-convergence.");
  app.add_option("--config", cfg.config_path, "JSON object whose keys override command-line options");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  app.add_option("--seed", cfg.seed, "Seed for sample-point generation");
  app.add_option("--cache-dir", cfg.cache_dir, "Grid cache directory (default $HSPLINE_CACHE_DIR)");
  app.add_option("--abs-tol", cfg.abs_tol, "Absolute tolerance of 3-D quadratures")->check(CLI::PositiveNumber);
  app.add_option("--rel-tol", cfg.rel_tol, "Relative tolerance of 3-D quadratures")->check(CLI::NonNegativeNumber);
  app.add_option("--r-tol", cfg.r_tol, "Tail tolerance of r-sums")->check(CLI::PositiveNumber);
  app.add_option("--lambda-cutoff", cfg.lambda_cutoff, "Truncation of the lambda-inversion integral")
      ->check(CLI::PositiveNumber);
  app.add_option("--per-unit", cfg.per_unit, "phi_2 table samples per unit length")->check(CLI::Range(4, 64));

  auto* eval = app.add_subcommand("eval", "Evaluate phi_n at points or on a cached grid");
  eval->add_option("--n", cfg.n, "Spline order")->required();
  eval->add_option("--point", cfg.points, "Point x,y,t (repeatable)");
  eval->add_option("--random", cfg.random_points, "Number of seeded random points in the support");
  eval->add_option("--grid", cfg.grid, "Grid shape nx,ny,nt over the support box; cached on disk");
  eval->add_option("--strategy", cfg.strategy, "Evaluation path")
      ->check(CLI::IsMember({"auto", "closed", "slice", "nested"}));

  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("suite", cfg.suite, "Suite name")
      ->required()
      ->check(CLI::IsMember({"group", "integrals", "periodization", "orthonormality", "kernels", "weyl", "phi2-oracle",
                             "vector-fields", "nonsymmetry"}));
  verify->add_option("--n", cfg.orders, "Spline orders")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  verify->add_option("--window", cfg.window, "Lattice window radius");
  verify->add_option("--count", cfg.count, "Number of sample points");
  verify->add_option("--lambda", cfg.lambdas, "lambda values")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  verify->add_option("--step", cfg.h, "Finite-difference step")->check(CLI::Range(1e-6, 1e-2));
  verify->add_option("--form", cfg.form, "Vector-field right-hand side")
      ->check(CLI::IsMember({"printed", "corrected"}));

  auto* riesz = app.add_subcommand("riesz", "Riesz bounds and Gramian estimates");
  riesz->add_option("--separable", cfg.separable, "Separable generator B1, B2, B3 or chi");
  riesz->add_option("--p", cfg.p, "Length p of the indicator for --separable chi");
  riesz->add_flag("--phi2-bounds", cfg.phi2_bounds, "Upper bound and lower estimates for phi_2");
  riesz->add_flag("--psi-min", cfg.psi_min, "Minimum of p - A_p for p = 3");
  riesz->add_option("--lambda-grid", cfg.lambda_grid, "Points of the lambda grid")->check(CLI::Range(11, 2001));
  riesz->add_option("--fields", cfg.fields, "Random coefficient fields")->check(CLI::Range(1, 10000));

  auto* dualc = app.add_subcommand("dual", "Oblique dual by a finite moment problem");
  dualc->add_option("--separable", cfg.dual_separable, "Separable generator B1, B2 or B3");
  dualc->add_option("--phi", cfg.phi, "Heisenberg spline order (1)");
  dualc->add_option("--perturb", cfg.perturb, "Added to the coefficient at (0,0,0)");
  dualc->add_option("--samples", cfg.samples, "Samples of the dual along t");
  dualc->add_option("--window", cfg.dual_window, "Index window")
      ->check(CLI::IsMember({"overlap", "printed", "general"}));

  try {
    app.parse(argc, argv);
    json echo = json::object();
    if (!cfg.config_path.empty()) {
      CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
      apply_config(app, sub, cfg.config_path, echo);
    }
    Report report;
    if (eval->parsed()) report = cmd_eval(cfg);
    else if (verify->parsed()) report = cmd_verify(cfg);
    else if (riesz->parsed()) report = cmd_riesz(cfg);
    else report = cmd_dual(cfg);
    report.config = echo;
    report.config["seed"] = cfg.seed;
    if (cfg.format == "json") emit_json(report, std::cout);
    else if (cfg.format == "csv") emit_csv(report, std::cout);
    else emit_table(report, std::cout);
    return report.pass() ? kPass : kFail;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNumerical;
  } catch (const CacheError& e) {
    std::cerr << "cache: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}
