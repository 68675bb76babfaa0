#include "locrel/checks.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "locrel/cosetfun.hpp"
#include "locrel/hecke.hpp"
#include "locrel/whittaker.hpp"

namespace locrel {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::vector<long>> exponent_grid(int n, long bound) {
  std::vector<std::vector<long>> out;
  std::vector<long> cur(static_cast<size_t>(n));
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (long v = -bound; v <= bound; ++v) {
      cur[size_t(i)] = v;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return out;
}

// Non-increasing integer tuples whose absolute-value sum is at most bound.
std::vector<std::vector<long>> dominant_tuples(int len, long bound) {
  std::vector<std::vector<long>> out;
  std::vector<long> cur(static_cast<size_t>(len));
  auto rec = [&](auto&& self, int i, long cap, long left) -> void {
    if (i == len) {
      out.push_back(cur);
      return;
    }
    for (long v = -left; v <= std::min(cap, left); ++v) {
      cur[size_t(i)] = v;
      self(self, i + 1, v, left - std::abs(v));
    }
  };
  rec(rec, 0, bound, bound);
  return out;
}

std::string tuple_str(const std::vector<long>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

}  // namespace

CheckReport birch_check(int ell, int n) {
  CheckReport rep;
  rep.check = "birch";
  rep.param("n", n);
  rep.param("ell", ell);
  auto t0 = Clock::now();

  mpz_class mag;
  mpz_ui_pow_ui(mag.get_mpz_t(), static_cast<unsigned long>(ell),
                static_cast<unsigned long>(n * (n + 1) * (n + 2) / 6));
  mpq_class signed_mag(mag);
  if (n % 2 == 1) signed_mag = -signed_mag;
  const Scalar expect(ell, signed_mag);
  const Scalar zero(ell);

  auto reps = congruence_transversal(ell, n, 2);
  rep.param("transversal", long(reps.size()));
  auto grid = exponent_grid(n, 2);
  long locus = 0, points = 0;
  for (const Mat& k : reps) {
    const bool on_locus = birch_locus_member(k);
    locus += on_locus;
    for (const auto& a : grid) {
      Mat h = diag_pi_powers(ell, a) * k;
      const bool zero_a = std::all_of(a.begin(), a.end(), [](long v) { return v == 0; });
      Scalar got = birch_sum(ell, n, h);
      const Scalar& want = (zero_a && on_locus) ? expect : zero;
      ++points;
      if (got != want) {
        rep.status = "fail";
        rep.witness = "exponents " + tuple_str(a) + " over a transversal point " +
                      (on_locus ? "on" : "off") + " the locus: got " + got.str() +
                      ", expected " + want.str();
        rep.seconds = elapsed_since(t0);
        return rep;
      }
    }
  }
  rep.param("points", points);
  rep.param("locus", locus);
  rep.status = "pass";
  rep.seconds = elapsed_since(t0);
  return rep;
}

CheckReport satake_check(int ell, int n, unsigned long seed, long pairs, long bound) {
  CheckReport rep;
  rep.check = "satake";
  rep.param("n", n);
  rep.param("ell", ell);
  rep.param("seed", long(seed));
  rep.param("pairs", pairs);
  rep.param("bound", bound);
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);

  auto rand_tuple = [&](int m, long lo, long hi) {
    std::vector<long> v;
    for (int i = 0; i < m; ++i) {
      v.push_back(lo + long(rng() % static_cast<unsigned long>(hi - lo + 1)));
    }
    std::sort(v.begin(), v.end(), std::greater<long>());
    return v;
  };
  auto rand_coeff = [&]() {
    mpq_class q(long(rng() % 7) - 3, 1 + long(rng() % 3));
    q.canonicalize();
    if (q == 0) q = 1;
    return CycRat(ell, q);
  };

  // Homomorphism and involution compatibility on seeded random pairs.
  for (long trial = 0; trial < pairs; ++trial) {
    HeckeElt f(ell, n), g(ell, n);
    f.add({rand_tuple(n, -1, 2), rand_tuple(n + 1, -1, 1), long(rng() % 3) - 1},
          rand_coeff());
    f.add({rand_tuple(n, -1, 1), rand_tuple(n + 1, 0, 1), long(rng() % 2)},
          rand_coeff());
    g.add({rand_tuple(n, 0, n == 1 ? 2 : 1), rand_tuple(n + 1, 0, 1), long(rng() % 3) - 1},
          rand_coeff());
    if (satake(convolve(f, g)) != satake(f) * satake(g)) {
      rep.status = "fail";
      rep.witness = "transform of a convolution differs from the product at f=" +
                    f.str() + " g=" + g.str();
      rep.seconds = elapsed_since(t0);
      return rep;
    }
    if (involution(involution(f)) != f ||
        satake(involution(f)) != satake(f).invert_variables()) {
      rep.status = "fail";
      rep.witness = "involution compatibility fails at f=" + f.str();
      rep.seconds = elapsed_since(t0);
      return rep;
    }
  }

  // Round trip on the bounded basis box.
  long keys = 0;
  for (const auto& lam : dominant_tuples(n, bound)) {
    for (const auto& mu : dominant_tuples(n + 1, bound)) {
      for (long t = -bound; t <= bound; ++t) {
        HeckeElt f(ell, n);
        f.add({lam, mu, t}, CycRat(ell, 1L));
        ++keys;
        if (inverse_satake(ell, n, satake(f)) != f) {
          rep.status = "fail";
          rep.witness = "round trip misses the basis element " + HeckeKey{lam, mu, t}.str();
          rep.seconds = elapsed_since(t0);
          return rep;
        }
      }
    }
  }
  rep.param("roundtrip_keys", keys);
  rep.status = "pass";
  rep.seconds = elapsed_since(t0);
  return rep;
}

CheckReport ell_op_check(int ell, int n) {
  CheckReport rep;
  rep.check = "ell-op";
  rep.param("n", n);
  rep.param("ell", ell);
  auto t0 = Clock::now();
  Scalar product(ell, 1L);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n + 1; ++j) {
      product *= Scalar(ell, 1L) -
                 (Scalar::a_var(ell, i) * Scalar::b_var(ell, j) * Scalar::t_var(ell, 1))
                     .times(CycRat::sqrt_ell(ell, -1));
    }
  }
  HeckeElt L = ell_operator(ell, n);
  bool integral = true;
  for (const auto& [key, c] : L.terms()) integral = integral && c.is_ell_integral();
  if (satake(L) != product) {
    rep.status = "fail";
    rep.witness = "transform of the distinguished element differs from the product form";
  } else if (!integral) {
    rep.status = "fail";
    rep.witness = "distinguished element has a coefficient outside Z[zeta, 1/ell]";
  } else {
    rep.status = "pass";
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

CheckReport euler_factor_check(int ell, int n) {
  CheckReport rep;
  rep.check = "euler-factor";
  rep.param("n", n);
  rep.param("ell", ell);
  auto t0 = Clock::now();
  Scalar sat = satake(involution(ell_operator(ell, n)));
  if (sat.max_t_degree() > 0) {
    rep.status = "fail";
    rep.witness = "inverted element's transform has a positive T-degree; the "
                  "substitution into the inverse variable is not total";
    rep.seconds = elapsed_since(t0);
    return rep;
  }
  Scalar lhs = sat.negate_t_exponents();
  Scalar rhs(ell, 1L);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n + 1; ++j) {
      rhs *= Scalar(ell, 1L) -
             (Scalar::a_var(ell, i, -1) * Scalar::b_var(ell, j, -1) * Scalar::t_var(ell, 1))
                 .times(CycRat::sqrt_ell(ell, -1));
    }
  }
  if (lhs != rhs) {
    rep.status = "fail";
    rep.witness = "rewritten transform differs from the reciprocal-parameter product";
  } else {
    rep.status = "pass";
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "lemma21",    "wild",     "stab-factors", "birch",
      "satake",     "ell-op",   "prop45",       "integrality",
      "tame",       "euler-factor", "branching", "lattice-int"};
  return names;
}

std::vector<CheckReport> run_checks(const std::string& name, const RunConfig& cfg) {
  SolveBudget budget;
  if (cfg.budget_m > 0) budget.cells = cfg.budget_m;
  if (cfg.budget_card > 0) budget.transversal = cfg.budget_card;

  std::map<std::string, std::function<void(std::vector<CheckReport>&)>> table;
  table["lemma21"] = [&](std::vector<CheckReport>& out) {
    out.push_back(coset_trace_check(cfg.seed, 100));
  };
  table["wild"] = [&](std::vector<CheckReport>& out) {
    CosetEngine eng(cfg.ell, cfg.n, budget);
    for (int t = cfg.t_lo; t <= cfg.t_hi; ++t) {
      out.push_back(wild_check(cfg.ell, cfg.n, t, eng));
    }
  };
  table["stab-factors"] = [&](std::vector<CheckReport>& out) {
    CosetEngine eng(cfg.ell, cfg.n, budget);
    for (int t = cfg.t_lo; t <= cfg.t_hi; ++t) {
      out.push_back(stab_factor_check(cfg.ell, cfg.n, t, eng));
    }
  };
  table["birch"] = [&](std::vector<CheckReport>& out) {
    out.push_back(birch_check(cfg.ell, cfg.n));
  };
  table["satake"] = [&](std::vector<CheckReport>& out) {
    out.push_back(satake_check(cfg.ell, cfg.n, cfg.seed, 20, 3));
  };
  table["ell-op"] = [&](std::vector<CheckReport>& out) {
    out.push_back(ell_op_check(cfg.ell, cfg.n));
  };
  table["prop45"] = [&](std::vector<CheckReport>& out) {
    CosetEngine eng(cfg.ell, cfg.n, budget);
    out.push_back(zeta_functional_check(cfg.ell, cfg.n, eng));
  };
  table["integrality"] = [&](std::vector<CheckReport>& out) {
    CosetEngine eng(cfg.ell, cfg.n, budget);
    out.push_back(tame_integrality_check(cfg.ell, cfg.n, eng));
  };
  table["tame"] = [&](std::vector<CheckReport>& out) {
    CosetEngine eng(cfg.ell, cfg.n, budget);
    out.push_back(tame_main_check(cfg.ell, cfg.n, eng));
  };
  table["euler-factor"] = [&](std::vector<CheckReport>& out) {
    out.push_back(euler_factor_check(cfg.ell, cfg.n));
  };
  table["branching"] = [&](std::vector<CheckReport>& out) {
    out.push_back(branching_check(cfg.ell, cfg.n, 4, cfg.seed));
  };
  table["lattice-int"] = [&](std::vector<CheckReport>& out) {
    out.push_back(lattice_grid_check(cfg.ell, 3));
  };

  std::vector<CheckReport> out;
  if (name == "all") {
    for (const auto& nm : check_names()) table.at(nm)(out);
    return out;
  }
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown check: " + name);
  it->second(out);
  return out;
}

namespace {

const char* kUsage =
    "usage: verify <check> [--n N] [--ell P] [--prec N] [--t A..B] [--cutoff D]\n"
    "              [--budget-m N] [--budget-card N] [--seed S] [--json]\n"
    "              [--no-timings] [--config PATH]\n"
    "checks: lemma21 wild stab-factors birch satake ell-op prop45 integrality\n"
    "        tame euler-factor branching lattice-int all\n"
    "exit codes: 0 all pass, 2 any fail, 3 inconclusive without fail, 64 usage\n";

bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long parse_long(const std::string& s) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw ParseError("not an integer: " + s);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("not an integer: " + s);
  }
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ParseError("not a boolean: " + s);
}

// One configuration key; "t" accepts "A..B" or a single level.
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n") {
    cfg.n = int(parse_long(value));
  } else if (key == "ell") {
    cfg.ell = int(parse_long(value));
  } else if (key == "prec") {
    cfg.prec = parse_long(value);
  } else if (key == "t") {
    auto dots = value.find("..");
    if (dots == std::string::npos) {
      cfg.t_lo = cfg.t_hi = int(parse_long(value));
    } else {
      cfg.t_lo = int(parse_long(value.substr(0, dots)));
      cfg.t_hi = int(parse_long(value.substr(dots + 2)));
    }
  } else if (key == "cutoff") {
    cfg.cutoff = parse_long(value);
  } else if (key == "budget-m") {
    cfg.budget_m = parse_long(value);
  } else if (key == "budget-card") {
    cfg.budget_card = parse_long(value);
  } else if (key == "seed") {
    cfg.seed = static_cast<unsigned long>(parse_long(value));
  } else if (key == "json") {
    cfg.json = parse_bool(value);
  } else if (key == "no-timings") {
    cfg.timings = !parse_bool(value);
  } else {
    throw ParseError("unknown option: " + key);
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto ltrim = line.find_first_not_of(" \t\r");
    if (ltrim == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line needs key = value: " + line);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string human_line(const CheckReport& r) {
  std::string s = r.check;
  for (const auto& [k, v] : r.params) s += " " + k + "=" + v;
  s += ": " + r.status;
  if (!r.witness.empty()) s += "  [" + r.witness + "]";
  return s;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    err << kUsage;
    return 64;
  }
  const std::string name = args[0];
  bool known = name == "all";
  for (const auto& nm : check_names()) known = known || nm == name;
  if (!known) {
    err << "unknown check: " << name << "\n" << kUsage;
    return 64;
  }

  // Split the remaining arguments into key/value pairs; boolean switches
  // take no value.
  std::vector<std::pair<std::string, std::string>> kvs;
  try {
    for (size_t i = 1; i < args.size(); ++i) {
      std::string a = args[i];
      if (a.rfind("--", 0) != 0) throw ParseError("unexpected argument: " + a);
      a = a.substr(2);
      std::string value;
      auto eq = a.find('=');
      if (eq != std::string::npos) {
        value = a.substr(eq + 1);
        a = a.substr(0, eq);
      } else if (a == "json" || a == "no-timings") {
        value = "true";
      } else {
        if (i + 1 >= args.size()) throw ParseError("missing value for --" + a);
        value = args[++i];
      }
      kvs.emplace_back(a, value);
    }

    RunConfig cfg;
    // Precedence: defaults, then the config file, then the flags.
    for (const auto& [k, v] : kvs) {
      if (k == "config") load_config_file(cfg, v);
    }
    for (const auto& [k, v] : kvs) {
      if (k != "config") apply_kv(cfg, k, v);
    }

    if (cfg.n < 1 || cfg.n > 3) throw ParseError("n must be 1, 2, or 3");
    if (!is_prime(cfg.ell)) throw ParseError("ell must be prime");
    if (cfg.t_lo < 0 || cfg.t_hi < cfg.t_lo) throw ParseError("t range must be 0 <= lo <= hi");
    const long min_prec = long(cfg.n + 1) * (cfg.t_hi + 2);
    if (cfg.prec >= 0 && cfg.prec < min_prec) {
      throw ParseError("prec below the minimal bound " + std::to_string(min_prec) +
                       " for this (n, t) range");
    }

    int exit_code = 0;
    bool saw_inconclusive = false;
    for (const CheckReport& r : run_checks(name, cfg)) {
      if (cfg.json) {
        out << report_json_line(r, cfg.timings) << "\n";
      } else {
        out << human_line(r) << "\n";
      }
      if (r.status == "fail") exit_code = 2;
      if (r.status == "inconclusive-budget") saw_inconclusive = true;
    }
    if (exit_code == 0 && saw_inconclusive) exit_code = 3;
    return exit_code;
  } catch (const ParseError& e) {
    err << e.what() << "\n" << kUsage;
    return 64;
  }
}

}  // namespace locrel
