#pragma once

// Command dispatch shared by the CLI and its tests. A RunConfig names a
// command and carries its parameters as JSON; dispatch validates them, runs
// the computation, writes any requested files atomically and returns a
// ResultRecord whose `ok` flag drives the exit code.

#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "villain/correlation.hpp"
#include "villain/gauge.hpp"
#include "villain/io.hpp"
#include "villain/renorm.hpp"

namespace villain {

enum class Command {
  complex_info,
  villain_wilson,
  villain_sample,
  renorm_check,
  multiplier_pi,
  correlation_twopoint,
  correlation_decay,
};

inline const char* command_name(Command c) {
  switch (c) {
    case Command::complex_info: return "complex-info";
    case Command::villain_wilson: return "villain-wilson";
    case Command::villain_sample: return "villain-sample";
    case Command::renorm_check: return "renorm-check";
    case Command::multiplier_pi: return "multiplier-pi";
    case Command::correlation_twopoint: return "correlation-twopoint";
    case Command::correlation_decay: return "correlation-decay";
  }
  return "unknown";
}

inline Command parse_command(const std::string& s) {
  for (Command c : {Command::complex_info, Command::villain_wilson, Command::villain_sample, Command::renorm_check,
                    Command::multiplier_pi, Command::correlation_twopoint, Command::correlation_decay})
    if (s == command_name(c)) return c;
  throw DomainError("unknown command '" + s + "'");
}

struct RunConfig {
  Command command = Command::complex_info;
  Json params = Json::object();

  Json to_json() const { return {{"command", command_name(command)}, {"params", params}}; }
  static RunConfig from_json(const Json& j) {
    RunConfig c;
    c.command = parse_command(j.at("command").get<std::string>());
    c.params = j.value("params", Json::object());
    return c;
  }
};

struct ResultRecord {
  Json config;
  Json outputs = Json::object();
  std::string version = kToolVersion;
  double wall_time_s = 0.0;
  std::size_t cache_hits = 0;
  bool ok = true;

  Json to_json() const {
    return {{"config", config}, {"outputs", outputs},       {"version", version},
            {"wall_time_s", wall_time_s}, {"cache_hits", cache_hits}, {"ok", ok}};
  }
  static ResultRecord from_json(const Json& j) {
    ResultRecord r;
    r.config = j.at("config");
    r.outputs = j.at("outputs");
    r.version = j.at("version").get<std::string>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.cache_hits = j.at("cache_hits").get<std::size_t>();
    r.ok = j.at("ok").get<bool>();
    return r;
  }
};

// ---------------------------------------------------------------- parsing

/// "1,2,3" -> {1,2,3}; empty string -> {}.
inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw DomainError("malformed integer list '" + s + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw DomainError("malformed integer list '" + s + "'");
    }
    if (used != tok.size()) throw DomainError("malformed integer list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

/// "[-]v1,...,vd:a1,a2" with 1-based directions, e.g. "0,0,0:1,2".
inline Cell parse_cell(const std::string& s) {
  std::string body = s;
  int orientation = 1;
  if (!body.empty() && body[0] == '-') {
    orientation = -1;
    body = body.substr(1);
  }
  const auto colon = body.find(':');
  if (colon == std::string::npos) throw DomainError("cell '" + s + "' must look like v1,..,vd:a1,a2");
  Cell c;
  c.base_vertex = parse_int_list(body.substr(0, colon));
  for (int a : parse_int_list(body.substr(colon + 1))) c.directions.push_back(a - 1);
  c.orientation = orientation;
  validate_cell(c);
  return c;
}

inline std::string cell_string(const Cell& c) {
  std::ostringstream os;
  if (c.orientation < 0) os << "-";
  for (std::size_t i = 0; i < c.base_vertex.size(); ++i) os << (i ? "," : "") << c.base_vertex[i];
  os << ":";
  for (std::size_t i = 0; i < c.directions.size(); ++i) os << (i ? "," : "") << c.directions[i] + 1;
  return os.str();
}

inline Box box_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("sides"))
    throw DomainError("box must be {\"lower\": [...], \"sides\": [...]}");
  return Box(j.at("lower").get<std::vector<int>>(), j.at("sides").get<std::vector<int>>());
}

inline Json box_to_json(const Box& b) { return {{"lower", b.lower}, {"sides", b.sides}}; }

namespace detail {

inline double positive_beta(const Json& p, const char* key = "beta") {
  const double beta = p.at(key).get<double>();
  require_positive_beta(beta);
  return beta;
}

inline int int_in(const Json& p, const char* key, int lo, int hi) {
  const int v = p.at(key).get<int>();
  if (v < lo || v > hi)
    throw DomainError(std::string(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

inline std::vector<int> plane_param(const Json& p, const char* key, int d) {
  std::vector<int> one_based = p.at(key).get<std::vector<int>>();
  if (one_based.size() != 2 || one_based[0] < 1 || one_based[1] > d || one_based[0] >= one_based[1])
    throw DomainError(std::string(key) + " must be two increasing axes in 1..d");
  return {one_based[0] - 1, one_based[1] - 1};
}

inline int grid_param(const Json& p) {
  const int g = p.at("grid").get<int>();
  if (g < 4 || g % 2 != 0) throw DomainError("grid must be an even integer >= 4");
  return g;
}

inline unsigned threads_param(const Json& p) {
  const int t = p.value("threads", 1);
  if (t < 1) throw DomainError("threads must be >= 1");
  return static_cast<unsigned>(t);
}

inline std::uint64_t seed_param(const Json& p) { return p.at("seed").get<std::uint64_t>(); }

inline Json cell_list(const std::vector<Cell>& cells) {
  Json out = Json::array();
  for (const auto& c : cells) out.push_back(cell_string(c));
  return out;
}

// Cached pi_entry with p at the origin.
inline double cached_pi(PiCache* cache, int d, const std::vector<int>& offset, const std::vector<int>& ap,
                        const std::vector<int>& aq, int grid, const GridOptions& opts) {
  auto compute = [&] { return pi_entry(d, offset, ap, aq, grid, opts); };
  if (!cache) return compute();
  return cache->get_or_compute(CacheKey{d, offset, ap, aq, grid}, compute);
}

}  // namespace detail

/// Fills defaults and checks every parameter against the preconditions of
/// the target operation. Returns the completed parameter set.
inline RunConfig validate(RunConfig cfg) {
  Json& p = cfg.params;
  if (!p.is_object()) throw DomainError("params must be a JSON object");
  if (!p.contains("seed")) p["seed"] = 12345;
  if (!p.contains("threads")) p["threads"] = 1;
  detail::seed_param(p);
  detail::threads_param(p);
  try {
    switch (cfg.command) {
      case Command::complex_info: {
        const Box b = box_from_json(p.at("box"));
        if (b.dim() > 6) throw DomainError("complex-info: dimension must be <= 6");
        if (p.contains("export_k")) detail::int_in(p, "export_k", 0, b.dim() - 1);
        break;
      }
      case Command::villain_wilson: {
        const Box b = box_from_json(p.at("box"));
        if (b.dim() < 2) throw DomainError("wilson: need dimension >= 2");
        if (!p.contains("samples")) p["samples"] = 20000;
        if (p.at("samples").get<long long>() < 100) throw DomainError("wilson: samples must be >= 100");
        if (!p.contains("betas")) throw DomainError("wilson: at least one beta is required");
        for (double beta : p.at("betas").get<std::vector<double>>()) require_positive_beta(beta);
        if (p.at("betas").empty()) throw DomainError("wilson: at least one beta is required");
        if (!p.contains("cells")) {
          const Cell c{b.lower, {0, 1}, 1};
          p["cells"] = Json::array({cell_string(c)});
        }
        for (const auto& s : p.at("cells")) {
          const Cell c = parse_cell(s.get<std::string>());
          if (c.dim() != 2 || !b.contains(c)) throw DomainError("wilson: cell " + s.get<std::string>() + " is not a plaquette of the box");
        }
        break;
      }
      case Command::villain_sample: {
        const Box b = box_from_json(p.at("box"));
        if (b.dim() < 2) throw DomainError("sample: need dimension >= 2");
        detail::positive_beta(p);
        if (!p.contains("n")) p["n"] = 10;
        if (p.at("n").get<long long>() < 1) throw DomainError("sample: n must be >= 1");
        break;
      }
      case Command::renorm_check: {
        if (!p.contains("chain"))
          p["chain"] = {{"kind", "restriction"},
                        {"boxes", Json::array({box_to_json(Box::cube(3, 1)), box_to_json(Box::cube(3, 2)),
                                               box_to_json(Box::cube(3, 3))})}};
        if (!p.contains("betas")) p["betas"] = {0.01, 0.1, 1.0};
        if (!p.contains("num_chars")) p["num_chars"] = 100;
        if (!p.contains("tolerance")) p["tolerance"] = 1e-10;
        for (double beta : p.at("betas").get<std::vector<double>>()) require_positive_beta(beta);
        if (p.at("num_chars").get<int>() < 1) throw DomainError("renorm: num_chars must be >= 1");
        const Json& ch = p.at("chain");
        const std::string kind = ch.value("kind", "restriction");
        if (kind == "restriction") {
          for (const auto& b : ch.at("boxes")) box_from_json(b);
        } else if (kind == "subdivision") {
          box_from_json(ch.at("coarse"));
          if (ch.value("levels", 1) < 1 || ch.value("levels", 1) > 2) throw DomainError("renorm: levels must be 1 or 2");
        } else {
          throw DomainError("renorm: chain kind must be 'restriction' or 'subdivision'");
        }
        break;
      }
      case Command::multiplier_pi:
      case Command::correlation_twopoint: {
        const int d = detail::int_in(p, "dim", 2, 6);
        if (!p.contains("plane")) p["plane"] = {1, 2};
        if (!p.contains("plane_q")) p["plane_q"] = p["plane"];
        if (!p.contains("offset")) p["offset"] = std::vector<int>(d, 0);
        if (p.at("offset").get<std::vector<int>>().size() != static_cast<std::size_t>(d))
          throw DomainError("offset must have dim entries");
        detail::plane_param(p, "plane", d);
        detail::plane_param(p, "plane_q", d);
        detail::grid_param(p);
        if (!p.contains("path")) p["path"] = "automatic";
        const std::string path = p.at("path");
        if (path != "automatic" && path != "scalar" && path != "full")
          throw DomainError("path must be automatic, scalar or full");
        if (cfg.command == Command::correlation_twopoint) detail::positive_beta(p);
        break;
      }
      case Command::correlation_decay: {
        const int d = detail::int_in(p, "dim", 2, 6);
        detail::positive_beta(p);
        const int grid = detail::grid_param(p);
        if (!p.contains("axis")) p["axis"] = 1;
        if (!p.contains("plane")) p["plane"] = {1, 2};
        detail::int_in(p, "axis", 1, d);
        detail::plane_param(p, "plane", d);
        const auto ns = p.at("ns").get<std::vector<int>>();
        if (ns.empty()) throw DomainError("decay: ns must be non-empty");
        for (int n : ns) {
          if (n < 0) throw DomainError("decay: separations must be non-negative");
          if (8 * n > grid) throw DomainError("decay: grid must be >= 8 n for every separation");
        }
        break;
      }
    }
  } catch (const Json::exception& e) {
    throw DomainError(std::string(command_name(cfg.command)) + ": bad or missing parameter (" + e.what() + ")");
  }
  return cfg;
}

namespace detail {

inline GridOptions grid_options(const Json& p) {
  GridOptions o;
  o.threads = threads_param(p);
  const std::string path = p.value("path", "automatic");
  o.path = path == "scalar" ? SymbolPath::scalar : path == "full" ? SymbolPath::full_matrix : SymbolPath::automatic;
  return o;
}

inline void run_complex_info(const Json& p, ResultRecord& r) {
  const Box b = box_from_json(p.at("box"));
  const int d = b.dim();
  Json counts = Json::array(), ranks = Json::array();
  bool exact = true;
  std::vector<IntMatrix> ds;
  for (int k = 0; k <= d; ++k) counts.push_back(cell_count(b, k));
  for (int k = 0; k < d; ++k) {
    ds.push_back(to_dense(coboundary_matrix(b, k)));
    ranks.push_back(real_rank(to_real(ds.back())));
  }
  for (int k = 0; k + 1 < d; ++k)
    if (ds[k + 1].size() > 0 && (ds[k + 1] * ds[k]).cwiseAbs().maxCoeff() != 0) exact = false;
  // contractible: rank d_{k} + rank d_{k-1} = #k-cells for 0 < k < d
  bool contractible = ranks[0].get<Index>() == counts[0].get<Index>() - 1;
  for (int k = 1; k < d; ++k)
    contractible = contractible && ranks[k].get<Index>() + ranks[k - 1].get<Index>() == counts[k].get<Index>();
  r.outputs = {{"dim", d}, {"cell_counts", counts}, {"coboundary_ranks", ranks}, {"dd_zero", exact},
               {"contractible_ranks", contractible}};
  if (d >= 2) r.outputs["image_dim"] = image_lattice(coboundary_matrix(b, 1)).cols();
  if (p.contains("export_k") && p.contains("export")) {
    std::ostringstream os;
    os << "# config: " << r.config.dump() << "\n";
    write_coordinate_list(os, coboundary_matrix(b, p.at("export_k").get<int>()));
    atomic_write(p.at("export").get<std::string>(), os.str());
    r.outputs["export"] = p.at("export");
  }
  r.ok = exact && contractible;
}

inline void run_wilson(const Json& p, ResultRecord& r) {
  const Box b = box_from_json(p.at("box"));
  const GaugeComplexData g = build(b);
  const auto samples = p.at("samples").get<Index>();
  std::mt19937_64 rng(seed_param(p));
  std::vector<std::vector<std::string>> rows;
  Json results = Json::array();
  for (double beta : p.at("betas").get<std::vector<double>>()) {
    for (const auto& s : p.at("cells")) {
      const Cell c = parse_cell(s.get<std::string>());
      const double exact = exact_wilson_expectation(g, beta, c);
      const McEstimate mc = mc_wilson(g, beta, c, samples, rng);
      const double z = mc.stderr > 0 ? std::abs(mc.mean.real() - exact) / mc.stderr : 0.0;
      const bool within = std::abs(mc.mean.real() - exact) <= 3.0 * mc.stderr &&
                          std::abs(mc.mean.imag()) <= 3.0 * mc.stderr_imag + 1e-15;
      r.ok = r.ok && within;
      results.push_back({{"beta", beta}, {"cell", cell_string(c)}, {"exact", exact}, {"mc_mean", mc.mean.real()},
                         {"mc_mean_imag", mc.mean.imag()}, {"mc_stderr", mc.stderr}, {"z", z}, {"within_3sigma", within}});
      rows.push_back({format_double(beta), cell_string(c), format_double(exact), format_double(mc.mean.real()),
                      format_double(mc.stderr)});
    }
  }
  r.outputs = {{"rows", results}};
  if (p.contains("out"))
    atomic_write(p.at("out").get<std::string>(),
                 csv_text(r.config, {"beta", "cell", "exact", "mc_mean", "mc_stderr"}, rows));
}

inline void run_sample(const Json& p, ResultRecord& r) {
  const Box b = box_from_json(p.at("box"));
  const GaugeComplexData g = build(b);
  const double beta = positive_beta(p);
  const auto n = p.at("n").get<Index>();
  std::mt19937_64 rng(seed_param(p));
  std::vector<std::string> cols = {"sample"};
  for (const auto& e : g.edges) cols.push_back("c" + cell_string(e));
  std::vector<std::vector<std::string>> rows;
  Json reps = Json::array();
  for (Index s = 0; s < n; ++s) {
    const GaugeClass c = sample_gauge_class(g, beta, rng);
    std::vector<std::string> row = {std::to_string(s)};
    for (Index i = 0; i < c.rep.size(); ++i) row.push_back(format_double(c.rep(i)));
    rows.push_back(row);
    reps.push_back(std::vector<double>(c.rep.data(), c.rep.data() + c.rep.size()));
  }
  r.outputs = {{"edges", cell_list(g.edges)}, {"samples", reps}};
  if (p.contains("out")) atomic_write(p.at("out").get<std::string>(), csv_text(r.config, cols, rows));
}

inline ComplexChain chain_from_json(const Json& ch) {
  if (ch.value("kind", "restriction") == "subdivision")
    return subdivision_chain(box_from_json(ch.at("coarse")), ch.value("levels", 1), ch.value("power", 0.0));
  std::vector<Box> boxes;
  for (const auto& b : ch.at("boxes")) boxes.push_back(box_from_json(b));
  return restriction_chain(boxes);
}

inline void run_renorm(const Json& p, ResultRecord& r) {
  const ComplexChain chain = chain_from_json(p.at("chain"));
  const RenormalizedGrams rg = renormalize_chain(chain);
  const double tol = p.at("tolerance").get<double>();
  const int num_chars = p.at("num_chars").get<int>();
  const bool control = p.value("negative_control", false);
  std::mt19937_64 rng(seed_param(p));
  Json stages = Json::array();
  double worst = 0.0;
  for (double beta : p.at("betas").get<std::vector<double>>()) {
    for (const auto& rep : verify_projective_measures(chain, rg.grams_r, beta, num_chars, rng)) {
      stages.push_back({{"beta", beta}, {"stage", rep.stage}, {"coisometry_residual", rep.coisometry_residual},
                        {"ft_residual", rep.ft_residual}, {"dual_norm_residual", rep.dual_norm_residual}});
      worst = std::max({worst, rep.coisometry_residual, rep.ft_residual});
    }
  }
  r.outputs = {{"stages", stages}, {"max_residual", worst}, {"image_dims", Json::array()}};
  for (const auto& b : chain.image_bases) r.outputs["image_dims"].push_back(b.cols());
  r.ok = worst <= tol;
  if (control) {
    // Un-renormalized base products: the FT residual must be visibly nonzero
    // for at least one beta (it underflows at large beta).
    Json ctl = Json::array();
    double largest = 0.0;
    for (double beta : p.at("betas").get<std::vector<double>>()) {
      double ft = 0.0, dn = 0.0;
      for (const auto& rep : verify_projective_measures(chain, chain.base_grams, beta, num_chars, rng)) {
        ft = std::max(ft, rep.ft_residual);
        dn = std::max(dn, rep.dual_norm_residual);
      }
      ctl.push_back({{"beta", beta}, {"ft_residual", ft}, {"dual_norm_residual", dn}});
      largest = std::max(largest, ft);
    }
    const bool detected = largest > 1e-4;
    r.outputs["negative_control"] = {{"stages", ctl}, {"max_ft_residual", largest}, {"detected", detected}};
    r.ok = r.ok && detected;
  }
  if (p.contains("out")) atomic_write(p.at("out").get<std::string>(), r.to_json().dump(2) + "\n");
}

inline void run_pi(const Json& p, ResultRecord& r, PiCache* cache) {
  const int d = p.at("dim");
  const auto offset = p.at("offset").get<std::vector<int>>();
  const auto ap = plane_param(p, "plane", d), aq = plane_param(p, "plane_q", d);
  const int grid = grid_param(p);
  const double v = cached_pi(cache, d, offset, ap, aq, grid, grid_options(p));
  r.outputs = {{"value", v}};
  r.ok = std::isfinite(v);
}

inline void run_twopoint(const Json& p, ResultRecord& r, PiCache* cache) {
  const int d = p.at("dim");
  const double beta = positive_beta(p);
  const auto offset = p.at("offset").get<std::vector<int>>();
  const auto ap = plane_param(p, "plane", d), aq = plane_param(p, "plane_q", d);
  const int grid = grid_param(p);
  GridOptions opts = grid_options(p);
  GridOptions diag = opts;
  diag.path = SymbolPath::scalar;
  const std::vector<int> zero(d, 0);
  const double pp = cached_pi(cache, d, zero, ap, ap, grid, diag);
  const double qq = cached_pi(cache, d, zero, aq, aq, grid, diag);
  const double pq = cached_pi(cache, d, offset, ap, aq, grid, opts);
  const double o = connected_two_point(beta, pp, qq, pq);
  const double fl = certified_floor(beta, pp, qq, pq);
  r.outputs = {{"pi_pp", pp}, {"pi_qq", qq}, {"cross_term", pq}, {"o_value", o}, {"floor", fl}};
  r.ok = std::abs(o) >= fl * (1 - 1e-12);
}

inline void run_decay(const Json& p, ResultRecord& r, PiCache* cache) {
  const int d = p.at("dim");
  const double beta = positive_beta(p);
  const int grid = grid_param(p);
  const int axis = p.at("axis").get<int>() - 1;
  const auto plane = plane_param(p, "plane", d);
  const auto ns = p.at("ns").get<std::vector<int>>();

  // Serve every entry from the cache when possible; otherwise compute the
  // whole series in one sweep and store it.
  auto offset_for = [&](int n) {
    std::vector<int> off(d, 0);
    off[axis] = n;
    return off;
  };
  std::vector<CorrelationPoint> pts;
  bool all_cached = cache != nullptr;
  std::vector<double> cached_cross;
  std::optional<double> cached_diag;
  if (cache) {
    cached_diag = cache->get(CacheKey{d, offset_for(0), plane, plane, grid});
    all_cached = cached_diag.has_value();
    for (int n : ns) {
      if (!all_cached) break;
      const auto v = cache->get(CacheKey{d, offset_for(n), plane, plane, grid});
      if (!v) all_cached = false;
      else cached_cross.push_back(*v);
    }
  }
  if (all_cached) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CorrelationPoint pt;
      pt.n = ns[i];
      pt.grid_n = grid;
      pt.beta = beta;
      pt.diagonal = *cached_diag;
      pt.cross_term = cached_cross[i];
      pt.value = connected_two_point(beta, *cached_diag, *cached_diag, cached_cross[i]);
      pts.push_back(pt);
    }
  } else {
    pts = decay_series(d, beta, axis, ns, grid, plane, threads_param(p));
    if (cache) {
      cache->put(CacheKey{d, offset_for(0), plane, plane, grid}, *pts.front().diagonal);
      for (const auto& pt : pts) cache->put(CacheKey{d, offset_for(pt.n), plane, plane, grid}, *pt.cross_term);
    }
  }

  Json rows_json = Json::array();
  std::vector<std::vector<std::string>> rows;
  bool floor_ok = true;
  for (const auto& pt : pts) {
    const double fl = *pt.floor();
    const bool holds = std::abs(pt.value) >= fl * (1 - 1e-12);
    floor_ok = floor_ok && holds;
    rows_json.push_back({{"n", pt.n}, {"cross_term", *pt.cross_term}, {"o_value", pt.value}, {"floor", fl},
                         {"grid_n", pt.grid_n}, {"floor_holds", holds}});
    rows.push_back({std::to_string(pt.n), format_double(*pt.cross_term), format_double(pt.value), format_double(fl),
                    std::to_string(pt.grid_n)});
  }
  r.outputs = {{"points", rows_json}, {"diagonal", *pts.front().diagonal}, {"floor_ok", floor_ok}};
  std::optional<DecayFit> fit;
  try {
    fit = fit_power_law(pts);
    r.outputs["fit"] = {{"exponent", fit->exponent}, {"log_prefactor", fit->log_prefactor},
                        {"max_log_residual", fit->max_log_residual}, {"n_min", fit->n_min}, {"n_max", fit->n_max},
                        {"points_used", fit->points_used}};
  } catch (const DomainError& e) {
    r.outputs["fit"] = nullptr;
    r.outputs["fit_note"] = e.what();
  }
  r.ok = floor_ok;
  if (p.contains("out"))
    atomic_write(p.at("out").get<std::string>(),
                 csv_text(r.config, {"n", "cross_term", "o_value", "floor", "grid_n"}, rows));
  if (p.contains("plot")) {
    LogLogPlot plot;
    std::ostringstream title;
    title << "d=" << d << ", beta=" << beta << ", grid " << grid;
    plot.title = title.str();
    for (const auto& pt : pts) {
      plot.xs.push_back(pt.n);
      plot.ys.push_back(pt.value);
    }
    if (fit) {
      plot.slope = fit->exponent;
      plot.intercept = fit->log_prefactor;
    }
    plot.comment = "config: " + r.config.dump();
    atomic_write(p.at("plot").get<std::string>(), render_svg(plot));
  }
}

}  // namespace detail

/// Validates and runs `cfg`. With a cache, pi_entry values are read from and
/// written to it; the number of hits is reported in the record.
inline ResultRecord dispatch(const RunConfig& raw, PiCache* cache = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = validate(raw);
  ResultRecord r;
  r.config = cfg.to_json();
  const std::size_t hits_before = cache ? cache->hits() : 0;
  const Json& p = cfg.params;
  switch (cfg.command) {
    case Command::complex_info: detail::run_complex_info(p, r); break;
    case Command::villain_wilson: detail::run_wilson(p, r); break;
    case Command::villain_sample: detail::run_sample(p, r); break;
    case Command::renorm_check: detail::run_renorm(p, r); break;
    case Command::multiplier_pi: detail::run_pi(p, r, cache); break;
    case Command::correlation_twopoint: detail::run_twopoint(p, r, cache); break;
    case Command::correlation_decay: detail::run_decay(p, r, cache); break;
  }
  r.cache_hits = cache ? cache->hits() - hits_before : 0;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace villain
