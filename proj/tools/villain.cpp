// villain: command-line front end. Every subcommand builds a RunConfig,
// hands it to dispatch(), and prints either a short summary or, with
// --json, the full ResultRecord.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "villain/app.hpp"

using namespace villain;

namespace {

struct Common {
  std::uint64_t seed = 12345;
  int threads = 1;
  bool json = false;
  bool no_cache = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "RNG seed (echoed in every output)");
  app->add_option("--threads", c.threads, "worker threads for grid sweeps");
  app->add_flag("--json", c.json, "print the full result record as JSON");
  app->add_flag("--no-cache", c.no_cache, "do not read or write the pi_entry cache");
}

struct BoxArgs {
  std::string json;
  std::string lower, sides;
};

void add_box(CLI::App* app, BoxArgs& b) {
  app->add_option("--box", b.json, R"(box as JSON, e.g. {"lower":[0,0,0],"sides":[1,1,1]})");
  app->add_option("--lower", b.lower, "box lower corner, comma separated");
  app->add_option("--sides", b.sides, "box side lengths, comma separated");
}

Json box_json(const BoxArgs& b) {
  if (!b.json.empty()) {
    try {
      return Json::parse(b.json);
    } catch (const Json::exception& e) {
      throw DomainError(std::string("--box is not valid JSON: ") + e.what());
    }
  }
  if (b.sides.empty()) throw DomainError("give --box or --sides (and optionally --lower)");
  const auto sides = parse_int_list(b.sides);
  const auto lower = b.lower.empty() ? std::vector<int>(sides.size(), 0) : parse_int_list(b.lower);
  return {{"lower", lower}, {"sides", sides}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DomainError(path + ": " + e.what());
  }
}

std::vector<int> plane_list(const std::string& s) { return parse_int_list(s); }

void print_summary(const ResultRecord& r) {
  const Json& o = r.outputs;
  const std::string cmd = r.config["command"];
  if (cmd == "correlation-decay") {
    std::cout << "n,cross_term,o_value,floor,grid_n\n";
    for (const auto& pt : o["points"])
      std::cout << pt["n"] << "," << format_double(pt["cross_term"]) << "," << format_double(pt["o_value"]) << ","
                << format_double(pt["floor"]) << "," << pt["grid_n"] << "\n";
    if (!o["fit"].is_null()) std::cout << "fitted exponent " << o["fit"]["exponent"].get<double>() << "\n";
    std::cout << "certified floor " << (o["floor_ok"].get<bool>() ? "holds" : "FAILS") << " at every point\n";
  } else if (cmd == "multiplier-pi") {
    std::cout << format_double(o["value"]) << "\n";
  } else {
    std::cout << o.dump(2) << "\n";
  }
  std::cout << (r.ok ? "ok" : "TOLERANCE NOT MET") << " (" << r.wall_time_s << " s, cache hits " << r.cache_hits
            << ")\n";
}

int error_exit(const char* kind, const std::string& msg, int code, std::optional<double> bound = {}) {
  Json e = {{"error", {{"kind", kind}, {"message", msg}}}};
  if (bound) e["error"]["bound"] = *bound;
  std::cerr << e.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modified-Villain lattice gauge theory toolkit"};
  app.require_subcommand(1);
  Common common;
  RunConfig cfg;
  bool have_cfg = false;

  // complex-info
  auto* cinfo = app.add_subcommand("complex-info", "cell counts, coboundary ranks and exactness of a box");
  BoxArgs cbox;
  int export_k = -1;
  std::string export_path;
  add_box(cinfo, cbox);
  cinfo->add_option("--export-k", export_k, "write d_k as a coordinate list");
  cinfo->add_option("--export", export_path, "coordinate-list output path");
  add_common(cinfo, common);

  // wilson
  auto* wilson = app.add_subcommand("wilson", "exact vs Monte Carlo plaquette Wilson loop expectations");
  BoxArgs wbox;
  std::vector<double> wbetas;
  std::vector<std::string> wcells;
  long long wsamples = 20000;
  std::string wout;
  add_box(wilson, wbox);
  wilson->add_option("--beta", wbetas, "coupling(s)")->required()->delimiter(',');
  wilson->add_option("--cell", wcells, "plaquette(s) as v1,..,vd:a1,a2 (1-based axes)");
  wilson->add_option("--samples", wsamples, "Monte Carlo samples per estimate");
  wilson->add_option("--out", wout, "CSV output");
  add_common(wilson, common);

  // sample
  auto* sample = app.add_subcommand("sample", "draw gauge-class representatives");
  BoxArgs sbox;
  double sbeta = 0.1;
  long long sn = 10;
  std::string sout;
  add_box(sample, sbox);
  sample->add_option("--beta", sbeta, "coupling");
  sample->add_option("--n", sn, "number of samples");
  sample->add_option("--out", sout, "CSV output");
  add_common(sample, common);

  // renorm check
  auto* renorm = app.add_subcommand("renorm", "renormalized inner products");
  renorm->require_subcommand(1);
  auto* rcheck = renorm->add_subcommand("check", "co-isometry and projective-measure residuals along a chain");
  std::string rchain, rout;
  std::vector<double> rbetas;
  int rchars = 100;
  bool rcontrol = false;
  double rtol = 1e-10;
  rcheck->add_option("--chain", rchain, "chain config JSON file (default: d=3 cubes of side 1,2,3)");
  rcheck->add_option("--beta", rbetas, "coupling(s)")->delimiter(',');
  rcheck->add_option("--num-chars", rchars, "random characters per stage and beta");
  rcheck->add_flag("--negative-control", rcontrol, "also run with un-renormalized products");
  rcheck->add_option("--tolerance", rtol, "residual tolerance");
  rcheck->add_option("--out", rout, "JSON report path");
  add_common(rcheck, common);

  // multiplier pi-entry
  auto* mult = app.add_subcommand("multiplier", "Fourier-multiplier matrix entries");
  mult->require_subcommand(1);
  auto* pient = mult->add_subcommand("pi-entry", "<delta_p, Pi delta_q> with p at the origin");
  int mdim = 3, mgrid = 256;
  std::string moffset, mplane = "1,2", mplane_q, mpath = "automatic";
  pient->add_option("--dim", mdim, "lattice dimension");
  pient->add_option("--offset", moffset, "base vertex of q (default origin)");
  pient->add_option("--plane", mplane, "axes of p, 1-based");
  pient->add_option("--plane-q", mplane_q, "axes of q (default: --plane)");
  pient->add_option("--grid", mgrid, "frequency grid per axis");
  pient->add_option("--path", mpath, "automatic | scalar | full");
  add_common(pient, common);

  // correlation twopoint / decay
  auto* corr = app.add_subcommand("correlation", "connected two-point function of Wilson loops");
  corr->require_subcommand(1);
  auto* tp = corr->add_subcommand("twopoint", "O(p, q) with p at the origin");
  int tdim = 3, tgrid = 256;
  double tbeta = 0.1;
  std::string toffset, tplane = "1,2", tplane_q;
  tp->add_option("--dim", tdim, "lattice dimension");
  tp->add_option("--beta", tbeta, "coupling");
  tp->add_option("--offset", toffset, "base vertex of q");
  tp->add_option("--plane", tplane, "axes of p, 1-based");
  tp->add_option("--plane-q", tplane_q, "axes of q (default: --plane)");
  tp->add_option("--grid", tgrid, "frequency grid per axis");
  add_common(tp, common);

  auto* decay = corr->add_subcommand("decay", "O(p, p + n e) over a list of separations");
  int ddim = 3, dgrid = 512, daxis = 1;
  double dbeta = 0.1;
  std::string dns = "8,12,16,24,32,48,64", dplane = "1,2", dout, dplot;
  decay->add_option("--dim", ddim, "lattice dimension");
  decay->add_option("--beta", dbeta, "coupling");
  decay->add_option("--ns", dns, "separations, comma separated");
  decay->add_option("--grid", dgrid, "frequency grid per axis (>= 8 max n)");
  decay->add_option("--axis", daxis, "translation axis e, 1-based");
  decay->add_option("--plane", dplane, "axes of p, 1-based");
  decay->add_option("--out", dout, "CSV output");
  decay->add_option("--plot", dplot, "SVG log-log plot output");
  add_common(decay, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Json p = Json::object();
    if (cinfo->parsed()) {
      cfg.command = Command::complex_info;
      p["box"] = box_json(cbox);
      if (export_k >= 0) p["export_k"] = export_k;
      if (!export_path.empty()) p["export"] = export_path;
    } else if (wilson->parsed()) {
      cfg.command = Command::villain_wilson;
      p["box"] = box_json(wbox);
      p["betas"] = wbetas;
      if (!wcells.empty()) p["cells"] = wcells;
      p["samples"] = wsamples;
      if (!wout.empty()) p["out"] = wout;
    } else if (sample->parsed()) {
      cfg.command = Command::villain_sample;
      p["box"] = box_json(sbox);
      p["beta"] = sbeta;
      p["n"] = sn;
      if (!sout.empty()) p["out"] = sout;
    } else if (rcheck->parsed()) {
      cfg.command = Command::renorm_check;
      if (!rchain.empty()) p["chain"] = read_json_file(rchain);
      if (!rbetas.empty()) p["betas"] = rbetas;
      p["num_chars"] = rchars;
      p["negative_control"] = rcontrol;
      p["tolerance"] = rtol;
      if (!rout.empty()) p["out"] = rout;
    } else if (pient->parsed()) {
      cfg.command = Command::multiplier_pi;
      p["dim"] = mdim;
      if (!moffset.empty()) p["offset"] = parse_int_list(moffset);
      p["plane"] = plane_list(mplane);
      p["plane_q"] = plane_list(mplane_q.empty() ? mplane : mplane_q);
      p["grid"] = mgrid;
      p["path"] = mpath;
    } else if (tp->parsed()) {
      cfg.command = Command::correlation_twopoint;
      p["dim"] = tdim;
      p["beta"] = tbeta;
      if (!toffset.empty()) p["offset"] = parse_int_list(toffset);
      p["plane"] = plane_list(tplane);
      p["plane_q"] = plane_list(tplane_q.empty() ? tplane : tplane_q);
      p["grid"] = tgrid;
    } else if (decay->parsed()) {
      cfg.command = Command::correlation_decay;
      p["dim"] = ddim;
      p["beta"] = dbeta;
      p["ns"] = parse_int_list(dns);
      p["grid"] = dgrid;
      p["axis"] = daxis;
      p["plane"] = plane_list(dplane);
      if (!dout.empty()) p["out"] = dout;
      if (!dplot.empty()) p["plot"] = dplot;
    }
    p["seed"] = common.seed;
    p["threads"] = common.threads;
    cfg.params = p;
    have_cfg = true;

    std::optional<PiCache> cache;
    if (!common.no_cache) cache.emplace(PiCache::default_dir());
    const ResultRecord r = dispatch(cfg, cache ? &*cache : nullptr);
    if (common.json) std::cout << r.to_json().dump(2) << "\n";
    else print_summary(r);
    return r.ok ? 0 : 1;
  } catch (const DomainError& e) {
    return error_exit("domain", e.what(), 2);
  } catch (const RetryableError& e) {
    return error_exit("retryable", e.what(), 3);
  } catch (const PrecisionError& e) {
    return error_exit("precision", e.what(), 4, e.bound());
  } catch (const IntegrityError& e) {
    return error_exit("integrity", e.what(), 5);
  } catch (const std::exception& e) {
    return error_exit(have_cfg ? "runtime" : "config", e.what(), 6);
  }
}
