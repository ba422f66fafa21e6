#pragma once

// Output plumbing for the CLI: atomic file writes, CSV with a config echo,
// a lock-protected JSON cache of pi_entry values, and a small log-log SVG plot.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "villain/errors.hpp"

namespace villain {

inline constexpr const char* kToolVersion = "0.1.0";

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Writes `content` to a sibling temp file, then renames it over `path`, so
/// readers never see a partial file.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
  }
}

inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Quotes a CSV field if it contains a comma or a quote.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// CSV text: one "# config: <json>" line, then the header, then rows.
/// Fields are quoted as needed.
inline std::string csv_text(const Json& config, const std::vector<std::string>& columns,
                            const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << "# config: " << config.dump() << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
  os << "\n";
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw DomainError("csv row has the wrong number of fields");
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- cache

/// Identifies one pi_entry value: p at the origin in plane alpha_p, q at
/// `offset` in plane alpha_q (0-based axes).
struct CacheKey {
  int d = 0;
  std::vector<int> offset;
  std::vector<int> alpha_p;
  std::vector<int> alpha_q;
  int grid_n = 0;

  std::string str() const {
    std::ostringstream os;
    auto list = [&os](const std::vector<int>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    };
    os << "d=" << d << ";off=";
    list(offset);
    os << ";ap=";
    list(alpha_p);
    os << ";aq=";
    list(alpha_q);
    os << ";n=" << grid_n;
    return os.str();
  }
};

/// Single-file JSON store {"entries": {key: record}}. Readers take a shared
/// flock on a sidecar lock file, writers an exclusive one; writes go through
/// atomic_write. Records from a different tool version read as absent.
class PiCache {
 public:
  explicit PiCache(fs::path dir, std::string version = kToolVersion,
                   std::chrono::milliseconds lock_timeout = std::chrono::seconds(10))
      : dir_(std::move(dir)), version_(std::move(version)), timeout_(lock_timeout) {
    fs::create_directories(dir_);
  }

  /// Directory from VILLAIN_CACHE_DIR, else ./.villain-cache.
  static fs::path default_dir() {
    if (const char* env = std::getenv("VILLAIN_CACHE_DIR"); env && *env) return env;
    return ".villain-cache";
  }

  fs::path file() const { return dir_ / "pi_entries.json"; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

  std::optional<double> get(const CacheKey& key) {
    Lock lock(lock_path(), LOCK_SH, timeout_);
    const Json store = load();
    const auto& entries = store["entries"];
    const auto it = entries.find(key.str());
    if (it == entries.end() || !it->contains("version") || (*it)["version"] != version_ || !it->contains("value")) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return (*it)["value"].get<double>();
  }

  void put(const CacheKey& key, double value) {
    Lock lock(lock_path(), LOCK_EX, timeout_);
    Json store = load();
    store["entries"][key.str()] = {{"d", key.d},           {"offset", key.offset}, {"alpha_p", key.alpha_p},
                                   {"alpha_q", key.alpha_q}, {"grid_n", key.grid_n}, {"value", value},
                                   {"version", version_}};
    atomic_write(file(), store.dump(1) + "\n");
  }

  /// Cached value, or compute(), store and return it.
  template <class F>
  double get_or_compute(const CacheKey& key, F&& compute) {
    if (auto v = get(key)) return *v;
    const double v = compute();
    put(key, v);
    return v;
  }

 private:
  class Lock {
   public:
    Lock(const fs::path& path, int mode, std::chrono::milliseconds timeout) {
      fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
      if (fd_ < 0) throw std::runtime_error("cache: cannot open lock file " + path.string());
      const auto deadline = std::chrono::steady_clock::now() + timeout;
      while (::flock(fd_, mode | LOCK_NB) != 0) {
        if (std::chrono::steady_clock::now() >= deadline) {
          ::close(fd_);
          throw RetryableError("cache: timed out waiting for lock " + path.string());
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
    ~Lock() {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
    Lock(const Lock&) = delete;
    Lock& operator=(const Lock&) = delete;

   private:
    int fd_ = -1;
  };

  fs::path lock_path() const { return dir_ / "pi_entries.lock"; }

  // A missing file is an empty store; an unreadable one is reported and
  // treated as empty, and the next put rewrites it.
  Json load() const {
    Json empty = {{"entries", Json::object()}};
    std::ifstream in(file());
    if (!in) return empty;
    try {
      Json j = Json::parse(in);
      if (!j.is_object() || !j.contains("entries") || !j["entries"].is_object())
        throw std::runtime_error("unexpected layout");
      return j;
    } catch (const std::exception& e) {
      std::cerr << "warning: cache " << file() << " is corrupted (" << e.what() << "); rebuilding\n";
      return empty;
    }
  }

  fs::path dir_;
  std::string version_;
  std::chrono::milliseconds timeout_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// ---------------------------------------------------------------- plot

struct LogLogPlot {
  std::string title;
  std::string x_label = "n";
  std::string y_label = "|O|";
  std::vector<double> xs, ys;
  /// y = exp(intercept) x^slope, drawn when set.
  std::optional<double> slope, intercept;
  /// Emitted verbatim inside an XML comment (config echo).
  std::string comment;
};

/// Log-log scatter with decade ticks and an optional fitted line.
inline std::string render_svg(const LogLogPlot& plot) {
  const double w = 640, h = 480, ml = 80, mr = 30, mt = 50, mb = 60;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < plot.xs.size() && i < plot.ys.size(); ++i) {
    if (plot.xs[i] > 0 && std::abs(plot.ys[i]) > 0) {
      lx.push_back(std::log10(plot.xs[i]));
      ly.push_back(std::log10(std::abs(plot.ys[i])));
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!lx.empty()) {
    x0 = std::floor(*std::min_element(lx.begin(), lx.end()) * 10) / 10 - 0.05;
    x1 = std::ceil(*std::max_element(lx.begin(), lx.end()) * 10) / 10 + 0.05;
    y0 = std::floor(*std::min_element(ly.begin(), ly.end()));
    y1 = std::ceil(*std::max_element(ly.begin(), ly.end()));
    if (y1 - y0 < 1) y1 = y0 + 1;
  }
  auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (v - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!plot.comment.empty()) os << "<!-- " << plot.comment << " -->\n";
  os << "<defs><clipPath id=\"frame\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
     << "\" height=\"" << h - mt - mb << "\"/></clipPath></defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"14\">" << plot.title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e) {
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(e) << "\" x2=\"" << ml << "\" y2=\"" << py(e) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::floor(x0)); e <= static_cast<int>(std::ceil(x1)); ++e) {
    for (int m = 1; m < 10; ++m) {
      const double v = e + std::log10(m);
      if (v < x0 || v > x1) continue;
      const double len = m == 1 ? 6 : 3;
      os << "<line x1=\"" << px(v) << "\" y1=\"" << h - mb << "\" x2=\"" << px(v) << "\" y2=\"" << h - mb + len
         << "\" stroke=\"black\"/>\n";
      if (m == 1 || m == 2 || m == 5)
        os << "<text x=\"" << px(v) << "\" y=\"" << h - mb + 20 << "\" text-anchor=\"middle\">"
           << static_cast<long long>(std::llround(std::pow(10.0, v))) << "</text>\n";
    }
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">" << plot.x_label << "</text>\n";
  os << "<text x=\"20\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (mt + h - mb) / 2 << ")\">" << plot.y_label << "</text>\n";
  if (plot.slope && plot.intercept) {
    const double ln10 = std::log(10.0);
    auto fy = [&](double lxv) { return (*plot.intercept + *plot.slope * lxv * ln10) / ln10; };
    os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(fy(x1))
       << "\" stroke=\"crimson\" stroke-dasharray=\"6,4\" clip-path=\"url(#frame)\"/>\n";
    os << "<text x=\"" << w - mr - 10 << "\" y=\"" << mt + 20 << "\" text-anchor=\"end\" fill=\"crimson\">slope "
       << std::setprecision(3) << *plot.slope << std::setprecision(2) << "</text>\n";
  }
  for (std::size_t i = 0; i < lx.size(); ++i)
    os << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace villain
