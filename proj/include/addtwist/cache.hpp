#pragma once
// Persistent CSV cache of central values, one file per (form, orbit).

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "addtwist/orbits.hpp"
#include "addtwist/twist_eval.hpp"

namespace addtwist {

inline constexpr const char* kCacheHeader = "form_id,q,k,orbit,a,c,c_r,re,im,err_bound,terms";
inline constexpr const char* kCacheEnv = "ADDTWIST_CACHE_DIR";

class CacheCorruption : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CacheRow {
  std::string form_id;
  int k = 0;
  TwistSample sample;

  auto key() const { return std::make_tuple(form_id, int(sample.point.orbit), sample.point.c, sample.point.a); }
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_row(const CacheRow& r) {
  const auto& p = r.sample.point;
  std::ostringstream os;
  os << r.form_id << ',' << p.q << ',' << r.k << ',' << to_string(p.orbit) << ',' << p.a << ',' << p.c << ','
     << format_double(p.c_r) << ',' << format_double(r.sample.value.real()) << ','
     << format_double(r.sample.value.imag()) << ',' << format_double(r.sample.err_bound) << ','
     << r.sample.terms_used;
  return os.str();
}

inline CacheRow parse_row(const std::string& line, const std::string& where) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.push_back("");
  if (f.size() != 11)
    throw CacheCorruption(where + ": expected 11 fields, found " + std::to_string(f.size()));
  try {
    CacheRow r;
    r.form_id = f[0];
    const int q = std::stoi(f[1]);
    r.k = std::stoi(f[2]);
    const Orbit orbit = parse_orbit(f[3]);
    const i64 a = std::stoll(f[4]), c = std::stoll(f[5]);
    r.sample.point = make_point(a, c, orbit, q);
    const double c_r = std::stod(f[6]);
    if (r.sample.point.a != a || c_r != r.sample.point.c_r)
      throw CacheCorruption(where + ": point fields are inconsistent");
    r.sample.value = cplx(std::stod(f[7]), std::stod(f[8]));
    r.sample.err_bound = std::stod(f[9]);
    r.sample.terms_used = std::stoll(f[10]);
    return r;
  } catch (const CacheCorruption&) {
    throw;
  } catch (const std::exception& e) {
    throw CacheCorruption(where + ": " + e.what());
  }
}

/// Reads a cache or export file; the first line must be the header.
inline std::vector<CacheRow> read_cache_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cache file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCacheHeader) throw CacheCorruption(path + ": bad header");
  std::vector<CacheRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(parse_row(line, path + ":" + std::to_string(lineno)));
  }
  return rows;
}

/// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw std::runtime_error("cannot lock " + path);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

/**
 * Append-only sample store under a directory.  Rows live in
 * <dir>/<form_id>.<orbit>.csv; keys are (form_id, orbit, c, a).
 */
class SampleCache {
 public:
  explicit SampleCache(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) throw std::invalid_argument("SampleCache: empty directory");
  }

  const std::string& dir() const { return dir_; }

  std::string file_for(const std::string& form_id, Orbit orbit) const {
    return (std::filesystem::path(dir_) / (form_id + "." + to_string(orbit) + ".csv")).string();
  }

  std::vector<std::string> files() const {
    std::vector<std::string> out;
    if (!std::filesystem::exists(dir_)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
      if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Rows for one form and orbit keyed by (c, a); empty if absent.
  std::map<std::pair<i64, i64>, CacheRow> load(const std::string& form_id, Orbit orbit) const {
    std::map<std::pair<i64, i64>, CacheRow> out;
    const auto path = file_for(form_id, orbit);
    if (!std::filesystem::exists(path)) return out;
    for (auto& r : read_cache_file(path)) {
      if (r.form_id != form_id || r.sample.point.orbit != orbit)
        throw CacheCorruption(path + ": row for " + r.form_id + "/" + to_string(r.sample.point.orbit));
      out.emplace(std::make_pair(r.sample.point.c, r.sample.point.a), std::move(r));
    }
    return out;
  }

  /// Appends rows whose key is not yet present; returns the number written.
  std::size_t append(const std::vector<CacheRow>& rows) {
    std::map<std::pair<std::string, Orbit>, std::vector<const CacheRow*>> by_file;
    for (const auto& r : rows) by_file[{r.form_id, r.sample.point.orbit}].push_back(&r);
    std::size_t written = 0;
    std::filesystem::create_directories(dir_);
    FileLock lock((std::filesystem::path(dir_) / ".lock").string());
    for (auto& [key, list] : by_file) {
      const auto existing = load(key.first, key.second);
      const auto path = file_for(key.first, key.second);
      const bool fresh = !std::filesystem::exists(path);
      std::ofstream out(path, std::ios::app);
      if (!out) throw std::runtime_error("cannot write " + path);
      if (fresh) out << kCacheHeader << '\n';
      std::map<std::pair<i64, i64>, bool> seen;
      for (const CacheRow* r : list) {
        const auto k = std::make_pair(r->sample.point.c, r->sample.point.a);
        if (existing.count(k) || seen.count(k)) continue;
        seen[k] = true;
        out << format_row(*r) << '\n';
        ++written;
      }
    }
    return written;
  }

  /// All rows, sorted by (form_id, orbit, c, a).
  std::vector<CacheRow> all_rows() const {
    std::vector<CacheRow> rows;
    for (const auto& path : files()) {
      auto part = read_cache_file(path);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    std::sort(rows.begin(), rows.end(), [](const CacheRow& x, const CacheRow& y) { return x.key() < y.key(); });
    return rows;
  }

  std::string export_text() const {
    std::string out = std::string(kCacheHeader) + "\n";
    for (const auto& r : all_rows()) out += format_row(r) + "\n";
    return out;
  }

  void export_to(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << export_text();
  }

  std::size_t import_from(const std::string& path) { return append(read_cache_file(path)); }

  std::size_t purge() {
    std::size_t n = 0;
    for (const auto& path : files()) n += std::filesystem::remove(path) ? 1 : 0;
    return n;
  }

 private:
  std::string dir_;
};

inline std::string default_cache_dir() {
  if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
  return ".addtwist-cache";
}

struct CachedBatch {
  std::vector<TwistSample> samples;  // sorted by (c, a)
  std::vector<BatchFailure> failures;
  std::size_t hits = 0;
  std::size_t computed = 0;
};

/// A stored value agrees with a recomputation when they differ by at most 2 err_bound.
inline bool cached_value_matches(const TwistSample& stored, const TwistSample& fresh) {
  const double tol = 2 * std::max(stored.err_bound, fresh.err_bound) + 1e-13 * std::abs(fresh.value);
  return std::abs(fresh.value - stored.value) <= tol;
}

/// Central values via the cache; missing points are computed and appended.  With
/// verify_hits every cache hit is recomputed and a mismatch throws CacheCorruption.
inline CachedBatch cached_central_values(const TwistEvaluator& ev, std::vector<TwistPoint> points, int workers,
                                         double eps, SampleCache* cache, bool verify_hits = false) {
  CachedBatch out;
  std::sort(points.begin(), points.end(), point_less);
  if (points.empty()) return out;
  const Orbit orbit = points.front().orbit;
  for (const auto& p : points)
    if (p.orbit != orbit) throw std::invalid_argument("cached_central_values: mixed orbits");
  std::map<std::pair<i64, i64>, CacheRow> stored;
  if (cache) stored = cache->load(ev.form().form_id(), orbit);
  std::vector<TwistPoint> missing, hits;
  for (const auto& p : points) (stored.count({p.c, p.a}) ? hits : missing).push_back(p);
  if (verify_hits && !hits.empty()) {
    const auto again = batch_central_values(ev, hits, workers, eps);
    for (const auto& s : again.samples) {
      const auto& row = stored.at({s.point.c, s.point.a});
      if (!cached_value_matches(row.sample, s))
        throw CacheCorruption(cache->file_for(ev.form().form_id(), orbit) + ": stored value for " +
                              std::to_string(s.point.a) + "/" + std::to_string(s.point.c) +
                              " does not match its recomputation");
    }
  }
  auto fresh = batch_central_values(ev, missing, workers, eps);
  out.failures = fresh.failures;
  out.computed = fresh.samples.size();
  out.hits = points.size() - missing.size();
  if (cache && !fresh.samples.empty()) {
    std::vector<CacheRow> rows;
    for (const auto& s : fresh.samples) rows.push_back({ev.form().form_id(), ev.form().weight(), s});
    cache->append(rows);
  }
  std::map<std::pair<i64, i64>, TwistSample> merged;
  for (const auto& [key, row] : stored) merged[key] = row.sample;
  for (const auto& s : fresh.samples) merged[{s.point.c, s.point.a}] = s;
  for (const auto& p : points) {
    auto it = merged.find({p.c, p.a});
    if (it != merged.end()) out.samples.push_back(it->second);
  }
  return out;
}

struct CacheMismatch {
  CacheRow row;
  cplx recomputed;
};

/// Recomputes every cached row of the form and reports rows off by more than 2 err_bound.
inline std::vector<CacheMismatch> verify_cache(const SampleCache& cache, const TwistEvaluator& ev,
                                               std::size_t* checked = nullptr) {
  std::vector<CacheMismatch> bad;
  std::size_t n = 0;
  for (Orbit orbit : {Orbit::Infinity, Orbit::Zero}) {
    for (const auto& [key, row] : cache.load(ev.form().form_id(), orbit)) {
      ++n;
      const auto fresh = ev.central_value(row.sample.point);
      if (!cached_value_matches(row.sample, fresh)) bad.push_back({row, fresh.value});
    }
  }
  if (checked) *checked = n;
  return bad;
}

}  // namespace addtwist
