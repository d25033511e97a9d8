#pragma once

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

#include "json.hpp"

#include "hspline/splines.hpp"

namespace hspline {

inline constexpr int cache_format_version = 1;

struct CacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CacheVersionMismatch : CacheError {
  using CacheError::CacheError;
};

// JSON header line, then shape[0]*shape[1]*shape[2] little-endian doubles, t fastest.
struct GridCacheFile {
  std::string kind = "phi";
  int order = 0;
  double tolerance = 0.0;
  int version = cache_format_version;
  Grid3D grid;

  nlohmann::json header() const {
    nlohmann::json box = nlohmann::json::array();
    for (const auto& I : grid.box) box.push_back({I.lo, I.hi});
    return {{"format", "hspline-grid"}, {"version", version}, {"kind", kind},
            {"order", order},           {"tolerance", tolerance}, {"box", box},
            {"shape", grid.shape}};
  }

  // FNV-1a over the canonical header text.
  std::string key() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : header().dump()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << kind << "-n" << order << "-" << std::hex << std::setw(16) << std::setfill('0') << h << ".grid";
    return os.str();
  }
};

namespace detail {
inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (7 - i));
  return r;
}
}  // namespace detail

inline void write_grid_cache(const std::filesystem::path& path, const GridCacheFile& f) {
  if (!f.grid.valid()) throw CacheError("write_grid_cache: grid shape and samples disagree");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("write_grid_cache: cannot open " + tmp);
    out << f.header().dump() << '\n';
    for (double v : f.grid.samples) {
      const std::uint64_t bits = detail::to_le(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), 8);
    }
    if (!out) throw CacheError("write_grid_cache: write failed");
  }
  std::filesystem::rename(tmp, path);
}

inline GridCacheFile read_grid_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("read_grid_cache: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CacheError("read_grid_cache: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CacheError(std::string("read_grid_cache: bad header: ") + e.what());
  }
  if (!h.contains("version")) throw CacheError("read_grid_cache: header has no version");
  if (h.at("version").get<int>() != cache_format_version)
    throw CacheVersionMismatch("read_grid_cache: format version " + h.at("version").dump() + " is not supported");
  GridCacheFile f;
  f.version = h.at("version").get<int>();
  f.kind = h.at("kind").get<std::string>();
  f.order = h.at("order").get<int>();
  f.tolerance = h.at("tolerance").get<double>();
  for (int a = 0; a < 3; ++a) {
    f.grid.box[a] = Interval{h.at("box")[a][0].get<double>(), h.at("box")[a][1].get<double>()};
    f.grid.shape[a] = h.at("shape")[a].get<int>();
  }
  f.grid.samples.resize(f.grid.size());
  for (double& v : f.grid.samples) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw CacheError("read_grid_cache: payload too short");
    v = std::bit_cast<double>(detail::to_le(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CacheError("read_grid_cache: payload too long");
  return f;
}

inline std::filesystem::path cache_dir() {
  if (const char* d = std::getenv("HSPLINE_CACHE_DIR"); d && *d) return d;
  return std::filesystem::path(".hspline-cache");
}

// Loads the cached grid described by `probe` (samples ignored) or computes,
// stores and returns it. A file of another format version is an error.
template <class Compute>
GridCacheFile load_or_compute(const std::filesystem::path& dir, GridCacheFile probe, Compute&& compute) {
  const auto path = dir / probe.key();
  if (std::filesystem::exists(path)) {
    GridCacheFile f = read_grid_cache(path);
    if (f.header() != probe.header()) throw CacheError("load_or_compute: header does not match key " + path.string());
    return f;
  }
  probe.grid = compute();
  write_grid_cache(path, probe);
  return probe;
}

inline Phi2Tables load_phi2_tables(const std::filesystem::path& dir, int per_unit = 16) {
  const Box3 box = support_box(2);
  const std::array<int, 3> shape{static_cast<int>(box[0].width() * per_unit) + 1,
                                 static_cast<int>(box[1].width() * per_unit) + 1,
                                 static_cast<int>(box[2].width() * per_unit) + 1};
  GridCacheFile pv{"phi2-values", 2, 0.0, cache_format_version, Grid3D{box, shape, {}}};
  GridCacheFile pc{"phi2-cumulative", 2, 0.0, cache_format_version, Grid3D{box, shape, {}}};
  const auto pv_path = dir / pv.key(), pc_path = dir / pc.key();
  if (std::filesystem::exists(pv_path) && std::filesystem::exists(pc_path)) {
    Phi2Tables tb{read_grid_cache(pv_path).grid, read_grid_cache(pc_path).grid};
    if (tb.values.box != box || tb.values.shape != shape || tb.cumulative.shape != shape)
      throw CacheError("load_phi2_tables: cached tables do not match the request");
    return tb;
  }
  Phi2Tables tb = build_phi2_tables(per_unit);
  pv.grid = tb.values;
  pc.grid = tb.cumulative;
  write_grid_cache(pv_path, pv);
  write_grid_cache(pc_path, pc);
  return tb;
}

}  // namespace hspline
