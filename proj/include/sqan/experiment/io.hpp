#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqan/errors.hpp"
#include "sqan/experiment/config.hpp"
#include "sqan/measurement.hpp"
#include "sqan/version.hpp"

namespace sqan {

// Deterministic file emission: floats at 17 significant digits (lossless
// round-trip), every file carrying the resolved config and tool version, and
// identical content for identical configs regardless of worker count.

namespace io_detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string header_comment(const nlohmann::json& echo) {
  return std::string("# sqan ") + kVersion + "\n# config " + echo.dump() + "\n";
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open output file '" + path.string() + "'");
  return out;
}

}  // namespace io_detail

inline void write_shots_csv(const std::filesystem::path& path,
                            const std::vector<ShotRecord>& shots1,
                            const std::vector<ShotRecord>& shots2, const nlohmann::json& echo) {
  auto out = io_detail::open_out(path);
  out << io_detail::header_comment(echo);
  out << "class,I,Q,seed\n";
  auto emit = [&](const std::vector<ShotRecord>& shots) {
    for (const auto& s : shots) {
      out << s.class_label << ',' << io_detail::fmt17(s.I) << ',' << io_detail::fmt17(s.Q) << ','
          << s.seed << '\n';
    }
  };
  emit(shots1);
  emit(shots2);
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

// Grid rows in row-major axis order: axis1 outer, axis2 inner.
inline void write_grid_csv(const std::filesystem::path& path,
                           const std::vector<std::string>& columns,
                           const std::vector<std::vector<double>>& rows,
                           const nlohmann::json& echo) {
  auto out = io_detail::open_out(path);
  out << io_detail::header_comment(echo);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << io_detail::fmt17(row[c]);
    out << '\n';
  }
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = io_detail::open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

}  // namespace sqan
