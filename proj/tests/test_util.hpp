#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "renewcast/table.hpp"

namespace testutil {

using renewcast::Column;
using renewcast::ColumnKind;
using renewcast::ColumnMeta;
using renewcast::NumericValues;
using renewcast::TimeSeriesTable;
using renewcast::Timestamp;

inline constexpr std::int64_t kStart = 1420070400;  // 2015-01-01 00:00 UTC

inline std::vector<Timestamp> hourly(std::size_t n, std::int64_t start = kStart) {
  std::vector<Timestamp> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = Timestamp{start + static_cast<std::int64_t>(i) * 3600, 0};
  return ts;
}

inline NumericValues dense(const std::vector<double>& v) { return NumericValues(v.begin(), v.end()); }

inline void add_numeric(TimeSeriesTable& t, const std::string& name, NumericValues v,
                        ColumnKind kind = ColumnKind::kContinuous) {
  Column c{ColumnMeta{name, kind, 0.0, ""}, std::move(v)};
  std::size_t missing = 0;
  for (const auto& x : c.numeric()) missing += x ? 0 : 1;
  c.meta.missing_fraction = c.size() ? static_cast<double>(missing) / static_cast<double>(c.size()) : 0.0;
  t.add_column(std::move(c));
}

inline void add_categorical(TimeSeriesTable& t, const std::string& name, renewcast::CategoricalValues v) {
  Column c{ColumnMeta{name, ColumnKind::kCategorical, 0.0, ""}, std::move(v)};
  t.add_column(std::move(c));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("renewcast_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil

