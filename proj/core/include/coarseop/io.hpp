#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace coarseop {

/// Deterministic float formatting shared by every report writer; %.12g keeps
/// CSVs byte-stable across runs and worker counts.
std::string format_double(double v);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return buf_; }
  void save(const std::string& path) const;

 private:
  std::string buf_;
  size_t width_;
};

std::string csv_escape(const std::string& cell);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace coarseop
