#include "coarseop/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace coarseop {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv: column count mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += csv_escape(cells[i]);
  }
  buf_ += '\n';
}

void Csv::save(const std::string& path) const { write_text_file(path, buf_); }

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace coarseop
