#include "core/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace topt {

namespace {
constexpr char kMagic[4] = {'T', 'O', 'P', 'T'};
} // namespace

void write_matrix(const std::string& path, const Matrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error::io("cannot open " + path + " for writing");
  const auto rows = static_cast<uint32_t>(a.rows());
  const auto cols = static_cast<uint32_t>(a.cols());
  const uint32_t reserved = 0;
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  // File payload is row major; Eigen stores column major, so stream one row
  // at a time through a small buffer.
  std::vector<double> row(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      row[static_cast<size_t>(j)] = a(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
  }
  if (!out)
    throw Error::io("short write to " + path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error::io("cannot open " + path + " for reading");
  char magic[4];
  uint32_t rows = 0, cols = 0, reserved = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error::io(path + " is not a TOPT matrix file (bad header)");
  Matrix a(rows, cols);
  std::vector<double> row(cols);
  for (uint32_t i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * cols));
    if (!in)
      throw Error::io(path + " truncated at row " + std::to_string(i));
    for (uint32_t j = 0; j < cols; ++j)
      a(i, j) = row[j];
  }
  return a;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out)
    throw Error::io("cannot open " + path + " for writing");
  for (size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& r : rows) {
    if (r.size() != header.size())
      throw Error::invalid("csv row width " + std::to_string(r.size()) +
                           " does not match header width " + std::to_string(header.size()));
    for (size_t i = 0; i < r.size(); ++i)
      out << r[i] << (i + 1 < r.size() ? "," : "\n");
  }
  if (!out)
    throw Error::io("short write to " + path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

} // namespace

void write_key_values(const std::string& path, const KeyValues& pairs) {
  std::ofstream out(path);
  if (!out)
    throw Error::io("cannot open " + path + " for writing");
  for (const auto& [key, value] : pairs)
    out << key << "=" << value << "\n";
  if (!out)
    throw Error::io("short write to " + path);
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error::io("cannot open " + path + " for reading");
  KeyValues pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trimmed(line.substr(0, line.find('#')));
    if (body.empty())
      continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error::io(path + ":" + std::to_string(lineno) + ": expected key=value");
    pairs.emplace_back(trimmed(body.substr(0, eq)), trimmed(body.substr(eq + 1)));
  }
  return pairs;
}

std::string kv_get(const KeyValues& pairs, const std::string& key, const std::string& fallback) {
  std::string value = fallback;
  for (const auto& p : pairs)
    if (p.first == key)
      value = p.second;
  return value;
}

} // namespace topt
