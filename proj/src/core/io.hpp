#pragma once

#include "core/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace topt {

// Binary matrix file: 16-byte header (magic "TOPT", uint32 rows, uint32 cols,
// uint32 reserved = 0), then rows*cols float64 values row major, little endian.
void write_matrix(const std::string& path, const Matrix& a);
Matrix read_matrix(const std::string& path);

// Plain CSV with one header row. Cells are written verbatim; numeric cells
// should be pre-formatted with format_double for byte-stable output.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

// Flat key=value text: one pair per line, '#' starts a comment, blank lines
// ignored. Order is preserved; duplicate keys are kept as written.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(const std::string& path, const KeyValues& pairs);
KeyValues read_key_values(const std::string& path);

// Last value for the key, or the fallback when absent.
std::string kv_get(const KeyValues& pairs, const std::string& key,
                   const std::string& fallback = "");

} // namespace topt
