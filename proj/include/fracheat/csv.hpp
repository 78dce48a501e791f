#pragma once

#include <string>
#include <vector>

namespace fracheat {

// Shortest decimal rendering that round-trips a double ("%.17g"), so equal
// values always produce equal bytes.
std::string format_g17(double v);

// Renders header + numeric rows with '\n' line endings and no trailing
// separator; every row must match the header width.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// Whole-file write (binary mode); throws std::runtime_error on I/O failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fracheat
