#pragma once

#include <string>
#include <vector>

namespace tudiff::csv {

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string g17(double v);

/// Splits one CSV line on commas; no quoting, fields are numbers or plain tokens.
std::vector<std::string> split(const std::string& line);

double parse_double(const std::string& field);
long parse_long(const std::string& field);

}  // namespace tudiff::csv
