#pragma once

#include <string>

namespace drcov {

// Shortest round-trip text for a double, so CSV output is reproducible.
std::string format_real(double v);

// RFC 4180 quoting; DRKG names can contain commas.
std::string csv_field(const std::string& s);

}  // namespace drcov
