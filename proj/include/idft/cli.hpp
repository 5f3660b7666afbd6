#pragma once

#include <ostream>
#include <string>

namespace idft {

// Entry point of the command-line tool. Returns 0 on success, 1 on validation errors and 2 on
// numerical failures; errors are written to `err` as one JSON object.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace idft
