#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbpp::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kUnknown = 3;

inline constexpr const char *kVersion = "0.1.0";

// args excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace pbpp::cli
