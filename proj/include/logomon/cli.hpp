#pragma once

// Administrative command line over the library. Exit codes: 0 success,
// 1 domain error (code and message on the error stream), 2 usage error
// (synopsis on the error stream).

#include <iosfwd>
#include <string>
#include <vector>

namespace logomon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logomon::cli
