#pragma once

// Minimal zip container support for bundle archives.
//
// The writer produces reproducible archives: entries are sorted by path,
// stored uncompressed, and carry zero DOS timestamps, so identical inputs
// give byte-identical output. The reader accepts stored and deflated
// entries (as written by common zip tools) and verifies every CRC-32.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logomon::zip {

class ZipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path -> contents. std::map keeps entries in lexicographic byte order.
using Entries = std::map<std::string, std::string, std::less<>>;

std::string write_archive(const Entries& entries);
Entries read_archive(std::string_view archive);

std::uint32_t crc32(std::string_view bytes);

}  // namespace logomon::zip
