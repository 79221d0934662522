#pragma once

#include <string>
#include <string_view>

namespace logomon {

bool is_valid_utf8(std::string_view text);

/// Unicode NFC form of a UTF-8 string. Invalid UTF-8 is returned unchanged.
std::string to_nfc(std::string_view text);

}  // namespace logomon
