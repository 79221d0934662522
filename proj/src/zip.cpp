#include "logomon/zip.hpp"

#include <cstdint>
#include <limits>

#include <zlib.h>

namespace logomon::zip {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDirSig = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kUtf8NameFlag = 0x0800;
constexpr std::uint16_t kStored = 0;
constexpr std::uint16_t kDeflated = 8;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Cursor {
 public:
  Cursor(std::string_view data, std::size_t pos) : data_(data), pos_(pos) {}

  std::uint16_t u16() {
    need(2);
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  void skip(std::size_t n) { need(n), pos_ += n; }

 private:
  void need(std::size_t n) const {
    if (pos_ > data_.size() || data_.size() - pos_ < n) throw ZipError("truncated zip archive");
  }

  std::string_view data_;
  std::size_t pos_;
};

std::string inflate_raw(std::string_view compressed, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw ZipError("corrupt deflate stream");
  return out;
}

}  // namespace

std::uint32_t crc32(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

// Every entry is stamped 1980-01-01 00:00, the earliest DOS date, so the
// archive bytes depend only on the entries.
constexpr std::uint16_t kFixedDosDate = (1 << 5) | 1;

std::string write_archive(const Entries& entries) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  std::string out;
  std::string central;
  for (const auto& [name, data] : entries) {
    if (name.empty() || name.size() > 0xffff) throw ZipError("invalid entry name");
    if (data.size() >= kMax || out.size() >= kMax) throw ZipError("archive too large");
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto crc = crc32(data);
    const auto size = static_cast<std::uint32_t>(data.size());

    put32(out, kLocalHeaderSig);
    put16(out, kVersion);
    put16(out, kUtf8NameFlag);
    put16(out, kStored);
    put16(out, 0);  // time
    put16(out, kFixedDosDate);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, static_cast<std::uint16_t>(name.size()));
    put16(out, 0);
    out += name;
    out += data;

    put32(central, kCentralHeaderSig);
    put16(central, kVersion);
    put16(central, kVersion);
    put16(central, kUtf8NameFlag);
    put16(central, kStored);
    put16(central, 0);
    put16(central, kFixedDosDate);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, static_cast<std::uint16_t>(name.size()));
    put16(central, 0);  // extra
    put16(central, 0);  // comment
    put16(central, 0);  // disk
    put16(central, 0);  // internal attributes
    put32(central, 0);  // external attributes
    put32(central, offset);
    central += name;
  }
  if (entries.size() > 0xffff) throw ZipError("too many entries");
  const auto centralOffset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndOfCentralDirSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, centralOffset);
  put16(out, 0);
  return out;
}

Entries read_archive(std::string_view archive) {
  constexpr std::size_t kEocdSize = 22;
  if (archive.size() < kEocdSize) throw ZipError("not a zip archive");

  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = archive.size() > kEocdSize + 0xffff ? archive.size() - kEocdSize - 0xffff : 0;
  for (std::size_t pos = archive.size() - kEocdSize + 1; pos-- > lowest;) {
    if (Cursor(archive, pos).u32() == kEndOfCentralDirSig) {
      eocd = pos;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw ZipError("end of central directory not found");

  Cursor end(archive, eocd + 4);
  end.skip(4);  // disk numbers
  end.u16();
  const auto count = end.u16();
  end.u32();  // central directory size
  const auto centralOffset = end.u32();
  if (count == 0xffff || centralOffset == 0xffffffff) throw ZipError("zip64 is not supported");

  Entries entries;
  Cursor central(archive, centralOffset);
  for (std::uint16_t i = 0; i < count; ++i) {
    if (central.u32() != kCentralHeaderSig) throw ZipError("bad central directory header");
    central.skip(4);  // versions
    const auto flags = central.u16();
    const auto method = central.u16();
    central.skip(4);  // time, date
    const auto crc = central.u32();
    const auto compressedSize = central.u32();
    const auto size = central.u32();
    const auto nameLength = central.u16();
    const auto extraLength = central.u16();
    const auto commentLength = central.u16();
    central.skip(8);
    const auto localOffset = central.u32();
    std::string name(central.bytes(nameLength));
    central.skip(extraLength + commentLength);
    if (flags & 0x0001) throw ZipError("encrypted entries are not supported");

    Cursor local(archive, localOffset);
    if (local.u32() != kLocalHeaderSig) throw ZipError("bad local header for " + name);
    local.skip(22);
    const auto localNameLength = local.u16();
    const auto localExtraLength = local.u16();
    if (local.bytes(localNameLength) != name) throw ZipError("local header name mismatch for " + name);
    local.skip(localExtraLength);
    const auto raw = local.bytes(compressedSize);

    std::string data;
    if (method == kStored) {
      if (compressedSize != size) throw ZipError("size mismatch for " + name);
      data.assign(raw);
    } else if (method == kDeflated) {
      data = inflate_raw(raw, size);
    } else {
      throw ZipError("unsupported compression method for " + name);
    }
    if (crc32(data) != crc) throw ZipError("CRC mismatch for " + name);
    if (!entries.emplace(std::move(name), std::move(data)).second)
      throw ZipError("duplicate entry in archive");
  }
  return entries;
}

}  // namespace logomon::zip
