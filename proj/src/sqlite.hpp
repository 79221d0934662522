#pragma once

// Thin RAII layer over the SQLite C API. Private to the store.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <sqlite3.h>

namespace logomon::sql {

class SqlError : public std::runtime_error {
 public:
  SqlError(int rc, const std::string& message) : std::runtime_error(message), rc_(rc) {}
  int rc() const noexcept { return rc_; }
  bool constraint() const noexcept { return (rc_ & 0xff) == SQLITE_CONSTRAINT; }

 private:
  int rc_;
};

using Value = std::variant<std::monostate, std::int64_t, std::string>;

class Connection {
 public:
  explicit Connection(const std::string& path);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  sqlite3* handle() const noexcept { return db_; }
  void exec(const std::string& sql);
  std::int64_t last_insert_rowid() const;

 private:
  sqlite3* db_ = nullptr;
};

class Statement {
 public:
  Statement(const Connection& conn, std::string_view sql);
  ~Statement();
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, const Value& value);
  Statement& bind(int index, std::int64_t value);
  Statement& bind(int index, std::string_view value);
  Statement& bind_null(int index);
  template <class T>
  Statement& bind(int index, const std::optional<T>& value) {
    return value ? bind(index, *value) : bind_null(index);
  }

  /// Advances; true while a row is available.
  bool step();
  /// Runs a statement that returns no rows.
  void run();

  int columns() const;
  Value value(int column) const;
  std::int64_t int64(int column) const;
  std::string text(int column) const;
  bool is_null(int column) const;

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace logomon::sql
