#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "memcurse/errors.hpp"

namespace memcurse::cli {

/// Bad flags, config values or grids; maps to the usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// "lo:hi:count" (inclusive linspace) or a comma list. List entries may be
/// "pi", "pi/k" or "k*pi" besides plain numbers. Throws UsageError.
std::vector<double> parse_grid(const std::string& text);

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// RFC-4180 table with a fixed header, rendered in memory.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(long long v);
  CsvTable& add(std::size_t v) { return add(static_cast<long long>(v)); }
  CsvTable& add(int v) { return add(static_cast<long long>(v)); }
  CsvTable& add(bool v) { return add(static_cast<long long>(v ? 1 : 0)); }
  CsvTable& add(const std::string& s);
  CsvTable& add(const char* s) { return add(std::string(s)); }
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::size_t in_row_ = 0;
  std::string text_;
};

/// Files written by one command. Everything goes to a temporary name first;
/// `remove_all` deletes what was written when a command fails.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void write(const std::string& name, const std::string& content);
  void write(const std::string& name, const CsvTable& table) { write(name, table.str()); }
  /// name -> "fnv1a64:<hex>" of the content.
  const std::map<std::string, std::string>& hashes() const { return hashes_; }
  const std::filesystem::path& dir() const { return dir_; }
  void remove_all() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> hashes_;
};

/// Resolved inputs of one command run.
struct Context {
  nlohmann::json config;  ///< flat: every documented key, including "seed"
  unsigned jobs = 1;
  OutputSet* out = nullptr;
  std::vector<std::uint64_t> seeds;  ///< seeds actually used, recorded in the manifest
  bool diverged = false;             ///< maps to the divergence exit code
  bool validation_failed = false;    ///< maps to the validation exit code

  double num(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::vector<double> grid(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
};

struct Command {
  std::string name;
  std::string help;
  /// Key selecting command-specific defaults ("task", "mode"), or empty.
  std::string selector;
  std::vector<std::string> selector_values;
  /// Documented defaults for a selector value; "seed" is added by the caller.
  std::function<nlohmann::json(const std::string& selector_value)> defaults;
  std::function<void(Context&)> run;
};

const std::vector<Command>& commands();

}  // namespace memcurse::cli
