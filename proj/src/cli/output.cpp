#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "internal.hpp"
#include "memcurse/util/hash.hpp"

namespace memcurse::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw UsageError("not a number: '" + raw + "'");
  return v;
}

double parse_entry(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "pi") return std::numbers::pi;
  if (s.rfind("pi/", 0) == 0) return std::numbers::pi / parse_number(s.substr(3));
  if (s.size() > 3 && s.compare(s.size() - 3, 3, "*pi") == 0)
    return parse_number(s.substr(0, s.size() - 3)) * std::numbers::pi;
  return parse_number(s);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw UsageError("empty grid");
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw UsageError("range grids are lo:hi:count, got '" + s + "'");
    const double lo = parse_entry(parts[0]), hi = parse_entry(parts[1]);
    const double count = parse_number(parts[2]);
    if (count < 1 || count != std::floor(count)) throw UsageError("grid count must be a positive integer");
    if (count == 1) return {lo};
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1.0));
    return out;
  }
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_entry(part));
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\r\n";
}

CsvTable& CsvTable::row() {
  if (rows_ && in_row_ != columns_) throw ContractError("CsvTable: incomplete row");
  if (rows_) text_ += "\r\n";
  ++rows_;
  in_row_ = 0;
  return *this;
}

CsvTable& CsvTable::add(const std::string& s) {
  if (!rows_ || in_row_ == columns_) throw ContractError("CsvTable: too many fields");
  if (in_row_++) text_ += ',';
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    text_ += s;
  } else {
    text_ += '"';
    for (char c : s) text_ += c == '"' ? std::string("\"\"") : std::string(1, c);
    text_ += '"';
  }
  return *this;
}

CsvTable& CsvTable::add(double v) { return add(format_number(v)); }
CsvTable& CsvTable::add(long long v) { return add(std::to_string(v)); }

std::string CsvTable::str() const {
  if (rows_ && in_row_ != columns_) throw ContractError("CsvTable: incomplete row");
  return rows_ ? text_ + "\r\n" : text_;
}

void OutputSet::write(const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir_);
  const std::filesystem::path final_path = dir_ / name, tmp = dir_ / (name + ".partial");
  hashes_[name] = "fnv1a64:" + util::hex64(util::fnv1a64(content));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

void OutputSet::remove_all() const {
  std::error_code ec;
  for (const auto& [name, hash] : hashes_) {
    std::filesystem::remove(dir_ / name, ec);
    std::filesystem::remove(dir_ / (name + ".partial"), ec);
  }
}

double Context::num(const std::string& key) const { return config.at(key).get<double>(); }
long long Context::integer(const std::string& key) const { return config.at(key).get<long long>(); }
bool Context::flag(const std::string& key) const { return config.at(key).get<bool>(); }
std::string Context::str(const std::string& key) const { return config.at(key).get<std::string>(); }
std::vector<double> Context::grid(const std::string& key) const {
  try {
    return parse_grid(str(key));
  } catch (const UsageError& e) {
    throw UsageError(key + ": " + e.what());
  }
}

std::vector<std::string> Context::words(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& w : split(str(key), ',')) {
    const std::string t = trim(w);
    if (t.empty()) throw UsageError(key + ": empty list entry");
    out.push_back(t);
  }
  if (out.empty()) throw UsageError(key + ": empty list");
  return out;
}

}  // namespace memcurse::cli
