#include "auditplan/population.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace auditplan {

namespace {

constexpr Cents kMaxAmountCents = 1'000'000'000'000'000;  // $10^13 per claim

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Cents parse_amount(const std::string& field, std::size_t line) {
  if (field.empty()) throw ParseError(line, "empty amount");
  if (field[0] == '-') throw ParseError(line, "non-positive amount: " + field);
  if (field.find(',') != std::string::npos)
    throw ParseError(line, "thousands separators are not allowed: " + field);
  std::size_t i = 0;
  Cents whole = 0;
  bool any_digit = false;
  for (; i < field.size() && field[i] >= '0' && field[i] <= '9'; ++i) {
    any_digit = true;
    whole = whole * 10 + (field[i] - '0');
    if (whole > kMaxAmountCents) throw ParseError(line, "amount too large: " + field);
  }
  if (!any_digit) throw ParseError(line, "malformed decimal: " + field);
  Cents frac = 0;
  if (i < field.size()) {
    if (field[i] != '.') throw ParseError(line, "malformed decimal: " + field);
    ++i;
    std::size_t digits = 0;
    for (; i < field.size() && field[i] >= '0' && field[i] <= '9'; ++i, ++digits)
      frac = frac * 10 + (field[i] - '0');
    if (digits == 0 || digits > 2)
      throw ParseError(line, "amounts must have at most two decimal places: " + field);
    if (digits == 1) frac *= 10;
  }
  if (i != field.size()) throw ParseError(line, "malformed decimal: " + field);
  const Cents cents = whole * 100 + frac;
  if (cents <= 0) throw ParseError(line, "amount must be positive: " + field);
  if (cents > kMaxAmountCents) throw ParseError(line, "amount too large: " + field);
  return cents;
}

std::int64_t parse_count(const std::string& field, std::size_t line) {
  if (field.empty()) throw ParseError(line, "empty count");
  std::int64_t value = 0;
  for (char c : field) {
    if (c < '0' || c > '9') throw ParseError(line, "malformed count: " + field);
    value = value * 10 + (c - '0');
    if (value > std::numeric_limits<std::int64_t>::max() / 1000)
      throw ParseError(line, "count too large: " + field);
  }
  if (value < 1) throw ParseError(line, "count must be at least 1: " + field);
  return value;
}

struct CompensatedSum {
  double sum = 0;
  double carry = 0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

ClaimPopulation ClaimPopulation::from_entries(std::vector<ClaimEntry> entries) {
  for (const ClaimEntry& e : entries) {
    if (e.amount_cents <= 0) throw std::invalid_argument("claim amounts must be positive");
    if (e.count < 1) throw std::invalid_argument("entry counts must be at least 1");
  }
  std::sort(entries.begin(), entries.end(),
            [](const ClaimEntry& a, const ClaimEntry& b) { return a.amount_cents < b.amount_cents; });
  std::vector<ClaimEntry> merged;
  merged.reserve(entries.size());
  for (const ClaimEntry& e : entries) {
    if (!merged.empty() && merged.back().amount_cents == e.amount_cents) {
      merged.back().count += e.count;
      if (merged.back().count < 1) throw std::invalid_argument("entry count overflow");
    } else {
      merged.push_back(e);
    }
  }
  if (merged.empty()) throw std::invalid_argument("population must contain at least one claim");

  __int128 n = 0;
  __int128 total = 0;
  for (const ClaimEntry& e : merged) {
    n += e.count;
    total += static_cast<__int128>(e.amount_cents) * e.count;
  }
  constexpr auto kMax = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
  if (n > kMax || total > kMax) throw std::invalid_argument("population totals overflow");

  ClaimPopulation pop;
  pop.entries_ = std::move(merged);
  pop.size_ = static_cast<std::int64_t>(n);
  pop.total_cents_ = static_cast<Cents>(total);
  return pop;
}

ClaimPopulation ClaimPopulation::from_amounts(const std::vector<Cents>& amounts) {
  std::vector<ClaimEntry> entries;
  entries.reserve(amounts.size());
  for (Cents a : amounts) entries.push_back({a, 1});
  return from_entries(std::move(entries));
}

ClaimPopulation ClaimPopulation::load(std::istream& in, ClaimFileFormat format) {
  std::vector<ClaimEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (first_record) {
      first_record = false;
      const std::string header = lower(line);
      if ((format == ClaimFileFormat::plain && header == "amount") ||
          (format == ClaimFileFormat::run_length && header == "amount,count"))
        continue;
    }
    if (format == ClaimFileFormat::plain) {
      entries.push_back({parse_amount(line, line_no), 1});
    } else {
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos)
        throw ParseError(line_no, "expected amount,count record: " + line);
      entries.push_back({parse_amount(trim(line.substr(0, comma)), line_no),
                         parse_count(trim(line.substr(comma + 1)), line_no)});
    }
  }
  if (entries.empty()) throw ParseError(0, "no claim records found (empty file)");
  try {
    return from_entries(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

ClaimPopulation ClaimPopulation::load_file(const std::string& path, ClaimFileFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open input file: " + path);
  return load(in, format);
}

std::vector<double> ClaimPopulation::expand_dollars(std::int64_t max_size) const {
  if (size_ > max_size) throw std::invalid_argument("population too large to expand");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (const ClaimEntry& e : entries_)
    out.insert(out.end(), static_cast<std::size_t>(e.count), dollars(e.amount_cents));
  return out;
}

PopulationMoments moments(const ClaimPopulation& pop) {
  const auto n = static_cast<double>(pop.size());

  __int128 total_sq_cents2 = 0;
  for (const ClaimEntry& e : pop.entries())
    total_sq_cents2 += static_cast<__int128>(e.amount_cents) * e.amount_cents * e.count;

  PopulationMoments m;
  m.n = pop.size();
  m.total = dollars(pop.total_cents());
  m.total_sq = static_cast<double>(total_sq_cents2) / 10'000.0;
  m.mean = m.total / n;
  m.mean_sq = m.total_sq / n;

  CompensatedSum dev2, dev3, cross, sq_dev2;
  for (const ClaimEntry& e : pop.entries()) {
    const double a = dollars(e.amount_cents);
    const auto c = static_cast<double>(e.count);
    const double d = a - m.mean;
    const double d2 = a * a - m.mean_sq;
    dev2.add(c * d * d);
    dev3.add(c * d * d * d);
    cross.add(c * d * d2);
    sq_dev2.add(c * d2 * d2);
  }
  m.variance = std::max(0.0, dev2.value() / n);
  m.cov_x_x2 = cross.value() / n;
  m.var_x2 = std::max(0.0, sq_dev2.value() / n);
  m.skewness = m.variance > 0 ? (dev3.value() / n) / std::pow(m.variance, 1.5) : 0.0;
  return m;
}

}  // namespace auditplan
