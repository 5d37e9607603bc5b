#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace auditplan {

/// Currency values are carried as exact integer cents wherever totals must be
/// exact; formula evaluation happens in double-precision dollars.
using Cents = std::int64_t;

inline double dollars(Cents cents) { return static_cast<double>(cents) / 100.0; }

struct ClaimEntry {
  Cents amount_cents = 0;
  std::int64_t count = 0;
};

enum class ClaimFileFormat { plain, run_length };

/// Input error tagged with the 1-based line it occurred on (0 = whole file).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A population of known claim amounts in run-length canonical form: amounts
/// strictly increasing, counts >= 1, totals exact in integer arithmetic.
/// Immutable after construction and safe to share across threads.
class ClaimPopulation {
 public:
  /// Canonicalizes (sorts, merges duplicates) and validates the entries.
  static ClaimPopulation from_entries(std::vector<ClaimEntry> entries);

  static ClaimPopulation from_amounts(const std::vector<Cents>& amounts);

  /// Parses a delimited text stream. Plain format: one decimal amount per
  /// line, optional "amount" header. Run-length: "amount,count" per line,
  /// optional "amount,count" header. LF or CRLF; at most two decimals; no
  /// thousands separators; amounts must be positive.
  static ClaimPopulation load(std::istream& in, ClaimFileFormat format);
  static ClaimPopulation load_file(const std::string& path, ClaimFileFormat format);

  const std::vector<ClaimEntry>& entries() const { return entries_; }
  std::int64_t size() const { return size_; }
  Cents total_cents() const { return total_cents_; }
  std::int64_t unique_values() const { return static_cast<std::int64_t>(entries_.size()); }

  /// Expands to one dollar amount per claim, ascending. Guarded, for small
  /// populations (enumeration oracles and tests).
  std::vector<double> expand_dollars(std::int64_t max_size = 1'000'000) const;

 private:
  ClaimPopulation() = default;
  std::vector<ClaimEntry> entries_;
  std::int64_t size_ = 0;
  Cents total_cents_ = 0;
};

/// Population constants consumed by the planning formulas, in dollars.
/// All variances use the divide-by-N convention.
struct PopulationMoments {
  std::int64_t n = 0;
  double mean = 0;       // mean claim amount
  double variance = 0;   // population variance of amounts
  double mean_sq = 0;    // mean of squared amounts
  double total = 0;      // sum of amounts
  double total_sq = 0;   // sum of squared amounts
  double cov_x_x2 = 0;   // population covariance of amount and squared amount
  double var_x2 = 0;     // population variance of squared amounts
  double skewness = 0;   // third standardized moment; 0 for constant populations
};

PopulationMoments moments(const ClaimPopulation& pop);

}  // namespace auditplan
