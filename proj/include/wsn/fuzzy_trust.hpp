#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wsn {

/// Raised when a crisp input or evaluation point lies outside [0, 1].
class FuzzyDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by type reduction when every membership grade is zero.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Breakpoint {
  double x;
  double grade;
};

/// Piecewise-linear membership function on [0, 1].
///
/// Breakpoint x values must be strictly increasing, start at 0 and end at 1;
/// grades must lie in [0, 1]. The constructor validates both.
class MembershipFunction {
 public:
  MembershipFunction() = default;
  explicit MembershipFunction(std::vector<Breakpoint> breakpoints);

  /// Linear interpolation between breakpoints. Throws FuzzyDomainError
  /// outside [0, 1].
  double operator()(double x) const;

  /// Smallest x in [0, apex] with grade >= g; `apex` when the function never
  /// reaches g on that interval.
  double left_crossing(double g, double apex) const;
  /// Largest x in [apex, 1] with grade >= g, or `apex` when never reached.
  double right_crossing(double g, double apex) const;

  double max_grade() const;
  const std::vector<Breakpoint>& breakpoints() const { return points_; }

 private:
  std::vector<Breakpoint> points_;
};

double membership_grade(const MembershipFunction& mf, double x);

enum class ShapeKind { kLeftShoulder, kSymmetricTriangle, kRightShoulder };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view text);

/// Interval type-2 set: the footprint of uncertainty lies between `lower`
/// and `upper`.
class It2FuzzySet {
 public:
  It2FuzzySet() = default;
  It2FuzzySet(MembershipFunction upper, MembershipFunction lower, ShapeKind kind);

  const MembershipFunction& upper() const { return upper_; }
  const MembershipFunction& lower() const { return lower_; }
  ShapeKind shape() const { return kind_; }
  /// x of the first point where the upper MF attains its maximum.
  double apex() const { return apex_; }

 private:
  MembershipFunction upper_;
  MembershipFunction lower_;
  ShapeKind kind_ = ShapeKind::kSymmetricTriangle;
  double apex_ = 0.0;
};

enum class InputTerm { kLow = 0, kMedium = 1, kHigh = 2 };

/// Output terms, ordered from least to most trusted.
enum class TrustTerm {
  kCompleteDistrust = 0,
  kIntenseDistrust,
  kDistrust,
  kMediumDistrust,
  kMediumTrust,
  kTrust,
  kCompleteTrust,
};

inline constexpr std::size_t kInputTermCount = 3;
inline constexpr std::size_t kTrustTermCount = 7;
inline constexpr std::size_t kRuleCount = 9;
inline constexpr std::size_t kTrustPairCount = 16;

std::string_view to_string(InputTerm term);
std::string_view to_string(TrustTerm term);

struct Rule {
  InputTerm dlr;
  InputTerm dpr;
  TrustTerm output;
};

/// The nine evidence rules, index k-1 holds rule k.
const std::array<Rule, kRuleCount>& rule_table();

/// One alpha-cut of an output set at a rule's firing height.
struct CutEntry {
  double left;
  double right;
  double grade;
  std::size_t rule;  // 0-based rule index
  TrustTerm term;
};

struct TrustPair {
  double value;
  double grade_lower;
  double grade_upper;
  std::size_t rule = 0;
  TrustTerm term = TrustTerm::kCompleteDistrust;
};

struct TypeReducedInterval {
  double left;
  double right;
  std::size_t left_switch;   // 1-based
  std::size_t right_switch;  // 1-based
};

enum class Endpoint { kLeft, kRight };

/// Center-of-sets value for a given 1-based switch point. For the left
/// endpoint the first `switch_point` pairs carry their upper grade and the
/// rest their lower grade; the right endpoint is the mirror assignment.
/// nullopt when the weight sum is zero.
std::optional<double> center_of_sets_at(std::span<const TrustPair> pairs,
                                        std::size_t switch_point, Endpoint endpoint);

struct FuzzySetDefinitions {
  std::array<MembershipFunction, kInputTermCount> dpr;
  std::array<MembershipFunction, kInputTermCount> dlr;
  std::array<It2FuzzySet, kTrustTermCount> output;

  /// Uniform three-term input partition and seven-term output layout with
  /// apexes at k/6.
  static FuzzySetDefinitions defaults();
  static FuzzySetDefinitions from_json_text(const std::string& text);
  static FuzzySetDefinitions load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

/// Interval type-2 fuzzy system mapping (DPR, DLR) evidence to trust.
/// Immutable after construction; safe to share across threads.
class FuzzyTrustSystem {
 public:
  FuzzyTrustSystem();
  explicit FuzzyTrustSystem(FuzzySetDefinitions sets);

  const FuzzySetDefinitions& sets() const { return sets_; }

  std::array<double, kRuleCount> fire_rules(double dpr, double dlr) const;
  std::vector<CutEntry> alpha_cut_intervals(std::span<const double> firing_grades) const;
  std::vector<TrustPair> to_trust_pairs(std::span<const CutEntry> cuts) const;
  double evaluate_trust(double dpr, double dlr) const;

  /// Intermediate products of one evaluation, for tracing and tests.
  struct Trace {
    std::array<double, kRuleCount> firing;
    std::vector<CutEntry> cuts;
    std::vector<TrustPair> pairs;
    TypeReducedInterval interval;
    double trust;
    bool degenerate;
  };
  Trace evaluate_trace(double dpr, double dlr) const;

 private:
  FuzzySetDefinitions sets_;
};

std::vector<TrustPair> normalize_and_sort(std::vector<TrustPair> pairs);

/// Switch-point search for both endpoints. Throws DegenerateInputError if
/// every grade is zero.
TypeReducedInterval type_reduce(std::span<const TrustPair> pairs);

/// Trust returned when no rule fires.
inline constexpr double kNeutralTrust = 0.5;

}  // namespace wsn
