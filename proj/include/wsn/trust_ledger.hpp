#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wsn/fuzzy_trust.hpp"

namespace wsn {

using NodeId = std::uint32_t;
using Round = std::int64_t;

class NoEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Outcome { kDelivered, kDropped, kDelayed, kUnobserved };

struct EvidenceCounters {
  std::uint64_t observed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delayed = 0;

  friend bool operator==(const EvidenceCounters&, const EvidenceCounters&) = default;
};

struct EvidenceRates {
  double dpr;
  double dlr;
};

/// Throws NoEvidenceError when nothing has been observed.
EvidenceRates evidence_rates(const EvidenceCounters& counters);

struct TrustRecord {
  NodeId target = 0;
  /// 0 until direct evidence or a recommendation arrives.
  double trust = 0.0;
  EvidenceCounters counters;
  Round last_update_round = -1;
  /// Recent outcomes, kept only when an evidence window is configured.
  std::deque<Outcome> window;
};

/// Applies one monitored outcome. Unobserved outcomes leave the record
/// untouched. With `window > 0` the rates used for refresh come from the
/// last `window` observed outcomes; the lifetime counters keep growing.
TrustRecord record_observation(TrustRecord record, Outcome outcome, std::size_t window = 0);

/// Counters the fuzzy system should see: lifetime counters, or the window.
EvidenceCounters effective_counters(const TrustRecord& record, std::size_t window);

TrustRecord refresh_direct_trust(TrustRecord record, const FuzzyTrustSystem& fls, Round round,
                                 std::size_t window = 0);

/// Recommendation merge. `t_ik` is this node's trust in the recommender and
/// must be positive.
double merge_recommendation(double t_ij, double t_ik, double t_kj);

/// All trust records one node holds, keyed by target.
class TrustLedger {
 public:
  TrustLedger() = default;
  explicit TrustLedger(std::size_t evidence_window) : window_(evidence_window) {}

  /// Record for `target`, created with zero trust on first access.
  TrustRecord& record(NodeId target);
  const TrustRecord* find(NodeId target) const;
  double trust(NodeId target) const;

  void observe(NodeId target, Outcome outcome);
  /// Recomputes direct trust from evidence; no-op if nothing was observed.
  void refresh(NodeId target, const FuzzyTrustSystem& fls, Round round);
  void merge(NodeId target, double t_ik, double t_kj, Round round);

  /// Positive trust values in ascending target order.
  std::vector<double> trust_set() const;
  std::vector<std::pair<NodeId, double>> positive_entries() const;

  const std::map<NodeId, TrustRecord>& records() const { return records_; }
  std::size_t evidence_window() const { return window_; }

 private:
  std::map<NodeId, TrustRecord> records_;
  std::size_t window_ = 0;
};

}  // namespace wsn
