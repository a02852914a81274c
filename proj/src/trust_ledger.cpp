#include "wsn/trust_ledger.hpp"

#include <algorithm>

namespace wsn {

EvidenceRates evidence_rates(const EvidenceCounters& counters) {
  if (counters.observed == 0) throw NoEvidenceError("no observed transmissions");
  const auto n = static_cast<double>(counters.observed);
  return {static_cast<double>(counters.dropped) / n, static_cast<double>(counters.delayed) / n};
}

TrustRecord record_observation(TrustRecord record, Outcome outcome, std::size_t window) {
  if (outcome == Outcome::kUnobserved) return record;
  ++record.counters.observed;
  if (outcome == Outcome::kDropped) ++record.counters.dropped;
  if (outcome == Outcome::kDelayed) ++record.counters.delayed;
  if (window > 0) {
    record.window.push_back(outcome);
    while (record.window.size() > window) record.window.pop_front();
  }
  return record;
}

EvidenceCounters effective_counters(const TrustRecord& record, std::size_t window) {
  if (window == 0) return record.counters;
  EvidenceCounters c;
  for (Outcome o : record.window) {
    ++c.observed;
    if (o == Outcome::kDropped) ++c.dropped;
    if (o == Outcome::kDelayed) ++c.delayed;
  }
  return c;
}

TrustRecord refresh_direct_trust(TrustRecord record, const FuzzyTrustSystem& fls, Round round,
                                 std::size_t window) {
  const EvidenceRates r = evidence_rates(effective_counters(record, window));
  record.trust = fls.evaluate_trust(r.dpr, r.dlr);
  record.last_update_round = round;
  return record;
}

double merge_recommendation(double t_ij, double t_ik, double t_kj) {
  if (!(t_ik > 0.0)) throw std::invalid_argument("recommendation from an untrusted recommender");
  if (t_ij > 0.0) return (t_ij + t_ik * t_kj) / (1.0 + t_ik);
  return t_ik * t_kj;
}

TrustRecord& TrustLedger::record(NodeId target) {
  auto [it, inserted] = records_.try_emplace(target);
  if (inserted) it->second.target = target;
  return it->second;
}

const TrustRecord* TrustLedger::find(NodeId target) const {
  auto it = records_.find(target);
  return it == records_.end() ? nullptr : &it->second;
}

double TrustLedger::trust(NodeId target) const {
  const TrustRecord* r = find(target);
  return r ? r->trust : 0.0;
}

void TrustLedger::observe(NodeId target, Outcome outcome) {
  TrustRecord& r = record(target);
  r = record_observation(std::move(r), outcome, window_);
}

void TrustLedger::refresh(NodeId target, const FuzzyTrustSystem& fls, Round round) {
  TrustRecord& r = record(target);
  if (effective_counters(r, window_).observed == 0) return;
  r = refresh_direct_trust(std::move(r), fls, round, window_);
}

void TrustLedger::merge(NodeId target, double t_ik, double t_kj, Round round) {
  TrustRecord& r = record(target);
  r.trust = std::clamp(merge_recommendation(r.trust, t_ik, t_kj), 0.0, 1.0);
  r.last_update_round = round;
}

std::vector<double> TrustLedger::trust_set() const {
  std::vector<double> ts;
  ts.reserve(records_.size());
  for (const auto& [id, r] : records_) {
    if (r.trust > 0.0) ts.push_back(r.trust);
  }
  return ts;
}

std::vector<std::pair<NodeId, double>> TrustLedger::positive_entries() const {
  std::vector<std::pair<NodeId, double>> out;
  for (const auto& [id, r] : records_) {
    if (r.trust > 0.0) out.emplace_back(id, r.trust);
  }
  return out;
}

}  // namespace wsn
