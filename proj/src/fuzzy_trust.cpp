#include "wsn/fuzzy_trust.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wsn {

namespace {

constexpr double kShapeTolerance = 1e-9;
// Grades below this are interpolation round-off; left in place, per-family
// max scaling would blow them up to 1.
constexpr double kGradeFloor = 1e-12;

double snap(double g) { return g < kGradeFloor ? 0.0 : g; }

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << what << " = " << x << " is outside [0, 1]";
    throw FuzzyDomainError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MembershipFunction

MembershipFunction::MembershipFunction(std::vector<Breakpoint> breakpoints)
    : points_(std::move(breakpoints)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("membership function needs at least two breakpoints");
  }
  if (points_.front().x != 0.0 || points_.back().x != 1.0) {
    throw std::invalid_argument("membership function must span x = 0 .. 1");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].grade >= 0.0 && points_[i].grade <= 1.0)) {
      throw std::invalid_argument("membership grade outside [0, 1]");
    }
    if (i > 0 && !(points_[i].x > points_[i - 1].x)) {
      throw std::invalid_argument("breakpoint x values must be strictly increasing");
    }
  }
}

double MembershipFunction::operator()(double x) const {
  check_unit(x, "membership argument");
  if (x == 1.0) return points_.back().grade;
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const Breakpoint& b) { return v < b.x; });
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.grade + t * (hi.grade - lo.grade);
}

double MembershipFunction::left_crossing(double g, double apex) const {
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Breakpoint& a = points_[i];
    if (a.x > apex) break;
    if (a.grade >= g) return a.x;
    Breakpoint b = points_[i + 1];
    if (b.x > apex) b = {apex, (*this)(apex)};
    if (b.grade >= g) {
      return a.x + (g - a.grade) / (b.grade - a.grade) * (b.x - a.x);
    }
  }
  return apex;
}

double MembershipFunction::right_crossing(double g, double apex) const {
  for (std::size_t i = points_.size() - 1; i > 0; --i) {
    const Breakpoint& b = points_[i];
    if (b.x < apex) break;
    if (b.grade >= g) return b.x;
    Breakpoint a = points_[i - 1];
    if (a.x < apex) a = {apex, (*this)(apex)};
    if (a.grade >= g) {
      return b.x - (g - b.grade) / (a.grade - b.grade) * (b.x - a.x);
    }
  }
  return apex;
}

double MembershipFunction::max_grade() const {
  double m = 0.0;
  for (const auto& p : points_) m = std::max(m, p.grade);
  return m;
}

double membership_grade(const MembershipFunction& mf, double x) { return mf(x); }

// ---------------------------------------------------------------------------
// It2FuzzySet

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kLeftShoulder: return "left-shoulder";
    case ShapeKind::kSymmetricTriangle: return "symmetric-triangle";
    case ShapeKind::kRightShoulder: return "right-shoulder";
  }
  return "?";
}

ShapeKind parse_shape_kind(std::string_view text) {
  if (text == "left-shoulder") return ShapeKind::kLeftShoulder;
  if (text == "symmetric-triangle") return ShapeKind::kSymmetricTriangle;
  if (text == "right-shoulder") return ShapeKind::kRightShoulder;
  throw std::invalid_argument("unknown shape kind '" + std::string(text) + "'");
}

It2FuzzySet::It2FuzzySet(MembershipFunction upper, MembershipFunction lower, ShapeKind kind)
    : upper_(std::move(upper)), lower_(std::move(lower)), kind_(kind) {
  // Both functions are piecewise linear, so containment only needs checking
  // at the union of their breakpoints.
  std::vector<double> xs;
  for (const auto& p : upper_.breakpoints()) xs.push_back(p.x);
  for (const auto& p : lower_.breakpoints()) xs.push_back(p.x);
  for (double x : xs) {
    if (lower_(x) > upper_(x) + kShapeTolerance) {
      throw std::invalid_argument("lower membership exceeds upper membership");
    }
  }

  const double peak = upper_.max_grade();
  for (const auto& p : upper_.breakpoints()) {
    if (p.grade == peak) {
      apex_ = p.x;
      break;
    }
  }

  switch (kind_) {
    case ShapeKind::kLeftShoulder:
      if (upper_(0.0) != 1.0) throw std::invalid_argument("left shoulder must have grade 1 at x = 0");
      break;
    case ShapeKind::kRightShoulder:
      if (upper_(1.0) != 1.0) throw std::invalid_argument("right shoulder must have grade 1 at x = 1");
      break;
    case ShapeKind::kSymmetricTriangle:
      for (const MembershipFunction* mf : {&upper_, &lower_}) {
        for (const auto& p : mf->breakpoints()) {
          const double mirrored = 2.0 * apex_ - p.x;
          if (mirrored < 0.0 || mirrored > 1.0) continue;
          if (std::abs((*mf)(mirrored) - p.grade) > kShapeTolerance) {
            throw std::invalid_argument("symmetric set is not mirror-symmetric about its apex");
          }
        }
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// Rule base

std::string_view to_string(InputTerm term) {
  switch (term) {
    case InputTerm::kLow: return "low";
    case InputTerm::kMedium: return "medium";
    case InputTerm::kHigh: return "high";
  }
  return "?";
}

std::string_view to_string(TrustTerm term) {
  switch (term) {
    case TrustTerm::kCompleteDistrust: return "complete_distrust";
    case TrustTerm::kIntenseDistrust: return "intense_distrust";
    case TrustTerm::kDistrust: return "distrust";
    case TrustTerm::kMediumDistrust: return "medium_distrust";
    case TrustTerm::kMediumTrust: return "medium_trust";
    case TrustTerm::kTrust: return "trust";
    case TrustTerm::kCompleteTrust: return "complete_trust";
  }
  return "?";
}

const std::array<Rule, kRuleCount>& rule_table() {
  using I = InputTerm;
  using T = TrustTerm;
  static const std::array<Rule, kRuleCount> rules{{
      {I::kLow, I::kLow, T::kCompleteTrust},
      {I::kMedium, I::kLow, T::kTrust},
      {I::kHigh, I::kLow, T::kMediumTrust},
      {I::kLow, I::kMedium, T::kMediumTrust},
      {I::kMedium, I::kMedium, T::kMediumDistrust},
      {I::kHigh, I::kMedium, T::kDistrust},
      {I::kLow, I::kHigh, T::kDistrust},
      {I::kMedium, I::kHigh, T::kIntenseDistrust},
      {I::kHigh, I::kHigh, T::kCompleteDistrust},
  }};
  return rules;
}

// ---------------------------------------------------------------------------
// Set definitions

namespace {

// Triangle of half-width `half` and height `height` centred on `apex`,
// truncated to [0, 1]; a shoulder when the apex sits on a domain edge.
MembershipFunction clipped_triangle(double apex, double half, double height) {
  auto f = [&](double x) { return std::max(0.0, height * (1.0 - std::abs(x - apex) / half)); };
  std::vector<Breakpoint> pts{{0.0, f(0.0)}};
  for (double x : {apex - half, apex, apex + half}) {
    if (x > pts.back().x && x < 1.0) pts.push_back({x, x == apex ? height : 0.0});
  }
  pts.push_back({1.0, f(1.0)});
  return MembershipFunction(std::move(pts));
}

std::array<MembershipFunction, kInputTermCount> default_inputs() {
  return {MembershipFunction({{0.0, 1.0}, {0.5, 0.0}, {1.0, 0.0}}),
          MembershipFunction({{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}}),
          MembershipFunction({{0.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}})};
}

constexpr std::array<std::string_view, kInputTermCount> kInputKeys{"low", "medium", "high"};

std::vector<Breakpoint> parse_points(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected a list of [x, grade] pairs");
  std::vector<Breakpoint> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) {
      throw std::invalid_argument(where + ": each breakpoint must be [x, grade]");
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

nlohmann::json dump_points(const MembershipFunction& mf) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : mf.breakpoints()) out.push_back({p.x, p.grade});
  return out;
}

}  // namespace

FuzzySetDefinitions FuzzySetDefinitions::defaults() {
  FuzzySetDefinitions d;
  d.dpr = default_inputs();
  d.dlr = default_inputs();
  constexpr double kUpperHalfWidth = 1.0 / 6.0;
  constexpr double kLowerHalfWidth = 1.0 / 8.0;
  constexpr double kLowerHeight = 0.8;
  for (std::size_t k = 0; k < kTrustTermCount; ++k) {
    const double apex = static_cast<double>(k) / 6.0;
    const ShapeKind kind = k == 0   ? ShapeKind::kLeftShoulder
                           : k == 6 ? ShapeKind::kRightShoulder
                                    : ShapeKind::kSymmetricTriangle;
    d.output[k] = It2FuzzySet(clipped_triangle(apex, kUpperHalfWidth, 1.0),
                              clipped_triangle(apex, kLowerHalfWidth, kLowerHeight), kind);
  }
  return d;
}

FuzzySetDefinitions FuzzySetDefinitions::from_json_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("fuzzy set definition: ") + e.what());
  }
  FuzzySetDefinitions d;
  for (const char* input : {"dpr", "dlr"}) {
    if (!root.contains(input)) throw std::invalid_argument(std::string("missing section '") + input + "'");
    auto& target = std::string_view(input) == "dpr" ? d.dpr : d.dlr;
    for (std::size_t t = 0; t < kInputTermCount; ++t) {
      const std::string key(kInputKeys[t]);
      const std::string where = std::string(input) + "." + key;
      if (!root[input].contains(key)) throw std::invalid_argument("missing set '" + where + "'");
      target[t] = MembershipFunction(parse_points(root[input][key], where));
    }
  }
  if (!root.contains("output")) throw std::invalid_argument("missing section 'output'");
  for (std::size_t k = 0; k < kTrustTermCount; ++k) {
    const std::string key(to_string(static_cast<TrustTerm>(k)));
    const std::string where = "output." + key;
    if (!root["output"].contains(key)) throw std::invalid_argument("missing set '" + where + "'");
    const auto& s = root["output"][key];
    d.output[k] = It2FuzzySet(MembershipFunction(parse_points(s.at("upper"), where + ".upper")),
                              MembershipFunction(parse_points(s.at("lower"), where + ".lower")),
                              parse_shape_kind(s.at("shape").get<std::string>()));
  }
  return d;
}

FuzzySetDefinitions FuzzySetDefinitions::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fuzzy set file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string FuzzySetDefinitions::to_json_text() const {
  nlohmann::json root;
  for (std::size_t t = 0; t < kInputTermCount; ++t) {
    root["dpr"][std::string(kInputKeys[t])] = dump_points(dpr[t]);
    root["dlr"][std::string(kInputKeys[t])] = dump_points(dlr[t]);
  }
  for (std::size_t k = 0; k < kTrustTermCount; ++k) {
    auto& s = root["output"][std::string(to_string(static_cast<TrustTerm>(k)))];
    s["shape"] = std::string(to_string(output[k].shape()));
    s["upper"] = dump_points(output[k].upper());
    s["lower"] = dump_points(output[k].lower());
  }
  return root.dump(2);
}

// ---------------------------------------------------------------------------
// Inference pipeline

FuzzyTrustSystem::FuzzyTrustSystem() : sets_(FuzzySetDefinitions::defaults()) {}

FuzzyTrustSystem::FuzzyTrustSystem(FuzzySetDefinitions sets) : sets_(std::move(sets)) {}

std::array<double, kRuleCount> FuzzyTrustSystem::fire_rules(double dpr, double dlr) const {
  check_unit(dpr, "DPR");
  check_unit(dlr, "DLR");
  std::array<double, kInputTermCount> g_dpr{};
  std::array<double, kInputTermCount> g_dlr{};
  for (std::size_t t = 0; t < kInputTermCount; ++t) {
    g_dpr[t] = sets_.dpr[t](dpr);
    g_dlr[t] = sets_.dlr[t](dlr);
  }
  std::array<double, kRuleCount> out{};
  const auto& rules = rule_table();
  for (std::size_t k = 0; k < kRuleCount; ++k) {
    out[k] = g_dlr[static_cast<std::size_t>(rules[k].dlr)] *
             g_dpr[static_cast<std::size_t>(rules[k].dpr)];
  }
  return out;
}

std::vector<CutEntry> FuzzyTrustSystem::alpha_cut_intervals(
    std::span<const double> firing_grades) const {
  if (firing_grades.size() != kRuleCount) {
    throw std::invalid_argument("expected one firing grade per rule");
  }
  std::vector<CutEntry> cuts;
  cuts.reserve(kTrustPairCount);
  const auto& rules = rule_table();
  for (std::size_t k = 0; k < kRuleCount; ++k) {
    const double g = firing_grades[k];
    if (!(g >= 0.0 && g <= 1.0)) throw FuzzyDomainError("firing grade outside [0, 1]");
    const TrustTerm term = rules[k].output;
    const It2FuzzySet& set = sets_.output[static_cast<std::size_t>(term)];
    const double apex = set.apex();
    const bool symmetric = set.shape() == ShapeKind::kSymmetricTriangle;
    const double share = symmetric ? 0.5 * g : g;

    auto left_slope = [&]() -> CutEntry {
      if (g == 0.0) return {apex, apex, 0.0, k, term};
      const double a = set.upper().left_crossing(g, apex);
      const double b = set.lower().left_crossing(g, apex);
      return {std::min(a, b), std::max(a, b), share, k, term};
    };
    auto right_slope = [&]() -> CutEntry {
      if (g == 0.0) return {apex, apex, 0.0, k, term};
      const double a = set.lower().right_crossing(g, apex);
      const double b = set.upper().right_crossing(g, apex);
      return {std::min(a, b), std::max(a, b), share, k, term};
    };

    switch (set.shape()) {
      case ShapeKind::kLeftShoulder: cuts.push_back(right_slope()); break;
      case ShapeKind::kRightShoulder: cuts.push_back(left_slope()); break;
      case ShapeKind::kSymmetricTriangle:
        cuts.push_back(left_slope());
        cuts.push_back(right_slope());
        break;
    }
  }
  return cuts;
}

std::vector<TrustPair> FuzzyTrustSystem::to_trust_pairs(std::span<const CutEntry> cuts) const {
  std::vector<TrustPair> pairs;
  pairs.reserve(cuts.size());
  for (const CutEntry& c : cuts) {
    const It2FuzzySet& set = sets_.output[static_cast<std::size_t>(c.term)];
    const double value = 0.5 * (c.left + c.right);
    // Membership of the midpoint, scaled by the grade the cut carries.
    pairs.push_back({value, snap(c.grade * set.lower()(value)), snap(c.grade * set.upper()(value)),
                     c.rule, c.term});
  }
  return pairs;
}

std::vector<TrustPair> normalize_and_sort(std::vector<TrustPair> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const TrustPair& a, const TrustPair& b) { return a.value < b.value; });
  double max_lower = 0.0;
  double max_upper = 0.0;
  for (const auto& p : pairs) {
    max_lower = std::max(max_lower, p.grade_lower);
    max_upper = std::max(max_upper, p.grade_upper);
  }
  for (auto& p : pairs) {
    if (max_lower > 0.0) p.grade_lower /= max_lower;
    if (max_upper > 0.0) p.grade_upper /= max_upper;
  }
  return pairs;
}

std::optional<double> center_of_sets_at(std::span<const TrustPair> pairs,
                                        std::size_t switch_point, Endpoint endpoint) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t v = 0; v < pairs.size(); ++v) {
    const bool head = v < switch_point;
    const bool use_upper = endpoint == Endpoint::kLeft ? head : !head;
    const double w = use_upper ? pairs[v].grade_upper : pairs[v].grade_lower;
    num += w * pairs[v].value;
    den += w;
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

namespace {

// EIASC estimate of the switch point, 1-based and clamped to [1, n-1].
std::size_t eiasc_switch(std::span<const TrustPair> pairs, Endpoint endpoint) {
  const std::size_t n = pairs.size();
  double a = 0.0;
  double b = 0.0;
  for (const auto& p : pairs) {
    a += p.value * p.grade_lower;
    b += p.grade_lower;
  }
  if (endpoint == Endpoint::kLeft) {
    std::size_t l = 0;
    while (l < n - 1) {
      const double d = pairs[l].grade_upper - pairs[l].grade_lower;
      a += pairs[l].value * d;
      b += d;
      ++l;
      if (b > 0.0 && a / b <= pairs[l].value) break;
    }
    return std::clamp<std::size_t>(l, 1, n - 1);
  }
  std::size_t r = n;
  while (r > 1) {
    --r;
    const double d = pairs[r].grade_upper - pairs[r].grade_lower;
    a += pairs[r].value * d;
    b += d;
    if (b > 0.0 && a / b >= pairs[r - 1].value) break;
  }
  return std::clamp<std::size_t>(r, 1, n - 1);
}

struct SwitchResult {
  double value;
  std::size_t index;
};

bool better(double candidate, double incumbent, Endpoint endpoint) {
  return endpoint == Endpoint::kLeft ? candidate < incumbent : candidate > incumbent;
}

// Full scan over every switch point; ties resolve to the smallest index.
std::optional<SwitchResult> scan_all(std::span<const TrustPair> pairs, Endpoint endpoint) {
  std::optional<SwitchResult> best;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    auto v = center_of_sets_at(pairs, i, endpoint);
    if (v && (!best || better(*v, best->value, endpoint))) best = SwitchResult{*v, i};
  }
  return best;
}

// Start at the EIASC estimate and descend to the optimum of the exact
// objective. The objective is unimodal in the switch point whenever every
// lower grade is at most its upper grade.
std::optional<SwitchResult> descend(std::span<const TrustPair> pairs, Endpoint endpoint) {
  const std::size_t n = pairs.size();
  std::size_t i = eiasc_switch(pairs, endpoint);
  auto at = [&](std::size_t k) { return center_of_sets_at(pairs, k, endpoint); };

  auto cur = at(i);
  if (!cur) {
    // Zero-weight switch points form one contiguous run; step out of it.
    std::optional<SwitchResult> found;
    for (std::size_t step = 1; step < n && !found; ++step) {
      for (std::size_t k : {i - step, i + step}) {
        if (k >= 1 && k <= n - 1) {
          if (auto v = at(k)) {
            if (!found || better(*v, found->value, endpoint) ||
                (*v == found->value && k < found->index)) {
              found = SwitchResult{*v, k};
            }
          }
        }
      }
    }
    if (!found) return std::nullopt;
    i = found->index;
    cur = found->value;
  }
  for (;;) {
    if (i > 1) {
      if (auto v = at(i - 1); v && !better(*cur, *v, endpoint)) {
        --i;
        cur = v;
        continue;
      }
    }
    if (i < n - 1) {
      if (auto v = at(i + 1); v && better(*v, *cur, endpoint)) {
        ++i;
        cur = v;
        continue;
      }
    }
    break;
  }
  return SwitchResult{*cur, i};
}

SwitchResult reduce_endpoint(std::span<const TrustPair> pairs, Endpoint endpoint) {
  const bool ordered_fou = std::all_of(pairs.begin(), pairs.end(), [](const TrustPair& p) {
    return p.grade_lower <= p.grade_upper;
  });
  // Separately normalized grades may invert lower/upper, which breaks the
  // unimodality EIASC relies on; scan those exhaustively.
  auto r = ordered_fou ? descend(pairs, endpoint) : scan_all(pairs, endpoint);
  if (r) return *r;
  // Every switch point has zero weight: all mass sits on one end pair and
  // carries only an upper grade. The all-upper centroid is that pair.
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : pairs) {
    num += p.grade_upper * p.value;
    den += p.grade_upper;
  }
  return {num / den, endpoint == Endpoint::kLeft ? pairs.size() - 1 : std::size_t{1}};
}

}  // namespace

TypeReducedInterval type_reduce(std::span<const TrustPair> pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("type reduction needs at least two pairs");
  const bool any = std::any_of(pairs.begin(), pairs.end(), [](const TrustPair& p) {
    return p.grade_lower > 0.0 || p.grade_upper > 0.0;
  });
  if (!any) throw DegenerateInputError("type reduction on all-zero membership grades");
  const SwitchResult l = reduce_endpoint(pairs, Endpoint::kLeft);
  const SwitchResult r = reduce_endpoint(pairs, Endpoint::kRight);
  return {l.value, r.value, l.index, r.index};
}

FuzzyTrustSystem::Trace FuzzyTrustSystem::evaluate_trace(double dpr, double dlr) const {
  Trace t{};
  t.firing = fire_rules(dpr, dlr);
  t.cuts = alpha_cut_intervals(t.firing);
  t.pairs = normalize_and_sort(to_trust_pairs(t.cuts));
  const bool fired = std::any_of(t.firing.begin(), t.firing.end(), [](double g) { return g > 0.0; });
  if (!fired) {
    t.degenerate = true;
    t.interval = {kNeutralTrust, kNeutralTrust, 1, 1};
    t.trust = kNeutralTrust;
    return t;
  }
  t.interval = type_reduce(t.pairs);
  t.trust = std::clamp(0.5 * (t.interval.left + t.interval.right), 0.0, 1.0);
  return t;
}

double FuzzyTrustSystem::evaluate_trust(double dpr, double dlr) const {
  return evaluate_trace(dpr, dlr).trust;
}

}  // namespace wsn
