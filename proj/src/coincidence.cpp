#include "coinclab/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "coinclab/errors.hpp"

namespace coinclab {

namespace {

void require_sorted(std::span<const DetectedEvent> events, const char* which) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].toa < events[i - 1].toa) {
      throw Error(std::string("find_pairs: ") + which + " events are not sorted by toa");
    }
  }
}

struct Candidate {
  double distance;
  std::uint64_t herald_id;
  std::uint64_t signal_id;
  std::size_t herald_index;
  std::size_t signal_index;

  auto key() const noexcept { return std::tie(distance, herald_id, signal_id); }
  bool operator>(const Candidate& o) const noexcept { return key() > o.key(); }
};

// Nearest signal to time t that is not yet taken, limited to `window`. Among
// equal distances the smaller event_id wins.
class SignalIndex {
 public:
  SignalIndex(std::span<const DetectedEvent> signal, bool exclusive)
      : signal_(signal), taken_(exclusive ? signal.size() : 0, false), exclusive_(exclusive) {}

  std::optional<std::size_t> nearest(double t, double window) const {
    const auto it = std::lower_bound(signal_.begin(), signal_.end(), t,
                                     [](const DetectedEvent& e, double v) { return e.toa < v; });
    const auto p = static_cast<std::size_t>(it - signal_.begin());

    std::optional<std::size_t> right;
    for (std::size_t j = p; j < signal_.size() && signal_[j].toa - t <= window; ++j) {
      if (right && signal_[j].toa != signal_[*right].toa) break;
      if (!available(j)) continue;
      if (!right || signal_[j].event_id < signal_[*right].event_id) right = j;
    }
    std::optional<std::size_t> left;
    for (std::size_t j = p; j-- > 0 && t - signal_[j].toa <= window;) {
      if (left && signal_[j].toa != signal_[*left].toa) break;
      if (!available(j)) continue;
      if (!left || signal_[j].event_id < signal_[*left].event_id) left = j;
    }
    if (!left) return right;
    if (!right) return left;
    const double dr = signal_[*right].toa - t;
    const double dl = t - signal_[*left].toa;
    if (dr != dl) return dr < dl ? right : left;
    return signal_[*right].event_id < signal_[*left].event_id ? right : left;
  }

  bool available(std::size_t j) const { return !exclusive_ || !taken_[j]; }
  void take(std::size_t j) {
    if (exclusive_) taken_[j] = true;
  }

 private:
  std::span<const DetectedEvent> signal_;
  std::vector<bool> taken_;
  bool exclusive_;
};

PairRecord make_record(const DetectedEvent& h, const DetectedEvent& s) {
  const PairObservables obs = pair_observables(h, s);
  PairRecord rec;
  rec.herald_event_id = h.event_id;
  rec.signal_event_id = s.event_id;
  rec.delta_t = obs.delta_t;
  rec.lambda_p_rec = obs.lambda_p;
  rec.pair_class = classify_pair(h, s);
  return rec;
}

}  // namespace

std::string_view pair_class_code(PairClass c) noexcept {
  switch (c) {
    case PairClass::TrueCoincidence: return "TC";
    case PairClass::SignalMistag: return "SM";
    case PairClass::SignalBackground: return "SB";
    case PairClass::Thermal: return "TH";
  }
  return "??";
}

std::optional<PairClass> parse_pair_class(std::string_view code) noexcept {
  for (PairClass c : kAllPairClasses) {
    if (pair_class_code(c) == code) return c;
  }
  return std::nullopt;
}

std::vector<PairRecord> find_pairs(std::span<const DetectedEvent> herald,
                                   std::span<const DetectedEvent> signal, double window,
                                   PairingMode mode) {
  require_sorted(herald, "herald");
  require_sorted(signal, "signal");
  if (!(window >= 0.0)) throw DomainError("find_pairs: window must be >= 0");

  const bool exclusive = mode == PairingMode::OneToOne;
  SignalIndex index(signal, exclusive);
  std::vector<std::optional<std::size_t>> partner(herald.size());

  if (!exclusive) {
    for (std::size_t i = 0; i < herald.size(); ++i) partner[i] = index.nearest(herald[i].toa, window);
  } else {
    // Lazy global greedy: each herald offers its best still-free signal. A
    // stale offer is a lower bound on that herald's true best, so popping the
    // smallest offer and re-validating reproduces ascending-|dT| acceptance.
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
    const auto offer = [&](std::size_t i) {
      if (auto j = index.nearest(herald[i].toa, window)) {
        queue.push({std::abs(herald[i].toa - signal[*j].toa), herald[i].event_id,
                    signal[*j].event_id, i, *j});
      }
    };
    for (std::size_t i = 0; i < herald.size(); ++i) offer(i);
    while (!queue.empty()) {
      const Candidate c = queue.top();
      queue.pop();
      if (index.available(c.signal_index)) {
        index.take(c.signal_index);
        partner[c.herald_index] = c.signal_index;
      } else {
        offer(c.herald_index);
      }
    }
  }

  std::vector<PairRecord> pairs;
  for (std::size_t i = 0; i < herald.size(); ++i) {
    if (partner[i]) pairs.push_back(make_record(herald[i], signal[*partner[i]]));
  }
  return pairs;
}

PairClass classify_pair(OriginTag herald_origin, std::optional<std::uint64_t> herald_pair,
                        OriginTag signal_origin, std::optional<std::uint64_t> signal_pair) noexcept {
  const bool h_source = herald_origin == OriginTag::SourcePair;
  const bool s_source = signal_origin == OriginTag::SourcePair;
  if (h_source && s_source) {
    return herald_pair && signal_pair && *herald_pair == *signal_pair ? PairClass::TrueCoincidence
                                                                      : PairClass::SignalMistag;
  }
  if (h_source || s_source) return PairClass::SignalBackground;
  return PairClass::Thermal;
}

std::optional<PairClass> classify_pair(const DetectedEvent& herald, const DetectedEvent& signal) noexcept {
  if (!herald.origin || !signal.origin) return std::nullopt;
  return classify_pair(*herald.origin, herald.pair_id, *signal.origin, signal.pair_id);
}

PairObservables pair_observables(const DetectedEvent& herald, const DetectedEvent& signal) {
  return {herald.toa - signal.toa,
          reconstruct_pump_wavelength(herald.measured_wavelength, signal.measured_wavelength)};
}

std::uint64_t ClassCounts::total() const noexcept {
  std::uint64_t n = unclassified;
  for (auto c : by_class) n += c;
  return n;
}

ClassCounts count_classes(std::span<const PairRecord> pairs) noexcept {
  ClassCounts counts;
  for (const auto& p : pairs) {
    if (p.pair_class) {
      ++counts.by_class[static_cast<std::size_t>(*p.pair_class)];
    } else {
      ++counts.unclassified;
    }
  }
  return counts;
}

StripeEvents split_by_stripe(std::vector<DetectedEvent> events) {
  // Herald events are copied out; signal events are compacted in place so
  // the peak footprint stays near one copy of the input.
  StripeEvents out;
  const auto n_herald = static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [](const DetectedEvent& e) { return e.stripe == Stripe::Herald; }));
  const bool herald_smaller = 2 * n_herald <= events.size();
  const Stripe copied = herald_smaller ? Stripe::Herald : Stripe::Signal;
  std::vector<DetectedEvent> copy;
  copy.reserve(herald_smaller ? n_herald : events.size() - n_herald);
  std::size_t keep = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].stripe == copied) {
      copy.push_back(events[i]);
    } else {
      events[keep++] = events[i];
    }
  }
  events.resize(keep);
  if (herald_smaller) {
    out.herald = std::move(copy);
    out.signal = std::move(events);
  } else {
    out.signal = std::move(copy);
    out.herald = std::move(events);
  }
  return out;
}

}  // namespace coinclab
