#pragma once

// Brute-force restatement of the one-to-one greedy pairing rule: list every
// cross-stripe candidate within the window, sort by (|dT|, herald id,
// signal id), accept a candidate when neither event is taken yet.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "coinclab/detector_model.hpp"

namespace oracle {

using IdPair = std::pair<std::uint64_t, std::uint64_t>;

inline std::vector<IdPair> brute_force_greedy(std::span<const coinclab::DetectedEvent> herald,
                                              std::span<const coinclab::DetectedEvent> signal, double window) {
  std::vector<std::tuple<double, std::uint64_t, std::uint64_t>> candidates;
  for (const auto& h : herald) {
    for (const auto& s : signal) {
      const double d = std::abs(h.toa - s.toa);
      if (d <= window) candidates.emplace_back(d, h.event_id, s.event_id);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::set<std::uint64_t> used_h, used_s;
  std::vector<IdPair> out;
  for (const auto& [d, h, s] : candidates) {
    if (used_h.count(h) || used_s.count(s)) continue;
    used_h.insert(h);
    used_s.insert(s);
    out.emplace_back(h, s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Random toa-sorted stripe with up to `max_events` events on a coarse
/// lattice, so equal |dT| ties are frequent.
inline std::vector<coinclab::DetectedEvent> random_stripe(std::mt19937_64& rng, coinclab::Stripe stripe,
                                                          int max_events, std::uint64_t id_offset) {
  std::uniform_int_distribution<int> count(0, max_events);
  std::uniform_int_distribution<int> tick(0, 40);
  std::vector<coinclab::DetectedEvent> out(static_cast<std::size_t>(count(rng)));
  std::vector<std::uint64_t> ids;
  for (std::size_t i = 0; i < out.size(); ++i) ids.push_back(4 * i + id_offset);
  std::shuffle(ids.begin(), ids.end(), rng);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].event_id = ids[i];
    out[i].stripe = stripe;
    out[i].toa = 1.5625 * tick(rng);
    out[i].measured_wavelength = 810.0;
  }
  std::sort(out.begin(), out.end(), coinclab::toa_order);
  return out;
}

}  // namespace oracle
