#pragma once

// Cross-stripe pairing by smallest time difference, and truth classification
// of the resulting pairs.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coinclab/detector_model.hpp"

namespace coinclab {

enum class PairClass : std::uint8_t { TrueCoincidence, SignalMistag, SignalBackground, Thermal };

inline constexpr std::array<PairClass, 4> kAllPairClasses = {
    PairClass::TrueCoincidence, PairClass::SignalMistag, PairClass::SignalBackground,
    PairClass::Thermal};

/// Short code used in the pairs file: TC, SM, SB, TH.
std::string_view pair_class_code(PairClass c) noexcept;
std::optional<PairClass> parse_pair_class(std::string_view code) noexcept;

struct PairRecord {
  std::uint64_t herald_event_id = 0;
  std::uint64_t signal_event_id = 0;
  double delta_t = 0.0;  // ns, ToA_herald - ToA_signal
  double lambda_p_rec = 0.0;  // nm
  std::optional<PairClass> pair_class;  // absent without truth information
};

enum class PairingMode : std::uint8_t {
  /// Each event used at most once; candidates accepted in ascending |dT|.
  OneToOne,
  /// Every herald takes its nearest signal; signals may be reused.
  NearestNeighbor,
};

/// Pairs herald and signal events whose |dT| <= window. Both inputs must be
/// sorted by toa (Error otherwise). Ties in |dT| go to the smaller herald
/// event_id, then the smaller signal event_id. Output follows herald order.
std::vector<PairRecord> find_pairs(std::span<const DetectedEvent> herald,
                                   std::span<const DetectedEvent> signal, double window,
                                   PairingMode mode = PairingMode::OneToOne);

PairClass classify_pair(OriginTag herald_origin, std::optional<std::uint64_t> herald_pair,
                        OriginTag signal_origin, std::optional<std::uint64_t> signal_pair) noexcept;

/// Empty when either event lacks an origin tag.
std::optional<PairClass> classify_pair(const DetectedEvent& herald, const DetectedEvent& signal) noexcept;

struct PairObservables {
  double delta_t = 0.0;
  double lambda_p = 0.0;
};

/// Throws DomainError for non-positive measured wavelengths.
PairObservables pair_observables(const DetectedEvent& herald, const DetectedEvent& signal);

struct ClassCounts {
  std::array<std::uint64_t, 4> by_class{};
  std::uint64_t unclassified = 0;

  std::uint64_t operator[](PairClass c) const noexcept { return by_class[static_cast<std::size_t>(c)]; }
  std::uint64_t total() const noexcept;
};

ClassCounts count_classes(std::span<const PairRecord> pairs) noexcept;

/// Splits a toa-sorted event list into per-stripe lists, preserving order.
struct StripeEvents {
  std::vector<DetectedEvent> herald;
  std::vector<DetectedEvent> signal;
};
StripeEvents split_by_stripe(std::vector<DetectedEvent> events);

}  // namespace coinclab
