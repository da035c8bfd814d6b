#pragma once

// Events and pairs CSV files.
//
// events: event_id,stripe,x_pix,y_pix,toa_ns,tot,origin,pair_id
//   stripe H|S, origin P|T|D (column optional), pair_id empty when absent,
//   toa_ns fixed-point with 4 decimals, '\n' line endings. Untagged events
//   leave origin and pair_id empty on every row.
// pairs:  herald_id,signal_id,delta_t_ns,lambda_p_nm,class
//   class TC|SM|SB|TH, empty without truth.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "coinclab/coincidence.hpp"
#include "coinclab/detector_model.hpp"

namespace coinclab {

inline constexpr std::string_view kEventsHeader = "event_id,stripe,x_pix,y_pix,toa_ns,tot,origin,pair_id";
inline constexpr std::string_view kPairsHeader = "herald_id,signal_id,delta_t_ns,lambda_p_nm,class";

/// toa as written to the events file (4 decimals).
std::string format_toa(double toa);
/// parse(format(toa)): the value an events-file reader sees.
double normalize_toa(double toa);

/// Shortest round-trip decimal representation.
std::string format_double(double v);
/// Fixed-point with `decimals` digits.
std::string format_fixed(double v, int decimals);

void write_events(std::ostream& out, std::span<const DetectedEvent> events, int tot);
void write_events_file(const std::string& path, std::span<const DetectedEvent> events, int tot);

struct EventFile {
  std::vector<DetectedEvent> events;  // sorted by (toa, event_id)
  bool has_truth = false;  // the origin column was present and filled
};

/// Reads an events file; measured wavelengths come from the detector
/// calibration. Throws SchemaError (line, column) for malformed content and
/// IoError "no events" for a file without event rows.
EventFile read_events(std::istream& in, const DetectorConfig& detector);
EventFile read_events_file(const std::string& path, const DetectorConfig& detector);

void write_pairs(std::ostream& out, std::span<const PairRecord> pairs);
void write_pairs_file(const std::string& path, std::span<const PairRecord> pairs);
std::vector<PairRecord> read_pairs(std::istream& in);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace coinclab
