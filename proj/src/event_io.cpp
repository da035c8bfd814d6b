#include "coinclab/event_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "coinclab/errors.hpp"

namespace coinclab {

namespace {

constexpr std::size_t kFlushBytes = 1 << 20;

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void append_fixed(std::string& out, double v, int decimals) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw IoError("cannot format value");
  out.append(buf, ptr);
}

char origin_code(OriginTag o) {
  switch (o) {
    case OriginTag::SourcePair: return 'P';
    case OriginTag::Thermal: return 'T';
    case OriginTag::DarkCount: return 'D';
  }
  return '?';
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      f.push_back(line.substr(start));
      return f;
    }
    f.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::uint64_t parse_uint_field(std::string_view v, std::size_t line, const char* column) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw SchemaError(line, column, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double_field(std::string_view v, std::size_t line, const char* column) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw SchemaError(line, column, "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

// Column positions resolved from a header line.
template <std::size_t N>
std::array<std::optional<std::size_t>, N> map_columns(std::string_view header,
                                                      const std::array<const char*, N>& names) {
  std::array<std::optional<std::size_t>, N> idx{};
  const auto fields = split_fields(header);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t k = 0; k < N; ++k) {
      if (fields[i] == names[k]) {
        if (idx[k]) throw SchemaError(1, names[k], "duplicate column");
        idx[k] = i;
      }
    }
  }
  return idx;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string format_fixed(double v, int decimals) {
  std::string s;
  append_fixed(s, v, decimals);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_toa(double toa) { return format_fixed(toa, 4); }

double normalize_toa(double toa) {
  const std::string s = format_toa(toa);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

void write_events(std::ostream& out, std::span<const DetectedEvent> events, int tot) {
  std::string buf;
  buf.reserve(kFlushBytes + 256);
  const auto tagged = std::count_if(events.begin(), events.end(), [](const DetectedEvent& e) { return e.origin.has_value(); });
  if (tagged != 0 && static_cast<std::size_t>(tagged) != events.size()) {
    throw DomainError("write_events: events mix truth-tagged and untagged entries");
  }
  buf.append(kEventsHeader);
  buf.push_back('\n');
  for (const auto& e : events) {
    append_uint(buf, e.event_id);
    buf.push_back(',');
    buf.push_back(e.stripe == Stripe::Herald ? 'H' : 'S');
    buf.push_back(',');
    append_uint(buf, e.x_pix);
    buf.push_back(',');
    append_uint(buf, e.y_pix);
    buf.push_back(',');
    append_fixed(buf, e.toa, 4);
    buf.push_back(',');
    append_uint(buf, static_cast<std::uint64_t>(tot));
    buf.push_back(',');
    if (e.origin) buf.push_back(origin_code(*e.origin));
    buf.push_back(',');
    if (e.pair_id) append_uint(buf, *e.pair_id);
    buf.push_back('\n');
    if (buf.size() >= kFlushBytes) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed to write events");
}

void write_events_file(const std::string& path, std::span<const DetectedEvent> events, int tot) {
  auto out = open_output(path);
  write_events(out, events, tot);
  finish(out, path);
}

EventFile read_events(std::istream& in, const DetectorConfig& detector) {
  enum Col : std::size_t { kId, kStripe, kX, kY, kToa, kTot, kOrigin, kPairId, kCount };
  static constexpr std::array<const char*, kCount> names = {
      "event_id", "stripe", "x_pix", "y_pix", "toa_ns", "tot", "origin", "pair_id"};

  std::string line;
  if (!next_line(in, line) || line.empty()) throw IoError("no events");
  const auto cols = map_columns(line, names);
  for (std::size_t k : {kId, kStripe, kX, kY, kToa}) {
    if (!cols[k]) throw SchemaError(1, names[k], "missing required column");
  }
  const std::size_t n_fields = split_fields(line).size();

  EventFile file;
  // Truth tags need the origin column filled on every row; a column left
  // empty throughout (untagged data in the full schema) reads as no truth.
  std::optional<bool> tagged;
  if (!cols[kOrigin]) tagged = false;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != n_fields) {
      throw SchemaError(line_no, names[kId],
                        "expected " + std::to_string(n_fields) + " fields, got " + std::to_string(f.size()));
    }
    const auto field = [&](Col c) { return f[*cols[c]]; };

    DetectedEvent e;
    e.event_id = parse_uint_field(field(kId), line_no, names[kId]);
    const auto stripe = field(kStripe);
    if (stripe == "H") {
      e.stripe = Stripe::Herald;
    } else if (stripe == "S") {
      e.stripe = Stripe::Signal;
    } else {
      throw SchemaError(line_no, names[kStripe], "expected H or S, got '" + std::string(stripe) + "'");
    }
    const auto x = parse_uint_field(field(kX), line_no, names[kX]);
    if (x >= static_cast<std::uint64_t>(detector.sensor_width)) {
      throw SchemaError(line_no, names[kX], "pixel column outside the sensor");
    }
    const auto y = parse_uint_field(field(kY), line_no, names[kY]);
    if (y >= static_cast<std::uint64_t>(detector.sensor_height)) {
      throw SchemaError(line_no, names[kY], "pixel row outside the sensor");
    }
    e.x_pix = static_cast<std::uint16_t>(x);
    e.y_pix = static_cast<std::uint16_t>(y);
    e.toa = parse_double_field(field(kToa), line_no, names[kToa]);
    if (cols[kTot] && !field(kTot).empty()) parse_uint_field(field(kTot), line_no, names[kTot]);
    e.measured_wavelength = pixel_to_wavelength(detector, e.stripe, static_cast<int>(e.x_pix));

    if (cols[kPairId] && !field(kPairId).empty()) {
      e.pair_id = parse_uint_field(field(kPairId), line_no, names[kPairId]);
    }
    if (!tagged) tagged = !field(kOrigin).empty();
    if (!*tagged) {
      if (cols[kOrigin] && !field(kOrigin).empty()) {
        throw SchemaError(line_no, names[kOrigin], "origin set on some rows but not others");
      }
      if (e.pair_id) throw SchemaError(line_no, names[kPairId], "pair_id without origin");
    } else {
      const auto o = field(kOrigin);
      if (o == "P") {
        e.origin = OriginTag::SourcePair;
      } else if (o == "T") {
        e.origin = OriginTag::Thermal;
      } else if (o == "D") {
        e.origin = OriginTag::DarkCount;
      } else {
        throw SchemaError(line_no, names[kOrigin], "expected P, T or D, got '" + std::string(o) + "'");
      }
      if ((e.origin == OriginTag::SourcePair) != e.pair_id.has_value()) {
        throw SchemaError(line_no, names[kPairId], "pair_id must be present exactly for origin P");
      }
    }
    file.events.push_back(e);
  }
  if (in.bad()) throw IoError("read error in events file");
  if (file.events.empty()) throw IoError("no events");
  file.has_truth = *tagged;
  sort_by_toa(file.events);
  return file;
}

EventFile read_events_file(const std::string& path, const DetectorConfig& detector) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open events file '" + path + "'");
  try {
    return read_events(in, detector);
  } catch (const SchemaError& e) {
    throw SchemaError(e.line(), e.column(), path + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_pairs(std::ostream& out, std::span<const PairRecord> pairs) {
  std::string buf;
  buf.reserve(kFlushBytes + 256);
  buf.append(kPairsHeader);
  buf.push_back('\n');
  for (const auto& p : pairs) {
    append_uint(buf, p.herald_event_id);
    buf.push_back(',');
    append_uint(buf, p.signal_event_id);
    buf.push_back(',');
    append_fixed(buf, p.delta_t, 4);
    buf.push_back(',');
    append_fixed(buf, p.lambda_p_rec, 6);
    buf.push_back(',');
    if (p.pair_class) buf.append(pair_class_code(*p.pair_class));
    buf.push_back('\n');
    if (buf.size() >= kFlushBytes) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed to write pairs");
}

void write_pairs_file(const std::string& path, std::span<const PairRecord> pairs) {
  auto out = open_output(path);
  write_pairs(out, pairs);
  finish(out, path);
}

std::vector<PairRecord> read_pairs(std::istream& in) {
  static constexpr std::array<const char*, 5> names = {"herald_id", "signal_id", "delta_t_ns", "lambda_p_nm", "class"};
  std::string line;
  if (!next_line(in, line) || line.empty()) throw IoError("no pairs header");
  const auto cols = map_columns(line, names);
  for (std::size_t k = 0; k < 4; ++k) {
    if (!cols[k]) throw SchemaError(1, names[k], "missing required column");
  }
  const std::size_t n_fields = split_fields(line).size();
  std::vector<PairRecord> pairs;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != n_fields) throw SchemaError(line_no, names[0], "wrong number of fields");
    PairRecord p;
    p.herald_event_id = parse_uint_field(f[*cols[0]], line_no, names[0]);
    p.signal_event_id = parse_uint_field(f[*cols[1]], line_no, names[1]);
    p.delta_t = parse_double_field(f[*cols[2]], line_no, names[2]);
    p.lambda_p_rec = parse_double_field(f[*cols[3]], line_no, names[3]);
    if (cols[4] && !f[*cols[4]].empty()) {
      p.pair_class = parse_pair_class(f[*cols[4]]);
      if (!p.pair_class) throw SchemaError(line_no, names[4], "expected TC, SM, SB or TH");
    }
    pairs.push_back(p);
  }
  return pairs;
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(out, path);
}

}  // namespace coinclab
