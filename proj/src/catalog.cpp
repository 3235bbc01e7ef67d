#include "quakenet/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <variant>

#include "quakenet/error.hpp"
#include "quakenet/random.hpp"
#include "text_util.hpp"

namespace quakenet {

namespace {

bool valid_zone(std::string_view zone) {
  if (zone.empty()) return false;
  return std::all_of(zone.begin(), zone.end(), [](char c) {
    return c != ',' && c != ' ' && c != '\t' && c != '"' && !(c >= 'a' && c <= 'z') && static_cast<unsigned char>(c) >= 0x20;
  });
}

std::optional<Date> try_parse_date(std::string_view text) {
  const auto parts = detail::split(text, '-');
  if (parts.size() != 3 || parts[0].size() != 4 || parts[1].size() != 2 || parts[2].size() != 2) return std::nullopt;
  const auto y = detail::parse_int(parts[0]);
  const auto m = detail::parse_int(parts[1]);
  const auto d = detail::parse_int(parts[2]);
  if (!y || !m || !d) return std::nullopt;
  const Date date{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{static_cast<unsigned>(*m)},
                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

// Division by an exact power of ten yields the double nearest the decimal,
// so the catalog prints short literals.
double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

struct RowError {
  ErrorCode code;
  std::string field;
};

// Returns the record or the first field-level problem.
std::variant<CatalogRecord, RowError> parse_row(std::string_view line) {
  static constexpr const char* kFields[] = {"date", "time", "latitude", "longitude", "depth_km", "magnitude", "zone"};
  const auto cols = detail::split(line, ',');
  if (cols.size() != 7) return RowError{ErrorCode::MalformedRow, "column count " + std::to_string(cols.size())};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].empty()) return RowError{ErrorCode::EmptyField, kFields[i]};
  }

  CatalogRecord rec;
  const auto date = try_parse_date(cols[0]);
  if (!date) return RowError{ErrorCode::MalformedRow, "date"};
  rec.date = *date;

  const auto hms = detail::split(cols[1], ':');
  if (hms.size() != 3) return RowError{ErrorCode::MalformedRow, "time"};
  const auto h = detail::parse_int(hms[0]);
  const auto mi = detail::parse_int(hms[1]);
  const auto s = detail::parse_int(hms[2]);
  if (!h || !mi || !s) return RowError{ErrorCode::MalformedRow, "time"};
  rec.hour = static_cast<int>(*h);
  rec.minute = static_cast<int>(*mi);
  rec.second = static_cast<int>(*s);

  double* numeric[] = {&rec.latitude, &rec.longitude, &rec.depth_km, &rec.magnitude};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto v = detail::parse_double(cols[2 + i]);
    if (!v) return RowError{ErrorCode::MalformedRow, kFields[2 + i]};
    *numeric[i] = *v;
  }
  rec.zone = std::string(cols[6]);

  if (auto bad = invalid_field(rec); !bad.empty()) return RowError{ErrorCode::MalformedRow, bad};
  return rec;
}

}  // namespace

std::string invalid_field(const CatalogRecord& r) {
  if (!r.date.ok()) return "date";
  if (r.hour < 0 || r.hour > 23 || r.minute < 0 || r.minute > 59 || r.second < 0 || r.second > 59) return "time";
  if (!(r.latitude >= -90.0 && r.latitude <= 90.0)) return "latitude";
  if (!(r.longitude >= -180.0 && r.longitude <= 180.0)) return "longitude";
  if (!(r.depth_km >= 0.0) || !std::isfinite(r.depth_km)) return "depth_km";
  if (!(r.magnitude > 0.0 && r.magnitude <= 10.0)) return "magnitude";
  if (!valid_zone(r.zone)) return "zone";
  return {};
}

Date parse_date(std::string_view text) {
  auto date = try_parse_date(text);
  if (!date) throw Error(ErrorCode::InvalidArgument, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  return *date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

std::int64_t days_between(const Date& origin, const Date& date) {
  return (std::chrono::sys_days{date} - std::chrono::sys_days{origin}).count();
}

ParseResult parse_catalog(std::istream& source, bool strict) {
  ParseResult result;
  std::string line;
  if (!std::getline(source, line) || detail::trim_cr(line) != kCatalogHeader) {
    throw Error(ErrorCode::MissingHeader, std::string("expected header '") + kCatalogHeader + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    const auto row = detail::trim_cr(line);
    if (row.empty()) continue;
    auto parsed = parse_row(row);
    if (auto* rec = std::get_if<CatalogRecord>(&parsed)) {
      result.records.push_back(std::move(*rec));
      continue;
    }
    const auto& err = std::get<RowError>(parsed);
    if (strict) throw Error(err.code, "row " + std::to_string(line_no) + ", field " + err.field);
    ++result.skipped_rows;
  }
  return result;
}

void write_catalog(std::ostream& sink, const std::vector<CatalogRecord>& records) {
  sink << kCatalogHeader << '\n';
  char time_buf[16];
  for (const auto& r : records) {
    std::snprintf(time_buf, sizeof(time_buf), "%02d:%02d:%02d", r.hour, r.minute, r.second);
    sink << format_date(r.date) << ',' << time_buf << ',' << detail::format_double(r.latitude) << ','
         << detail::format_double(r.longitude) << ',' << detail::format_double(r.depth_km) << ','
         << detail::format_double(r.magnitude) << ',' << r.zone << '\n';
  }
  if (!sink) throw Error(ErrorCode::IOFailure, "failed writing catalog");
}

std::vector<CatalogRecord> filter_records(const std::vector<CatalogRecord>& records, double min_magnitude,
                                          const std::optional<DateRange>& range) {
  if (!(min_magnitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "min_magnitude must be > 0");
  if (range && std::chrono::sys_days{range->first} > std::chrono::sys_days{range->last}) {
    throw Error(ErrorCode::InvalidRange, format_date(range->first) + " is after " + format_date(range->last));
  }
  std::vector<CatalogRecord> out;
  for (const auto& r : records) {
    if (!(r.magnitude > min_magnitude)) continue;
    if (range && (r.date < range->first || r.date > range->last)) continue;
    out.push_back(r);
  }
  return out;
}

void SynthRegion::validate() const {
  const bool ok = lat_min < lat_max && lat_min >= -90.0 && lat_max <= 90.0 && lon_min < lon_max &&
                  lon_min >= -180.0 && lon_max <= 180.0 && depth_max_km > 0.0 && magnitude_floor > 0.0 &&
                  magnitude_cap > magnitude_floor && magnitude_cap <= 10.0 && magnitude_rate > 0.0 &&
                  first_date.ok() && last_date.ok() && first_date <= last_date && zone_rows >= 1 && zone_cols >= 1 &&
                  zone_names.size() == static_cast<std::size_t>(zone_rows * zone_cols);
  if (!ok) throw Error(ErrorCode::InvalidArgument, "malformed synthetic region");
  for (const auto& z : zone_names) {
    if (!valid_zone(z)) throw Error(ErrorCode::InvalidArgument, "invalid zone label '" + z + "'");
  }
}

namespace {

struct Cell {
  int row;
  int col;
};

Cell cell_of(const SynthRegion& region, double lat, double lon) {
  const double fr = (lat - region.lat_min) / (region.lat_max - region.lat_min);
  const double fc = (lon - region.lon_min) / (region.lon_max - region.lon_min);
  const int row = std::clamp(static_cast<int>(fr * region.zone_rows), 0, region.zone_rows - 1);
  const int col = std::clamp(static_cast<int>(fc * region.zone_cols), 0, region.zone_cols - 1);
  return {row, col};
}

Date random_date(Rng& rng, const SynthRegion& region) {
  const auto span = days_between(region.first_date, region.last_date);
  const auto offset = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span) + 1));
  return Date{std::chrono::sys_days{region.first_date} + std::chrono::days{offset}};
}

// Smallest representable catalog magnitude strictly above the floor.
double clamp_magnitude(const SynthRegion& region, double m) {
  m = round_to(m, 2);
  return std::clamp(m, round_to(region.magnitude_floor + 0.01, 2), region.magnitude_cap);
}

}  // namespace

std::vector<CatalogRecord> generate_synthetic_catalog(std::uint64_t seed, std::size_t count, const SynthRegion& region) {
  region.validate();
  Rng rng(seed);
  std::vector<CatalogRecord> out;
  out.reserve(count);
  const double span = region.magnitude_cap - region.magnitude_floor;
  const double tail = 1.0 - std::exp(-region.magnitude_rate * span);
  for (std::size_t i = 0; i < count; ++i) {
    CatalogRecord r;
    r.date = random_date(rng, region);
    r.hour = static_cast<int>(rng.below(24));
    r.minute = static_cast<int>(rng.below(60));
    r.second = static_cast<int>(rng.below(60));
    r.latitude = round_to(rng.uniform(region.lat_min, region.lat_max), 4);
    r.longitude = round_to(rng.uniform(region.lon_min, region.lon_max), 4);
    r.depth_km = round_to(rng.uniform(0.0, region.depth_max_km), 1);
    // inverse CDF of the exponential law truncated to (floor, cap]
    const double u = rng.uniform_open_zero();
    r.magnitude = clamp_magnitude(region, region.magnitude_floor - std::log1p(-u * tail) / region.magnitude_rate);
    const auto cell = cell_of(region, r.latitude, r.longitude);
    r.zone = region.zone_names[static_cast<std::size_t>(cell.row * region.zone_cols + cell.col)];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CatalogRecord> generate_smooth_catalog(std::uint64_t seed, std::size_t count, const SynthRegion& region,
                                                   double noise_fraction) {
  region.validate();
  Rng rng(seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto day_span = static_cast<double>(std::max<std::int64_t>(1, days_between(region.first_date, region.last_date)));
  const double cell_h = (region.lat_max - region.lat_min) / region.zone_rows;
  const double cell_w = (region.lon_max - region.lon_min) / region.zone_cols;
  const double mag_span = std::min(3.0, region.magnitude_cap - region.magnitude_floor);
  const std::size_t zones = region.zone_names.size();

  std::vector<CatalogRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CatalogRecord r;
    r.date = random_date(rng, region);
    r.hour = static_cast<int>(rng.below(24));
    r.minute = static_cast<int>(rng.below(60));
    r.second = static_cast<int>(rng.below(60));
    const auto z = static_cast<std::size_t>(rng.below(zones));
    r.zone = region.zone_names[z];

    const double t = static_cast<double>(days_between(region.first_date, r.date)) / day_span;
    const double h = r.hour / 23.0;
    const double m = r.minute / 59.0;
    const double phase = static_cast<double>(z) / static_cast<double>(zones);
    const int row = static_cast<int>(z) / region.zone_cols;
    const int col = static_cast<int>(z) % region.zone_cols;
    const double lat_c = region.lat_min + (row + 0.5) * cell_h;
    const double lon_c = region.lon_min + (col + 0.5) * cell_w;

    // Each target stays inside its zone cell so the zone label is consistent
    // with the location.
    double lat = lat_c + cell_h * (0.25 * std::sin(two_pi * (t + phase)) + 0.15 * (h - 0.5));
    double lon = lon_c + cell_w * (0.25 * std::cos(two_pi * t + phase) + 0.15 * (m - 0.5));
    double mag = region.magnitude_floor + mag_span * (0.5 + 0.25 * std::sin(two_pi * (t + 0.5 * h)) + 0.15 * (phase - 0.5));
    lat += noise_fraction * (region.lat_max - region.lat_min) * rng.normal();
    lon += noise_fraction * (region.lon_max - region.lon_min) * rng.normal();
    mag += noise_fraction * mag_span * rng.normal();

    r.latitude = std::clamp(round_to(lat, 4), region.lat_min, region.lat_max);
    r.longitude = std::clamp(round_to(lon, 4), region.lon_min, region.lon_max);
    r.depth_km = round_to(region.depth_max_km * (0.3 + 0.2 * std::sin(two_pi * t) + 0.1 * phase), 1);
    r.magnitude = clamp_magnitude(region, mag);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace quakenet
