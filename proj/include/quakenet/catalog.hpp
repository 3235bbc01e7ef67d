#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quakenet {

using Date = std::chrono::year_month_day;

/// One seismic event as listed in the catalog.
struct CatalogRecord {
  Date date{};
  int hour = 0;
  int minute = 0;
  int second = 0;  // kept for lossless round trips, unused by the encoder
  double latitude = 0.0;
  double longitude = 0.0;
  double depth_km = 0.0;
  double magnitude = 0.0;
  std::string zone;

  bool operator==(const CatalogRecord&) const = default;
};

/// Empty string when the record satisfies every field invariant, otherwise the
/// name of the first offending field.
std::string invalid_field(const CatalogRecord& record);

Date parse_date(std::string_view text);  // YYYY-MM-DD, throws Error on failure
std::string format_date(const Date& date);

/// Days elapsed from `origin` to `date` (negative when `date` is earlier).
std::int64_t days_between(const Date& origin, const Date& date);

inline constexpr const char* kCatalogHeader = "date,time,latitude,longitude,depth_km,magnitude,zone";

struct ParseResult {
  std::vector<CatalogRecord> records;
  std::size_t skipped_rows = 0;
};

/// Reads the catalog CSV format. In strict mode the first invalid row throws
/// (MalformedRow / EmptyField carrying the 1-based line number and field
/// name); otherwise invalid rows are skipped and counted.
ParseResult parse_catalog(std::istream& source, bool strict);

void write_catalog(std::ostream& sink, const std::vector<CatalogRecord>& records);

struct DateRange {
  Date first;
  Date last;  // inclusive
};

/// Keeps records with magnitude strictly above `min_magnitude` and, when a
/// range is given, dated inside it (both ends inclusive).
std::vector<CatalogRecord> filter_records(const std::vector<CatalogRecord>& records, double min_magnitude,
                                          const std::optional<DateRange>& range = std::nullopt);

/// Bounding box and magnitude law for the synthetic catalog. The box is split
/// into `zone_rows` x `zone_cols` cells; each cell carries one zone label.
struct SynthRegion {
  double lat_min = 14.0;
  double lat_max = 22.0;
  double lon_min = -106.0;
  double lon_max = -92.0;
  double depth_max_km = 120.0;
  double magnitude_floor = 4.0;
  double magnitude_rate = 2.0;
  double magnitude_cap = 8.5;
  Date first_date = Date{std::chrono::year{2006}, std::chrono::month{3}, std::chrono::day{2}};
  Date last_date = Date{std::chrono::year{2013}, std::chrono::month{5}, std::chrono::day{1}};
  int zone_rows = 2;
  int zone_cols = 3;
  std::vector<std::string> zone_names = {"JALISCO", "MICHOACAN", "GUERRERO", "OAXACA", "CHIAPAS", "VERACRUZ"};

  void validate() const;
};

/// Event locations uniform over the box, magnitudes from a truncated
/// exponential law above the floor. Deterministic per seed.
std::vector<CatalogRecord> generate_synthetic_catalog(std::uint64_t seed, std::size_t count,
                                                      const SynthRegion& region = {});

/// Catalog whose latitude, longitude and magnitude are smooth deterministic
/// functions of (date, hour, minute, zone) plus Gaussian noise with standard
/// deviation `noise_fraction` of each target's span. Used as a learnable
/// stand-in when checking that training actually fits.
std::vector<CatalogRecord> generate_smooth_catalog(std::uint64_t seed, std::size_t count,
                                                   const SynthRegion& region = {}, double noise_fraction = 0.01);

}  // namespace quakenet
