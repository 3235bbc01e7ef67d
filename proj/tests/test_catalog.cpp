#include "doctest.h"

#include <random>
#include <sstream>

#include "quakenet/catalog.hpp"
#include "quakenet/error.hpp"
#include "support.hpp"

using namespace quakenet;
using qtest::code_of;
using qtest::record;
using qtest::ymd;

namespace {

std::string with_header(const std::string& body) { return std::string(kCatalogHeader) + "\n" + body; }

// Ten records spanning 2005..2014 with hand-chosen magnitudes.
std::vector<CatalogRecord> fixture() {
  return {
      record(ymd(2005, 6, 1), 3.9),  record(ymd(2006, 3, 1), 4.5),  record(ymd(2006, 3, 2), 4.0),
      record(ymd(2007, 1, 15), 4.01), record(ymd(2009, 8, 8), 2.5),  record(ymd(2011, 11, 30), 6.1),
      record(ymd(2013, 5, 1), 3.0),  record(ymd(2013, 5, 2), 5.2),  record(ymd(2014, 2, 14), 4.0),
      record(ymd(2006, 3, 2), 1.2),
  };
}

}  // namespace

TEST_CASE("header-only file parses to an empty list") {
  std::istringstream in(with_header(""));
  const auto r = parse_catalog(in, true);
  CHECK(r.records.empty());
  CHECK(r.skipped_rows == 0);
}

TEST_CASE("fixture row parses field by field") {
  std::istringstream in(with_header("2013-05-01,10:15:30,16.45,-98.72,10.0,4.3,GUERRERO\n"));
  const auto r = parse_catalog(in, true);
  REQUIRE(r.records.size() == 1);
  const auto& rec = r.records[0];
  CHECK(rec.date == ymd(2013, 5, 1));
  CHECK(rec.hour == 10);
  CHECK(rec.minute == 15);
  CHECK(rec.second == 30);
  CHECK(rec.latitude == 16.45);
  CHECK(rec.longitude == -98.72);
  CHECK(rec.depth_km == 10.0);
  CHECK(rec.magnitude == 4.3);
  CHECK(rec.zone == "GUERRERO");
}

TEST_CASE("strict mode rejects an out-of-range latitude with row and field") {
  std::istringstream in(with_header("2013-05-01,10:15:30,95.0,-98.72,10.0,4.3,GUERRERO\n"));
  try {
    parse_catalog(in, true);
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRow);
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("latitude") != std::string::npos);
  }
}

TEST_CASE("lenient mode skips and counts invalid rows") {
  std::istringstream in(with_header("2013-05-01,10:15:30,95.0,-98.72,10.0,4.3,GUERRERO\n"
                                    "2013-05-01,10:15:30,16.0,-98.72,10.0,4.3,GUERRERO\n"
                                    "2013-02-30,10:15:30,16.0,-98.72,10.0,4.3,GUERRERO\n"
                                    "garbage\n"));
  const auto r = parse_catalog(in, false);
  CHECK(r.records.size() == 1);
  CHECK(r.skipped_rows == 3);
}

TEST_CASE("empty fields and missing header are reported") {
  {
    std::istringstream in(with_header("2013-05-01,10:15:30,,-98.72,10.0,4.3,GUERRERO\n"));
    CHECK(code_of([&] { parse_catalog(in, true); }) == ErrorCode::EmptyField);
  }
  {
    std::istringstream in("2013-05-01,10:15:30,16.0,-98.72,10.0,4.3,GUERRERO\n");
    CHECK(code_of([&] { parse_catalog(in, false); }) == ErrorCode::MissingHeader);
  }
  {
    std::istringstream in("");
    CHECK(code_of([&] { parse_catalog(in, false); }) == ErrorCode::MissingHeader);
  }
}

TEST_CASE("filter keeps magnitudes strictly above the threshold") {
  const auto records = fixture();
  std::vector<CatalogRecord> expected;
  for (const auto& r : records) {
    if (r.magnitude > 4.0) expected.push_back(r);
  }
  REQUIRE(expected.size() == 4);  // 4.5, 4.01, 6.1, 5.2
  CHECK(filter_records(records, 4.0) == expected);
  CHECK(filter_records(records, 0.001) == records);
}

TEST_CASE("filter applies an inclusive date window") {
  const auto records = fixture();
  const DateRange window{ymd(2006, 3, 2), ymd(2013, 5, 1)};
  std::vector<CatalogRecord> expected;
  for (const auto& r : records) {
    const auto d = std::chrono::sys_days{r.date};
    if (d >= std::chrono::sys_days{window.first} && d <= std::chrono::sys_days{window.last} && r.magnitude > 0.001) {
      expected.push_back(r);
    }
  }
  CHECK(expected.size() == 6);
  CHECK(filter_records(records, 0.001, window) == expected);
  CHECK(code_of([&] { filter_records(records, 4.0, DateRange{ymd(2013, 1, 1), ymd(2012, 1, 1)}); }) ==
        ErrorCode::InvalidRange);
  CHECK(code_of([&] { filter_records(records, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("filter output is a subsequence of its input") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mag(0.5, 9.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CatalogRecord> records;
    const int n = static_cast<int>(gen() % 30);
    for (int i = 0; i < n; ++i) records.push_back(record(ymd(2006 + static_cast<int>(gen() % 8), 1 + gen() % 12, 1 + gen() % 28), mag(gen)));
    const double threshold = mag(gen);
    const auto kept = filter_records(records, threshold);
    std::size_t j = 0;
    for (const auto& r : records) {
      if (j < kept.size() && r == kept[j]) ++j;
    }
    CHECK(j == kept.size());
    for (const auto& r : kept) CHECK(r.magnitude > threshold);
  }
}

TEST_CASE("synthetic catalog sizes, invariants and determinism") {
  CHECK(generate_synthetic_catalog(7, 0).empty());
  const auto a = generate_synthetic_catalog(7, 5798);
  REQUIRE(a.size() == 5798);
  const SynthRegion region;
  for (const auto& r : a) {
    CHECK(invalid_field(r).empty());
    CHECK(r.magnitude > 4.0);
    CHECK(r.magnitude <= region.magnitude_cap);
    CHECK(std::chrono::sys_days{r.date} >= std::chrono::sys_days{region.first_date});
    CHECK(std::chrono::sys_days{r.date} <= std::chrono::sys_days{region.last_date});
  }
  CHECK(generate_synthetic_catalog(7, 5798) == a);
  CHECK(generate_synthetic_catalog(8, 5798) != a);
}

TEST_CASE("synthetic zones follow the bounding-box cell") {
  const SynthRegion region;
  for (const auto& r : generate_synthetic_catalog(3, 500)) {
    const double fy = (r.latitude - region.lat_min) / (region.lat_max - region.lat_min);
    const double fx = (r.longitude - region.lon_min) / (region.lon_max - region.lon_min);
    const int row = std::min(region.zone_rows - 1, static_cast<int>(fy * region.zone_rows));
    const int col = std::min(region.zone_cols - 1, static_cast<int>(fx * region.zone_cols));
    // Coordinates are rounded after the cell is chosen, so allow a boundary hit.
    const auto& expected = region.zone_names[static_cast<std::size_t>(row * region.zone_cols + col)];
    if (r.zone != expected) {
      const double ey = fy * region.zone_rows - std::round(fy * region.zone_rows);
      const double ex = fx * region.zone_cols - std::round(fx * region.zone_cols);
      CHECK(std::min(std::abs(ey), std::abs(ex)) < 1e-3);
    }
  }
}

TEST_CASE("serialize then strict parse is the identity") {
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    for (const auto& records : {generate_synthetic_catalog(seed, 300), generate_smooth_catalog(seed, 300)}) {
      std::stringstream buf;
      write_catalog(buf, records);
      const auto parsed = parse_catalog(buf, true);
      REQUIRE(parsed.records.size() == records.size());
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& x = records[i];
        const auto& y = parsed.records[i];
        CHECK(x.date == y.date);
        CHECK(x.hour == y.hour);
        CHECK(x.minute == y.minute);
        CHECK(x.second == y.second);
        CHECK(std::abs(x.latitude - y.latitude) <= 1e-9);
        CHECK(std::abs(x.longitude - y.longitude) <= 1e-9);
        CHECK(std::abs(x.depth_km - y.depth_km) <= 1e-9);
        CHECK(std::abs(x.magnitude - y.magnitude) <= 1e-9);
        CHECK(x.zone == y.zone);
      }
    }
  }
}

TEST_CASE("round trip holds for arbitrary valid records") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180), dep(0, 700), mag(0.01, 10);
  const char* zones[] = {"A", "GUERRERO", "ZONE_9", "B-2"};
  std::vector<CatalogRecord> records;
  for (int i = 0; i < 500; ++i) {
    CatalogRecord r;
    r.date = ymd(1900 + static_cast<int>(gen() % 200), 1 + gen() % 12, 1 + gen() % 28);
    r.hour = static_cast<int>(gen() % 24);
    r.minute = static_cast<int>(gen() % 60);
    r.second = static_cast<int>(gen() % 60);
    r.latitude = lat(gen);
    r.longitude = lon(gen);
    r.depth_km = dep(gen);
    r.magnitude = mag(gen);
    r.zone = zones[gen() % 4];
    REQUIRE(invalid_field(r).empty());
    records.push_back(r);
  }
  std::stringstream buf;
  write_catalog(buf, records);
  CHECK(parse_catalog(buf, true).records == records);
}

TEST_CASE("date helpers") {
  CHECK(parse_date("2006-03-02") == ymd(2006, 3, 2));
  CHECK(format_date(ymd(2013, 5, 1)) == "2013-05-01");
  CHECK(days_between(ymd(2006, 3, 2), ymd(2006, 3, 12)) == 10);
  CHECK(days_between(ymd(2006, 3, 2), ymd(2007, 3, 2)) == 365);
  CHECK(code_of([] { parse_date("2006-02-30"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_date("06-03-02"); }) == ErrorCode::InvalidArgument);
}
