#include <gtest/gtest.h>

#include "dataportraits/time.hpp"

using namespace dataportraits;

TEST(Time, ParsesZuluAndOffsets) {
  // 2015-06-01T12:30:00Z = 1433161800 (date -u -d @1433161800)
  EXPECT_EQ(parse_timestamp("2015-06-01T12:30:00Z").time_since_epoch().count(), 1433161800);
  EXPECT_EQ(parse_timestamp("2015-06-01T12:30:00+00:00").time_since_epoch().count(), 1433161800);
  EXPECT_EQ(parse_timestamp("2015-06-01T09:30:00-03:00").time_since_epoch().count(), 1433161800);
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00:00Z").time_since_epoch().count(), 0);
}

TEST(Time, FractionalSeconds) {
  EXPECT_EQ(parse_timestamp_ms("2015-06-01T12:30:00.250Z").time_since_epoch().count(), 1433161800250);
  EXPECT_EQ(parse_timestamp("2015-06-01T12:30:00.999Z").time_since_epoch().count(), 1433161800);
}

TEST(Time, RejectsMalformed) {
  for (const char* bad : {"", "2015-06-01", "2015-13-01T00:00:00Z", "2015-02-30T00:00:00Z", "yesterday",
                          "2015-06-01T25:00:00Z", "2015-06-01T12:30:00Zjunk"}) {
    EXPECT_THROW(parse_timestamp(bad), std::invalid_argument) << bad;
  }
}

TEST(Time, FormatRoundTrip) {
  const auto ts = parse_timestamp("2016-02-29T23:59:59Z");
  EXPECT_EQ(format_timestamp(ts), "2016-02-29T23:59:59Z");
  const auto ms = parse_timestamp_ms("2016-02-29T23:59:59.007Z");
  EXPECT_EQ(format_timestamp(ms), "2016-02-29T23:59:59.007Z");
  EXPECT_EQ(format_timestamp(parse_timestamp_ms("2016-02-29T23:59:59Z")), "2016-02-29T23:59:59Z");
}

TEST(Time, UtcDay) {
  EXPECT_EQ(utc_day(parse_timestamp_ms("1970-01-01T23:59:59Z")), 0);
  EXPECT_EQ(utc_day(parse_timestamp_ms("1970-01-02T00:00:00Z")), 1);
  EXPECT_EQ(utc_day(parse_timestamp_ms("1969-12-31T23:00:00Z")), -1);
}
