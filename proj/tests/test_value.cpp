#include <catch2/catch_amalgamated.hpp>

#include "kpix/value.hpp"

using kpix::value::approx_equal;
using kpix::value::canonical_value;

TEST_CASE("plain numbers and currency") {
  CHECK(canonical_value("42").number == 42.0);
  CHECK(canonical_value("$42").number == 42.0);
  CHECK(canonical_value("1,234.5").number == 1234.5);
  CHECK(canonical_value("$1,234,567").number == 1234567.0);
  CHECK(canonical_value("USD 500").number == 500.0);
  CHECK(canonical_value("42").is_numeric());
  CHECK_FALSE(canonical_value("42").is_range);
}

TEST_CASE("scale words expand") {
  CHECK(canonical_value("$43.3 billion").number == 43.3e9);
  CHECK(canonical_value("$10 billion").number == 1e10);
  CHECK(canonical_value("2.5 million").number == 2.5e6);
  CHECK(canonical_value("700 thousand").number == 700e3);
  CHECK(canonical_value("1.1 trillion").number == 1.1e12);
  CHECK(canonical_value("$10B").number == 1e10);
  CHECK(canonical_value("$900mm").number == 900e6);
  CHECK(canonical_value("$12 bn").number == 12e9);
  CHECK(canonical_value("$5k").number == 5000.0);
}

TEST_CASE("percent figures keep their number") {
  CHECK(canonical_value("19%").number == 19.0);
  CHECK(canonical_value("2.5 percent").number == 2.5);
  CHECK(canonical_value("3 percentage points").number == 3.0);
}

TEST_CASE("basis points convert to percentage points") {
  CHECK(canonical_value("100 basis points").number == 1.0);
  CHECK(canonical_value("120 basis points").number == 1.2);
  CHECK(canonical_value("40 bps").number == 0.4);
}

TEST_CASE("ranges produce bounds and their midpoint") {
  auto v = canonical_value("$1.2 billion to $1.4 billion");
  CHECK(v.is_range);
  CHECK(v.bottom == 1.2e9);
  CHECK(v.top == 1.4e9);
  CHECK(v.number == 1.3e9);

  auto dash = canonical_value("5-7%");
  CHECK(dash.is_range);
  CHECK(dash.bottom == 5.0);
  CHECK(dash.top == 7.0);
  CHECK(dash.number == 6.0);

  auto words = canonical_value("between 6 billion and 5.5 billion");
  CHECK(words.is_range);
  CHECK(words.bottom == 5.5e9);
  CHECK(words.top == 6e9);
  CHECK(words.number == 5.75e9);
}

TEST_CASE("range scale inherits rightward when only the second end is scaled") {
  auto v = canonical_value("$1.2 to $1.4 billion");
  CHECK(v.is_range);
  CHECK(v.bottom == 1.2e9);
  CHECK(v.top == 1.4e9);
  CHECK(v.number == 1.3e9);
}

TEST_CASE("range percent marker inherits across both ends") {
  auto v = canonical_value("5 to 7%");
  CHECK(v.is_range);
  CHECK(v.bottom == 5.0);
  CHECK(v.top == 7.0);

  auto bps = canonical_value("100 to 120 basis points");
  CHECK(bps.is_range);
  CHECK(bps.bottom == 1.0);
  CHECK(bps.top == 1.2);
}

TEST_CASE("negative values") {
  CHECK(canonical_value("-3.5%").number == -3.5);
  CHECK(canonical_value("- $2 million").number == -2e6);
}

TEST_CASE("strings without numbers come back cleaned as non-numeric") {
  auto v = canonical_value("  record   high ");
  CHECK_FALSE(v.is_numeric());
  CHECK(v.text == "record high");

  auto empty = canonical_value("");
  CHECK_FALSE(empty.is_numeric());
  CHECK(empty.text.empty());
}

TEST_CASE("digits embedded in words are not values") {
  auto v = canonical_value("Q1 momentum");
  CHECK_FALSE(v.is_numeric());
  CHECK(v.text == "Q1 momentum");
  // But a real number after such a word is found.
  CHECK(canonical_value("Q1 revenue of $9 billion").number == 9e9);
}

TEST_CASE("first number wins when no range separator joins them") {
  auto v = canonical_value("$2.5 billion compared with $2.1 billion");
  CHECK_FALSE(v.is_range);
  CHECK(v.number == 2.5e9);
}

TEST_CASE("approx_equal uses relative tolerance with an absolute floor") {
  CHECK(approx_equal(1e10, 1e10));
  CHECK(approx_equal(1e10, 1e10 * (1 + 1e-10)));
  CHECK_FALSE(approx_equal(1e10, 1.0001e10));
  CHECK(approx_equal(0.0, 1e-10));  // floor of max(1, ...) absorbs tiny numbers
  CHECK_FALSE(approx_equal(0.0, 1e-3));
  CHECK(approx_equal(5.0, 5.0));
}

TEST_CASE("canonical_value is total over arbitrary bytes") {
  for (const char* s : {"--", "%", "$", "to", "n/a", "€", "(unchanged)", "..."}) {
    auto v = canonical_value(s);
    CHECK_FALSE(v.is_numeric());
  }
}
