#include <doctest.h>

#include <sstream>

#include "evkit/csv.hpp"
#include "evkit/data_model.hpp"
#include "evkit/errors.hpp"
#include "helpers.hpp"

using namespace evkit;

namespace {

const std::string kHeader = "security_id,date,price,shares_outstanding,zaibatsu,military\n";
const std::string kActions = "security_id,ex_date,kind,cash_amount,new_shares_per_old,subscription_price\n";
const std::string kRates = "date,daily_rate\n";

std::string error_of(const std::string& prices, const std::string& actions, const std::string& rates) {
  try {
    parse_panel(prices, actions, rates);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal panel: one security, three days, no actions") {
  const auto p = parse_panel(kHeader + "A,1937-01-04,10,100,1,0\nA,1937-01-05,11,100,1,0\nA,1937-01-06,12,100,1,0\n",
                             kActions, kRates + "1937-01-05,0.0001\n");
  CHECK(p.calendar.size() == 3);
  REQUIRE(p.securities.size() == 1);
  CHECK(p.securities[0].quotes.size() == 3);
  CHECK(p.securities[0].group() == Group::ZN);
  CHECK(p.actions.empty());
  CHECK_FALSE(p.call_rates[0].has_value());
  CHECK(*p.call_rates[1] == 0.0001);
}

TEST_CASE("duplicate key names the offending key and line") {
  const auto msg = error_of(kHeader + "A,1937-01-04,10,100,0,0\nA,1937-01-04,11,100,0,0\n", kActions, kRates);
  CHECK(msg.find("(A,1937-01-04)") != std::string::npos);
  CHECK(msg.find("prices.csv:3") != std::string::npos);
}

TEST_CASE("dividend with a share ratio is rejected") {
  const auto msg = error_of(kHeader + "A,1937-01-04,10,100,0,0\n", kActions + "A,1937-01-04,dividend,1,0.5,0\n", kRates);
  CHECK(msg.find("dividend carries share ratio") != std::string::npos);
}

TEST_CASE("other ingestion errors") {
  const std::string one = kHeader + "A,1937-01-04,10,100,0,0\n";
  CHECK(error_of(one, kActions + "B,1937-01-04,dividend,1,0,0\n", kRates).find("unknown security 'B'") !=
        std::string::npos);
  CHECK(error_of(kHeader + "A,1937-01-04,0,100,0,0\n", kActions, kRates).find("non-positive price") !=
        std::string::npos);
  CHECK(error_of(kHeader + "A,1937-01-04,10,-1,0,0\n", kActions, kRates).find("non-positive share count") !=
        std::string::npos);
  CHECK(error_of(kHeader + "A,1937-01-04,ten,100,0,0\n", kActions, kRates).find("prices.csv:2") != std::string::npos);
  CHECK(error_of(kHeader + "A,1937-13-04,10,100,0,0\n", kActions, kRates).find("prices.csv:2") != std::string::npos);
  CHECK(error_of(one, kActions + "A,1937-01-04,rights_issue,0,0,10\n", kRates).find("positive share ratio") !=
        std::string::npos);
  CHECK(error_of(one + "A,1937-01-05,10,100,1,0\n", kActions, kRates).find("flags for A") != std::string::npos);
  CHECK(error_of("id,date\nA,1937-01-04\n", kActions, kRates) != "");
}

TEST_CASE("a gap inside a listing span is rejected") {
  const std::string prices = kHeader +
                             "A,1937-01-04,10,100,0,0\nA,1937-01-06,10,100,0,0\n"
                             "B,1937-01-04,10,100,0,0\nB,1937-01-05,10,100,0,0\nB,1937-01-06,10,100,0,0\n";
  CHECK(error_of(prices, kActions, kRates).find("missing price for A on 1937-01-05") != std::string::npos);
}

TEST_CASE("listing gaps only at start and end") {
  const std::string prices = kHeader +
                             "A,1937-01-04,10,100,0,0\nA,1937-01-05,10,100,0,0\n"
                             "B,1937-01-05,10,100,0,0\nB,1937-01-06,10,100,0,0\n";
  const auto p = parse_panel(prices, kActions, kRates);
  CHECK_FALSE(p.find("A")->quotes[2].has_value());
  CHECK_FALSE(p.find("B")->quotes[0].has_value());
}

TEST_CASE("align_to_calendar") {
  const auto p = parse_panel(kHeader + "A,1937-01-05,10,100,0,1\nA,1937-01-06,10,100,0,1\n", kActions, kRates);
  SUBCASE("already aligned is the identity") { CHECK(align_to_calendar(p, p.calendar) == p); }
  SUBCASE("mid-calendar listing gets absent entries before the listing date") {
    const TradingCalendar wide({Date(1937, 1, 4), Date(1937, 1, 5), Date(1937, 1, 6), Date(1937, 1, 7)});
    const auto a = align_to_calendar(p, wide);
    REQUIRE(a.securities[0].quotes.size() == 4);
    CHECK_FALSE(a.securities[0].quotes[0].has_value());
    CHECK(a.securities[0].quotes[1].has_value());
    CHECK_FALSE(a.securities[0].quotes[3].has_value());
    CHECK(align_to_calendar(a, wide) == a);  // idempotent
  }
  SUBCASE("calendar missing a traded date names the date") {
    const TradingCalendar narrow({Date(1937, 1, 5)});
    try {
      align_to_calendar(p, narrow);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("1937-01-06") != std::string::npos);
    }
  }
}

TEST_CASE("calendar must be strictly increasing") {
  CHECK_THROWS_AS(TradingCalendar({Date(1937, 1, 5), Date(1937, 1, 5)}), InputError);
  CHECK_THROWS_AS(TradingCalendar({Date(1937, 1, 6), Date(1937, 1, 5)}), InputError);
}

TEST_CASE("round trip through the writers reproduces the fixture panel") {
  const auto p = load_panel(testing::data("panel/prices.csv"), testing::data("panel/actions.csv"),
                            testing::data("panel/rates.csv"));
  std::ostringstream prices, actions, rates;
  write_prices_csv(p, prices);
  write_actions_csv(p, actions);
  write_rates_csv(p, rates);
  const auto q = parse_panel(prices.str(), actions.str(), rates.str());
  CHECK(q == p);
}

TEST_CASE("load_panel reports unreadable paths") {
  try {
    load_panel("/nonexistent/prices.csv", testing::data("panel/actions.csv"), testing::data("panel/rates.csv"));
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/prices.csv") != std::string::npos);
  }
}

TEST_CASE("bundled industry categories") {
  const auto t = csv::Table::read(testing::data("../../data/industry_categories.csv"));
  t.require_header({"category", "industry", "military"});
  std::size_t military = 0;
  for (const auto& r : t.rows()) {
    const auto& cat = r.fields[0];
    CHECK((cat == "A" || cat == "B" || cat == "C"));
    // category A is the military-priority set
    CHECK((r.fields[2] == "1") == (cat == "A"));
    military += r.fields[2] == "1";
  }
  CHECK(t.rows().size() == 53);
  CHECK(military == 12);
}
