#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "parexp/core.hpp"
#include "parexp/randomize.hpp"
#include "support.hpp"

using namespace parexp;
using testing::campaign;
using testing::ids;

TEST_CASE("bit vectors order lexicographically with coordinate 0 first") {
  const auto a = BitVector::parse("01");
  const auto b = BitVector::parse("10");
  CHECK(a < b);
  CHECK(a.to_string() == "01");
  CHECK(BitVector::parse("-").size() == 0);
  CHECK(drop_coordinate(BitVector::parse("101"), 1) == BitVector::parse("11"));
  CHECK(insert_coordinate(BitVector::parse("11"), 1, false) == BitVector::parse("101"));
  CHECK_THROWS_AS(BitVector::parse("012"), std::invalid_argument);
}

TEST_CASE("three overlapping audiences split into four partitions") {
  // j = 1 targets 1..40; k = 2 covers 11..20 and 31..40; l = 3 covers 21..40.
  std::vector<UserId> k_aud = ids(11, 20), k_more = ids(31, 40);
  k_aud.insert(k_aud.end(), k_more.begin(), k_more.end());
  Roster roster({campaign(1, ids(1, 40), 0.5), campaign(2, k_aud, 0.5), campaign(3, ids(21, 40), 0.5)});
  const auto index = build_partitions(roster);
  const auto& fp = index[0];
  REQUIRE(fp.size() == 4);
  CHECK(fp.partition(1).competitors.empty());
  CHECK(fp.partition(2).competitors == std::vector<CampaignIndex>{2});
  CHECK(fp.partition(3).competitors == std::vector<CampaignIndex>{3});
  CHECK(fp.partition(4).competitors == std::vector<CampaignIndex>{2, 3});
  CHECK(fp.partition(1).members == ids(1, 10));
  CHECK(fp.partition(4).members == ids(31, 40));
  CHECK(fp.label_of(25) == 3);
  CHECK(fp.label_of(99) == 0);
  CHECK(fp.competitor_mask(3) == BitVector::parse("01"));
}

TEST_CASE("a lone advertiser has one partition with no competitors") {
  Roster roster({campaign(7, {3, 9, 12}, 0.4)});
  const auto index = build_partitions(roster);
  REQUIRE(index.size() == 1);
  REQUIRE(index[0].size() == 1);
  CHECK(index[0].partition(1).competitors.empty());
  CHECK(index[0].partition(1).members == std::vector<UserId>{3, 9, 12});
}

TEST_CASE("partitions equal brute-force grouping by competitor set") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution in(0.45);
    std::vector<Campaign> cs;
    for (CampaignIndex c = 1; c <= 4; ++c) {
      std::vector<UserId> aud;
      for (UserId u = 1; u <= 1000; ++u)
        if (in(rng)) aud.push_back(u);
      cs.push_back(campaign(c, aud, 0.5));
    }
    Roster roster(cs);
    const auto index = build_partitions(roster);
    for (std::size_t p = 0; p < roster.size(); ++p) {
      const auto& focal = roster.at(p);
      std::map<std::set<CampaignIndex>, std::vector<UserId>> brute;
      for (UserId u : focal.audience) {
        std::set<CampaignIndex> others;
        for (const auto& c : roster.campaigns())
          if (c.index != focal.index && std::binary_search(c.audience.begin(), c.audience.end(), u))
            others.insert(c.index);
        brute[others].push_back(u);
      }
      const auto& fp = index[p];
      REQUIRE(fp.size() == brute.size());
      std::size_t covered = 0;
      std::set<UserId> seen;
      for (const auto& part : fp.partitions) {
        std::set<CampaignIndex> key(part.competitors.begin(), part.competitors.end());
        REQUIRE(brute.count(key) == 1);
        CHECK(part.members == brute[key]);
        covered += part.members.size();
        seen.insert(part.members.begin(), part.members.end());
      }
      CHECK(covered == focal.audience.size());
      CHECK(seen.size() == focal.audience.size());
      for (std::size_t i = 0; i < fp.audience.size(); ++i) {
        int hits = 0;
        for (const auto& part : fp.partitions)
          hits += std::binary_search(part.members.begin(), part.members.end(), fp.audience[i]) ? 1 : 0;
        CHECK(hits == 1);
        CHECK(fp.label_of(fp.audience[i]) == fp.labels[i]);
      }
      for (std::size_t q = 1; q < fp.partitions.size(); ++q) {
        const auto& a = fp.partitions[q - 1].competitors;
        const auto& b = fp.partitions[q].competitors;
        CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
      }
    }
  }
}

TEST_CASE("assumption checks") {
  SUBCASE("two advertisers at 0.7 fill all four cells") {
    Roster roster({campaign(1, ids(1, 10000), 0.7), campaign(2, ids(1, 10000), 0.7)});
    const auto parts = build_partitions(roster);
    const auto table = assign_all(roster, SplitSeed{11});
    for (const auto& check : check_assumptions(roster, parts, table)) {
      CHECK(check.clean());
      CHECK(check.users == 10000);
    }
  }
  SUBCASE("a share of one is an overlap violation") {
    Roster roster({campaign(1, ids(1, 500), 0.5), campaign(2, ids(1, 500), 1.0)});
    const auto checks = check_assumptions(roster, build_partitions(roster), assign_all(roster, SplitSeed{3}));
    for (const auto& c : checks) {
      CHECK(c.overlap_violations == std::vector<CampaignIndex>{2});
      CHECK_FALSE(c.clean());
    }
  }
  SUBCASE("two users cannot fill eight cells") {
    Roster roster({campaign(1, {1, 2}, 0.5), campaign(2, {1, 2}, 0.5), campaign(3, {1, 2}, 0.5)});
    const auto checks = check_assumptions(roster, build_partitions(roster), assign_all(roster, SplitSeed{5}));
    for (const auto& c : checks) {
      CHECK_FALSE(c.support_a_violations.empty());
      CHECK_FALSE(c.clean());
    }
  }
  SUBCASE("violations vanish with many users and interior shares") {
    std::vector<Campaign> cs;
    for (CampaignIndex c = 1; c <= 5; ++c) cs.push_back(campaign(c, ids(1, 100000), 0.3 + 0.1 * c));
    Roster roster(cs);
    const auto checks = check_assumptions(roster, build_partitions(roster), assign_all(roster, SplitSeed{8}));
    for (const auto& c : checks) CHECK(c.clean());
  }
}

TEST_CASE("state enumeration") {
  const auto none = enumerate_states(0);
  REQUIRE(none.size() == 1);
  CHECK(none[0].size() == 0);
  const auto two = enumerate_states(2);
  REQUIRE(two.size() == 4);
  CHECK(two[0].to_string() == "00");
  CHECK(two[1].to_string() == "01");
  CHECK(two[2].to_string() == "10");
  CHECK(two[3].to_string() == "11");
  CHECK(enumerate_states(15).size() == 32768);
  CHECK_THROWS(enumerate_states(25));
}

TEST_CASE("roster validation") {
  CHECK_THROWS_AS(Roster(std::vector<Campaign>{}), ConfigError);
  CHECK_THROWS_AS(Roster({campaign(1, {1}, 0.5), campaign(1, {2}, 0.5)}), ConfigError);
  CHECK_THROWS_AS(Roster({campaign(1, {1}, 1.5)}), ConfigError);
  CHECK_THROWS_AS(Roster({campaign(0, {1}, 0.5)}), ConfigError);
}
