#include "catch2/catch_amalgamated.hpp"
#include "psys/decider.hpp"
#include "psys/parse.hpp"
#include "support.hpp"

using namespace psys;

TEST_CASE("fixtures parse to the expected structure") {
  SystemSpec a = testsupport::load_fixture("sys_a");
  CHECK(a.rules.size() == 1);
  CHECK(a.inner_init.empty());
  CHECK(a.skin == "h");
  CHECK(a.bound == 2);
  CHECK(a.skin_init == Multiset{{"s", 1}});

  SystemSpec d = testsupport::load_fixture("sys_d");
  REQUIRE(d.rules.size() == 3);
  const auto* divide = std::get_if<DivideRule>(&d.rules[0].body);
  REQUIRE(divide != nullptr);
  CHECK(divide->charge == Charge::Neutral);
  CHECK(divide->left_charge == Charge::Positive);
  CHECK(divide->right_charge == Charge::Negative);
  CHECK(divide->trigger == "d");
  CHECK(divide->left_object == "e");
  CHECK(divide->right_object == "f");
}

TEST_CASE("multiset literals") {
  CHECK(parse_multiset("a*3 b") == Multiset{{"a", 3}, {"b", 1}});
  CHECK(parse_multiset(".") == Multiset{});
  CHECK(parse_multiset("a*0") == Multiset{});
  CHECK(parse_multiset("a a b*2") == Multiset{{"a", 2}, {"b", 2}});

  CHECK_THROWS_AS(parse_multiset(""), ParseError);
  CHECK_THROWS_AS(parse_multiset("a *"), ParseError);
  try {
    parse_multiset("a*-1");
    FAIL("expected an error");
  } catch (const MultisetError& e) {
    CHECK(e.kind() == MultisetErrorKind::NegativeMultiplicity);
  }
}

TEST_CASE("bad charge is a syntax error with a position") {
  std::string text = "@psys 1\n@objects s yes no\n@labels h\n@skin h\n@init h : s\n@bound 2\n"
                     "@rules\n[s]_h^0 -> []_h^* yes\n";
  try {
    parse_system(text);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.span().line == 8);
    CHECK(e.span().column == 17);
    CHECK(e.expected().find("charge") != std::string::npos);
  }
}

TEST_CASE("undeclared label in a rule carries the rule line") {
  std::string text = "@psys 1\n@objects s yes no\n@labels h\n@skin h\n@init h : s\n@bound 2\n"
                     "@rules\n[s]_z^0 -> []_z^+ yes\n";
  try {
    parse_system(text);
    FAIL("expected an error");
  } catch (const ValidateError& e) {
    CHECK(e.kind() == ValidateErrorKind::UnknownLabel);
    CHECK(e.element() == "z");
    REQUIRE(e.span().has_value());
    CHECK(e.span()->line == 8);
  }
}

TEST_CASE("structural validation failures") {
  SystemSpec base = testsupport::load_fixture("sys_c");

  SECTION("duplicate membrane label") {
    SystemSpec spec = base;
    spec.inner_init.emplace_back("k", Multiset{});
    CHECK_THROWS_AS(validate_system(spec), ValidateError);
  }
  SECTION("bound must be positive") {
    SystemSpec spec = base;
    spec.bound = 0;
    try {
      validate_system(spec);
      FAIL("expected an error");
    } catch (const ValidateError& e) {
      CHECK(e.kind() == ValidateErrorKind::BadBound);
    }
  }
  SECTION("undeclared symbol in a rule") {
    SystemSpec spec = base;
    spec.rules.push_back(Rule{spec.rules.size(), EvolveRule{"h", Charge::Neutral, "zz", {}}});
    try {
      validate_system(spec);
      FAIL("expected an error");
    } catch (const ValidateError& e) {
      CHECK(e.kind() == ValidateErrorKind::UnknownSymbol);
      CHECK(e.element() == "zz");
    }
  }
  SECTION("the outermost membrane cannot divide") {
    SystemSpec spec = base;
    spec.rules.push_back(Rule{spec.rules.size(),
                              DivideRule{"h", Charge::Neutral, "a", Charge::Neutral, "a",
                                         Charge::Neutral, "b"}});
    try {
      validate_system(spec);
      FAIL("expected an error");
    } catch (const ValidateError& e) {
      CHECK(e.kind() == ValidateErrorKind::DivideOnSkin);
    }
  }
}

TEST_CASE("send-in labels must match") {
  std::string text = "@psys 1\n@objects a b yes no\n@labels h k l\n@skin h\n@inner k : .\n"
                     "@inner l : .\n@init h : a\n@bound 2\n@rules\na []_k^0 -> [b]_l^+\n";
  CHECK_THROWS_AS(parse_system(text), ParseError);
}

TEST_CASE("render then parse is the identity on fixtures") {
  for (const char* name : {"sys_a", "sys_b", "sys_c", "sys_d", "sys_e"}) {
    SystemSpec spec = testsupport::load_fixture(name);
    CHECK(parse_system(render_system(spec)) == spec);
  }
}

TEST_CASE("render orders multisets by name") {
  Multiset ms{{"b", 2}, {"a", 1}};
  CHECK(render_multiset(ms) == "a b*2");
}

TEST_CASE("render then parse is the identity on generated systems") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GenParams params;
    params.seed = seed;
    SystemSpec spec = generate_system(params);
    SystemSpec round = parse_system(render_system(spec));
    CHECK(round == spec);
  }
}

TEST_CASE("input membrane injection") {
  std::string text = "@psys 1\n@objects a b yes no\n@labels h k\n@skin h\n@inner k : .\n"
                     "@init h : a\n@input k\n@bound 2\n@rules\na []_k^0 -> [b]_k^+\n";
  SystemSpec spec = parse_system(text);
  REQUIRE(spec.input_label.has_value());
  SystemSpec fed = with_input(spec, parse_multiset("b*2"));
  CHECK(fed.inner_init[0].second == Multiset{{"b", 2}});

  SystemSpec no_input = testsupport::load_fixture("sys_a");
  CHECK_THROWS_AS(with_input(no_input, parse_multiset("s")), Error);
}

TEST_CASE("comments and blank lines are insignificant") {
  std::string text = "@psys 1\n# comment\n\n@objects s yes no\n@labels h # trailing\n@skin h\n"
                     "@init h : s\n@bound 2\n@rules\n# before rules\n[s]_h^0 -> []_h^+ yes\n";
  SystemSpec spec = parse_system(text);
  CHECK(spec == testsupport::load_fixture("sys_a"));
}
