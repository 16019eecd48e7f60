#include <catch2/catch.hpp>

#include <json.hpp>

#include "abreu_forge/io.hpp"

using namespace abreu_forge;

namespace {
const char* kSquareDoc = R"({
  "dimension": 2,
  "facets": [
    {"normal": [1, 0], "offset": 0},
    {"normal": [0, 1], "offset": 0},
    {"normal": [-1, 0], "offset": -1},
    {"normal": [0, -1], "offset": -1}
  ],
  "potential": {"guillemin": true, "polynomial": [{"exponents": [2, 2], "coeff": 0.05}]},
  "grid": {"resolution": 16},
  "A": "calibrate",
  "stability": {"samples": 50, "seed": 11}
})";
}

TEST_CASE("a full document parses into polytope, bundle, potential") {
    auto doc = parse_document(kSquareDoc);
    CHECK(doc.polytope().dim() == 2);
    CHECK(doc.polytope().vertices().size() == 4);
    CHECK(doc.bundle.trivial());
    CHECK(doc.potential().has_guillemin());
    CHECK(doc.potential().polynomial().size() == 1);
    CHECK(doc.resolution == 16);
    CHECK(doc.samples == 50);
    CHECK(doc.seed == 11);
    CHECK_FALSE(doc.A.has_value());
}

TEST_CASE("bundle and explicit A are parsed") {
    std::string text = R"({
      "dimension": 1,
      "facets": [{"normal": [1], "offset": 3}, {"normal": [-1], "offset": -4}],
      "bundle": {"roots": [{"M": [1], "multiplicity": 2}], "sigma": [0.5]},
      "A": [2.0]
    })";
    auto doc = parse_document(text);
    CHECK(doc.bundle.root_count() == 1);
    CHECK(doc.bundle.multiplicity(0) == 2);
    CHECK(doc.bundle.sigma()[0] == Approx(0.5));
    REQUIRE(doc.A.has_value());
    CHECK(doc.A->coeffs[0] == Approx(2.0));
    CHECK(doc.A->coeffs[1] == Approx(0.0));
}

TEST_CASE("schema violations carry a pointer to the offending field") {
    CHECK_THROWS_AS(parse_document("{"), ParseError);
    CHECK_THROWS_WITH(parse_document(R"({"facets": []})"),
                      Catch::Contains("dimension"));
    CHECK_THROWS_WITH(
        parse_document(R"({"dimension": 2, "facets": [{"normal": [2, 2], "offset": 0},
                           {"normal": [0,1], "offset": 0}, {"normal": [-1,0], "offset": -1},
                           {"normal": [0,-1], "offset": -1}]})"),
        Catch::Contains("/facets/0"));
    CHECK_THROWS_WITH(
        parse_document(R"({"dimension": 1, "facets": [{"normal": [1]}]})"),
        Catch::Contains("offset"));
}

TEST_CASE("a non-Delzant triangle parses and is flagged by validation only") {
    auto doc = parse_document(R"({
      "dimension": 2,
      "facets": [{"normal": [1, 0], "offset": 0}, {"normal": [0, 1], "offset": 0},
                 {"normal": [-1, -2], "offset": -2}]
    })");
    CHECK(doc.polytope().vertices().size() == 3);
    auto rep = validate_delzant(doc.polytope());
    CHECK(rep.primitive);
    CHECK_FALSE(rep.delzant);
}

TEST_CASE("non-integer normals and bad A shapes are rejected") {
    CHECK_THROWS_AS(parse_document(R"({"dimension": 1,
        "facets": [{"normal": [1.5], "offset": 0}, {"normal": [-1], "offset": -1}]})"),
                    ParseError);
    // offsets too large for exact dyadic storage are input errors
    CHECK_THROWS_AS(parse_document(R"({"dimension": 1,
        "facets": [{"normal": [1], "offset": 1e200}, {"normal": [-1], "offset": -1}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_document(R"({"dimension": 1,
        "facets": [{"normal": [1], "offset": 0}, {"normal": [-1], "offset": -1}],
        "A": [1, 2, 3]})"),
                    ParseError);
}

TEST_CASE("numbers are emitted with 17 significant digits and re-parse exactly") {
    JsonWriter w;
    w.obj_begin();
    w.kv("value", 1.0 / 3.0);
    w.kv("tiny", 1.2345678901234567e-300);
    w.kv("neg", -2.718281828459045);
    w.obj_end();
    auto parsed = nlohmann::json::parse(w.str_out());
    CHECK(parsed["value"].get<double>() == 1.0 / 3.0);
    CHECK(parsed["tiny"].get<double>() == 1.2345678901234567e-300);
    CHECK(parsed["neg"].get<double>() == -2.718281828459045);
}

TEST_CASE("report serialization round-trips under the JSON parser") {
    InequalityReport rep;
    rep.name = "demo";
    rep.pass = true;
    rep.min_margin = 0.125;
    rep.argmin = Vec::Zero(2);
    rep.convergence = {{32, 1.0 / 32, 1e-3}, {64, 1.0 / 64, 2.5e-4}};
    rep.observed_order = 2.0;
    rep.note("alpha", 1.5);
    rep.messages.push_back("quoted \"text\" survives");
    auto parsed = nlohmann::json::parse(to_json(rep));
    CHECK(parsed["name"] == "demo");
    CHECK(parsed["pass"] == true);
    CHECK(parsed["convergence"].size() == 2);
    CHECK(parsed["notes"]["alpha"].get<double>() == 1.5);

    StabilityReport srep;
    srep.seed = 42;
    srep.samples = 10;
    srep.lambda_hat = 0.5;
    srep.witness_H = Vec::Ones(1);
    srep.witness_q = Vec::Zero(1);
    srep.p0 = Vec::Zero(1);
    auto sparsed = nlohmann::json::parse(to_json(srep));
    CHECK(sparsed["seed"] == 42);
    CHECK(sparsed["lambda_hat"].get<double>() == 0.5);

    FunctionalReport frep;
    frep.boundary = 0.5;
    frep.interior = 0.25;
    frep.L_A = 0.25;
    auto fparsed = nlohmann::json::parse(to_json(frep));
    CHECK(fparsed["L_A"].get<double>() == 0.25);
}

TEST_CASE("CSV writer emits one header and formatted rows") {
    CsvWriter csv({"a", "b"});
    csv.row({1.0, 0.5});
    csv.row({-1.0 / 3.0, 2e-17});
    std::string text = csv.str_out();
    CHECK(text.substr(0, 4) == "a,b\n");
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    CHECK_THROWS_AS(csv.row({1.0}), std::invalid_argument);
}

TEST_CASE("identical documents hash identically; different ones differ") {
    CHECK(fnv1a64(kSquareDoc) == fnv1a64(kSquareDoc));
    CHECK(fnv1a64("a") != fnv1a64("b"));
}

TEST_CASE("emitted JSON is byte-stable across writer instances") {
    auto build = [] {
        JsonWriter w;
        w.obj_begin();
        w.kv("x", 0.1 + 0.2);
        w.vec("v", Vec::Ones(3) * (1.0 / 7.0));
        w.obj_end();
        return w.str_out();
    };
    CHECK(build() == build());
}
