#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qc/cell_database.hpp"
#include "qc/errors.hpp"
#include "qc/multigrid.hpp"

using namespace qc;

namespace {

CellDatabase published() { return load_database(fixture::data_path("published_records.txt")); }

CellDatabase generated(IndexRange range = {-2, 2}) {
    GridSpec s;
    std::copy(std::begin(fixture::kReferenceOffsets), std::end(fixture::kReferenceOffsets), s.offsets.begin());
    s.range = range;
    return generate(s).db;
}

// Published record 1 as a single line, 26 tokens.
const std::string kRecord1 =
    "1, 4.471809000E-01, 1.376398000E+00,-1.036656000E+01,-4.472463000E-01, 1.376398000E+00,-1.081378000E+01,"
    "1.707902000E-01, 5.257465000E-01,-1.081378000E+01, 1.170791000E+00, 8.506713000E-01,-1.081378000E+01,"
    "-7.236370000E-01, 5.257465000E-01,-1.126099000E+01, 2.763636000E-01, 8.506713000E-01,-1.126099000E+01,"
    "8.944001000E-01, 1.966953000E-05,-1.126099000E+01,-2.709031000E-05, 1.966953000E-05,-1.170820000E+01,"
    "-4.70231076E-001\n";

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

void check_same_cells(const CellDatabase& a, const CellDatabase& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.cells[i].id == b.cells[i].id);
        CHECK(a.cells[i].cls == b.cells[i].cls);
        CHECK(a.cells[i].signed_volume == b.cells[i].signed_volume);
        CHECK(a.cells[i].verts == b.cells[i].verts);
    }
}

}  // namespace

TEST_CASE("parse the published records") {
    const CellDatabase db = published();
    REQUIRE(db.size() == 11);
    CHECK(db.meta.format == SourceFormat::LegacyText);
    CHECK(db.meta.source == "parsed:published_records.txt");
    CHECK(db.counters == Counters{11, 0, 6, 5});

    const QCCell& first = db.cells.front();
    CHECK(first.id == 1);
    CHECK(first.source_index == 1L);
    CHECK(first.verts[0] == Vec3{0.4471809, 1.376398, -10.36656});
    CHECK(first.verts[7] == Vec3{-2.709031e-5, 1.966953e-5, -11.70820});
    REQUIRE(first.tail.has_value());
    CHECK(std::get<SignedVolume>(*first.tail).value == -0.470231076);
    CHECK(first.cls == CellClass::Thin);

    const QCCell& last = db.cells.back();
    CHECK(last.id == 11);
    CHECK(last.source_index == 2500L);
    CHECK(last.cls == CellClass::Fat);
    CHECK(std::get<SignedVolume>(*last.tail).value == -0.760845848);
    CHECK(db.cells[5].source_index == 2495L);
    for (std::size_t i = 0; i < 5; ++i) CHECK(db.cells[i].cls == CellClass::Thin);
    for (std::size_t i = 5; i < 11; ++i) CHECK(db.cells[i].cls == CellClass::Fat);
}

TEST_CASE("signed-volume tails agree with the edge determinant") {
    for (const auto& c : published().cells) {
        const double tail = std::get<SignedVolume>(*c.tail).value;
        CHECK(std::abs(tail - c.edge_determinant()) <= 5e-4);
        CHECK(c.signed_volume == c.edge_determinant());
    }
}

TEST_CASE("main-text rows carry a type flag and the same coordinates") {
    const CellDatabase rows = parse_database(fixture::read("published_rows.txt"));
    const CellDatabase pub = published();
    REQUIRE(rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::get<TypeFlag>(*rows.cells[i].tail).code == 1);
        CHECK(rows.cells[i].cls == CellClass::Thin);
        CHECK(rows.cells[i].verts == pub.cells[i].verts);
    }
}

TEST_CASE("tokenizer joins wrapped signs and exponents but never across commas") {
    const auto one = parse_database(kRecord1);
    const auto wrapped_sign = parse_database(replace_once(kRecord1, ",-7.236370000E-01", ",-\n7.236370000E-01"));
    const auto wrapped_exp = parse_database(replace_once(kRecord1, "-4.70231076E-001", "-4.70231076E-\n001"));
    const auto short_exp = parse_database(replace_once(kRecord1, "-4.70231076E-001", "-4.70231076E-1"));
    const auto plus = parse_database(replace_once(kRecord1, " 1.376398000E+00,-1.036656000E+01", "+1.376398000E+00,-1.036656000E+01"));
    check_same_cells(one, wrapped_sign);
    check_same_cells(one, wrapped_exp);
    check_same_cells(one, short_exp);
    check_same_cells(one, plus);
    CHECK(std::get<SignedVolume>(*wrapped_exp.cells[0].tail).value == -0.470231076);

    CHECK_THROWS_AS(parse_database(replace_once(kRecord1, ",-7.236370000E-01", ",-,7.236370000E-01")), ParseError);
}

TEST_CASE("parse errors are typed and located") {
    // 25 tokens: drop the tail.
    const std::string truncated = replace_once(kRecord1, ",-4.70231076E-001", "");
    CHECK_THROWS_AS(parse_database(truncated), TokenCountMismatch);
    try {
        parse_database(kRecord1 + truncated);
        FAIL("expected TokenCountMismatch");
    } catch (const TokenCountMismatch& e) {
        CHECK(e.where().record == 2);
        CHECK(e.where().line == 2);
        CHECK(std::string(e.what()).find("record 2") != std::string::npos);
    }

    const std::string bad = replace_once(kRecord1, "1.707902000E-01", "1.70790x000E-01");
    try {
        parse_database(bad);
        FAIL("expected MalformedNumber");
    } catch (const MalformedNumber& e) {
        CHECK(e.where().line == 1);
        CHECK(e.where().token == 7);
        CHECK(e.where().column > 1);
        CHECK(std::string(e.what()).find("1.70790x000E-01") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_database(replace_once(kRecord1, "1.707902000E-01", "nan")), MalformedNumber);
    CHECK_THROWS_AS(parse_database(replace_once(kRecord1, "-4.70231076E-001", "0.5")), TailInvalid);
    CHECK_THROWS_AS(parse_database(replace_once(kRecord1, "-4.70231076E-001", "3")), TailInvalid);
    CHECK_THROWS_AS(parse_database(replace_once(kRecord1, "1, 4.47", "1.5, 4.47")), TokenCountMismatch);
    CHECK_THROWS_AS(parse_database(std::string("{\"cells\": [")), ParseError);
    CHECK_THROWS_AS(parse_database(std::string("{\"cells\": [{\"id\":1,\"type\":1,\"verts\":[[0,0,0]]}]}")),
                    TokenCountMismatch);
    CHECK_THROWS_AS(parse_database(std::string("{\"cells\": [{\"id\":1,\"type\":3,\"verts\":[]}]}")), ParseError);
    CHECK_THROWS_AS(parse_database(std::string("{\"meta\": {}}")), ParseError);
}

TEST_CASE("empty input yields an empty database") {
    CHECK(parse_database(std::string("")).empty());
    CHECK(parse_database(std::string("  \n\t\n")).empty());
    CHECK(parse_database(std::string("# only a comment\n")).empty());
    CHECK_THROWS_AS(load_database(fixture::data_path("does_not_exist.txt")), std::ios_base::failure);
}

TEST_CASE("canonical CSV round-trips exactly") {
    const CellDatabase db = generated();
    const std::string text = write_database(db, DbFormat::CanonicalCsv);
    const CellDatabase back = parse_database(text);
    check_same_cells(db, back);
    CHECK(back.meta.format == SourceFormat::CanonicalCsv);
    CHECK(back.meta.offsets == db.meta.offsets);
    CHECK(back.meta.range == db.meta.range);
    CHECK(back.counters == db.counters);
    const std::string again = write_database(back, DbFormat::CanonicalCsv);
    CHECK(again.substr(again.find("# cells")) == text.substr(text.find("# cells")));

    // One record per line: id, 24 coordinates, type.
    std::istringstream in(text);
    std::string line;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++records;
        CHECK(std::count(line.begin(), line.end(), ',') == 25);
    }
    CHECK(records == db.size());
}

TEST_CASE("JSON database round-trips exactly") {
    CellDatabase db = generated({-1, 1});
    db.counters.singularities = 3;
    const CellDatabase back = parse_database(write_database(db, DbFormat::Json));
    check_same_cells(db, back);
    CHECK(back.meta.format == SourceFormat::Json);
    CHECK(back.meta.offsets == db.meta.offsets);
    CHECK(back.meta.range == db.meta.range);
    CHECK(back.counters == db.counters);
}

TEST_CASE("legacy writers") {
    const CellDatabase pub = published();
    const CellDatabase vol = parse_database(write_database(pub, DbFormat::LegacyVolume));
    REQUIRE(vol.size() == pub.size());
    for (std::size_t i = 0; i < pub.size(); ++i) {
        CHECK(std::abs(std::get<SignedVolume>(*vol.cells[i].tail).value -
                       std::get<SignedVolume>(*pub.cells[i].tail).value) <= 1e-6);
        for (std::size_t v = 0; v < 8; ++v) CHECK(max_abs(vol.cells[i].verts[v] - pub.cells[i].verts[v]) <= 1e-8);
    }
    CHECK(std::abs(std::get<SignedVolume>(*vol.cells[0].tail).value - (-0.470231076)) <= 1e-6);

    // Generated cells carry no tail; the writer falls back to the determinant.
    const CellDatabase gen = generated({0, 0});
    const CellDatabase gen_back = parse_database(write_database(gen, DbFormat::LegacyVolume));
    for (std::size_t i = 0; i < gen.size(); ++i)
        CHECK(std::abs(std::get<SignedVolume>(*gen_back.cells[i].tail).value - gen.cells[i].signed_volume) <= 1e-6);

    const CellDatabase flags = parse_database(write_database(pub, DbFormat::LegacyFlag));
    for (std::size_t i = 0; i < pub.size(); ++i) {
        CHECK(std::get<TypeFlag>(*flags.cells[i].tail).code == legacy_code(pub.cells[i].cls));
    }
    CHECK(write_database(CellDatabase{}, DbFormat::LegacyFlag).empty());
}

TEST_CASE("inferring flags from volumes and volumes from flags commute") {
    const CellDatabase pub = published();
    const CellDatabase via_flags = parse_database(write_database(pub, DbFormat::LegacyFlag));
    const CellDatabase via_both = parse_database(write_database(via_flags, DbFormat::LegacyVolume));
    for (std::size_t i = 0; i < pub.size(); ++i) {
        CHECK(via_flags.cells[i].cls == pub.cells[i].cls);
        CHECK(via_both.cells[i].cls == pub.cells[i].cls);
    }
}

TEST_CASE("empty database round-trips") {
    const CellDatabase empty;
    for (DbFormat f : {DbFormat::CanonicalCsv, DbFormat::Json, DbFormat::LegacyVolume})
        CHECK(parse_database(write_database(empty, f)).empty());
}

TEST_CASE("format names") {
    CHECK(parse_db_format("canonical_csv") == DbFormat::CanonicalCsv);
    CHECK(parse_db_format("legacy_volume") == DbFormat::LegacyVolume);
    CHECK(to_string(DbFormat::Json) == "json");
    CHECK_THROWS_AS(parse_db_format("xlsx"), std::invalid_argument);
}

TEST_CASE("validate passes on published and generated data") {
    const ValidationReport pub = validate(published());
    CHECK(pub.passed());
    CHECK(pub.checks.size() == 7);
    CHECK(pub.check("unit_edges").worst <= 5e-4);
    CHECK(pub.check("closure").worst <= 5e-4);
    CHECK(pub.check("golden_ratio").worst <= 1e-4);

    const ValidationReport gen = validate(generated(), Tolerances::generated());
    CHECK(gen.passed());
    CHECK(gen.check("unit_edges").worst <= 1e-9);
    CHECK(gen.check("golden_ratio").worst <= 1e-9);
    CHECK(gen.summary().find("valid") != std::string::npos);
}

TEST_CASE("validate reports injected faults by cell id") {
    CellDatabase db = generated({0, 0});
    db.cells[6].verts[3].x += 0.1;
    const ValidationReport r = validate(db, Tolerances::generated());
    CHECK_FALSE(r.passed());
    CHECK_FALSE(r.check("unit_edges").passed);
    CHECK_FALSE(r.check("closure").passed);
    CHECK(r.check("unit_edges").failing_ids == std::vector<std::size_t>{7});
    CHECK(r.check("closure").failing_ids == std::vector<std::size_t>{7});
    CHECK(r.check("duplicates").passed);
    CHECK(r.summary().find("INVALID") != std::string::npos);

    CellDatabase dup = generated({0, 0});
    dup.cells.push_back(dup.cells[4]);
    dup.renumber();
    dup.counters = tally(dup.cells);
    const ValidationReport d = validate(dup, Tolerances::generated());
    CHECK_FALSE(d.check("duplicates").passed);
    CHECK(d.check("duplicates").failing_ids == std::vector<std::size_t>{21});

    CellDatabase counts = generated({0, 0});
    counts.counters.fat = 11;
    CHECK_FALSE(validate(counts, Tolerances::generated()).check("counters").passed);

    CellDatabase ids = generated({0, 0});
    ids.cells[2].id = 99;
    CHECK_FALSE(validate(ids, Tolerances::generated()).check("counters").passed);

    CellDatabase flag = parse_database(fixture::read("published_rows.txt"));
    flag.cells[0].tail = TypeFlag{2};
    CHECK_FALSE(validate(flag).check("volume").passed);

    CellDatabase skew = published();
    // A cell with a wrong edge direction but intact closure.
    const Vec3 shift{0.0, 0.05, 0.0};
    for (std::size_t v : {1, 4, 5, 7}) skew.cells[2].verts[v] += shift;
    const ValidationReport s = validate(skew);
    CHECK_FALSE(s.check("edge_directions").passed);
    CHECK(s.check("edge_directions").failing_ids == std::vector<std::size_t>{3});
}

TEST_CASE("tolerances follow the source format") {
    CHECK(Tolerances::for_database(published()).geometry == 5e-4);
    CHECK(Tolerances::for_database(generated({0, 0})).geometry == 1e-9);
    CHECK(Tolerances::legacy().duplicate_quantum == 1e-3);
    CHECK(Tolerances::generated().duplicate_quantum == 1e-6);
    // Legacy noise survives a trip through the canonical format.
    const CellDatabase pub_csv = parse_database(write_database(published(), DbFormat::CanonicalCsv));
    CHECK(pub_csv.meta.legacy_precision());
    CHECK(validate(pub_csv).passed());
}

TEST_CASE("mean volume ratio") {
    const auto pub = mean_volume_ratio(published().cells);
    REQUIRE(pub.has_value());
    CHECK(std::abs(*pub - 1.6180340) <= 1e-4);
    const auto gen = mean_volume_ratio(generated().cells);
    CHECK(std::abs(*gen - oracle::kPhi) <= 1e-9);
    CHECK_FALSE(mean_volume_ratio({}).has_value());
}
