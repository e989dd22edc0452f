#include "qc/cell_database.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "qc/errors.hpp"
#include "qc/exporters.hpp"

namespace qc {

// ---------------------------------------------------------------------------
// Data model helpers

Vec3 QCCell::centroid() const {
    Vec3 s;
    for (const auto& v : verts) s += v;
    return s / 8.0;
}

double QCCell::edge_determinant() const { return triple_product(edge_a(), edge_b(), edge_c()); }

Counters tally(const std::vector<QCCell>& cells) {
    Counters c;
    for (const auto& cell : cells) {
        ++c.cells;
        (cell.cls == CellClass::Fat ? c.fat : c.thin)++;
        if (cell.key && cell.key->singular) ++c.singularities;
    }
    return c;
}

void CellDatabase::renumber() {
    std::size_t id = 1;
    for (auto& c : cells) c.id = id++;
}

std::string_view library_version() { return "1.0.0"; }

// ---------------------------------------------------------------------------
// Format names

DbFormat parse_db_format(std::string_view name) {
    if (name == "canonical_csv" || name == "csv") return DbFormat::CanonicalCsv;
    if (name == "legacy_flag") return DbFormat::LegacyFlag;
    if (name == "legacy_volume") return DbFormat::LegacyVolume;
    if (name == "json") return DbFormat::Json;
    throw std::invalid_argument("unknown database format '" + std::string(name) +
                                "' (expected canonical_csv, legacy_flag, legacy_volume or json)");
}

std::string_view to_string(DbFormat format) {
    switch (format) {
        case DbFormat::CanonicalCsv: return "canonical_csv";
        case DbFormat::LegacyFlag: return "legacy_flag";
        case DbFormat::LegacyVolume: return "legacy_volume";
        case DbFormat::Json: return "json";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Token stream reader

namespace {

constexpr std::size_t kRecordTokens = 26;

struct Token {
    std::string text;
    SourceLocation where;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

// A token that cannot end here: a bare sign, or a mantissa whose exponent was
// wrapped onto the next line ("-4.70231076E-" / "001").
bool incomplete(const std::string& t) {
    if (t == "-" || t == "+") return true;
    if (t.empty()) return false;
    const char last = t.back();
    if (last == 'E' || last == 'e') return true;
    if ((last == '-' || last == '+') && t.size() >= 2) {
        const char prev = t[t.size() - 2];
        return prev == 'E' || prev == 'e';
    }
    return false;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : s_(text) {}

    std::vector<Token> run(std::vector<std::string>& comments) {
        std::vector<Token> out;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == ',' || is_space(c)) {
                advance();
                continue;
            }
            if (c == '#') {
                const std::size_t start = pos_;
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
                comments.emplace_back(s_.substr(start + 1, pos_ - start - 1));
                continue;
            }
            Token tok;
            tok.where = {line_, col_, out.size(), out.size() / kRecordTokens + 1};
            read_word(tok.text);
            // Join across whitespace (never across a comma) while the token is incomplete.
            while (incomplete(tok.text)) {
                std::size_t p = pos_;
                while (p < s_.size() && is_space(s_[p])) ++p;
                if (p == pos_ || p >= s_.size() || s_[p] == ',' || s_[p] == '#') break;
                while (pos_ < p) advance();
                read_word(tok.text);
            }
            out.push_back(std::move(tok));
        }
        return out;
    }

private:
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void read_word(std::string& into) {
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '#' && !is_space(s_[pos_])) {
            into.push_back(s_[pos_]);
            advance();
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

double to_number(const Token& tok) {
    std::string_view t = tok.text;
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v))
        throw MalformedNumber("malformed number '" + tok.text + "'", tok.where);
    return v;
}

bool is_integer_token(std::string_view t) {
    if (!t.empty() && (t.front() == '+' || t.front() == '-')) t.remove_prefix(1);
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && is_space(s[a])) ++a;
    while (b > a && is_space(s[b - 1])) --b;
    return std::string(s.substr(a, b - a));
}

// "# key: value" metadata written by the canonical CSV writer.
void apply_comment(const std::string& line, CellDatabase& db, bool& canonical,
                   std::optional<std::size_t>& singularities) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) return;
    const std::string key = trim(std::string_view(line).substr(0, colon));
    const std::string value = trim(std::string_view(line).substr(colon + 1));
    try {
        if (key == "format") {
            canonical = value == "canonical_csv";
        } else if (key == "offsets") {
            std::array<double, 6> o{};
            std::istringstream is(value);
            std::string part;
            std::size_t i = 0;
            while (std::getline(is, part, ',') && i < 6) o[i++] = std::stod(part);
            if (i == 6) db.meta.offsets = o;
        } else if (key == "range") {
            const auto dots = value.find("..");
            if (dots != std::string::npos)
                db.meta.range = IndexRange{std::stoi(value.substr(0, dots)), std::stoi(value.substr(dots + 2))};
        } else if (key == "singularities") {
            singularities = static_cast<std::size_t>(std::stoul(value));
        } else if (key == "generator") {
            db.meta.generator_version = value;
        } else if (key == "precision") {
            db.meta.legacy_data = value == "legacy";
        } else if (key == "history") {
            db.meta.history.push_back(value);
        }
    } catch (const std::logic_error&) {
        // Unreadable metadata is ignored; cells are authoritative.
    }
}

QCCell make_cell(const Token* rec, double classify_tol) {
    QCCell cell;
    if (!is_integer_token(rec[0].text))
        throw TokenCountMismatch("record does not start with an integer index (got '" + rec[0].text +
                                     "'); a preceding record has the wrong number of fields",
                                 rec[0].where);
    cell.source_index = std::stol(rec[0].text);
    for (std::size_t v = 0; v < 8; ++v) {
        cell.verts[v] = {to_number(rec[1 + 3 * v]), to_number(rec[2 + 3 * v]), to_number(rec[3 + 3 * v])};
    }
    cell.signed_volume = cell.edge_determinant();

    const Token& tail = rec[25];
    if (tail.text == "1" || tail.text == "2") {
        const int code = tail.text == "1" ? 1 : 2;
        cell.tail = TypeFlag{code};
        cell.cls = code == 1 ? CellClass::Thin : CellClass::Fat;
        return cell;
    }
    const double value = to_number(tail);
    try {
        cell.cls = classify_volume(value, classify_tol);
    } catch (const UnclassifiableVolume&) {
        throw TailInvalid("record tail '" + tail.text + "' is neither a type flag nor a cell volume",
                          tail.where);
    }
    cell.tail = SignedVolume{value};
    return cell;
}

CellDatabase parse_json(std::string_view text, const ParseOptions& options) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), SourceLocation{0, e.byte, 0, 0});
    }
    CellDatabase db;
    db.meta.format = SourceFormat::Json;
    std::optional<std::size_t> singularities;
    std::size_t record = 0;
    try {
        if (doc.contains("meta") && doc["meta"].is_object()) {
            const json& meta = doc["meta"];
            if (meta.contains("offsets") && meta["offsets"].is_array() && meta["offsets"].size() == 6) {
                std::array<double, 6> o{};
                for (std::size_t i = 0; i < 6; ++i) o[i] = meta["offsets"][i].get<double>();
                db.meta.offsets = o;
            }
            if (meta.contains("range") && meta["range"].is_array() && meta["range"].size() == 2)
                db.meta.range = IndexRange{meta["range"][0].get<int>(), meta["range"][1].get<int>()};
            if (meta.contains("counts") && meta["counts"].contains("singularities"))
                singularities = meta["counts"]["singularities"].get<std::size_t>();
        }
        const json& cells = doc.at("cells");
        if (!cells.is_array()) throw ParseError("\"cells\" must be an array", {});
        db.cells.reserve(cells.size());
        for (const json& c : cells) {
            ++record;
            QCCell cell;
            if (c.contains("id")) cell.source_index = c["id"].get<long>();
            const json& verts = c.at("verts");
            if (!verts.is_array() || verts.size() != 8)
                throw TokenCountMismatch("cell must have 8 vertices", {0, 0, 0, record});
            for (std::size_t v = 0; v < 8; ++v) {
                if (!verts[v].is_array() || verts[v].size() != 3)
                    throw TokenCountMismatch("vertex must have 3 coordinates", {0, 0, 0, record});
                cell.verts[v] = {verts[v][0].get<double>(), verts[v][1].get<double>(), verts[v][2].get<double>()};
            }
            const int type = c.at("type").get<int>();
            if (type != 1 && type != 2)
                throw TailInvalid("cell type must be 1 or 2, got " + std::to_string(type), {0, 0, 0, record});
            cell.tail = TypeFlag{type};
            cell.cls = type == 1 ? CellClass::Thin : CellClass::Fat;
            cell.signed_volume = cell.edge_determinant();
            db.cells.push_back(std::move(cell));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed database JSON: ") + e.what(), {0, 0, 0, record});
    }
    (void)options;
    db.renumber();
    db.counters = tally(db.cells);
    db.counters.singularities = singularities.value_or(0);
    return db;
}

}  // namespace

CellDatabase parse_database(std::string_view text, const ParseOptions& options) {
    std::size_t first = 0;
    while (first < text.size() && is_space(text[first])) ++first;

    CellDatabase db;
    if (first < text.size() && text[first] == '{') {
        db = parse_json(text, options);
    } else {
        std::vector<std::string> comments;
        const auto tokens = Lexer(text).run(comments);
        bool canonical = false;
        std::optional<std::size_t> singularities;
        for (const auto& c : comments) apply_comment(c, db, canonical, singularities);
        db.meta.format = canonical ? SourceFormat::CanonicalCsv : SourceFormat::LegacyText;
        if (!canonical) db.meta.legacy_data = true;

        const std::size_t full = tokens.size() / kRecordTokens;
        if (tokens.size() % kRecordTokens != 0) {
            const Token& start = tokens[full * kRecordTokens];
            throw TokenCountMismatch("record " + std::to_string(full + 1) + " has " +
                                         std::to_string(tokens.size() - full * kRecordTokens) +
                                         " fields, expected " + std::to_string(kRecordTokens),
                                     start.where);
        }
        db.cells.reserve(full);
        for (std::size_t r = 0; r < full; ++r)
            db.cells.push_back(make_cell(&tokens[r * kRecordTokens], options.classify_tol));
        db.renumber();
        db.counters = tally(db.cells);
        db.counters.singularities = singularities.value_or(0);
    }
    db.meta.source = options.source_name.empty() ? "parsed" : "parsed:" + options.source_name;
    return db;
}

CellDatabase parse_database(std::istream& in, const ParseOptions& options) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_database(buf.str(), options);
}

CellDatabase load_database(const std::string& path, const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
    ParseOptions o = options;
    if (o.source_name.empty()) {
        const auto slash = path.find_last_of('/');
        o.source_name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    return parse_database(in, o);
}

// ---------------------------------------------------------------------------
// Writers

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

void write_canonical(std::ostream& out, const CellDatabase& db) {
    out << "# format: canonical_csv\n";
    out << "# generator: " << (db.meta.generator_version.empty() ? std::string(library_version())
                                                                 : db.meta.generator_version)
        << '\n';
    out << "# source: " << db.meta.source << '\n';
    if (db.meta.offsets) {
        out << "# offsets: ";
        for (std::size_t i = 0; i < 6; ++i) out << (i ? "," : "") << fmt("%.17g", (*db.meta.offsets)[i]);
        out << '\n';
    }
    if (db.meta.range) out << "# range: " << db.meta.range->lo << ".." << db.meta.range->hi << '\n';
    out << "# cells: " << db.counters.cells << '\n';
    out << "# fat: " << db.counters.fat << '\n';
    out << "# thin: " << db.counters.thin << '\n';
    out << "# singularities: " << db.counters.singularities << '\n';
    if (db.meta.legacy_precision()) out << "# precision: legacy\n";
    for (const auto& h : db.meta.history) out << "# history: " << h << '\n';
    out << "# id,x1,y1,z1,x2,y2,z2,x3,y3,z3,x4,y4,z4,x5,y5,z5,x6,y6,z6,x7,y7,z7,x8,y8,z8,type\n";
    for (const auto& c : db.cells) {
        out << c.id;
        for (const auto& v : c.verts)
            for (int i = 0; i < 3; ++i) out << ',' << fmt("%.17g", v[i]);
        out << ',' << legacy_code(c.cls) << '\n';
    }
}

// Six numbers per line, each record ending with its tail, records separated by
// a blank line.
void write_legacy(std::ostream& out, const CellDatabase& db, bool volume_tail) {
    for (const auto& c : db.cells) {
        out << c.id << ',';
        std::size_t k = 0;
        for (const auto& v : c.verts)
            for (int i = 0; i < 3; ++i) {
                const std::string num = fmt("%.9E", v[i]);
                if (num[0] != '-') out << ' ';
                out << num << ',';
                if (++k % 6 == 0) out << '\n';
            }
        if (volume_tail) {
            double vol = c.signed_volume;
            if (c.tail)
                if (const auto* sv = std::get_if<SignedVolume>(&*c.tail)) vol = sv->value;
            out << fmt("%.8E", vol) << "\n\n";
        } else {
            out << legacy_code(c.cls) << "\n\n";
        }
    }
}

}  // namespace

void write_database(std::ostream& out, const CellDatabase& db, DbFormat format) {
    switch (format) {
        case DbFormat::CanonicalCsv: write_canonical(out, db); break;
        case DbFormat::LegacyFlag: write_legacy(out, db, false); break;
        case DbFormat::LegacyVolume: write_legacy(out, db, true); break;
        case DbFormat::Json: out << database_json(db, 0) << '\n'; break;
    }
}

std::string write_database(const CellDatabase& db, DbFormat format) {
    std::ostringstream out;
    write_database(out, db, format);
    return out.str();
}

// ---------------------------------------------------------------------------
// Validation

Tolerances Tolerances::legacy() {
    Tolerances t;
    t.geometry = 5e-4;
    t.volume = 5e-4;
    t.golden_ratio = 1e-4;
    t.duplicate_quantum = 1e-3;
    return t;
}

Tolerances Tolerances::generated() { return {}; }

Tolerances Tolerances::for_database(const CellDatabase& db) {
    if (db.meta.legacy_precision()) return legacy();
    switch (db.meta.format) {
        case SourceFormat::Json: {
            // JSON may come from the viewer export, which keeps 9 significant digits.
            Tolerances t;
            t.geometry = 1e-6;
            t.volume = 1e-6;
            t.golden_ratio = 1e-6;
            return t;
        }
        default: return generated();
    }
}

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult& ValidationReport::check(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no check named " + std::string(name));
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << std::left << std::setw(16) << c.name << (c.passed ? "PASS" : "FAIL") << "  worst="
           << std::setprecision(3) << std::scientific << c.worst << std::defaultfloat;
        if (!c.failing_ids.empty()) {
            os << "  cells=";
            const std::size_t shown = std::min<std::size_t>(c.failing_ids.size(), 10);
            for (std::size_t i = 0; i < shown; ++i) os << (i ? "," : "") << c.failing_ids[i];
            if (shown < c.failing_ids.size()) os << ",... (" << c.failing_ids.size() << " total)";
        }
        if (!c.detail.empty()) os << "  " << c.detail;
        os << '\n';
    }
    os << (passed() ? "valid" : "INVALID") << '\n';
    return os.str();
}

std::optional<double> mean_volume_ratio(const std::vector<QCCell>& cells) {
    double fat = 0.0;
    double thin = 0.0;
    std::size_t nf = 0;
    std::size_t nt = 0;
    for (const auto& c : cells) {
        const double v = std::abs(c.signed_volume);
        if (c.cls == CellClass::Fat) {
            fat += v;
            ++nf;
        } else {
            thin += v;
            ++nt;
        }
    }
    if (nf == 0 || nt == 0) return std::nullopt;
    return (fat / static_cast<double>(nf)) / (thin / static_cast<double>(nt));
}

namespace {

constexpr std::array<std::array<int, 2>, 12> kEdges{{
    {0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 6}, {3, 5}, {3, 6}, {4, 7}, {5, 7}, {6, 7},
}};

void note(CheckResult& r, std::size_t id, double dev, double tol) {
    r.worst = std::max(r.worst, dev);
    if (!(dev <= tol)) {
        r.passed = false;
        if (r.failing_ids.empty() || r.failing_ids.back() != id) r.failing_ids.push_back(id);
    }
}

CheckResult named(const char* name) {
    CheckResult r;
    r.name = name;
    return r;
}

struct VertexSetHash {
    std::size_t operator()(const std::vector<long long>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (long long x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
        return h;
    }
};

}  // namespace

ValidationReport validate(const CellDatabase& db, const Tolerances& tol) {
    CheckResult edges = named("unit_edges");
    CheckResult closure = named("closure");
    CheckResult volume = named("volume");
    CheckResult golden = named("golden_ratio");
    CheckResult counters = named("counters");
    CheckResult dups = named("duplicates");
    CheckResult dirs = named("edge_directions");
    const StarBasis& basis = star_basis();

    std::unordered_set<std::vector<long long>, VertexSetHash> seen;
    for (std::size_t i = 0; i < db.cells.size(); ++i) {
        const QCCell& c = db.cells[i];
        for (const auto& e : kEdges) {
            const double len = norm(c.verts[static_cast<std::size_t>(e[1])] - c.verts[static_cast<std::size_t>(e[0])]);
            note(edges, c.id, std::abs(len - 1.0), tol.geometry);
        }

        const Vec3 a = c.edge_a(), b = c.edge_b(), d = c.edge_c();
        double worst = 0.0;
        for (std::size_t v = 0; v < 8; ++v) {
            const auto& eps = kEpsilonOrder[v];
            const Vec3 expect = c.verts[0] + double(eps[0]) * a + double(eps[1]) * b + double(eps[2]) * d;
            worst = std::max(worst, max_abs(c.verts[v] - expect));
        }
        note(closure, c.id, worst, tol.geometry);

        const double det = c.edge_determinant();
        try {
            const CellClass k = classify_volume(det, tol.classify);
            double dev = std::abs(std::abs(det) - (k == CellClass::Fat ? fat_volume() : thin_volume()));
            if (k != c.cls) dev = std::max(dev, std::abs(fat_volume() - thin_volume()));
            if (c.tail) {
                if (const auto* sv = std::get_if<SignedVolume>(&*c.tail))
                    dev = std::max(dev, std::abs(sv->value - det));
                else if (std::get<TypeFlag>(*c.tail).code != legacy_code(k))
                    dev = std::max(dev, std::abs(fat_volume() - thin_volume()));
            }
            note(volume, c.id, dev, tol.volume);
        } catch (const UnclassifiableVolume&) {
            note(volume, c.id, std::abs(det), -1.0);
        }

        for (const Vec3& edge : {a, b, d}) {
            double best = INFINITY;
            for (const auto& e : basis.e) best = std::min({best, max_abs(edge - e), max_abs(edge + e)});
            note(dirs, c.id, best, tol.geometry);
        }

        std::vector<long long> key;
        key.reserve(24);
        std::array<std::array<long long, 3>, 8> q{};
        for (std::size_t v = 0; v < 8; ++v)
            for (int k = 0; k < 3; ++k)
                q[v][static_cast<std::size_t>(k)] = std::llround(c.verts[v][k] / tol.duplicate_quantum);
        std::sort(q.begin(), q.end());
        for (const auto& p : q) key.insert(key.end(), p.begin(), p.end());
        if (!seen.insert(std::move(key)).second) note(dups, c.id, 1.0, 0.0);
    }

    if (const auto ratio = mean_volume_ratio(db.cells)) {
        note(golden, 0, std::abs(*ratio - golden_ratio()), tol.golden_ratio);
        golden.failing_ids.clear();
        std::ostringstream os;
        os << "ratio=" << std::setprecision(10) << *ratio;
        golden.detail = os.str();
    } else {
        golden.detail = "not applicable (one class absent)";
    }

    const Counters recount = tally(db.cells);
    bool ids_ok = true;
    for (std::size_t i = 0; i < db.cells.size(); ++i) ids_ok = ids_ok && db.cells[i].id == i + 1;
    counters.passed = ids_ok && db.counters.cells == recount.cells && db.counters.fat == recount.fat &&
                      db.counters.thin == recount.thin &&
                      db.counters.cells == db.counters.fat + db.counters.thin;
    {
        std::ostringstream os;
        os << "cells=" << recount.cells << " fat=" << recount.fat << " thin=" << recount.thin;
        if (!counters.passed)
            os << " (stored cells=" << db.counters.cells << " fat=" << db.counters.fat
               << " thin=" << db.counters.thin << (ids_ok ? "" : ", ids not consecutive") << ")";
        counters.detail = os.str();
    }

    return {{edges, closure, volume, golden, counters, dups, dirs}};
}

ValidationReport validate(const CellDatabase& db) { return validate(db, Tolerances::for_database(db)); }

}  // namespace qc
