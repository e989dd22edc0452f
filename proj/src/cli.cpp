#include "qc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "qc/cell_database.hpp"
#include "qc/errors.hpp"
#include "qc/exporters.hpp"
#include "qc/multigrid.hpp"
#include "qc/service.hpp"
#include "qc/slicer.hpp"

namespace qc {

namespace {

const Offsets kReferenceOffsets{0.1, 0.02, 0.01, 0.03, 0.04, 0.05};

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < part.size() && std::isspace(static_cast<unsigned char>(part[used]))) ++used;
        if (part.empty() || used != part.size() || !std::isfinite(v))
            throw std::invalid_argument(what + ": '" + part + "' is not a number");
        out.push_back(v);
    }
    if (out.size() != count)
        throw std::invalid_argument(what + " expects " + std::to_string(count) + " comma-separated numbers, got " +
                                    std::to_string(out.size()));
    return out;
}

IndexRange parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw std::invalid_argument("--range expects LO..HI, got '" + text + "'");
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (s.empty() || used != s.size()) throw std::invalid_argument("--range bound '" + s + "' is not an integer");
        return v;
    };
    const IndexRange r{to_int(text.substr(0, dots)), to_int(text.substr(dots + 2))};
    if (r.lo > r.hi) throw std::invalid_argument("--range requires LO <= HI");
    return r;
}

struct RegionArgs {
    std::string slab;
    std::string ball;
    std::string half_space;
    std::string region;  // KIND:VALUES
    std::string mode = "all_vertices";

    bool any() const { return !slab.empty() || !ball.empty() || !half_space.empty() || !region.empty(); }

    Region build() const {
        const int given = !slab.empty() + !ball.empty() + !half_space.empty() + !region.empty();
        if (given > 1) throw std::invalid_argument("give only one of --slab, --ball, --half-space, --region");
        std::string kind;
        std::string values;
        if (!slab.empty()) kind = "slab", values = slab;
        if (!ball.empty()) kind = "ball", values = ball;
        if (!half_space.empty()) kind = "half_space", values = half_space;
        if (!region.empty()) {
            const auto colon = region.find(':');
            kind = region.substr(0, colon);
            values = colon == std::string::npos ? "" : region.substr(colon + 1);
        }
        if (kind == "all") return AllSpace{};
        if (kind == "slab") {
            const auto v = parse_numbers(values, 5, "slab");
            return make_slab({v[0], v[1], v[2]}, v[3], v[4]);
        }
        if (kind == "ball") {
            const auto v = parse_numbers(values, 4, "ball");
            return make_ball({v[0], v[1], v[2]}, v[3]);
        }
        if (kind == "half_space") {
            const auto v = parse_numbers(values, 4, "half-space");
            return make_half_space({v[0], v[1], v[2]}, v[3]);
        }
        throw std::invalid_argument("unknown region kind '" + kind + "' (expected all, slab, ball or half_space)");
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--slab", slab, "Slab NX,NY,NZ,DLO,DHI")->type_name("N3,D,D");
        cmd->add_option("--ball", ball, "Ball CX,CY,CZ,R")->type_name("C3,R");
        cmd->add_option("--half-space", half_space, "Half-space NX,NY,NZ,D (inside: n.p <= D)");
        cmd->add_option("--region", region, "Region as KIND:VALUES, KIND one of all, slab, ball, half_space");
        cmd->add_option("--mode", mode, "all_vertices | any_vertex | centroid")->capture_default_str();
    }
};

std::string stats_line(const Counters& c) {
    std::ostringstream os;
    os << "cells=" << c.cells << " fat=" << c.fat << " thin=" << c.thin << " singularities=" << c.singularities;
    return os.str();
}

CellDatabase read_db(const std::string& path) { return load_database(path); }

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw std::ios_base::failure("error writing '" + path + "'");
}

// CLI11 reads a value starting with '-' as an option name; bind such values
// to their option explicitly.
std::vector<std::string> join_negative_values(std::vector<std::string> args) {
    static const std::set<std::string> takes_value{"--range", "--offsets", "--slab", "--ball",
                                                   "--half-space", "--region"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (takes_value.count(args[i]) && i + 1 < args.size() && !args[i + 1].empty() && args[i + 1][0] == '-') {
            out.push_back(args[i] + "=" + args[i + 1]);
            ++i;
        } else {
            out.push_back(args[i]);
        }
    }
    return out;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Icosahedral quasicrystal generator and database tool", "qctool"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));

    // generate
    auto* gen = app.add_subcommand("generate", "Generate cells by the dual multigrid method");
    std::string gen_offsets = "0.1,0.02,0.01,0.03,0.04,0.05";
    std::string gen_range = "-2..2";
    std::string gen_out;
    std::string gen_format = "canonical_csv";
    std::string gen_convention = "canonical";
    std::string gen_calibrate;
    double gen_sing_tol = 1e-6;
    RegionArgs gen_region;
    gen->add_option("--offsets", gen_offsets, "Six plane offsets a,b,c,d,e,f")->capture_default_str();
    gen->add_option("--range", gen_range, "Index range LO..HI on each generating axis")->capture_default_str();
    gen->add_option("--out", gen_out, "Output file");
    gen->add_option("--format", gen_format, "canonical_csv | legacy_flag | legacy_volume | json")
        ->capture_default_str();
    gen->add_option("--convention", gen_convention, "canonical | legacy")->capture_default_str();
    gen->add_option("--calibrate", gen_calibrate, "Recover the convention from a published database file");
    gen->add_option("--singularity-tol", gen_sing_tol, "Distance below which a fourth plane counts as meeting")
        ->capture_default_str();
    gen_region.add_to(gen);

    // validate
    auto* val = app.add_subcommand("validate", "Check a database; exit 0 iff every check passes");
    std::string val_file;
    std::optional<double> val_tol;
    val->add_option("file", val_file, "Database file")->required();
    val->add_option("--tol", val_tol, "Geometry and volume tolerance (default by source format)");

    // slice
    auto* sl = app.add_subcommand("slice", "Keep whole cells inside a region");
    std::string sl_file;
    std::string sl_out;
    std::string sl_format = "canonical_csv";
    RegionArgs sl_region;
    sl->add_option("file", sl_file, "Database file")->required();
    sl->add_option("--out", sl_out, "Output file");
    sl->add_option("--format", sl_format, "canonical_csv | legacy_flag | legacy_volume | json")->capture_default_str();
    sl_region.add_to(sl);

    // export
    auto* ex = app.add_subcommand("export", "Export to OBJ or viewer JSON");
    std::string ex_file;
    std::string ex_out;
    std::string ex_format;
    bool ex_faces = false, ex_edges = false, ex_both = false, ex_group = false, ex_tri = false;
    std::optional<double> ex_weld;
    ex->add_option("file", ex_file, "Database file")->required();
    ex->add_option("--format", ex_format, "obj | json")->required()->check(CLI::IsMember({"obj", "json"}));
    ex->add_option("--out", ex_out, "Output file (standard output when omitted)");
    auto* f_faces = ex->add_flag("--faces", ex_faces, "Faces only");
    auto* f_edges = ex->add_flag("--edges", ex_edges, "Edges only");
    auto* f_both = ex->add_flag("--both", ex_both, "Faces and edges (default)");
    f_faces->excludes(f_edges)->excludes(f_both);
    f_edges->excludes(f_both);
    ex->add_flag("--group-by-class", ex_group, "Emit 'g thin' and 'g fat' groups");
    ex->add_flag("--triangulate", ex_tri, "Split quads into triangles");
    ex->add_option("--weld-tol", ex_weld, "Vertex weld tolerance (default 1e-6, legacy data 1e-3)");

    // stats
    auto* st = app.add_subcommand("stats", "Summarise a database");
    std::string st_file;
    st->add_option("file", st_file, "Database file")->required();

    // serve
    auto* sv = app.add_subcommand("serve", "Serve the HTTP API");
    std::optional<int> sv_port;
    std::string sv_host = "127.0.0.1";
    std::string sv_db;
    sv->add_option("--port", sv_port, "Port (falls back to $QC_PORT, then 8080)");
    sv->add_option("--host", sv_host, "Address to bind")->capture_default_str();
    sv->add_option("--db", sv_db, "Database served at /api/db");

    args = join_negative_values(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            GridSpec spec;
            const auto o = parse_numbers(gen_offsets, 6, "--offsets");
            std::copy(o.begin(), o.end(), spec.offsets.begin());
            for (const auto& w : normalize_offsets(spec.offsets)) err << "warning: " << w << '\n';
            spec.range = parse_range(gen_range);
            spec.singularity_tol = gen_sing_tol;
            if (gen_region.any()) {
                spec.region = gen_region.build();
                spec.region_mode = parse_slice_mode(gen_region.mode);
            }
            const DbFormat format = parse_db_format(gen_format);
            Convention convention;
            if (gen_convention == "legacy") convention = Convention::legacy();
            else if (gen_convention != "canonical")
                throw std::invalid_argument("--convention must be canonical or legacy");
            if (!gen_calibrate.empty()) {
                const CalibrationResult cal = calibrate(read_db(gen_calibrate), spec);
                convention = cal.convention;
                err << "calibrated: " << convention.describe() << " (reproduces " << cal.cells_reproduced << " of "
                    << cal.cells_compared << " published cells)\n";
            }
            check(spec);
            const GenerationResult result = generate(spec, star_basis(), convention);
            if (result.counters.singularities > 0)
                err << "warning: " << result.counters.singularities << " singular combinations\n";
            if (!gen_out.empty()) write_file(gen_out, [&](std::ostream& f) { write_database(f, result.db, format); });
            out << stats_line(result.counters) << '\n';
            if (spec.region) out << "kept=" << result.db.size() << '\n';
            return kExitOk;
        }

        if (*val) {
            CellDatabase db;
            try {
                db = read_db(val_file);
            } catch (const ParseError& e) {
                err << val_file << ": " << e.what() << '\n';
                return kExitInvalid;
            }
            Tolerances tol = Tolerances::for_database(db);
            if (val_tol) {
                if (!(*val_tol > 0.0)) throw std::invalid_argument("--tol must be positive");
                tol.geometry = tol.volume = *val_tol;
            }
            const ValidationReport report = validate(db, tol);
            out << report.summary();
            return report.passed() ? kExitOk : kExitInvalid;
        }

        if (*sl) {
            if (!sl_region.any()) throw std::invalid_argument("slice needs --slab, --ball, --half-space or --region");
            const Region region = sl_region.build();
            const SliceMode mode = parse_slice_mode(sl_region.mode);
            const DbFormat format = parse_db_format(sl_format);
            const CellDatabase db = read_db(sl_file);
            const CellDatabase kept = slice(db, region, mode);
            if (!sl_out.empty()) write_file(sl_out, [&](std::ostream& f) { write_database(f, kept, format); });
            out << "kept=" << kept.size() << " of " << db.size() << " (" << describe(region)
                << " mode=" << to_string(mode) << ")\n";
            out << stats_line(kept.counters) << '\n';
            return kExitOk;
        }

        if (*ex) {
            const CellDatabase db = read_db(ex_file);
            auto emit = [&](std::ostream& f) {
                if (ex_format == "json") {
                    export_json(f, db);
                    return;
                }
                ObjOptions opt;
                opt.content = ex_faces ? ObjContent::Faces : ex_edges ? ObjContent::Edges : ObjContent::Both;
                opt.group_by_class = ex_group;
                opt.triangulate = ex_tri;
                if (ex_weld) {
                    if (!(*ex_weld > 0.0)) throw std::invalid_argument("--weld-tol must be positive");
                    opt.weld_tol = ex_weld;
                }
                export_obj(f, db, opt);
            };
            if (ex_out.empty()) emit(out);
            else write_file(ex_out, emit);
            return kExitOk;
        }

        if (*st) {
            const CellDatabase db = read_db(st_file);
            const DatabaseStats s = stats(db);
            out << stats_line(s.counts) << '\n';
            out << std::setprecision(9);
            if (s.bounds.empty) {
                out << "bounds=empty\n";
            } else {
                out << "bounds_min=" << s.bounds.lo.x << ',' << s.bounds.lo.y << ',' << s.bounds.lo.z << '\n';
                out << "bounds_max=" << s.bounds.hi.x << ',' << s.bounds.hi.y << ',' << s.bounds.hi.z << '\n';
            }
            out << "welded_vertices=" << s.welded_vertices << '\n';
            out << "edge_min=" << s.edge_min << " edge_max=" << s.edge_max << '\n';
            out << "total_volume=" << s.total_volume << '\n';
            return kExitOk;
        }

        if (*sv) {
            int port = 8080;
            if (sv_port) port = *sv_port;
            else if (const char* env = std::getenv("QC_PORT")) port = std::stoi(env);
            std::optional<CellDatabase> db;
            if (!sv_db.empty()) db = read_db(sv_db);
            const ApiService api(std::move(db));
            HttpServer server(api);
            const int bound = server.bind(sv_host, port);
            if (bound < 0) {
                err << "cannot bind " << sv_host << ':' << port << '\n';
                return kExitIo;
            }
            out << "listening on http://" << sv_host << ':' << bound << std::endl;
            return server.listen() ? kExitOk : kExitIo;
        }
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitUsage;
}

}  // namespace qc
