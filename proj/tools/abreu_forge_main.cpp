// abreu-forge: batch driver over one JSON problem document.
//
//   abreu-forge <command> <document.json> [options]
//
// Commands: validate | guillemin | curvature | functionals | calibrate-A |
//           stability | verify | legendre
//
// Exit status: 0 success / verification passed, 1 verification failure,
// 2 malformed input.

#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "abreu_forge/io.hpp"
#include "abreu_forge/operators.hpp"

using namespace abreu_forge;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    std::string command;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t input_hash = 0;
    std::vector<std::string> outputs;
    bool ok = true;

    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    void emit(const std::string& name, const std::string& content) {
        write_file(path(name), content);
        outputs.push_back(name);
    }
};

// tabular artifact in the requested format ("csv" or "json" array-of-rows)
void emit_table(RunContext& ctx, const std::string& base,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
    if (ctx.format == "json") {
        JsonWriter w;
        w.obj_begin();
        w.key("columns").arr_begin();
        for (const auto& h : header) w.str(h);
        w.arr_end();
        w.key("rows").arr_begin();
        for (const auto& r : rows) {
            w.arr_begin();
            for (double v : r) w.num(v);
            w.arr_end();
        }
        w.arr_end();
        w.obj_end();
        ctx.emit(base + ".json", w.str_out());
    } else {
        CsvWriter csv(header);
        for (const auto& r : rows) csv.row(r);
        ctx.emit(base + ".csv", csv.str_out());
    }
}

AffineDensity resolve_A(const ProblemDocument& doc) {
    if (doc.A) return *doc.A;
    return calibrate_affine_A(doc.polytope(), doc.bundle);
}

int cmd_validate(ProblemDocument& doc, RunContext& ctx) {
    auto rep = validate_delzant(doc.polytope());
    std::optional<PositionReport> pos;
    if (!doc.bundle.trivial()) pos = check_position_condition(doc.polytope(), doc.bundle);
    ctx.emit("validate.json", to_json(rep, pos ? &*pos : nullptr));
    ctx.ok = rep.delzant && (!pos || pos->pass);
    return 0;
}

int cmd_guillemin(ProblemDocument& doc, RunContext& ctx) {
    const Polytope& P = doc.polytope();
    auto v = guillemin_potential(P);
    Grid G(P, doc.resolution);
    const int n = P.dim();
    std::vector<std::string> header;
    for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i + 1));
    header.push_back("v");
    for (int i = 0; i < n; ++i) header.push_back("dv_dxi" + std::to_string(i + 1));
    header.push_back("det_hessian");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const Vec& xi = G.point(i);
        std::vector<double> row;
        for (int k = 0; k < n; ++k) row.push_back(xi[k]);
        row.push_back(v.value(xi));
        Vec g = v.gradient(xi);
        for (int k = 0; k < n; ++k) row.push_back(g[k]);
        row.push_back(v.hessian(xi).determinant());
        rows.push_back(std::move(row));
    }
    emit_table(ctx, "guillemin", header, rows);

    JsonWriter w;
    w.obj_begin();
    w.kv("volume", exact_volume(P));
    w.kv("diameter", P.diameter());
    w.kv("vertices", static_cast<long long>(P.vertices().size()));
    w.kv("resolution", doc.resolution);
    w.obj_end();
    ctx.emit("guillemin_summary.json", w.str_out());
    return 0;
}

int cmd_curvature(ProblemDocument& doc, RunContext& ctx) {
    const Polytope& P = doc.polytope();
    Grid G(P, doc.resolution);
    JetField j = jets(doc.potential(), G);
    auto charts = all_vertex_charts(P);
    DeterminantField det = determinant_fields(j, doc.bundle, charts, doc.face_k);
    CurvatureBundle cb = curvature_fields(j, doc.bundle, charts, det);

    const int n = P.dim();
    std::vector<std::string> header;
    for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i + 1));
    header.push_back("A");
    header.push_back("S");
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            header.push_back("Ric_" + std::to_string(r + 1) + std::to_string(c + 1));
    for (int a = 0; a < doc.bundle.root_count(); ++a)
        header.push_back("Ric_alpha_" + std::to_string(a + 1));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < G.size(); ++i) {
        std::vector<double> row;
        for (int k = 0; k < n; ++k) row.push_back(G.point(i)[k]);
        row.push_back(cb.abreu[i]);
        row.push_back(cb.scalar[i]);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) row.push_back(cb.ric_toric[i](r, c));
        for (int a = 0; a < doc.bundle.root_count(); ++a) row.push_back(cb.ric_alpha[a][i]);
        rows.push_back(std::move(row));
    }
    emit_table(ctx, "curvature", header, rows);
    return 0;
}

int cmd_functionals(ProblemDocument& doc, RunContext& ctx) {
    const Polytope& P = doc.polytope();
    AffineDensity A = resolve_A(doc);
    Grid G(P, doc.resolution);
    auto bq = boundary_quadrature(P, doc.boundary_resolution);
    auto rep = mabuchi_F_A(doc.potential(), A, doc.bundle, G, bq);
    ctx.emit("functionals.json", to_json(rep));
    return 0;
}

int cmd_calibrate(ProblemDocument& doc, RunContext& ctx) {
    auto A = calibrate_affine_A(doc.polytope(), doc.bundle);
    double residual = affine_vanishing_residual(A, doc.polytope(), doc.bundle);
    ctx.emit("calibration.json", to_json(A, residual));
    ctx.ok = residual <= 1e-8;
    return 0;
}

int cmd_stability(ProblemDocument& doc, RunContext& ctx) {
    AffineDensity A = resolve_A(doc);
    auto rep = falsify_stability(A, doc.polytope(), doc.bundle, doc.p0_or_barycenter(),
                                 doc.samples, doc.seed, doc.resolution, doc.slope_box);
    ctx.emit("stability.json", to_json(rep));
    ctx.ok = !rep.negative_found;
    return 0;
}

int cmd_legendre(ProblemDocument& doc, RunContext& ctx) {
    const Polytope& P = doc.polytope();
    Grid G(P, doc.resolution);
    JetField j = jets(doc.potential(), G);
    const int n = P.dim();
    std::vector<std::string> header;
    for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i + 1));
    header.push_back("u");
    for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
    header.push_back("f");
    header.push_back("det_hessian");
    header.push_back("duality_residual");
    header.push_back("involution_residual");
    std::vector<std::vector<double>> rows;
    double rms = 0.0, max_duality = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const Jet& J = j[i];
        std::vector<double> row;
        for (int k = 0; k < n; ++k) row.push_back(G.point(i)[k]);
        row.push_back(J.value);
        for (int k = 0; k < n; ++k) row.push_back(J.grad[k]);
        row.push_back(J.legendre);
        row.push_back(J.hess.determinant());
        double duality = (J.hess_inv * J.hess - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
        double invol = std::abs(G.point(i).dot(J.grad) - J.legendre - J.value);
        row.push_back(duality);
        row.push_back(invol);
        rows.push_back(std::move(row));
        rms += invol * invol;
        max_duality = std::max(max_duality, duality);
    }
    rms = std::sqrt(rms / static_cast<double>(G.size()));
    emit_table(ctx, "legendre", header, rows);
    JsonWriter w;
    w.obj_begin();
    w.kv("rms_involution", rms);
    w.kv("max_duality_residual", max_duality);
    w.kv("resolution", doc.resolution);
    w.obj_end();
    ctx.emit("legendre_summary.json", w.str_out());
    ctx.ok = rms < 1e-8 && max_duality < 1e-10;
    return 0;
}

int cmd_verify(ProblemDocument& doc, RunContext& ctx) {
    const Polytope& P = doc.polytope();
    const Potential& u = doc.potential();
    std::vector<InequalityReport> reports;
    if (doc.lemma == "6.1") {
        reports.push_back(verify_lemma_6_1(P, doc.bundle, u, doc.resolution));
        if (!reports.back().hypothesis_failed) {
            reports.push_back(box_f_p_bound_report(P, doc.bundle, u, doc.resolution));
            reports.push_back(A_p_identity_study(P, doc.bundle, u, doc.verify));
        }
        ctx.emit("verify_6_1.json", to_json(reports));
    } else if (doc.lemma == "6.2") {
        auto out = lemma_6_2_margin(P, doc.bundle, u, doc.face_k, doc.verify, doc.resolution);
        reports.push_back(out.report);
        ctx.emit("verify_6_2.json", to_json(reports));
        const int n = P.dim();
        std::vector<std::string> header;
        for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i + 1));
        header.push_back("lhs");
        header.push_back("rhs");
        header.push_back("margin");
        header.push_back("valid");
        Grid G(P, doc.resolution);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < G.size(); ++i) {
            std::vector<double> row;
            for (int k = 0; k < n; ++k) row.push_back(G.point(i)[k]);
            row.push_back(out.lhs[i]);
            row.push_back(out.rhs[i]);
            row.push_back(out.lhs[i] - out.rhs[i]);
            row.push_back(out.valid[i]);
            rows.push_back(std::move(row));
        }
        emit_table(ctx, "verify_6_2_margins", header, rows);
    } else if (doc.lemma == "6.4") {
        auto u_g = guillemin_potential(P);
        reports.push_back(lemma_6_4_search(P, doc.bundle, u, u_g, doc.verify,
                                           doc.C1_candidates, doc.resolution));
        ctx.emit("verify_6_4.json", to_json(reports));
    } else if (doc.lemma == "consistency") {
        reports.push_back(trace_identity_study(P, doc.bundle, u, doc.verify));
        reports.push_back(A_p_identity_study(P, doc.bundle, u, doc.verify));
        reports.push_back(box_f_p_bound_report(P, doc.bundle, u, doc.resolution));
        {
            Grid G(P, doc.resolution);
            JetField j = jets(u, G);
            auto charts = all_vertex_charts(P);
            DeterminantField det = determinant_fields(j, doc.bundle, charts);
            reports.push_back(kappa_gate_report(det.F_p[0], doc.verify));
            auto psi = psi_field(det.log_F_p[0], j);
            double supF = *std::max_element(det.F_p[0].begin(), det.F_p[0].end());
            double kappa = doc.verify.kappa_for(doc.verify.N_2.value_or(supF));
            auto Pf = P_field(det.F_p[0], psi, kappa, doc.verify.exponent_a);
            reports.push_back(psi_P_envelope_report(det.F_p[0], psi, Pf, doc.verify));
        }
        ctx.emit("verify_consistency.json", to_json(reports));
    } else {
        throw ParseError("unknown --lemma value '" + doc.lemma +
                         "' (expected 6.1, 6.2, 6.4 or consistency)");
    }
    for (const auto& r : reports) ctx.ok = ctx.ok && r.pass && !r.hypothesis_failed;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Abreu operator and K-stability toolbox on Delzant polytopes"};
    app.set_version_flag("--version", kVersion);

    std::string command, doc_path, out_dir = ".", format = "csv", lemma;
    int resolution = 0, samples = 0;
    std::uint64_t seed = 0;
    std::vector<double> p0;

    app.add_option("command", command,
                   "validate | guillemin | curvature | functionals | calibrate-A | "
                   "stability | verify | legendre")
        ->required();
    app.add_option("document", doc_path, "JSON problem document")->required();
    app.add_option("--resolution", resolution, "grid resolution per axis (overrides document)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "RNG seed (overrides document)");
    app.add_option("--samples", samples, "stability sample count (overrides document)")
        ->check(CLI::PositiveNumber);
    app.add_option("--p0", p0, "normalization point, comma separated")->delimiter(',');
    app.add_option("--out", out_dir, "output directory (default .)");
    app.add_option("--format", format, "tabular output format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--lemma", lemma, "verify target: 6.1 | 6.2 | 6.4 | consistency");

    bool seed_set = false, res_set = false, samples_set = false;
    try {
        app.parse(argc, argv);
        seed_set = app.count("--seed") > 0;
        res_set = app.count("--resolution") > 0;
        samples_set = app.count("--samples") > 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RunContext ctx;
    ctx.command = command;
    ctx.out_dir = out_dir;
    ctx.format = format;

    std::string text;
    {
        std::ifstream in(doc_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read document " << doc_path << "\n";
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    ctx.input_hash = fnv1a64(text);

    int status = 0;
    try {
        std::filesystem::create_directories(out_dir);
        ProblemDocument doc = parse_document(text);
        if (res_set) {
            doc.resolution = resolution;
            doc.boundary_resolution = resolution;
        }
        if (seed_set) doc.seed = seed;
        if (samples_set) doc.samples = samples;
        if (!p0.empty()) {
            Vec q(static_cast<int>(p0.size()));
            for (std::size_t i = 0; i < p0.size(); ++i) q[static_cast<int>(i)] = p0[i];
            doc.p0 = q;
        }
        if (!lemma.empty()) doc.lemma = lemma;

        if (command == "validate") cmd_validate(doc, ctx);
        else if (command == "guillemin") cmd_guillemin(doc, ctx);
        else if (command == "curvature") cmd_curvature(doc, ctx);
        else if (command == "functionals") cmd_functionals(doc, ctx);
        else if (command == "calibrate-A") cmd_calibrate(doc, ctx);
        else if (command == "stability") cmd_stability(doc, ctx);
        else if (command == "verify") cmd_verify(doc, ctx);
        else if (command == "legendre") cmd_legendre(doc, ctx);
        else {
            std::cerr << "error: unknown command '" << command << "'\n";
            return 2;
        }
        status = ctx.ok ? 0 : 1;
        if (!ctx.ok) std::cerr << command << ": verification failed\n";
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const CalibrationError& e) {
        std::cerr << "verification failure: " << e.what()
                  << " (residual " << format_number(e.residual) << ")\n";
        return 1;
    } catch (const ConvexityError& e) {
        std::cerr << "verification failure: " << e.what() << " (witness";
        for (int i = 0; i < e.witness.size(); ++i) std::cerr << ' ' << e.witness[i];
        std::cerr << ", min eigenvalue " << format_number(e.min_eigenvalue) << ")\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t1 = std::chrono::steady_clock::now();
    JsonWriter w;
    w.obj_begin();
    w.kv("tool_version", kVersion);
    w.kv("command", ctx.command);
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(ctx.input_hash));
    w.kv("input_hash", hash);
    w.kv("wall_time_ms",
         static_cast<long long>(
             std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()));
    w.key("outputs").arr_begin();
    for (const auto& o : ctx.outputs) w.str(o);
    w.arr_end();
    w.obj_end();
    write_file(ctx.path("run_manifest.json"), w.str_out());
    return status;
}
