// Problem-document parsing (JSON in) and report emission (JSON/CSV out).
// Parsing uses nlohmann::json; emission goes through a small writer with a
// fixed field order and %.17g numbers so identical runs produce identical
// bytes on any platform.
#ifndef ABREU_FORGE_IO_HPP
#define ABREU_FORGE_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "functionals.hpp"
#include "stability.hpp"
#include "verify.hpp"

namespace abreu_forge {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999"; // parses back as inf
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Deterministic JSON writer
// ---------------------------------------------------------------------------

class JsonWriter {
public:
    JsonWriter() { counts_.push_back(0); }

    JsonWriter& obj_begin() { open('{'); return *this; }
    JsonWriter& obj_end() { close('}'); return *this; }
    JsonWriter& arr_begin() { open('['); return *this; }
    JsonWriter& arr_end() { close(']'); return *this; }

    JsonWriter& key(const std::string& k) {
        comma();
        s_ << '"' << escape(k) << "\":";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& num(double v) { lead(); s_ << format_number(v); return *this; }
    JsonWriter& integer(long long v) { lead(); s_ << v; return *this; }
    JsonWriter& str(const std::string& v) { lead(); s_ << '"' << escape(v) << '"'; return *this; }
    JsonWriter& boolean(bool v) { lead(); s_ << (v ? "true" : "false"); return *this; }
    JsonWriter& null() { lead(); s_ << "null"; return *this; }

    JsonWriter& kv(const std::string& k, double v) { return key(k).num(v); }
    JsonWriter& kv(const std::string& k, int v) { return key(k).integer(v); }
    JsonWriter& kv(const std::string& k, long long v) { return key(k).integer(v); }
    JsonWriter& kv(const std::string& k, std::uint64_t v) {
        return key(k).integer(static_cast<long long>(v));
    }
    JsonWriter& kv(const std::string& k, bool v) { return key(k).boolean(v); }
    JsonWriter& kv(const std::string& k, const std::string& v) { return key(k).str(v); }
    JsonWriter& kv(const std::string& k, const char* v) { return key(k).str(v); }

    JsonWriter& vec(const std::string& k, const Vec& v) {
        key(k).arr_begin();
        for (int i = 0; i < v.size(); ++i) num(v[i]);
        return arr_end();
    }

    std::string str_out() const { return s_.str(); }

private:
    void open(char c) { lead(); s_ << c; counts_.push_back(0); }
    void close(char c) { counts_.pop_back(); s_ << c; }
    void comma() { if (counts_.back()++ > 0) s_ << ','; }
    void lead() {
        if (pending_value_) { pending_value_ = false; return; }
        comma();
    }
    static std::string escape(const std::string& in) {
        std::string out;
        for (char c : in) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out;
    }

    std::ostringstream s_;
    std::vector<int> counts_;
    bool pending_value_ = false;
};

// ---------------------------------------------------------------------------
// CSV writer
// ---------------------------------------------------------------------------

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (i) s_ << ',';
            s_ << header_[i];
        }
        s_ << '\n';
    }
    void row(const std::vector<double>& values) {
        if (values.size() != header_.size())
            throw std::invalid_argument("CSV row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s_ << ',';
            s_ << format_number(values[i]);
        }
        s_ << '\n';
    }
    std::string str_out() const { return s_.str(); }

private:
    std::vector<std::string> header_;
    std::ostringstream s_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Problem document
// ---------------------------------------------------------------------------

// The potential keeps a pointer to its polytope, so the document owns the
// polytope behind a heap allocation with a stable address.
struct ProblemDocument {
    std::shared_ptr<const Polytope> polytope_ptr;
    BundleData bundle;
    std::shared_ptr<const Potential> potential_ptr;
    int resolution = 64;
    int boundary_resolution = 64;
    std::optional<AffineDensity> A; // unset: calibrate
    // stability options
    int samples = 1000;
    std::uint64_t seed = 1;
    double slope_box = 1.0;
    std::optional<Vec> p0;
    // verify options
    VerifyConfig verify;
    std::string lemma = "consistency";
    std::vector<double> C1_candidates{0.5, 1.0, 2.0, 4.0, 8.0};
    int face_k = 0;

    const Polytope& polytope() const { return *polytope_ptr; }
    const Potential& potential() const { return *potential_ptr; }
    Vec p0_or_barycenter() const { return p0 ? *p0 : polytope().barycenter(); }
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* field,
                                     const std::string& where) {
    if (!j.contains(field))
        throw ParseError("missing field '" + std::string(field) + "' at " + where);
    return j.at(field);
}

inline Vec parse_vec(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError("expected an array at " + where);
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError("expected numbers at " + where);
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

} // namespace detail

inline Polytope parse_polytope(const nlohmann::json& doc) {
    const auto& jdim = detail::require(doc, "dimension", "/");
    if (!jdim.is_number_integer() || jdim.get<int>() < 1)
        throw ParseError("'dimension' must be a positive integer at /dimension");
    const int n = jdim.get<int>();
    const auto& jf = detail::require(doc, "facets", "/");
    if (!jf.is_array() || jf.empty()) throw ParseError("'facets' must be a nonempty array");
    std::vector<Facet> facets;
    for (std::size_t k = 0; k < jf.size(); ++k) {
        const std::string where = "/facets/" + std::to_string(k);
        const auto& jn = detail::require(jf[k], "normal", where);
        if (!jn.is_array() || static_cast<int>(jn.size()) != n)
            throw ParseError("facet normal must be an integer array of length " +
                             std::to_string(n) + " at " + where);
        Facet f;
        for (const auto& c : jn) {
            if (!c.is_number_integer())
                throw ParseError("facet normal entries must be integers at " + where);
            f.normal.push_back(c.get<long long>());
        }
        if (!is_primitive(f.normal))
            throw ParseError("facet conormal is not primitive at " + where);
        const auto& jo = detail::require(jf[k], "offset", where);
        if (!jo.is_number()) throw ParseError("facet offset must be a number at " + where);
        try {
            f.offset = Rational::from_double(jo.get<double>());
        } catch (const std::exception& e) {
            throw ParseError(std::string(e.what()) + " at " + where);
        }
        facets.push_back(std::move(f));
    }
    return Polytope::from_facets(n, std::move(facets));
}

inline BundleData parse_bundle(const nlohmann::json& doc, int dim) {
    if (!doc.contains("bundle")) return BundleData{};
    const auto& jb = doc.at("bundle");
    std::vector<BundleRoot> roots;
    if (jb.contains("roots")) {
        const auto& jr = jb.at("roots");
        if (!jr.is_array()) throw ParseError("'bundle.roots' must be an array");
        for (std::size_t a = 0; a < jr.size(); ++a) {
            const std::string where = "/bundle/roots/" + std::to_string(a);
            BundleRoot r;
            const auto& jm = detail::require(jr[a], "M", where);
            if (!jm.is_array()) throw ParseError("root 'M' must be an array at " + where);
            for (const auto& c : jm) {
                if (!c.is_number_integer())
                    throw ParseError("root weights must be integers at " + where);
                r.M.push_back(c.get<long long>());
            }
            if (jr[a].contains("multiplicity")) r.multiplicity = jr[a].at("multiplicity").get<int>();
            roots.push_back(std::move(r));
        }
    }
    Vec sigma = Vec::Zero(dim);
    if (jb.contains("sigma")) sigma = detail::parse_vec(jb.at("sigma"), "/bundle/sigma");
    return BundleData(dim, std::move(roots), std::move(sigma));
}

inline Potential parse_potential(const nlohmann::json& doc, const Polytope& P) {
    bool guillemin = true;
    std::vector<Monomial> terms;
    std::optional<Vec> normalize_at;
    if (doc.contains("potential")) {
        const auto& jp = doc.at("potential");
        if (jp.contains("guillemin")) guillemin = jp.at("guillemin").get<bool>();
        if (jp.contains("polynomial")) {
            const auto& jt = jp.at("polynomial");
            if (!jt.is_array()) throw ParseError("'potential.polynomial' must be an array");
            for (std::size_t t = 0; t < jt.size(); ++t) {
                const std::string where = "/potential/polynomial/" + std::to_string(t);
                Monomial m;
                const auto& je = detail::require(jt[t], "exponents", where);
                for (const auto& e : je) {
                    if (!e.is_number_integer() || e.get<int>() < 0)
                        throw ParseError("exponents must be nonnegative integers at " + where);
                    m.exponents.push_back(e.get<int>());
                }
                m.coeff = detail::require(jt[t], "coeff", where).get<double>();
                terms.push_back(std::move(m));
            }
        }
        if (jp.contains("normalize_at"))
            normalize_at = detail::parse_vec(jp.at("normalize_at"), "/potential/normalize_at");
    }
    Potential u = guillemin ? Potential::guillemin(P) : Potential::zero(P);
    if (!terms.empty()) u = u.with_polynomial(std::move(terms));
    if (normalize_at) u = u.normalized_at(*normalize_at);
    return u;
}

inline ProblemDocument parse_document(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("document is not valid JSON: ") + e.what());
    }
    ProblemDocument out;
    out.polytope_ptr = std::make_shared<const Polytope>(parse_polytope(doc));
    out.bundle = parse_bundle(doc, out.polytope().dim());
    out.potential_ptr =
        std::make_shared<const Potential>(parse_potential(doc, out.polytope()));
    if (doc.contains("grid")) {
        const auto& jg = doc.at("grid");
        if (jg.contains("resolution")) out.resolution = jg.at("resolution").get<int>();
        out.boundary_resolution = out.resolution;
        if (jg.contains("boundary_resolution"))
            out.boundary_resolution = jg.at("boundary_resolution").get<int>();
    } else {
        out.boundary_resolution = out.resolution;
    }
    if (doc.contains("A")) {
        const auto& ja = doc.at("A");
        if (ja.is_string() && ja.get<std::string>() == "calibrate") {
            // default
        } else if (ja.is_array()) {
            AffineDensity A;
            Vec c = detail::parse_vec(ja, "/A");
            if (c.size() == 1) {
                A = AffineDensity::constant(out.polytope().dim(), c[0]);
            } else if (c.size() == out.polytope().dim() + 1) {
                A.coeffs = c;
            } else {
                throw ParseError("'A' must have 1 or dimension+1 coefficients at /A");
            }
            out.A = A;
        } else {
            throw ParseError("'A' must be \"calibrate\" or a coefficient array at /A");
        }
    }
    if (doc.contains("stability")) {
        const auto& js = doc.at("stability");
        if (js.contains("samples")) out.samples = js.at("samples").get<int>();
        if (js.contains("seed")) out.seed = js.at("seed").get<std::uint64_t>();
        if (js.contains("slope_box")) out.slope_box = js.at("slope_box").get<double>();
        if (js.contains("p0")) out.p0 = detail::parse_vec(js.at("p0"), "/stability/p0");
    }
    if (doc.contains("verify")) {
        const auto& jv = doc.at("verify");
        if (jv.contains("lemma")) out.lemma = jv.at("lemma").get<std::string>();
        if (jv.contains("N_2")) out.verify.N_2 = jv.at("N_2").get<double>();
        if (jv.contains("N_1")) out.verify.N_1 = jv.at("N_1").get<double>();
        if (jv.contains("exponent_a")) out.verify.exponent_a = jv.at("exponent_a").get<double>();
        if (jv.contains("face_k")) out.face_k = jv.at("face_k").get<int>();
        if (jv.contains("C1_candidates")) {
            out.C1_candidates.clear();
            for (const auto& c : jv.at("C1_candidates"))
                out.C1_candidates.push_back(c.get<double>());
        }
        if (jv.contains("resolutions")) {
            out.verify.resolutions.clear();
            for (const auto& r : jv.at("resolutions"))
                out.verify.resolutions.push_back(r.get<int>());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline std::string to_json(const ValidationReport& rep, const PositionReport* pos) {
    JsonWriter w;
    w.obj_begin();
    w.kv("delzant", rep.delzant);
    w.kv("primitive", rep.primitive);
    w.key("vertices").arr_begin();
    for (const auto& v : rep.vertices) {
        w.obj_begin();
        w.kv("vertex", v.vertex);
        w.kv("active_facets", v.active_facets);
        w.kv("determinant", static_cast<long long>(v.determinant));
        w.kv("ok", v.ok);
        w.obj_end();
    }
    w.arr_end();
    if (pos) {
        w.key("position").obj_begin();
        w.kv("total", pos->total);
        w.kv("threshold", pos->threshold);
        w.kv("diameter", pos->diameter);
        w.kv("pass", pos->pass);
        w.key("per_root").arr_begin();
        for (const auto& r : pos->per_root) {
            w.obj_begin();
            w.kv("root", r.root);
            w.kv("min_D_alpha", r.min_D_alpha);
            w.kv("ratio", r.ratio);
            w.obj_end();
        }
        w.arr_end();
        w.obj_end();
    }
    w.obj_end();
    return w.str_out();
}

inline std::string to_json(const FunctionalReport& rep) {
    JsonWriter w;
    w.obj_begin();
    w.kv("L_A", rep.L_A);
    w.kv("F_A", rep.F_A);
    w.kv("entropy", rep.entropy);
    w.kv("boundary", rep.boundary);
    w.kv("interior", rep.interior);
    w.kv("resolution", rep.resolution);
    w.obj_end();
    return w.str_out();
}

inline std::string to_json(const StabilityReport& rep) {
    JsonWriter w;
    w.obj_begin();
    w.kv("seed", rep.seed);
    w.kv("samples", rep.samples);
    w.kv("excluded_degenerate", rep.excluded);
    w.kv("lambda_hat", rep.lambda_hat);
    w.kv("negative_found", rep.negative_found);
    w.kv("witness_ratio", rep.witness_ratio);
    w.vec("witness_H", rep.witness_H);
    w.vec("witness_q", rep.witness_q);
    w.vec("p0", rep.p0);
    w.kv("resolution", rep.resolution);
    w.obj_end();
    return w.str_out();
}

inline void inequality_body(JsonWriter& w, const InequalityReport& rep) {
    w.kv("name", rep.name);
    w.kv("pass", rep.pass);
    w.kv("hypothesis_failed", rep.hypothesis_failed);
    if (std::isfinite(rep.min_margin)) w.kv("min_margin", rep.min_margin);
    else w.key("min_margin").null();
    if (rep.argmin.size()) w.vec("argmin", rep.argmin);
    if (!rep.convergence.empty()) {
        w.key("convergence").arr_begin();
        for (const auto& row : rep.convergence) {
            w.obj_begin();
            w.kv("resolution", row.resolution);
            w.kv("h", row.h);
            w.kv("value", row.value);
            w.obj_end();
        }
        w.arr_end();
        w.kv("observed_order", rep.observed_order);
    }
    if (!rep.notes.empty()) {
        w.key("notes").obj_begin();
        for (const auto& [k, v] : rep.notes) w.kv(k, v);
        w.obj_end();
    }
    if (!rep.messages.empty()) {
        w.key("messages").arr_begin();
        for (const auto& m : rep.messages) w.str(m);
        w.arr_end();
    }
}

inline std::string to_json(const InequalityReport& rep) {
    JsonWriter w;
    w.obj_begin();
    inequality_body(w, rep);
    w.obj_end();
    return w.str_out();
}

inline std::string to_json(const std::vector<InequalityReport>& reps) {
    JsonWriter w;
    w.arr_begin();
    for (const auto& r : reps) {
        w.obj_begin();
        inequality_body(w, r);
        w.obj_end();
    }
    w.arr_end();
    return w.str_out();
}

inline std::string to_json(const AffineDensity& A, double residual) {
    JsonWriter w;
    w.obj_begin();
    w.vec("A", A.coeffs);
    w.kv("affine_vanishing_residual", residual);
    w.obj_end();
    return w.str_out();
}

} // namespace abreu_forge

#endif
