#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glue.hpp"
#include "io.hpp"
#include "isom.hpp"

#ifndef QFORGE_VERSION
#define QFORGE_VERSION "0.0.0"
#endif

namespace qforge {

struct PipelineOptions {
    Int n_bound = 1;
    std::optional<Signature> target;
    std::optional<long> height_bound;    // oracle enumeration height
    std::optional<std::uint64_t> budget; // vector search budget
    std::uint64_t seed = 0;
    std::string report_path = "report.json";
};

// ---------------------------------------------------------------------------
// Serialization of results.

inline json to_json(const Signature& s) { return json::array({s.pos, s.neg}); }

inline Signature signature_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2)
        fail(ErrorCode::ParseError, "signature must be [pos, neg]");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

inline json to_json(const InvariantTriple& t)
{
    json places = json::array();
    for (const auto& [p, e] : t.epsilons)
        places.push_back(p.str());
    return {{"signature", to_json(t.signature)}, {"discriminant", to_json(t.disc_class)}, {"epsilon_minus", places}};
}

inline json to_json(const SmallnessCertificate& c)
{
    return {{"p", to_json(c.p)},         {"alpha1", to_json(c.alpha1)}, {"alpha2", to_json(c.alpha2)},
            {"beta1", to_json(c.beta1)}, {"beta2", to_json(c.beta2)},   {"n1", c.n1},
            {"n2", c.n2}};
}

inline SmallnessCertificate certificate_from_json(const json& j)
{
    try {
        return {int_from_json(j.at("p")),     int_from_json(j.at("alpha1")), int_from_json(j.at("alpha2")),
                int_from_json(j.at("beta1")), int_from_json(j.at("beta2")),  j.at("n1").get<unsigned long>(),
                j.at("n2").get<unsigned long>()};
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("certificate: ") + e.what());
    }
}

inline json to_json(const OracleSummary& o)
{
    json j{{"ran", o.ran}, {"height", o.height}};
    j["min_nonzero_abs"] = o.min_nonzero_abs ? json(*o.min_nonzero_abs) : json(nullptr);
    j["all_divisible_by_p"] = o.all_divisible;
    return j;
}

inline json to_json(const IsomClass& c)
{
    json j{{"tag", to_string(c.tag)},
           {"char_poly", poly_str(c.char_poly)},
           {"char_poly_coefficients", to_json(c.char_poly)},
           {"cyclotomic_orders", c.cyclotomic_orders},
           {"residual", poly_str(c.residual)},
           {"preserves_cone", c.preserves_cone}};
    if (c.tag == IsomTag::Elliptic)
        j["order"] = c.order;
    if (c.tag == IsomTag::Parabolic) {
        j["unipotency_power"] = c.unipotency_power;
        j["fixed_isotropic"] = to_json(c.fixed_isotropic);
    }
    return j;
}

inline json to_json(const Sublattice& s)
{
    const QuadLattice l = s.lattice();
    return {{"basis", to_json(s.basis)},
            {"gram", to_json(l.gram())},
            {"signature", l.degenerate() ? json(nullptr) : to_json(signature(l))}};
}

inline json to_json(const ExtensionResult& e)
{
    return {{"target", to_json(e.target)},
            {"entries", json::array({to_json(e.b0), to_json(e.b1), to_json(e.b2)})},
            {"method", e.method},
            {"h_diagonal", to_json(e.h_diagonal)},
            {"augmented_invariants", to_json(e.augmented)},
            {"standard_invariants", to_json(e.standard)}};
}

inline json to_json(const GlueData& g)
{
    json corr = json::array();
    for (const auto& c : g.anti_isometry)
        corr.push_back({{"lambda_index", c.lambda_index},
                        {"prime_index", c.prime_index},
                        {"prime", to_json(c.prime)},
                        {"unit", to_json(c.unit)}});
    return {{"lambda", to_json(g.lambda.gram())},
            {"lambda_prime", to_json(g.lambda_prime.gram())},
            {"overlattice", to_json(g.overlattice.gram())},
            {"overlattice_signature", to_json(signature(g.overlattice))},
            {"lambda_embedding", to_json(g.lambda_embedding)},
            {"prime_embedding", to_json(g.prime_embedding)},
            {"anti_isometry", corr},
            {"glue_generators", to_json(g.glue_generators)}};
}

inline GlueData glue_from_json(const json& j)
{
    GlueData g;
    g.lambda = QuadLattice(int_matrix_from_json(j.at("lambda")));
    g.lambda_prime = QuadLattice(int_matrix_from_json(j.at("lambda_prime")));
    g.overlattice = QuadLattice(int_matrix_from_json(j.at("overlattice")));
    g.lambda_embedding = int_matrix_from_json(j.at("lambda_embedding"));
    g.prime_embedding = int_matrix_from_json(j.at("prime_embedding"));
    for (const auto& c : j.at("anti_isometry"))
        g.anti_isometry.push_back({c.at("lambda_index").get<std::size_t>(), c.at("prime_index").get<std::size_t>(),
                                   int_from_json(c.at("prime")), int_from_json(c.at("unit"))});
    for (const auto& v : j.at("glue_generators")) {
        RatVec x;
        for (const auto& e : v)
            x.push_back(rat_from_json(e));
        g.glue_generators.push_back(x);
    }
    return g;
}

// 64-bit FNV-1a of the canonical Gram dump, as hex.
inline std::string fingerprint(const IntMatrix& g)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : to_json(g).dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline json input_block(const QuadLattice& l)
{
    return {{"label", l.label()}, {"rank", l.rank()}, {"fingerprint", fingerprint(l.gram())}, {"gram", to_json(l.gram())}};
}

inline json header(const std::string& command)
{
    return {{"tool", "qforge"}, {"version", QFORGE_VERSION}, {"command", command}};
}

inline json check_entry(const std::string& name, const std::string& claim, const PipelineOptions& o)
{
    return {{"check", name},
            {"claim", claim},
            {"command", "qforge verify --report " + o.report_path + " --check " + name}};
}

inline json timings(Clock::time_point start)
{
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    return {{"total_ms", ms}};
}

inline void require_bound(const Int& n)
{
    if (n < 1)
        fail(ErrorCode::PreconditionViolation, "the bound N must be at least 1");
}

} // namespace detail

// ---------------------------------------------------------------------------
// End-to-end commands.

inline json cmd_hyperbolic(const QuadLattice& l, const PipelineOptions& o)
{
    const auto start = detail::Clock::now();
    detail::require_bound(o.n_bound);
    if (l.rank() < 5)
        fail(ErrorCode::PreconditionViolation, "hyperbolic mode needs rank at least 5");
    if (l.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    if (!indefinite(l))
        fail(ErrorCode::PreconditionViolation, "lattice must be indefinite");

    ForgeOptions fo;
    if (o.height_bound)
        fo.oracle_height = *o.height_bound;
    if (o.budget)
        fo.budget = *o.budget;
    const Rank2Result r = find_rank2_avoiding(l, o.n_bound, fo);
    const Isometry g = find_hyperbolic(r.lattice.lattice());
    const IsomClass c = classify(g);

    json j = detail::header("hyperbolic");
    j["input"] = detail::input_block(l);
    j["n_bound"] = to_json(o.n_bound);
    j["seed"] = o.seed;
    j["mode"] = "hyperbolic";
    j["sublattice"] = to_json(r.lattice);
    j["sublattice"]["index_before_saturation"] = to_json(r.index_before_saturation);
    j["sublattice"]["construction"] = {{"isotropic", to_json(r.v)},
                                      {"isotropic_partner", to_json(r.v2)},
                                      {"multipliers", json::array({to_json(r.a), to_json(r.b)})},
                                      {"v1", to_json(r.v1)},
                                      {"w", to_json(r.w)}};
    j["certificate"] = to_json(r.certificate);
    j["isometry"] = {{"matrix", to_json(g.matrix)}, {"classification", to_json(c)}};
    j["oracle"] = to_json(r.oracle);
    j["verification"] = json::array(
        {detail::check_entry("sublattice", "basis is primitive of signature (1,1) with the stated Gram matrix", o),
         detail::check_entry("certificate", "certificate is valid for the bound", o),
         detail::check_entry("isometry", "matrix preserves the sublattice form and is hyperbolic", o),
         detail::check_entry("oracle", "enumeration matches the recorded minimum and divisibility", o)});
    j["timings"] = detail::timings(start);
    return j;
}

inline json cmd_parabolic(const QuadLattice& l, const PipelineOptions& o)
{
    const auto start = detail::Clock::now();
    detail::require_bound(o.n_bound);
    if (l.rank() < 14)
        fail(ErrorCode::PreconditionViolation, "parabolic mode needs rank at least 14");
    if (l.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    const Signature s = signature(l);
    if (s.pos != 3)
        fail(ErrorCode::PreconditionViolation, "parabolic mode needs signature (3, b2 - 3)");

    EmbedOptions eo;
    if (o.height_bound)
        eo.oracle_height = *o.height_bound;
    if (o.budget)
        eo.isometry_budget = *o.budget;
    const EmbeddingReport e = embed_pipeline(l, o.n_bound, eo);

    json j = detail::header("parabolic");
    j["input"] = detail::input_block(l);
    j["n_bound"] = to_json(o.n_bound);
    j["seed"] = o.seed;
    j["mode"] = "parabolic";
    j["extension"] = to_json(e.extension);
    json checks = json::array({detail::check_entry("extension", "augmented form has the standard invariants", o)});
    if (!e.explicit_embedding) {
        j["level"] = "certificate";
        j["note"] = e.note;
        j["verification"] = checks;
        j["timings"] = detail::timings(start);
        return j;
    }
    j["level"] = "explicit";
    j["embedding"] = {{"matrix", to_json(e.embedding)},
                      {"index_d", to_json(e.index_d)},
                      {"d2n", to_json(e.d2n)},
                      {"prime_p", to_json(e.prime_p)}};
    j["glue"] = to_json(*e.glue);
    j["lambda_in_l"] = to_json(e.lambda_in_l);
    j["sublattice"] = to_json(*e.lambda_in_h);
    j["sublattice"]["saturation_index"] = to_json(e.saturation_index);

    const Isometry g = find_parabolic(e.lambda_in_h->lattice(), kDefaultSearchHeight,
                                      o.budget.value_or(kDefaultSearchBudget));
    j["isometry"] = {{"matrix", to_json(g.matrix)}, {"classification", to_json(classify(g))}};
    j["oracle"] = to_json(e.oracle);
    checks.push_back(detail::check_entry("embedding", "embedding is isometric with index d and P > d^2 N prime", o));
    checks.push_back(detail::check_entry("glue", "overlattice is odd unimodular and lambda is primitive", o));
    checks.push_back(
        detail::check_entry("sublattice", "sublattice is primitive in H with the stated signature and index <= d", o));
    checks.push_back(detail::check_entry("isometry", "matrix preserves the sublattice form and is parabolic", o));
    checks.push_back(detail::check_entry("oracle", "enumeration finds no nonzero value below N", o));
    j["verification"] = checks;
    j["timings"] = detail::timings(start);
    return j;
}

// ---------------------------------------------------------------------------
// Thin commands.

inline json cmd_invariants(const QuadLattice& l, const PipelineOptions& o = {})
{
    if (l.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    const DiscriminantGroup dg = discriminant_group(l);
    json j = detail::header("invariants");
    j["input"] = detail::input_block(l);
    j["invariants"] = to_json(invariant_triple(l));
    j["determinant"] = to_json(l.determinant());
    j["even"] = l.even();
    j["discriminant_group"] = to_json(dg.orders);
    return j;
}

inline json cmd_equiv(const QuadLattice& a, const QuadLattice& b, const PipelineOptions& o = {})
{
    json j = detail::header("equiv");
    j["input"] = detail::input_block(a);
    j["other"] = detail::input_block(b);
    if (a.rank() != b.rank()) {
        j["equivalent"] = false;
        j["reason"] = "ranks differ";
        return j;
    }
    const bool eq = rationally_equivalent(a, b);
    j["equivalent"] = eq;
    j["invariants"] = json::array({to_json(invariant_triple(a)), to_json(invariant_triple(b))});
    if (eq) {
        try {
            j["isometry"] = to_json(explicit_rational_isometry(a, b, o.height_bound.value_or(kIsometrySearchHeight),
                                                               o.budget.value_or(kIsometrySearchBudget)));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SearchExhausted && e.code() != ErrorCode::BudgetExceeded)
                throw;
            j["isometry"] = nullptr;
            j["note"] = e.what();
        }
    }
    return j;
}

inline json cmd_classify(const QuadLattice& l, const IntMatrix& m, const PipelineOptions& o = {})
{
    const Isometry g = make_isometry(m, l);
    json j = detail::header("classify");
    j["input"] = detail::input_block(l);
    j["matrix"] = to_json(m);
    j["classification"] = to_json(classify(g));
    return j;
}

inline json cmd_saturate(const QuadLattice& l, const std::vector<IntVec>& vectors, const PipelineOptions& o = {})
{
    const Sublattice s = make_sublattice(l, vectors);
    const Sublattice sat = saturate(s);
    json j = detail::header("saturate");
    j["input"] = detail::input_block(l);
    j["vectors"] = to_json(vectors);
    j["saturation_index"] = to_json(saturation_index(s));
    j["saturation"] = to_json(sat);
    return j;
}

inline json cmd_extend(const QuadLattice& l, const PipelineOptions& o = {})
{
    const Signature s = signature(l);
    const Signature target = o.target.value_or(Signature{s.pos, s.neg + 3});
    json j = detail::header("extend");
    j["input"] = detail::input_block(l);
    j["extension"] = to_json(extend_to_standard(l, target));
    return j;
}

inline json cmd_glue(const QuadLattice& lambda, const PipelineOptions& o)
{
    if (!o.target)
        fail(ErrorCode::PreconditionViolation, "glue needs --target-signature");
    json j = detail::header("glue");
    j["input"] = detail::input_block(lambda);
    j["target"] = to_json(*o.target);
    j["glue"] = to_json(nikulin_glue(lambda, *o.target));
    return j;
}

inline json cmd_isotropic(const QuadLattice& l, const PipelineOptions& o = {})
{
    const long h = o.height_bound.value_or(kDefaultSearchHeight);
    const std::uint64_t b = o.budget.value_or(kDefaultSearchBudget);
    json j = detail::header("isotropic");
    j["input"] = detail::input_block(l);
    j["height"] = h;
    j["vector"] = to_json(find_isotropic(l, h, b));
    return j;
}

inline json cmd_certify(const SmallnessCertificate& c, const PipelineOptions& o)
{
    const CertificateCheck r = verify_certificate(c, o.n_bound);
    json j = detail::header("certify");
    j["certificate"] = to_json(c);
    j["n_bound"] = to_json(o.n_bound);
    j["result"] = r.valid ? "valid" : "invalid";
    if (!r.valid)
        j["reason"] = r.reason;
    return j;
}

// ---------------------------------------------------------------------------
// Report verification from the report content alone.

struct CheckResult {
    std::string check;
    bool ok = false;
    std::string detail;
};

namespace detail {

inline std::vector<IntVec> vectors_from_json(const json& j)
{
    std::vector<IntVec> out;
    for (const auto& v : j)
        out.push_back(int_vec_from_json(v));
    return out;
}

inline CheckResult run_check(const std::string& name, const std::function<std::string()>& body)
{
    try {
        const std::string problem = body();
        return {name, problem.empty(), problem.empty() ? "ok" : problem};
    } catch (const std::exception& e) {
        return {name, false, e.what()};
    }
}

inline std::string check_oracle(const json& oracle, const QuadLattice& l, const Int& bound, std::optional<Int> p)
{
    if (!oracle.at("ran").get<bool>())
        return {};
    const long h = oracle.at("height").get<long>();
    const ValueTable t = enumerate_values(l, h);
    const auto m = t.min_nonzero_abs();
    const json& rec = oracle.at("min_nonzero_abs");
    if (rec.is_null() != !m.has_value() || (m && rec.get<std::int64_t>() != *m))
        return "recorded minimum differs from the enumeration";
    if (!bound.fits_slong_p())
        return "bound out of range";
    if (!t.small_values(bound.get_si()).empty())
        return "a nonzero value below the bound appears";
    if (p && oracle.at("all_divisible_by_p").get<bool>() != t.all_divisible_by(p->get_si()))
        return "divisibility flag differs from the enumeration";
    return {};
}

} // namespace detail

inline std::vector<CheckResult> verify_report(const json& report, const std::string& only = {})
{
    std::vector<CheckResult> out;
    auto want = [&](const std::string& name) { return only.empty() || only == name; };
    const std::string command = report.at("command").get<std::string>();
    const QuadLattice input = report.contains("input") ? lattice_from_json(report.at("input")) : QuadLattice();

    if (command == "hyperbolic" || command == "parabolic") {
        const Int bound = int_from_json(report.at("n_bound"));
        const bool explicit_level = command == "hyperbolic" || report.value("level", "") == "explicit";
        std::optional<Sublattice> sub;
        if (explicit_level)
            sub = make_sublattice(input, detail::vectors_from_json(report.at("sublattice").at("basis")));

        if (command == "parabolic" && want("extension"))
            out.push_back(detail::run_check("extension", [&]() -> std::string {
                const json& e = report.at("extension");
                RatVec d = diagonalize(input).entries;
                for (const auto& b : e.at("entries"))
                    d.emplace_back(int_from_json(b));
                if (!(invariant_triple(d) == standard_invariants(signature_from_json(e.at("target")))))
                    return "augmented invariants differ from the standard form";
                return {};
            }));
        if (command == "parabolic" && explicit_level && want("embedding"))
            out.push_back(detail::run_check("embedding", [&]() -> std::string {
                const json& e = report.at("embedding");
                const RatMatrix m = rat_matrix_from_json(e.at("matrix"));
                const json& ext = report.at("extension");
                const Signature t = signature_from_json(ext.at("target"));
                if (m.transpose() * to_rational(standard_lattice(t).gram()) * m != to_rational(input.gram()))
                    return "embedding does not carry the form of H to the standard form";
                const Int d = embedding_index(m), p = int_from_json(e.at("prime_p"));
                if (d != int_from_json(e.at("index_d")))
                    return "index d differs";
                if (!is_prime(p) || p <= d * d * bound)
                    return "P is not a prime above d^2 N";
                return {};
            }));
        if (command == "parabolic" && explicit_level && want("glue"))
            out.push_back(detail::run_check("glue", [&]() -> std::string {
                const json& g = report.at("glue");
                detail::verify_glue(glue_from_json(g), signature_from_json(g.at("overlattice_signature")));
                return {};
            }));
        if (explicit_level && want("sublattice"))
            out.push_back(detail::run_check("sublattice", [&]() -> std::string {
                if (to_json(sub->gram()) != report.at("sublattice").at("gram"))
                    return "Gram matrix differs";
                if (!is_primitive(*sub))
                    return "basis is not primitive";
                const Signature s = signature(sub->lattice());
                if (command == "hyperbolic" && s != Signature{1, 1})
                    return "signature is not (1,1)";
                if (command == "parabolic") {
                    if (s != Signature{1, input.rank() / 2 - 3})
                        return "signature is not (1, b2/2 - 3)";
                    const RatMatrix m = rat_matrix_from_json(report.at("embedding").at("matrix"));
                    const Int idx = embedding_index(m * to_rational(sub->basis_matrix()));
                    if (idx != int_from_json(report.at("sublattice").at("saturation_index")) ||
                        idx > int_from_json(report.at("embedding").at("index_d")))
                        return "saturation index check failed";
                }
                return {};
            }));
        if (command == "hyperbolic" && want("certificate"))
            out.push_back(detail::run_check("certificate", [&]() -> std::string {
                const SmallnessCertificate c = certificate_from_json(report.at("certificate"));
                CertificateCheck r = verify_certificate(c, bound);
                if (!r.valid)
                    return r.reason;
                const json& k = report.at("sublattice").at("construction");
                if (qvalue(input, int_vec_from_json(k.at("v1"))) != c.alpha1 ||
                    qvalue(input, int_vec_from_json(k.at("w"))) != c.alpha2)
                    return "alpha values differ from q(v1), q(w)";
                return {};
            }));
        if (explicit_level && want("isometry"))
            out.push_back(detail::run_check("isometry", [&]() -> std::string {
                const json& iso = report.at("isometry");
                const IntMatrix m = int_matrix_from_json(iso.at("matrix"));
                const IsomClass c = classify(make_isometry(m, sub->lattice()));
                if (to_json(c) != iso.at("classification"))
                    return "classification differs";
                const IsomTag expect = command == "hyperbolic" ? IsomTag::Hyperbolic : IsomTag::Parabolic;
                if (c.tag != expect)
                    return "unexpected tag " + to_string(c.tag);
                return {};
            }));
        if (explicit_level && want("oracle"))
            out.push_back(detail::run_check("oracle", [&]() -> std::string {
                std::optional<Int> p;
                if (command == "hyperbolic")
                    p = int_from_json(report.at("certificate").at("p"));
                const Int b = command == "hyperbolic" ? *p : bound;
                return detail::check_oracle(report.at("oracle"), sub->lattice(), b, p);
            }));
        return out;
    }

    if (command == "invariants" && want("invariants"))
        out.push_back(detail::run_check("invariants", [&]() -> std::string {
            return to_json(invariant_triple(input)) == report.at("invariants") ? "" : "invariants differ";
        }));
    if (command == "equiv" && want("isometry"))
        out.push_back(detail::run_check("isometry", [&]() -> std::string {
            const QuadLattice other = lattice_from_json(report.at("other"));
            if (report.at("equivalent").get<bool>() != (input.rank() == other.rank() && rationally_equivalent(input, other)))
                return "equivalence flag differs";
            if (!report.contains("isometry") || report.at("isometry").is_null())
                return {};
            const RatMatrix t = rat_matrix_from_json(report.at("isometry"));
            return t.transpose() * to_rational(other.gram()) * t == to_rational(input.gram()) ? "" : "T^t G2 T != G1";
        }));
    if (command == "classify" && want("classification"))
        out.push_back(detail::run_check("classification", [&]() -> std::string {
            const IsomClass c = classify(make_isometry(int_matrix_from_json(report.at("matrix")), input));
            return to_json(c) == report.at("classification") ? "" : "classification differs";
        }));
    if (command == "saturate" && want("saturation"))
        out.push_back(detail::run_check("saturation", [&]() -> std::string {
            const Sublattice s = make_sublattice(input, detail::vectors_from_json(report.at("vectors")));
            const Sublattice sat = make_sublattice(input, detail::vectors_from_json(report.at("saturation").at("basis")));
            if (!is_primitive(sat) || rank_of(IntMatrix::from_rows(sat.basis)) != s.rank())
                return "saturation is not primitive of the right rank";
            if (saturation_index(s) != int_from_json(report.at("saturation_index")))
                return "index differs";
            return {};
        }));
    if (command == "extend" && want("extension"))
        out.push_back(detail::run_check("extension", [&]() -> std::string {
            const json& e = report.at("extension");
            RatVec d = diagonalize(input).entries;
            for (const auto& b : e.at("entries"))
                d.emplace_back(int_from_json(b));
            return invariant_triple(d) == standard_invariants(signature_from_json(e.at("target")))
                       ? ""
                       : "augmented invariants differ";
        }));
    if (command == "glue" && want("glue"))
        out.push_back(detail::run_check("glue", [&]() -> std::string {
            GlueData g = glue_from_json(report.at("glue"));
            if (!(g.lambda == input))
                return "lambda differs from the input";
            detail::verify_glue(g, signature_from_json(report.at("target")));
            return {};
        }));
    if (command == "isotropic" && want("vector"))
        out.push_back(detail::run_check("vector", [&]() -> std::string {
            const IntVec v = int_vec_from_json(report.at("vector"));
            return gcd_of(v) != 0 && qvalue(input, v) == 0 ? "" : "vector is not isotropic";
        }));
    if (command == "certify" && want("certificate"))
        out.push_back(detail::run_check("certificate", [&]() -> std::string {
            const bool valid =
                verify_certificate(certificate_from_json(report.at("certificate")), int_from_json(report.at("n_bound")))
                    .valid;
            return valid == (report.at("result") == "valid") ? "" : "validity differs";
        }));
    return out;
}

inline json checks_to_json(const std::vector<CheckResult>& checks)
{
    json a = json::array();
    bool all = true;
    for (const auto& c : checks) {
        a.push_back({{"check", c.check}, {"ok", c.ok}, {"detail", c.detail}});
        all = all && c.ok;
    }
    return {{"ok", all}, {"checks", a}};
}

// Report without the timings field, for comparisons across runs.
inline json without_timings(json report)
{
    report.erase("timings");
    return report;
}

} // namespace qforge
