#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "qforge/qforge.hpp"

using namespace qforge;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InternalInconsistency;
}

PipelineOptions bound(long n)
{
    PipelineOptions o;
    o.n_bound = n;
    return o;
}

bool all_ok(const std::vector<CheckResult>& checks)
{
    for (const auto& c : checks)
        if (!c.ok) {
            ADD_FAILURE() << c.check << ": " << c.detail;
            return false;
        }
    return !checks.empty();
}

} // namespace

TEST(Json, ExactNumbers)
{
    const Int big("123456789012345678901234567890");
    EXPECT_TRUE(to_json(big).is_string());
    EXPECT_TRUE(to_json(Int(-(1L << 52))).is_number_integer());
    EXPECT_TRUE(to_json(Int(1L << 53)).is_string());
    EXPECT_EQ(int_from_json(to_json(big)), big);
    EXPECT_EQ(to_json(Rat(3, 6)), "1/2");
    EXPECT_EQ(rat_from_json(json("-4/6")), Rat(-2, 3));
    EXPECT_EQ(rat_from_json(json(7)), Rat(7));
    EXPECT_EQ(code_of([] { int_from_json(json("12x")); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { rat_from_json(json(1.5)); }), ErrorCode::ParseError);
}

TEST(Json, LatticeRoundTrip)
{
    QuadLattice l(IntMatrix{{2, 1}, {1, -4}}, "t");
    QuadLattice r = lattice_from_json(lattice_to_json(l));
    EXPECT_EQ(r, l);
    EXPECT_EQ(r.label(), "t");
    EXPECT_EQ(code_of([] { lattice_from_json(json::parse(R"({"gram": [[1, 2], [3, 4]]})")); }), ErrorCode::BadInput);
    EXPECT_EQ(code_of([] { lattice_from_json(json::parse(R"({"gram": [[1, 2], [3]]})")); }),
              ErrorCode::DimensionMismatch);
}

TEST(Catalog, Expressions)
{
    const Catalog c = Catalog::load();
    EXPECT_EQ(c.lattice("U").gram(), (IntMatrix{{0, 1}, {1, 0}}));
    const QuadLattice k3 = c.lattice("K3");
    EXPECT_EQ(k3.rank(), 22u);
    EXPECT_EQ(signature(k3), (Signature{3, 19}));
    EXPECT_EQ(abs(k3.determinant()), 1);
    EXPECT_TRUE(k3.even());
    EXPECT_EQ(determinant(c.lattice("E8").gram()), 1);
    EXPECT_EQ(c.lattice("E8(-1)").gram(), c.lattice("E8(-1)").gram());
    EXPECT_EQ(c.lattice("E8(-1)"), scaled(c.lattice("E8"), Int(-1)));

    const QuadLattice u22 = c.lattice("U+U+<2>");
    EXPECT_EQ(u22.rank(), 5u);
    EXPECT_EQ(u22.gram()(4, 4), 2);
    EXPECT_EQ(u22.label(), "U+U+<2>");

    const QuadLattice d = c.lattice("diag(1,1,1,-1^11)");
    EXPECT_EQ(d.rank(), 14u);
    EXPECT_EQ(signature(d), (Signature{3, 11}));
    EXPECT_EQ(c.lattice("<3, -5>").gram(), (IntMatrix{{3, 0}, {0, -5}}));
    EXPECT_EQ(c.lattice("U^2").rank(), 4u);
    EXPECT_EQ(c.lattice("A2(-3)").gram(), (IntMatrix{{-6, 3}, {3, -6}}));

    EXPECT_EQ(code_of([&] { c.lattice("Q7"); }), ErrorCode::BadInput);
    EXPECT_EQ(code_of([&] { c.lattice("diag(1,2"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([&] { c.lattice("<1,x>"); }), ErrorCode::ParseError);
}

TEST(Catalog, EnvironmentOverride)
{
    const auto path = std::filesystem::temp_directory_path() / "qforge_test_catalog.json";
    {
        std::ofstream out(path);
        out << R"({"W": {"gram": [[2, 1], [1, 2]]}, "WW": {"expr": "W+W"}})";
    }
    ::setenv("QFORGE_CATALOG", path.c_str(), 1);
    EXPECT_EQ(load_lattice("catalog:WW").rank(), 4u);
    EXPECT_EQ(code_of([] { load_lattice("catalog:U"); }), ErrorCode::BadInput);
    ::unsetenv("QFORGE_CATALOG");
    EXPECT_EQ(load_lattice("catalog:U").rank(), 2u);
    std::filesystem::remove(path);
}

TEST(Commands, Invariants)
{
    json j = cmd_invariants(load_lattice("catalog:U"));
    EXPECT_EQ(j["invariants"]["signature"], json::array({1, 1}));
    EXPECT_EQ(j["invariants"]["discriminant"], -1);
    EXPECT_TRUE(j["invariants"]["epsilon_minus"].empty());
    EXPECT_TRUE(all_ok(verify_report(j)));
}

TEST(Commands, ClassifyCertifyExtend)
{
    json c = cmd_classify(QuadLattice::diagonal(IntVec{1, -2}), IntMatrix{{3, 4}, {2, 3}});
    EXPECT_EQ(c["classification"]["tag"], "Hyperbolic");
    EXPECT_EQ(c["classification"]["char_poly"], "x^2 - 6x + 1");
    EXPECT_TRUE(all_ok(verify_report(c)));

    json k = cmd_certify({5, 30, -10, 6, -2, 0, 0}, bound(4));
    EXPECT_EQ(k["result"], "valid");
    EXPECT_TRUE(all_ok(verify_report(k)));
    EXPECT_EQ(cmd_certify({5, 30, -10, 6, -2, 0, 0}, bound(5))["result"], "invalid");

    json e = cmd_extend(QuadLattice::diagonal(IntVec{2}), [] {
        PipelineOptions o;
        o.target = Signature{4, 0};
        return o;
    }());
    EXPECT_EQ(e["extension"]["entries"], json::array({1, 1, 2}));
    EXPECT_TRUE(all_ok(verify_report(e)));
}

TEST(Commands, EquivGlueSaturateIsotropic)
{
    json q = cmd_equiv(QuadLattice::diagonal(IntVec{2, 1, 1, 2}), QuadLattice::diagonal(IntVec{1, 1, 1, 1}));
    EXPECT_TRUE(q["equivalent"].get<bool>());
    EXPECT_FALSE(q["isometry"].is_null());
    EXPECT_TRUE(all_ok(verify_report(q)));
    EXPECT_FALSE(cmd_equiv(QuadLattice::diagonal(IntVec{1, 1}), QuadLattice::diagonal(IntVec{1, 3}))["equivalent"]
                     .get<bool>());

    PipelineOptions o;
    o.target = Signature{3, 3};
    json g = cmd_glue(QuadLattice::diagonal(IntVec{5, -5}), o);
    EXPECT_TRUE(all_ok(verify_report(g)));
    // A tampered glue vector must be rejected.
    json bad = g;
    bad["glue"]["glue_generators"][0][0] = "2/5";
    for (const auto& r : verify_report(bad))
        EXPECT_FALSE(r.ok);

    json s = cmd_saturate(QuadLattice::diagonal(IntVec{1, 1, -1}), {IntVec{2, 0, 2}});
    EXPECT_EQ(s["saturation_index"], 2);
    EXPECT_TRUE(all_ok(verify_report(s)));

    json v = cmd_isotropic(load_lattice("catalog:U+U+<2>"));
    EXPECT_TRUE(all_ok(verify_report(v)));
}

TEST(Commands, Hyperbolic)
{
    const QuadLattice l = load_lattice("catalog:U+U+<2>");
    json a = cmd_hyperbolic(l, bound(4));
    EXPECT_EQ(a["sublattice"]["gram"], json::parse("[[20, 0], [0, -10]]"));
    EXPECT_EQ(a["isometry"]["classification"]["tag"], "Hyperbolic");
    EXPECT_EQ(a["certificate"]["p"], 5);
    EXPECT_TRUE(all_ok(verify_report(a)));
    json b = cmd_hyperbolic(l, bound(4));
    EXPECT_EQ(without_timings(a).dump(), without_timings(b).dump());

    json tampered = a;
    tampered["certificate"]["beta1"] = 5;
    bool cert_ok = true;
    for (const auto& r : verify_report(tampered, "certificate"))
        cert_ok = r.ok;
    EXPECT_FALSE(cert_ok);

    EXPECT_EQ(code_of([] { cmd_hyperbolic(QuadLattice::diagonal(IntVec{1, -1, 1, -1}), bound(2)); }),
              ErrorCode::PreconditionViolation);
    EXPECT_EQ(code_of([&] { cmd_hyperbolic(l, bound(0)); }), ErrorCode::PreconditionViolation);
}

TEST(Commands, Parabolic)
{
    const QuadLattice l = load_lattice("catalog:diag(1,1,1,-1^11)");
    json a = cmd_parabolic(l, bound(3));
    EXPECT_EQ(a["level"], "explicit");
    EXPECT_EQ(a["sublattice"]["signature"], json::array({1, 4}));
    EXPECT_EQ(a["isometry"]["classification"]["tag"], "Parabolic");
    EXPECT_TRUE(all_ok(verify_report(a)));
    json b = cmd_parabolic(l, bound(3));
    EXPECT_EQ(without_timings(a).dump(), without_timings(b).dump());

    EXPECT_EQ(code_of([] { cmd_parabolic(load_lattice("catalog:diag(1,1,1,-1^10)"), bound(3)); }),
              ErrorCode::PreconditionViolation);
}
