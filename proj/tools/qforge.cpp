#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qforge/qforge.hpp"

using namespace qforge;

namespace {

struct Args {
    std::string lattice;
    std::string other;
    std::string matrix;
    std::string vectors;
    std::string certificate;
    std::string report;
    std::string check;
    std::string out;
    std::string target;
    long n_bound = 1;
    std::optional<long> height;
    std::optional<std::uint64_t> budget;
    std::uint64_t seed = 0;
    bool verify = false;
};

// Inline JSON if it looks like JSON, otherwise a file name.
json json_arg(const std::string& s)
{
    if (!s.empty() && (s.front() == '[' || s.front() == '{')) {
        try {
            return json::parse(s);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::ParseError, e.what());
        }
    }
    return read_json_file(s);
}

Signature parse_signature(const std::string& s)
{
    const std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        fail(ErrorCode::ParseError, "signature must be r,s");
    try {
        const long r = std::stol(s.substr(0, comma)), t = std::stol(s.substr(comma + 1));
        if (r < 0 || t < 0)
            fail(ErrorCode::ParseError, "signature entries must be non-negative");
        return {static_cast<std::size_t>(r), static_cast<std::size_t>(t)};
    } catch (const std::logic_error&) {
        fail(ErrorCode::ParseError, "signature must be r,s");
    }
}

PipelineOptions options(const Args& a)
{
    PipelineOptions o;
    o.n_bound = a.n_bound;
    if (!a.target.empty())
        o.target = parse_signature(a.target);
    o.height_bound = a.height;
    o.budget = a.budget;
    o.seed = a.seed;
    if (!a.out.empty())
        o.report_path = a.out;
    return o;
}

QuadLattice require_lattice(const Args& a)
{
    if (a.lattice.empty())
        fail(ErrorCode::PreconditionViolation, "--lattice is required");
    return load_lattice(a.lattice);
}

int emit(const json& report, const Args& a)
{
    if (a.out.empty())
        std::cout << format_json(report) << '\n';
    else
        write_json_file(a.out, report);
    return 0;
}

int run(const std::string& command, const Args& a)
{
    const PipelineOptions o = options(a);
    if (command == "verify") {
        if (a.report.empty())
            fail(ErrorCode::PreconditionViolation, "--report is required");
        const json result = checks_to_json(verify_report(read_json_file(a.report), a.check));
        std::cout << format_json(result) << '\n';
        return result.at("ok").get<bool>() ? 0 : 4;
    }

    json report;
    if (command == "hyperbolic")
        report = cmd_hyperbolic(require_lattice(a), o);
    else if (command == "parabolic")
        report = cmd_parabolic(require_lattice(a), o);
    else if (command == "invariants")
        report = cmd_invariants(require_lattice(a), o);
    else if (command == "equiv") {
        if (a.other.empty())
            fail(ErrorCode::PreconditionViolation, "--other is required");
        report = cmd_equiv(require_lattice(a), load_lattice(a.other), o);
    } else if (command == "classify") {
        if (a.matrix.empty())
            fail(ErrorCode::PreconditionViolation, "--matrix is required");
        json m = json_arg(a.matrix);
        report = cmd_classify(require_lattice(a), int_matrix_from_json(m.is_object() ? m.at("matrix") : m), o);
    } else if (command == "saturate") {
        if (a.vectors.empty())
            fail(ErrorCode::PreconditionViolation, "--vectors is required");
        std::vector<IntVec> vs;
        for (const auto& v : json_arg(a.vectors))
            vs.push_back(int_vec_from_json(v));
        report = cmd_saturate(require_lattice(a), vs, o);
    } else if (command == "extend")
        report = cmd_extend(require_lattice(a), o);
    else if (command == "glue")
        report = cmd_glue(require_lattice(a), o);
    else if (command == "isotropic")
        report = cmd_isotropic(require_lattice(a), o);
    else if (command == "certify") {
        if (a.certificate.empty())
            fail(ErrorCode::PreconditionViolation, "--certificate is required");
        report = cmd_certify(certificate_from_json(json_arg(a.certificate)), o);
    }

    if (a.verify) {
        const json result = checks_to_json(verify_report(report));
        report["self_check"] = result;
        emit(report, a);
        return result.at("ok").get<bool>() ? 0 : 4;
    }
    return emit(report, a);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Constructions on integral quadratic lattices"};
    app.set_version_flag("--version", std::string(QFORGE_VERSION));
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--lattice", a.lattice, "lattice JSON file or catalog:NAME");
        sub->add_option("--n-bound", a.n_bound, "bound N on the absolute values to avoid");
        sub->add_option("--target-signature", a.target, "target signature r,s");
        sub->add_option("--height-bound", a.height, "enumeration or search height");
        sub->add_option("--budget", a.budget, "search budget in visited vectors");
        sub->add_option("--seed", a.seed, "seed recorded in the report");
        sub->add_flag("--verify", a.verify, "re-check the report before writing it");
        sub->add_option("--out", a.out, "write the report to this file");
    };

    const std::vector<std::pair<std::string, std::string>> commands{
        {"hyperbolic", "rank-2 sublattice avoiding small values and a hyperbolic isometry"},
        {"parabolic", "sublattice of H avoiding small values and a parabolic isometry"},
        {"invariants", "rational invariants of a lattice"},
        {"equiv", "rational equivalence with an explicit isometry when found"},
        {"classify", "elliptic, parabolic or hyperbolic type of an isometry"},
        {"saturate", "saturation of the span of some vectors"},
        {"extend", "three diagonal entries completing a lattice to a standard form"},
        {"glue", "primitive embedding into an odd unimodular lattice"},
        {"isotropic", "a primitive isotropic vector"},
        {"certify", "check a smallness certificate"},
        {"verify", "re-check a report from its content"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub);
        if (name == "equiv")
            sub->add_option("--other", a.other, "second lattice")->required();
        if (name == "classify")
            sub->add_option("--matrix", a.matrix, "isometry as JSON or a JSON file")->required();
        if (name == "saturate")
            sub->add_option("--vectors", a.vectors, "vectors as JSON or a JSON file")->required();
        if (name == "certify")
            sub->add_option("--certificate", a.certificate, "certificate as JSON or a JSON file")->required();
        if (name == "verify") {
            sub->add_option("--report", a.report, "report file")->required();
            sub->add_option("--check", a.check, "run only this check");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, a);
    } catch (const Error& e) {
        json err{{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"exit_code", exit_code(e.code())}};
        std::cerr << format_json(err) << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        json err{{"error", "InternalInconsistency"}, {"message", e.what()}, {"exit_code", 4}};
        std::cerr << format_json(err) << '\n';
        return 4;
    }
}
