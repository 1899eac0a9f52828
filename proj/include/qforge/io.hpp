#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lattice.hpp"

namespace qforge {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Exact numbers. Integers below 2^53 in absolute value are plain JSON numbers,
// larger ones are decimal strings; rationals are "num/den" strings.

inline json to_json(const Int& x)
{
    static const Int limit = Int(1) << 53;
    if (abs(x) < limit)
        return x.get_si();
    return x.get_str();
}

inline json to_json(Rat x)
{
    x.canonicalize();
    if (x.get_den() == 1)
        return to_json(Int(x.get_num()));
    return x.get_str();
}

inline Int int_from_json(const json& j)
{
    if (j.is_number_integer())
        return Int(j.get<long>());
    if (j.is_string()) {
        Int x;
        if (x.set_str(j.get<std::string>(), 10) != 0)
            fail(ErrorCode::ParseError, "not an integer: " + j.get<std::string>());
        return x;
    }
    fail(ErrorCode::ParseError, "expected an integer, got " + j.dump());
}

inline Rat rat_from_json(const json& j)
{
    if (j.is_number_integer())
        return Rat(int_from_json(j));
    if (!j.is_string())
        fail(ErrorCode::ParseError, "expected a rational, got " + j.dump());
    Rat x;
    if (x.set_str(j.get<std::string>(), 10) != 0 || x.get_den() == 0)
        fail(ErrorCode::ParseError, "not a rational: " + j.get<std::string>());
    x.canonicalize();
    return x;
}

template <typename T>
json to_json(const std::vector<T>& v)
{
    json a = json::array();
    for (const auto& x : v)
        a.push_back(to_json(x));
    return a;
}

template <typename T>
json to_json(const Matrix<T>& m)
{
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(to_json(m(i, j)));
        a.push_back(row);
    }
    return a;
}

inline IntVec int_vec_from_json(const json& j)
{
    if (!j.is_array())
        fail(ErrorCode::ParseError, "expected an array of integers");
    IntVec v;
    for (const auto& x : j)
        v.push_back(int_from_json(x));
    return v;
}

inline IntMatrix int_matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty())
        fail(ErrorCode::ParseError, "expected a non-empty array of rows");
    std::vector<IntVec> rows;
    for (const auto& r : j)
        rows.push_back(int_vec_from_json(r));
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            fail(ErrorCode::DimensionMismatch, "rows of different lengths");
    return IntMatrix::from_rows(rows);
}

inline RatMatrix rat_matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty() || !j.front().is_array())
        fail(ErrorCode::ParseError, "expected a non-empty array of rows");
    RatMatrix m(j.size(), j.front().size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != m.cols())
            fail(ErrorCode::DimensionMismatch, "rows of different lengths");
        for (std::size_t k = 0; k < m.cols(); ++k)
            m(i, k) = rat_from_json(j[i][k]);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Lattice files: {"label": string, "gram": [[...], ...]}.

inline json lattice_to_json(const QuadLattice& l)
{
    json j;
    j["label"] = l.label();
    j["gram"] = to_json(l.gram());
    return j;
}

inline QuadLattice lattice_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("gram"))
        fail(ErrorCode::ParseError, "lattice object needs a \"gram\" field");
    return QuadLattice(int_matrix_from_json(j.at("gram")), j.value("label", std::string()));
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::BadInput, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Catalog and lattice expressions.
//
//   expr := term ('+' term)*
//   term := NAME | NAME '^' k | NAME '(' m ')' | '<' a, ... '>' | 'diag(' a['^'k], ... ')'
//
// NAME is looked up in the catalog; an entry is either {"gram": ...} or
// {"expr": "..."}; NAME(m) scales the form by m.

inline std::string catalog_path()
{
    if (const char* env = std::getenv("QFORGE_CATALOG"); env && *env)
        return env;
#ifdef QFORGE_DEFAULT_CATALOG
    return QFORGE_DEFAULT_CATALOG;
#else
    return "data/catalog.json";
#endif
}

class Catalog {
public:
    explicit Catalog(json entries) : entries_(std::move(entries))
    {
        if (!entries_.is_object())
            fail(ErrorCode::ParseError, "catalog must be a JSON object");
    }

    static Catalog load(const std::string& path = catalog_path()) { return Catalog(read_json_file(path)); }

    bool contains(const std::string& name) const { return entries_.contains(name); }

    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (auto it = entries_.begin(); it != entries_.end(); ++it)
            out.push_back(it.key());
        return out;
    }

    QuadLattice lattice(const std::string& expr) const
    {
        QuadLattice l = parse(expr, 0);
        l.set_label(trimmed(expr));
        return l;
    }

private:
    json entries_;

    static std::string trimmed(const std::string& s)
    {
        std::size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    }

    // Split on `sep` outside of (), <>.
    static std::vector<std::string> split_top(const std::string& s, char sep)
    {
        std::vector<std::string> parts;
        int depth = 0;
        std::string cur;
        for (char c : s) {
            if (c == '(' || c == '<')
                ++depth;
            if (c == ')' || c == '>')
                --depth;
            if (c == sep && depth == 0) {
                parts.push_back(trimmed(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (depth != 0)
            fail(ErrorCode::ParseError, "unbalanced brackets in \"" + s + "\"");
        parts.push_back(trimmed(cur));
        return parts;
    }

    static Int parse_int(const std::string& s)
    {
        std::string t = trimmed(s);
        if (!t.empty() && t[0] == '+')
            t.erase(0, 1);
        Int x;
        if (t.empty() || x.set_str(t, 10) != 0)
            fail(ErrorCode::ParseError, "not an integer: \"" + s + "\"");
        return x;
    }

    static long parse_count(const std::string& s)
    {
        const Int k = parse_int(s);
        if (k < 1 || k > 1000)
            fail(ErrorCode::ParseError, "repeat count out of range: " + s);
        return k.get_si();
    }

    static QuadLattice diagonal_from(const std::string& body)
    {
        IntVec entries;
        for (const auto& item : split_top(body, ',')) {
            const std::size_t caret = item.find('^');
            if (caret == std::string::npos) {
                entries.push_back(parse_int(item));
                continue;
            }
            const Int a = parse_int(item.substr(0, caret));
            entries.insert(entries.end(), parse_count(item.substr(caret + 1)), a);
        }
        return QuadLattice::diagonal(entries);
    }

    QuadLattice entry(const std::string& name, int depth) const
    {
        const json& e = entries_.at(name);
        if (e.contains("gram"))
            return lattice_from_json(e);
        if (e.contains("expr"))
            return parse(e.at("expr").get<std::string>(), depth + 1);
        fail(ErrorCode::ParseError, "catalog entry " + name + " has neither gram nor expr");
    }

    QuadLattice term(const std::string& t, int depth) const
    {
        if (t.empty())
            fail(ErrorCode::ParseError, "empty term");
        if (contains(t))
            return entry(t, depth);
        if (t.front() == '<' && t.back() == '>')
            return diagonal_from(t.substr(1, t.size() - 2));
        if (t.rfind("diag(", 0) == 0 && t.back() == ')')
            return diagonal_from(t.substr(5, t.size() - 6));
        const std::size_t caret = t.rfind('^');
        if (caret != std::string::npos && t.find_first_of(")>", caret) == std::string::npos) {
            const QuadLattice base = term(trimmed(t.substr(0, caret)), depth);
            QuadLattice out = base;
            for (long k = parse_count(t.substr(caret + 1)); k > 1; --k)
                out = direct_sum(out, base);
            return out;
        }
        if (t.back() == ')') {
            const std::size_t open = t.rfind('(');
            if (open != std::string::npos && open > 0 && contains(trimmed(t.substr(0, open))))
                return scaled(entry(trimmed(t.substr(0, open)), depth), parse_int(t.substr(open + 1, t.size() - open - 2)));
        }
        fail(ErrorCode::BadInput, "unknown lattice \"" + t + "\"");
    }

    QuadLattice parse(const std::string& expr, int depth) const
    {
        if (depth > 16)
            fail(ErrorCode::ParseError, "catalog expressions nest too deeply");
        const std::string e = trimmed(expr);
        if (contains(e))
            return entry(e, depth);
        std::optional<QuadLattice> out;
        for (const auto& t : split_top(e, '+')) {
            QuadLattice l = term(t, depth);
            out = out ? direct_sum(*out, l) : l;
        }
        return *out;
    }
};

// "catalog:NAME" (any expression) or a path to a lattice JSON file.
inline QuadLattice load_lattice(const std::string& spec)
{
    const std::string prefix = "catalog:";
    if (spec.rfind(prefix, 0) == 0)
        return Catalog::load().lattice(spec.substr(prefix.size()));
    QuadLattice l = lattice_from_json(read_json_file(spec));
    if (l.label().empty())
        l.set_label(spec);
    return l;
}

namespace detail {

inline void format_into(std::string& out, const json& j, int indent)
{
    const std::string pad(indent, ' '), inner(indent + 2, ' ');
    if (j.is_object() && !j.empty()) {
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            out += (first ? "" : ",\n") + inner + json(it.key()).dump() + ": ";
            format_into(out, it.value(), indent + 2);
            first = false;
        }
        out += "\n" + pad + "}";
        return;
    }
    if (j.is_array() && !j.empty()) {
        bool flat = true;
        for (const auto& x : j)
            flat = flat && !x.is_structured();
        if (flat) {
            out += j.dump(-1, ' ', false);
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            out += (i ? ",\n" : "") + inner;
            format_into(out, j[i], indent + 2);
        }
        out += "\n" + pad + "]";
        return;
    }
    out += j.dump();
}

} // namespace detail

// Indented JSON with arrays of scalars kept on one line, so matrices read row by row.
inline std::string format_json(const json& j)
{
    std::string out;
    detail::format_into(out, j, 0);
    return out;
}

inline void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorCode::BadInput, "cannot write " + path);
    out << format_json(j) << '\n';
}

} // namespace qforge
