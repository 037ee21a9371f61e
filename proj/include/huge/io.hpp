#pragma once
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <huge/types.hpp>

namespace huge {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    for (;;) {
        const auto pos = line.find(',');
        cells.push_back(trim(line.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        line.remove_prefix(pos + 1);
    }
    return cells;
}

inline std::string location(std::size_t line, std::size_t column = 0) {
    std::string out = "line " + std::to_string(line);
    if (column) out += ", column " + std::to_string(column);
    return out;
}

template <class T>
bool parse_number(std::string_view cell, T& out) {
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc() && ptr == end && !cell.empty();
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

}  // namespace detail

/// Comma-separated numeric table; an optional first row supplies the column labels.
inline Dataset parse_dataset_csv(std::istream& in, bool has_header) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_commas(line);
        if (header_pending) {
            for (auto c : cells) labels.emplace_back(c);
            width = cells.size();
            header_pending = false;
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw InputError("ragged row at " + detail::location(line_no) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(cells.size()));
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) {
            if (!detail::parse_number(cells[j], row[j]) || !std::isfinite(row[j]))
                throw InputError("non-numeric value '" + std::string(cells[j]) + "' at " +
                                 detail::location(line_no, j + 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw InputError("dataset needs at least 2 rows, found " + std::to_string(rows.size()));
    if (width < 2) throw InputError("dataset needs at least 2 columns, found " + std::to_string(width));

    Dataset out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    out.labels = has_header ? std::move(labels) : Dataset::default_labels(width);
    return out;
}

inline Dataset read_dataset_csv(const std::filesystem::path& path, bool has_header) {
    auto in = detail::open_input(path);
    return parse_dataset_csv(in, has_header);
}

/// Header row of labels followed by the values at round-trip precision.
inline void write_dataset_csv(std::ostream& out, const Dataset& x) {
    for (Eigen::Index j = 0; j < x.d(); ++j) out << (j ? "," : "") << x.label(j);
    out << '\n';
    for (Eigen::Index i = 0; i < x.n(); ++i) {
        for (Eigen::Index j = 0; j < x.d(); ++j) out << (j ? "," : "") << detail::format_double(x.values(i, j));
        out << '\n';
    }
}

inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& x) {
    auto out = detail::open_output(path);
    write_dataset_csv(out, x);
}

// ---------------------------------------------------------------------------
// Edge lists: "# d=<d>" then one "i,j" line per edge (i < j, 0-indexed, sorted).

inline std::string format_edgelist(const AdjacencyMatrix& graph) {
    std::string out = "# d=" + std::to_string(graph.dim()) + "\n";
    for (const auto& e : graph.edges()) out += std::to_string(e.i) + "," + std::to_string(e.j) + "\n";
    return out;
}

inline AdjacencyMatrix parse_edgelist(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> d;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (!d) {
            constexpr std::string_view prefix = "# d=";
            std::size_t value = 0;
            if (text.substr(0, prefix.size()) != prefix || !detail::parse_number(text.substr(prefix.size()), value))
                throw FormatError("edge list must start with '# d=<dimension>' (" + detail::location(line_no) + ")");
            d = value;
            continue;
        }
        const auto cells = detail::split_commas(text);
        Edge e;
        if (cells.size() != 2 || !detail::parse_number(cells[0], e.i) || !detail::parse_number(cells[1], e.j))
            throw FormatError("malformed edge '" + std::string(text) + "' at " + detail::location(line_no));
        if (e.j <= e.i) throw FormatError("edge endpoints must satisfy i < j at " + detail::location(line_no));
        if (e.j >= *d) throw FormatError("node index out of range at " + detail::location(line_no));
        if (!edges.empty() && !(edges.back() < e))
            throw FormatError("edges out of order or duplicated at " + detail::location(line_no));
        edges.push_back(e);
    }
    if (!d) throw FormatError("empty edge list file");
    return AdjacencyMatrix(*d, std::move(edges));
}

inline void write_graph_edgelist(const AdjacencyMatrix& graph, const std::vector<std::string>& labels,
                                 const std::filesystem::path& path) {
    if (labels.size() != graph.dim()) throw ParameterError("label count does not match graph dimension");
    auto out = detail::open_output(path);
    out << format_edgelist(graph);
}

inline AdjacencyMatrix read_graph_edgelist(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return parse_edgelist(in);
}

// ---------------------------------------------------------------------------
// Visualization interchange

namespace detail {

inline std::string dot_quote(std::string_view label) {
    std::string out = "\"";
    for (char ch : label) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

/// Undirected DOT graph: every node (isolated ones too), then every edge in canonical order.
inline std::string export_dot(const AdjacencyMatrix& graph, const std::vector<std::string>& labels) {
    if (labels.size() != graph.dim()) throw ParameterError("label count does not match graph dimension");
    std::string out = "graph G {\n";
    for (const auto& l : labels) out += "  " + detail::dot_quote(l) + ";\n";
    for (const auto& e : graph.edges())
        out += "  " + detail::dot_quote(labels[e.i]) + " -- " + detail::dot_quote(labels[e.j]) + ";\n";
    return out + "}\n";
}

inline std::string export_graphml(const AdjacencyMatrix& graph, const std::vector<std::string>& labels) {
    if (labels.size() != graph.dim()) throw ParameterError("label count does not match graph dimension");
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (std::size_t j = 0; j < labels.size(); ++j)
        out += "    <node id=\"n" + std::to_string(j) + "\"><data key=\"label\">" + detail::xml_escape(labels[j]) +
               "</data></node>\n";
    for (const auto& e : graph.edges())
        out += "    <edge source=\"n" + std::to_string(e.i) + "\" target=\"n" + std::to_string(e.j) + "\"/>\n";
    return out + "  </graph>\n</graphml>\n";
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    auto out = detail::open_output(path);
    out << text;
}

}  // namespace huge
