#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgr/concept_graph.hpp"

// Plain-text graph file:
//
//   CGRAPH 1
//   N <id> <kind> <scale> <label>
//   C <parent> <child> <dx> <dy>
//   E <a> <b> <weight>
//   M <a> <b>
//
// Records are grouped per node id in ascending order: the node itself, then
// the composition links it parents, then excitatory and mutex links to
// higher ids. Exporting the same graph always yields the same bytes.
namespace cgr {

namespace detail {

inline bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '"' || c == '\\' || c == '\n' || c == '\r') return true;
  }
  return false;
}

inline std::string quote_label(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

inline std::vector<std::string> tokenize(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    std::string tok;
    if (line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c == '\\') {
          if (i >= line.size()) throw ParseError(lineno, "dangling escape");
          char e = line[i++];
          switch (e) {
            case 'n': tok += '\n'; break;
            case 'r': tok += '\r'; break;
            case '"':
            case '\\': tok += e; break;
            default: throw ParseError(lineno, std::string("bad escape \\") + e);
          }
        } else {
          tok += c;
        }
      }
      if (!closed) throw ParseError(lineno, "unterminated quoted label");
    } else {
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') tok += line[i++];
    }
    out.push_back(std::move(tok));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t lineno, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(lineno, std::string("bad ") + what + " '" + tok + "'");
  }
  return value;
}

}  // namespace detail

inline void export_graph(const ConceptGraph& g, std::ostream& os) {
  os << "CGRAPH 1\n";
  std::vector<std::vector<ExcitatoryLink>> assoc(g.size());
  for (const auto& e : g.excitatory_links()) assoc[e.a.value].push_back(e);
  std::vector<std::vector<MutexLink>> mutex(g.size());
  for (const auto& m : g.mutex_links()) mutex[m.a.value].push_back(m);

  for (const auto& n : g.nodes()) {
    os << "N " << n.id << ' ' << to_string(n.kind) << ' ' << n.scale << ' ' << detail::quote_label(n.label) << '\n';
    for (const auto& c : g.children_of(n.id)) {
      os << "C " << n.id << ' ' << c.node << ' ' << c.role.dx << ' ' << c.role.dy << '\n';
    }
    for (const auto& e : assoc[n.id.value]) os << "E " << e.a << ' ' << e.b << ' ' << e.weight << '\n';
    for (const auto& m : mutex[n.id.value]) os << "M " << m.a << ' ' << m.b << '\n';
  }
}

inline std::string export_graph(const ConceptGraph& g) {
  std::ostringstream os;
  export_graph(g, os);
  return os.str();
}

inline ConceptGraph import_graph(std::istream& is) {
  ConceptGraph g;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(is, line)) throw ParseError(1, "missing CGRAPH header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "CGRAPH 1") throw ParseError(lineno, "expected 'CGRAPH 1' header");

  struct Pending {
    std::size_t line;
    char type;
    std::vector<std::string> fields;
  };
  std::vector<Pending> links;

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tok = detail::tokenize(line, lineno);
    if (tok.empty()) continue;
    if (tok[0].size() != 1) throw ParseError(lineno, "unknown record '" + tok[0] + "'");
    char type = tok[0][0];
    switch (type) {
      case 'N': {
        if (tok.size() != 5) throw ParseError(lineno, "N record needs 4 fields");
        auto id = detail::parse_number<std::uint32_t>(tok[1], lineno, "node id");
        if (id != g.size()) throw ParseError(lineno, "node ids must be dense and ascending");
        auto kind = parse_node_kind(tok[2]);
        if (!kind) throw ParseError(lineno, "unknown node kind '" + tok[2] + "'");
        auto scale = detail::parse_number<std::uint64_t>(tok[3], lineno, "scale");
        if (scale == 0) throw ParseError(lineno, "scale must be positive");
        g.restore_node(*kind, tok[4], scale);
        break;
      }
      case 'C':
        if (tok.size() != 5) throw ParseError(lineno, "C record needs 4 fields");
        links.push_back({lineno, type, tok});
        break;
      case 'E':
        if (tok.size() != 4) throw ParseError(lineno, "E record needs 3 fields");
        links.push_back({lineno, type, tok});
        break;
      case 'M':
        if (tok.size() != 3) throw ParseError(lineno, "M record needs 2 fields");
        links.push_back({lineno, type, tok});
        break;
      default:
        throw ParseError(lineno, "unknown record '" + tok[0] + "'");
    }
  }

  auto node_ref = [&](const std::string& tok, std::size_t ln) {
    auto v = detail::parse_number<std::uint32_t>(tok, ln, "node id");
    if (v >= g.size()) throw ParseError(ln, "dangling node id " + tok);
    return NodeId{v};
  };

  for (const auto& p : links) {
    const auto& t = p.fields;
    NodeId a = node_ref(t[1], p.line);
    NodeId b = node_ref(t[2], p.line);
    try {
      switch (p.type) {
        case 'C': {
          Role role{detail::parse_number<int>(t[3], p.line, "dx"), detail::parse_number<int>(t[4], p.line, "dy")};
          g.restore_child(a, b, role);
          break;
        }
        case 'E': {
          auto w = detail::parse_number<std::uint64_t>(t[3], p.line, "weight");
          if (a == b || w == 0) throw ParseError(p.line, "invalid excitatory link");
          if (g.weight(a, b) != 0) throw ParseError(p.line, "duplicate excitatory link");
          g.restore_association(a, b, w);
          break;
        }
        case 'M':
          g.add_mutex(a, b);
          break;
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(p.line, e.what());
    }
  }

  if (auto bad = g.seal()) {
    throw ParseError(lineno, "node " + std::to_string(bad->value) + " has inconsistent composition");
  }
  return g;
}

inline ConceptGraph import_graph(const std::string& text) {
  std::istringstream is(text);
  return import_graph(is);
}

inline void save_graph(const ConceptGraph& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  export_graph(g, os);
}

inline ConceptGraph load_graph(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  return import_graph(is);
}

}  // namespace cgr
