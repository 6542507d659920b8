#pragma once

// Backward expansion of the Collatz graph from a root: the full tree under
// T (root 1) and the reduced tree under T' on class [2] (root 2), plus DOT
// and JSON serialization.

#include "collatz_lab/core_map.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace collatz_lab {

enum class Flavor : std::uint8_t { Full, Reduced };

constexpr std::string_view to_string(Flavor f) { return f == Flavor::Full ? "full" : "reduced"; }

inline Flavor parse_flavor(std::string_view s) {
  if (s == "full") return Flavor::Full;
  if (s == "reduced") return Flavor::Reduced;
  throw std::invalid_argument("collatz_lab: unknown tree flavor: " + std::string(s));
}

using EdgeRule = std::variant<Rule, ReducedRule>;

inline std::string_view to_string(const EdgeRule& r) {
  return std::visit([](auto tag) { return to_string(tag); }, r);
}

/// child -> parent, where parent is the forward image of child.
struct TreeEdge {
  std::uint64_t child = 0;
  std::uint64_t parent = 0;
  EdgeRule rule;

  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

/// Absent means unlimited. At least one cap must be set to build.
struct TreeLimits {
  std::optional<std::size_t> max_depth;
  std::optional<std::uint64_t> max_value;

  friend bool operator==(const TreeLimits&, const TreeLimits&) = default;
};

struct Tree {
  Flavor flavor = Flavor::Full;
  std::uint64_t root = 1;
  TreeLimits limits;
  std::set<std::uint64_t> nodes;
  std::map<std::uint64_t, TreeEdge> edges;  // keyed by child
  // The backward edge that would close the limit cycle at the root.
  std::optional<TreeEdge> suppressed;

  bool contains(std::uint64_t v) const { return nodes.contains(v); }

  const TreeEdge* edge_from(std::uint64_t child) const {
    auto it = edges.find(child);
    return it == edges.end() ? nullptr : &it->second;
  }

  std::size_t children_of(std::uint64_t parent) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [&](const auto& e) { return e.second.parent == parent; }));
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

namespace tree_detail {

inline std::vector<std::pair<Nat, EdgeRule>> backward(Flavor flavor, std::uint64_t x) {
  std::vector<std::pair<Nat, EdgeRule>> out;
  if (flavor == Flavor::Full) {
    for (auto& p : predecessors(Nat(x))) out.emplace_back(std::move(p.value), p.rule);
  } else {
    for (auto& p : reduced_predecessors(Nat(x))) out.emplace_back(std::move(p.value), p.rule);
  }
  return out;
}

}  // namespace tree_detail

/// Breadth-first backward expansion. A predecessor is admitted when it is
/// within both caps and not yet in the tree; the one predecessor that is
/// already present is the root itself (it would close the limit cycle) and
/// is recorded in `suppressed` instead.
inline Tree build_tree(Flavor flavor, std::uint64_t root, TreeLimits limits) {
  if (root == 0) throw std::domain_error("collatz_lab::build_tree: root must be >= 1");
  if (flavor == Flavor::Reduced && !in_reduced_domain(root))
    throw std::domain_error("collatz_lab::build_tree: reduced tree root must be in class [2]");
  if (!limits.max_depth && !limits.max_value)
    throw std::invalid_argument("collatz_lab::build_tree: need a depth cap or a value cap");

  Tree tree;
  tree.flavor = flavor;
  tree.root = root;
  tree.limits = limits;
  tree.nodes.insert(root);
  if (limits.max_value && root > *limits.max_value) return tree;

  std::vector<std::uint64_t> level{root};
  for (std::size_t depth = 0; !level.empty(); ++depth) {
    if (limits.max_depth && depth >= *limits.max_depth) break;
    std::vector<std::uint64_t> next;
    for (std::uint64_t parent : level) {
      for (auto& [value, rule] : tree_detail::backward(flavor, parent)) {
        if (limits.max_value && value > *limits.max_value) continue;
        if (!fits_u64(value)) throw std::overflow_error("collatz_lab::build_tree: node exceeds 64 bits");
        auto child = value.convert_to<std::uint64_t>();
        if (tree.nodes.contains(child)) {
          if (child == root) tree.suppressed = TreeEdge{child, parent, rule};
          continue;
        }
        tree.nodes.insert(child);
        tree.edges.emplace(child, TreeEdge{child, parent, rule});
        next.push_back(child);
      }
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  return tree;
}

inline constexpr int kTreeSchemaVersion = 1;

namespace tree_detail {

inline std::string cap_text(const auto& cap) { return cap ? std::to_string(*cap) : std::string("none"); }

inline EdgeRule parse_edge_rule(Flavor flavor, std::string_view tag) {
  if (flavor == Flavor::Full) {
    if (auto r = parse_rule(tag)) return *r;
  } else {
    if (auto r = parse_reduced_rule(tag)) return *r;
  }
  throw std::invalid_argument("collatz_lab: rule tag " + std::string(tag) + " does not belong to a " +
                              std::string(to_string(flavor)) + " tree");
}

}  // namespace tree_detail

/// DOT digraph, nodes ascending, edges ascending by child. Tree metadata
/// rides in graph attributes so parse_dot can restore it.
inline std::string export_dot(const Tree& tree) {
  std::ostringstream os;
  os << "digraph collatz_" << to_string(tree.flavor) << " {\n";
  os << "  graph [flavor=\"" << to_string(tree.flavor) << "\", root=\"" << tree.root << "\", max_depth=\""
     << tree_detail::cap_text(tree.limits.max_depth) << "\", max_value=\"" << tree_detail::cap_text(tree.limits.max_value)
     << "\"";
  if (tree.suppressed) {
    os << ", suppressed=\"" << tree.suppressed->child << " -> " << tree.suppressed->parent << " "
       << to_string(tree.suppressed->rule) << "\"";
  }
  os << "];\n";
  os << "  node [shape=circle];\n";
  for (auto v : tree.nodes) os << "  " << v << " [label=\"" << v << "\"];\n";
  for (const auto& [child, e] : tree.edges)
    os << "  " << e.child << " -> " << e.parent << " [label=\"" << to_string(e.rule) << "\"];\n";
  os << "}\n";
  return os.str();
}

/// Reads back the output of export_dot (not general DOT).
inline Tree parse_dot(const std::string& text) {
  static const std::regex graph_re(
      R"re(graph \[flavor="(\w+)", root="(\d+)", max_depth="(\w+)", max_value="(\w+)"(?:, suppressed="(\d+) -> (\d+) (\w+)")?\];)re");
  static const std::regex node_re(R"re(^\s*(\d+) \[label="\d+"\];$)re");
  static const std::regex edge_re(R"re(^\s*(\d+) -> (\d+) \[label="(\w+)"\];$)re");

  auto cap = [](const std::string& s) -> std::optional<std::uint64_t> {
    if (s == "none") return std::nullopt;
    return parse_u64(s);
  };

  Tree tree;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, graph_re)) {
      tree.flavor = parse_flavor(m[1].str());
      tree.root = parse_u64(m[2].str());
      auto depth = cap(m[3].str());
      tree.limits.max_depth = depth ? std::optional<std::size_t>(*depth) : std::nullopt;
      tree.limits.max_value = cap(m[4].str());
      if (m[5].matched)
        tree.suppressed = TreeEdge{parse_u64(m[5].str()), parse_u64(m[6].str()),
                                   tree_detail::parse_edge_rule(tree.flavor, m[7].str())};
      have_header = true;
    } else if (std::regex_match(line, m, node_re)) {
      tree.nodes.insert(parse_u64(m[1].str()));
    } else if (std::regex_match(line, m, edge_re)) {
      if (!have_header) throw std::invalid_argument("collatz_lab::parse_dot: edge before graph attributes");
      TreeEdge e{parse_u64(m[1].str()), parse_u64(m[2].str()), tree_detail::parse_edge_rule(tree.flavor, m[3].str())};
      tree.edges.emplace(e.child, e);
    }
  }
  if (!have_header) throw std::invalid_argument("collatz_lab::parse_dot: missing graph attributes");
  return tree;
}

namespace tree_detail {

inline nlohmann::ordered_json edge_json(const TreeEdge& e) {
  return {{"child", e.child}, {"parent", e.parent}, {"rule", std::string(to_string(e.rule))}};
}

inline TreeEdge edge_from_json(Flavor flavor, const nlohmann::ordered_json& j) {
  return {j.at("child").get<std::uint64_t>(), j.at("parent").get<std::uint64_t>(),
          parse_edge_rule(flavor, j.at("rule").get<std::string>())};
}

}  // namespace tree_detail

inline nlohmann::ordered_json to_json(const Tree& tree) {
  nlohmann::ordered_json j;
  j["flavor"] = std::string(to_string(tree.flavor));
  j["root"] = tree.root;
  j["limits"]["max_depth"] = tree.limits.max_depth ? nlohmann::ordered_json(*tree.limits.max_depth) : nlohmann::ordered_json(nullptr);
  j["limits"]["max_value"] = tree.limits.max_value ? nlohmann::ordered_json(*tree.limits.max_value) : nlohmann::ordered_json(nullptr);
  j["nodes"] = nlohmann::ordered_json::array();
  for (auto v : tree.nodes) j["nodes"].push_back(v);
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [child, e] : tree.edges) j["edges"].push_back(tree_detail::edge_json(e));
  j["suppressed"] = tree.suppressed ? tree_detail::edge_json(*tree.suppressed) : nlohmann::ordered_json(nullptr);
  j["schema_version"] = kTreeSchemaVersion;
  return j;
}

inline std::string export_json(const Tree& tree) { return to_json(tree).dump(); }

inline Tree parse_tree_json(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  if (j.value("schema_version", 0) != kTreeSchemaVersion)
    throw std::invalid_argument("collatz_lab::parse_tree_json: unsupported schema_version");
  Tree tree;
  tree.flavor = parse_flavor(j.at("flavor").get<std::string>());
  tree.root = j.at("root").get<std::uint64_t>();
  const auto& limits = j.at("limits");
  if (!limits.at("max_depth").is_null()) tree.limits.max_depth = limits["max_depth"].get<std::size_t>();
  if (!limits.at("max_value").is_null()) tree.limits.max_value = limits["max_value"].get<std::uint64_t>();
  for (const auto& v : j.at("nodes")) tree.nodes.insert(v.get<std::uint64_t>());
  for (const auto& e : j.at("edges")) {
    TreeEdge edge = tree_detail::edge_from_json(tree.flavor, e);
    tree.edges.emplace(edge.child, edge);
  }
  if (j.contains("suppressed") && !j["suppressed"].is_null())
    tree.suppressed = tree_detail::edge_from_json(tree.flavor, j["suppressed"]);
  return tree;
}

}  // namespace collatz_lab
