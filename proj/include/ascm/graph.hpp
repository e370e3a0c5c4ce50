#pragma once

// Causal diagram induction and the reachability questions behind every
// admissibility decision.
//
// The diagram has one vertex per endogenous variable, one for the mixture,
// and one for the label. Directed edges record mechanism arguments: V_j -> V_i
// when f_{V_i} reads V_j, component -> mixture for every endogenous mixture
// component, and feature -> label for whatever the label reads (the mixture
// vertex itself when the label reads the mixture). A bidirected edge joins two
// vertices whose mechanisms share an exogenous variable; the mixture's
// exogenous arguments are its exogenous components. Bidirected edges are kept
// for rendering and inspection; descendant queries use directed reachability
// only.
//
// The feature vertices (the set the admissibility lattice ranges over) are
// exactly the endogenous mixture components. Auxiliary endogenous variables
// such as a ground-truth label source appear in the diagram but are not
// features. Descendant sets include the queried vertices themselves;
// non-descendant sets exclude them and are restricted to feature vertices.
// Non-descendants of the empty set are rejected rather than given a
// convention.

#include "scm.hpp"

#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ascm {

struct CausalDiagram {
    std::set<std::string> nodes;
    std::set<std::string> feature_nodes;  // lattice vertices, subset of nodes
    std::string mixture_node;             // empty for bare edge-list diagrams
    std::string label_node;               // ditto
    std::map<std::string, std::set<std::string>> children;
    std::set<std::pair<std::string, std::string>> directed;
    std::set<std::pair<std::string, std::string>> bidirected;  // stored min-first

    void add_directed(const std::string& from, const std::string& to) {
        nodes.insert(from);
        nodes.insert(to);
        children[from].insert(to);
        directed.emplace(from, to);
    }
    void add_bidirected(const std::string& a, const std::string& b) {
        nodes.insert(a);
        nodes.insert(b);
        bidirected.emplace(std::min(a, b), std::max(a, b));
    }

    // Builds a diagram from explicit edges, for analyses where only partial
    // structural knowledge exists. The directed part must be acyclic.
    static CausalDiagram from_edges(
        const std::set<std::string>& features,
        const std::vector<std::pair<std::string, std::string>>& directed_edges,
        const std::vector<std::pair<std::string, std::string>>& bidirected_edges = {}) {
        CausalDiagram g;
        g.feature_nodes = features;
        g.nodes = features;
        for (const auto& [a, b] : directed_edges) g.add_directed(a, b);
        for (const auto& [a, b] : bidirected_edges) g.add_bidirected(a, b);
        g.check_acyclic();
        return g;
    }

    // One line per edge: directed as `A -> B`, bidirected as `A <-> B`, in
    // sorted order.
    std::string export_text() const {
        std::ostringstream out;
        for (const auto& [a, b] : directed) out << a << " -> " << b << "\n";
        for (const auto& [a, b] : bidirected) out << a << " <-> " << b << "\n";
        return out.str();
    }

    void check_acyclic() const {
        std::map<std::string, int> mark;  // 0 new, 1 open, 2 done
        std::vector<std::pair<std::string, bool>> stack;
        for (const auto& start : nodes) {
            if (mark[start]) continue;
            stack.emplace_back(start, false);
            while (!stack.empty()) {
                auto [n, leaving] = stack.back();
                stack.pop_back();
                if (leaving) { mark[n] = 2; continue; }
                if (mark[n] != 0) continue;
                mark[n] = 1;
                stack.emplace_back(n, true);
                auto it = children.find(n);
                if (it == children.end()) continue;
                for (const auto& c : it->second) {
                    if (mark[c] == 1)
                        throw std::invalid_argument("directed cycle through '" + c + "'");
                    if (mark[c] == 0) stack.emplace_back(c, false);
                }
            }
        }
    }
};

// Diagram of a model: argument scan of every mechanism plus the mixture and
// label wiring described in the header comment.
inline CausalDiagram induce_diagram(const Scm& scm) {
    const ScmBlock& b = scm.block();
    CausalDiagram g;
    std::set<std::string> exo_names, var_names;
    for (const auto& e : b.exos) exo_names.insert(e.name);
    for (const auto& v : b.vars) { var_names.insert(v.name); g.nodes.insert(v.name); }
    g.mixture_node = b.mixture.name;
    g.label_node = b.label.name;
    g.nodes.insert(g.mixture_node);
    g.nodes.insert(g.label_node);

    // Direct exogenous arguments per vertex, for the bidirected clause.
    std::map<std::string, std::set<std::string>> exo_args;
    for (const auto& v : b.vars) {
        std::set<std::string> refs;
        collect_var_refs(v.fn, refs);
        for (const auto& r : refs) {
            if (var_names.count(r)) g.add_directed(r, v.name);
            if (exo_names.count(r)) exo_args[v.name].insert(r);
        }
    }
    for (const auto& c : b.mixture.components) {
        if (var_names.count(c)) {
            g.feature_nodes.insert(c);
            g.add_directed(c, g.mixture_node);
        } else {
            exo_args[g.mixture_node].insert(c);
        }
    }
    if (b.label.on_mixture) {
        g.add_directed(g.mixture_node, g.label_node);
    } else {
        for (const auto& f : b.label.uses) g.add_directed(f, g.label_node);
    }

    for (auto i = exo_args.begin(); i != exo_args.end(); ++i)
        for (auto j = std::next(i); j != exo_args.end(); ++j) {
            bool shared = false;
            for (const auto& u : i->second)
                if (j->second.count(u)) { shared = true; break; }
            if (shared) g.add_bidirected(i->first, j->first);
        }
    return g;
}

namespace graph_detail {

inline void require_features(const CausalDiagram& g, const std::set<std::string>& W,
                             const char* what) {
    for (const auto& n : W) {
        if (!g.nodes.count(n))
            throw std::invalid_argument(std::string(what) + " contains unknown node '" + n + "'");
        if (!g.feature_nodes.count(n))
            throw std::invalid_argument(std::string(what) + " contains non-feature node '" +
                                        n + "'");
    }
}

}  // namespace graph_detail

// Union of directed-reachability closures from W, including W itself. W must
// consist of feature vertices; the closure may leave the feature set (it
// typically reaches the mixture and label vertices).
inline std::set<std::string> descendants(const CausalDiagram& g, const std::set<std::string>& W) {
    graph_detail::require_features(g, W, "descendant query");
    std::set<std::string> seen = W;
    std::deque<std::string> frontier(W.begin(), W.end());
    while (!frontier.empty()) {
        std::string n = frontier.front();
        frontier.pop_front();
        auto it = g.children.find(n);
        if (it == g.children.end()) continue;
        for (const auto& c : it->second)
            if (seen.insert(c).second) frontier.push_back(c);
    }
    return seen;
}

// Feature vertices that are descendants of no member of W: the intersection
// over W_i of the per-vertex non-descendant sets. Never intersects W. W must
// be nonempty.
inline std::set<std::string> non_descendants(const CausalDiagram& g,
                                             const std::set<std::string>& W) {
    if (W.empty())
        throw std::invalid_argument("non-descendants of the empty set are not defined");
    std::set<std::string> reach = descendants(g, W);
    std::set<std::string> out;
    for (const auto& v : g.feature_nodes)
        if (!reach.count(v)) out.insert(v);
    return out;
}

}  // namespace ascm
