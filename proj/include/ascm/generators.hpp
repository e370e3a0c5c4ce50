#pragma once

// Seeded generators for the randomized property suites: feature-level DAGs,
// binary models with random boolean mechanisms and confounders, random
// deterministic classifiers, and random query families. Everything is a pure
// function of the RNG state, so a fixed seed reproduces a suite exactly.

#include "admissibility.hpp"

#include <random>
#include <string>
#include <vector>

namespace ascm {

using Rng = std::mt19937_64;

inline std::size_t rand_below(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool rand_chance(Rng& rng, int num, int den) {
    return std::uniform_int_distribution<int>(0, den - 1)(rng) < num;
}

// Random DAG over feature vertices N0..N{n-1}; edges always point from lower
// to higher index, so acyclicity is structural.
inline CausalDiagram random_dag(Rng& rng, std::size_t n) {
    std::set<std::string> features;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("N" + std::to_string(i));
        features.insert(names.back());
    }
    int density = 1 + static_cast<int>(rand_below(rng, 4));  // edge prob density/8
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rand_chance(rng, density, 8)) edges.emplace_back(names[i], names[j]);
    return CausalDiagram::from_edges(features, edges);
}

// Random family of 1..max_members distinct nonempty subsets of the feature
// vertices.
inline QueryFamily random_family(Rng& rng, const CausalDiagram& g, std::size_t max_members) {
    std::vector<std::string> feats(g.feature_nodes.begin(), g.feature_nodes.end());
    QueryFamily fam;
    std::size_t want = 1 + rand_below(rng, max_members);
    for (std::size_t k = 0; k < 4 * want && fam.size() < want; ++k) {
        FeatureSet W;
        for (const auto& f : feats)
            if (rand_chance(rng, 1, 2)) W.insert(f);
        if (!W.empty()) fam.insert(std::move(W));
    }
    if (fam.empty()) fam.insert(FeatureSet{feats[rand_below(rng, feats.size())]});
    return fam;
}

namespace gen_detail {

// Random boolean expression tree over the given atoms. Guaranteed to contain
// at least one atom.
inline ExprPtr random_expr(Rng& rng, const std::vector<std::string>& atoms, int depth) {
    if (depth <= 0 || rand_chance(rng, 1, 3))
        return expr_var(atoms[rand_below(rng, atoms.size())]);
    switch (rand_below(rng, 4)) {
        case 0: return expr_unary(ExprKind::Not, random_expr(rng, atoms, depth - 1));
        case 1:
            return expr_binary(ExprKind::And, random_expr(rng, atoms, depth - 1),
                               random_expr(rng, atoms, depth - 1));
        case 2:
            return expr_binary(ExprKind::Or, random_expr(rng, atoms, depth - 1),
                               random_expr(rng, atoms, depth - 1));
        default:
            return expr_binary(ExprKind::Xor, random_expr(rng, atoms, depth - 1),
                               random_expr(rng, atoms, depth - 1));
    }
}

}  // namespace gen_detail

// Random binary model: features F0..F{n-1}, one private noise source each,
// up to two shared confounders, random boolean mechanisms reading earlier
// features and available noise. The mixture bundles every feature; the label
// starts as a constant and is replaced per experiment.
inline ScmBlock random_binary_scm(Rng& rng, std::size_t n_features) {
    ScmBlock b;
    b.name = "random";
    std::vector<std::string> features;
    for (std::size_t i = 0; i < n_features; ++i) features.push_back("F" + std::to_string(i));

    auto random_prob = [&](bool interior_only) {
        // k/8 with k in 1..7 keeps every event strictly positive when asked.
        int lo = interior_only ? 1 : 0;
        int hi = interior_only ? 7 : 8;
        return Rat(lo + static_cast<long long>(rand_below(rng, hi - lo + 1)), 8);
    };

    std::vector<std::string> shared;
    std::size_t n_shared = rand_below(rng, 3);
    for (std::size_t i = 0; i < n_shared; ++i) {
        shared.push_back("S" + std::to_string(i));
        b.exos.push_back(ExoDecl{shared.back(), bernoulli(random_prob(true))});
    }
    for (std::size_t i = 0; i < n_features; ++i)
        b.exos.push_back(ExoDecl{"E" + std::to_string(i), bernoulli(random_prob(true))});

    for (std::size_t i = 0; i < n_features; ++i) {
        std::vector<std::string> atoms = {"E" + std::to_string(i)};
        for (std::size_t j = 0; j < i; ++j)
            if (rand_chance(rng, 1, 2)) atoms.push_back(features[j]);
        for (const auto& s : shared)
            if (rand_chance(rng, 1, 3)) atoms.push_back(s);
        b.vars.push_back(VarDecl{features[i], gen_detail::random_expr(rng, atoms, 2)});
    }

    b.mixture = MixtureDecl{"X", features};
    b.label = LabelDecl{"L", false, {}, false, "", expr_const(0)};
    return b;
}

// Replaces the label by a random deterministic classifier over the feature
// subset T, written as a disjunction of minterms (or a constant when T is
// empty or no minterm is chosen).
inline ScmBlock with_random_label(Rng& rng, const ScmBlock& base, const FeatureSet& T) {
    std::vector<std::string> feats(T.begin(), T.end());
    ExprPtr fn;
    std::size_t combos = std::size_t{1} << feats.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        if (!rand_chance(rng, 1, 2)) continue;
        ExprPtr term;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            ExprPtr lit = expr_var(feats[i]);
            if ((mask >> i & 1) == 0) lit = expr_unary(ExprKind::Not, lit);
            term = term ? expr_binary(ExprKind::And, term, lit) : lit;
        }
        if (!term) term = expr_const(1);  // the empty-T minterm
        fn = fn ? expr_binary(ExprKind::Or, fn, term) : term;
    }
    if (!fn) fn = expr_const(0);
    ScmBlock b = base;
    b.label = LabelDecl{"L", false, feats, false, "", fn};
    return b;
}

}  // namespace ascm
