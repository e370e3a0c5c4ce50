#pragma once

// Interpretability decisions over causal diagrams.
//
// An architecture either reads the whole mixture (a blackbox), a feature
// subset T of the lattice vertices (a concept architecture), or both (a
// hybrid, representable for analysis but never admissible). The single
// criterion driving everything: the architecture is causally interpretable
// with respect to a query targeting W exactly when T is contained in the
// union of W and its non-descendants. Blackbox and hybrid architectures
// fail for every W, with
// distinct reason codes, because the mixture is a descendant of every
// feature.
//
// Families of admissible sets are enumerated over the subset lattice with an
// explicit size cap and truncation flag; the maximal admissible feature set
// comes from the closed-form intersection and is checked maximal by the test
// suite rather than trusted. Deterministic ordering throughout: features
// sorted by name, families in lexicographic set order.

#include "graph.hpp"

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace ascm {

using FeatureSet = std::set<std::string>;
using QueryFamily = std::set<FeatureSet>;  // target sets; every member nonempty

struct ArchSpec {
    bool all_pixels = false;
    std::vector<std::string> features;  // meaningful unless all_pixels without features

    static ArchSpec pixels() { return ArchSpec{true, {}}; }
    static ArchSpec concepts(std::vector<std::string> f) { return ArchSpec{false, std::move(f)}; }
    bool hybrid() const { return all_pixels && !features.empty(); }

    std::string display() const {
        if (all_pixels && features.empty()) return "pixels";
        std::string s = all_pixels ? "pixels+{" : "{";
        FeatureSet sorted(features.begin(), features.end());
        bool first = true;
        for (const auto& f : sorted) { s += (first ? "" : ",") + f; first = false; }
        return s + "}";
    }
};

// The architecture a model's label implements.
inline ArchSpec architecture_of(const Scm& scm) {
    if (scm.label_on_mixture()) return ArchSpec::pixels();
    return ArchSpec::concepts(scm.label_features());
}

struct ArchCheck {
    enum class Reason { Admissible, MixtureBlackbox, MixtureHybrid, DescendantViolation };
    bool admissible = false;
    Reason reason = Reason::Admissible;
    std::vector<std::string> violators;  // features outside W and ND(W), sorted
};

inline const char* reason_text(ArchCheck::Reason r) {
    switch (r) {
        case ArchCheck::Reason::Admissible: return "admissible";
        case ArchCheck::Reason::MixtureBlackbox: return "reads the mixture";
        case ArchCheck::Reason::MixtureHybrid: return "reads the mixture alongside features";
        case ArchCheck::Reason::DescendantViolation: return "feature set leaves W and its non-descendants";
    }
    return "?";
}

// The criterion, with diagnostics. W must be a nonempty set of feature
// vertices; concept features must be feature vertices too.
inline ArchCheck check_architecture(const CausalDiagram& g, const ArchSpec& arch,
                                    const FeatureSet& W) {
    if (W.empty()) throw std::invalid_argument("query target set is empty");
    graph_detail::require_features(g, W, "query target set");
    FeatureSet T(arch.features.begin(), arch.features.end());
    graph_detail::require_features(g, T, "feature set");
    ArchCheck out;
    if (arch.all_pixels) {
        out.admissible = false;
        out.reason = arch.features.empty() ? ArchCheck::Reason::MixtureBlackbox
                                           : ArchCheck::Reason::MixtureHybrid;
        return out;
    }
    FeatureSet allowed = non_descendants(g, W);
    allowed.insert(W.begin(), W.end());
    for (const auto& t : T)
        if (!allowed.count(t)) out.violators.push_back(t);
    out.admissible = out.violators.empty();
    out.reason = out.admissible ? ArchCheck::Reason::Admissible
                                : ArchCheck::Reason::DescendantViolation;
    return out;
}

inline bool is_interpretable(const CausalDiagram& g, const ArchSpec& arch, const FeatureSet& W) {
    return check_architecture(g, arch, W).admissible;
}

struct FamilyResult {
    std::set<FeatureSet> members;
    bool truncated = false;
};

namespace adm_detail {

inline void require_family(const CausalDiagram& g, const QueryFamily& fam) {
    if (fam.empty()) throw std::invalid_argument("query family is empty");
    for (const auto& W : fam) {
        if (W.empty()) throw std::invalid_argument("query family contains an empty target set");
        graph_detail::require_features(g, W, "query family member");
    }
}

// Subsets of the sorted feature list in bit-mask order, collected under a
// cap. `keep` decides membership.
template <class Keep>
FamilyResult collect_subsets(const CausalDiagram& g, bool skip_empty, std::size_t cap,
                             Keep&& keep) {
    if (cap < 1) throw std::invalid_argument("enumeration cap must be at least 1");
    std::vector<std::string> feats(g.feature_nodes.begin(), g.feature_nodes.end());
    FamilyResult out;
    const std::size_t n = feats.size();
    if (n > 24) throw std::invalid_argument("feature lattice too large to enumerate");
    for (std::size_t mask = skip_empty ? 1 : 0; mask >> n == 0; ++mask) {
        FeatureSet s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) s.insert(feats[i]);
        if (!keep(s)) continue;
        if (out.members.size() == cap) { out.truncated = true; break; }
        out.members.insert(std::move(s));
    }
    return out;
}

}  // namespace adm_detail

// Every feature subset T interpretable w.r.t. each member of fam, by filtering
// the subset lattice against the criterion per target set (no shortcut
// through the maximal-set formula, so the two routes stay independent
// checks of each other).
inline FamilyResult t_admissible(const CausalDiagram& g, const QueryFamily& fam,
                                 std::size_t cap = SIZE_MAX) {
    adm_detail::require_family(g, fam);
    std::vector<FeatureSet> allowed;  // union of W and ND(W) per member
    for (const auto& W : fam) {
        FeatureSet a = non_descendants(g, W);
        a.insert(W.begin(), W.end());
        allowed.push_back(std::move(a));
    }
    return adm_detail::collect_subsets(g, false, cap, [&](const FeatureSet& T) {
        for (const auto& a : allowed)
            for (const auto& t : T)
                if (!a.count(t)) return false;
        return true;
    });
}

// The unique maximal admissible feature set: for every family member,
// intersect the union of W and ND(W).
inline FeatureSet max_t_admissible(const CausalDiagram& g, const QueryFamily& fam) {
    adm_detail::require_family(g, fam);
    bool first = true;
    FeatureSet acc;
    for (const auto& W : fam) {
        FeatureSet a = non_descendants(g, W);
        a.insert(W.begin(), W.end());
        if (first) { acc = std::move(a); first = false; continue; }
        FeatureSet next;
        for (const auto& x : acc)
            if (a.count(x)) next.insert(x);
        acc = std::move(next);
    }
    return acc;
}

// Every nonempty target set W the architecture is interpretable for. Empty
// for blackbox and hybrid architectures.
inline FamilyResult w_admissible(const CausalDiagram& g, const ArchSpec& arch,
                                 std::size_t cap = SIZE_MAX) {
    FeatureSet T(arch.features.begin(), arch.features.end());
    graph_detail::require_features(g, T, "feature set");
    return adm_detail::collect_subsets(g, true, cap, [&](const FeatureSet& W) {
        return check_architecture(g, arch, W).admissible;
    });
}

// Monotonicity check: growing the feature set shrinks the admissible query
// family, and growing the query family shrinks the maximal feature set. The
// violation lists must come back empty; they are reported, not assumed.
struct TradeoffCheck {
    bool holds = true;
    std::vector<FeatureSet> wad_violations;  // in W-Ad(T2) but not W-Ad(T1)
    FeatureSet maxt_violations;              // in Max-T-Ad(fam2) but not Max-T-Ad(fam1)
};

inline TradeoffCheck check_tradeoff(const CausalDiagram& g, const FeatureSet& T1,
                                    const FeatureSet& T2, const QueryFamily& fam1,
                                    const QueryFamily& fam2) {
    for (const auto& t : T1)
        if (!T2.count(t))
            throw std::invalid_argument("first feature set is not a subset of the second");
    for (const auto& W : fam1)
        if (!fam2.count(W))
            throw std::invalid_argument("first query family is not a subset of the second");
    TradeoffCheck out;
    auto wad1 = w_admissible(g, ArchSpec::concepts({T1.begin(), T1.end()}));
    auto wad2 = w_admissible(g, ArchSpec::concepts({T2.begin(), T2.end()}));
    for (const auto& W : wad2.members)
        if (!wad1.members.count(W)) out.wad_violations.push_back(W);
    FeatureSet m1 = max_t_admissible(g, fam1);
    FeatureSet m2 = max_t_admissible(g, fam2);
    for (const auto& t : m2)
        if (!m1.count(t)) out.maxt_violations.insert(t);
    out.holds = out.wad_violations.empty() && out.maxt_violations.empty();
    return out;
}

// ------------------------------------------------------------- serialization

// Sorted JSON-like array forms for report and CSV cells.
inline std::string set_text(const FeatureSet& s) {
    std::string out = "[";
    bool first = true;
    for (const auto& x : s) {
        out += (first ? "\"" : ",\"") + x + "\"";
        first = false;
    }
    return out + "]";
}

inline std::string family_text(const std::set<FeatureSet>& fam) {
    std::string out = "[";
    bool first = true;
    for (const auto& s : fam) {
        out += (first ? "" : ",") + set_text(s);
        first = false;
    }
    return out + "]";
}

}  // namespace ascm
