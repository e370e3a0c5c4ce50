#pragma once

// Counterfactual query evaluation, two ways, plus the equivalence and
// divergence checks that separate them.
//
// The oracle runs abduction-action-prediction by exhaustive enumeration: it
// weighs every exogenous assignment by its posterior given the evidence,
// re-evaluates the intervened model there, and reads the label. It needs the
// full model.
//
// The closed form needs only an observational joint table and the feature set
// T the classifier reads: sum over strata z of T outside the intervention of
// P(label = y | intervened T-values, z) * P(z | evidence). The two agree
// exactly whenever T stays inside W and its non-descendants; the bundled
// model pairs witness both directions.
//
// Probability-zero events are errors, not silent zeros: conditioning on
// zero-mass evidence raises ZeroEvidenceError, and a stratum whose
// conditioning event has no observational mass raises PositivityError.
// Strata with zero mass under the evidence are skipped and counted in the
// result diagnostics.

#include "admissibility.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace ascm {

// One counterfactual question: P(label = outcome | do(intervention) ; given
// evidence). The intervention must be nonempty; evidence may be empty and may
// overlap the intervened variables (the factual value may differ from the
// forced one).
struct Query {
    std::string name;
    std::string label_name;
    long long outcome = 0;
    Assignment intervention;
    Assignment evidence;
};

inline Query query_from_block(const QueryBlock& qb) {
    Query q;
    q.name = qb.name;
    q.label_name = qb.label_name;
    q.outcome = qb.outcome;
    for (const auto& [n, v] : qb.intervention) q.intervention[n] = v;
    for (const auto& [n, v] : qb.evidence) q.evidence[n] = v;
    return q;
}

class CtfError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class ZeroEvidenceError : public CtfError {
    using CtfError::CtfError;
};
class PositivityError : public CtfError {
    using CtfError::CtfError;
};

struct CtfResult {
    enum class Method { Oracle, ClosedForm };
    Rat value{0};
    Method method = Method::Oracle;
    bool admissible = false;   // meaningful when the evaluation saw the model
    Rat evidence_mass{0};      // P(evidence)
    std::size_t strata_skipped = 0;  // closed form only: zero-mass strata
};

namespace ctf_detail {

inline void require_query(const Scm& scm, const Query& q) {
    if (q.label_name != scm.label_name())
        throw std::invalid_argument("query label '" + q.label_name + "' does not match model label '" +
                                    scm.label_name() + "'");
    if (q.intervention.empty()) throw std::invalid_argument("query intervention is empty");
    const auto& obs = scm.observables();
    for (const auto& [n, v] : q.evidence) {
        (void)v;
        if (std::find(obs.begin(), obs.end(), n) == obs.end())
            throw std::invalid_argument("evidence variable '" + n + "' is not observable");
    }
}

}  // namespace ctf_detail

// Whether the architecture is interpretable w.r.t. this query's target set on
// the model's induced diagram. False (rather than an error) when the target
// or features fall outside the feature lattice.
inline bool query_admissible(const Scm& scm, const ArchSpec& arch, const Query& q) {
    CausalDiagram g = induce_diagram(scm);
    FeatureSet W;
    for (const auto& [n, v] : q.intervention) {
        (void)v;
        if (!g.feature_nodes.count(n)) return false;
        W.insert(n);
    }
    for (const auto& f : arch.features)
        if (!g.feature_nodes.count(f)) return false;
    return is_interpretable(g, arch, W);
}

// Ground truth by abduction, action, prediction:
//   sum_u P(u) 1[base(u) satisfies evidence] 1[intervened(u) labels outcome]
// normalized by the evidence mass.
inline CtfResult oracle(const Scm& scm, const Query& q) {
    ctf_detail::require_query(scm, q);
    Scm sub = intervene(scm, q.intervention);
    std::vector<std::pair<int, long long>> ev;
    for (const auto& [n, v] : q.evidence) ev.emplace_back(scm.slot_of(n), v);

    Rat num = 0, den = 0;
    std::vector<long long> sub_state(scm.state_size(), 0);
    scm.for_each_u([&](std::vector<long long>& state, const Rat& p) {
        scm.evaluate_state(state);
        for (const auto& [slot, v] : ev)
            if (state[slot] != v) return;
        den += p;
        sub_state = state;
        sub.evaluate_state(sub_state);
        if (sub.label_of(sub_state) == q.outcome) num += p;
    });
    if (den == 0) throw ZeroEvidenceError("evidence has probability zero");

    CtfResult r;
    r.method = CtfResult::Method::Oracle;
    r.value = num / den;
    r.evidence_mass = den;
    r.admissible = query_admissible(scm, architecture_of(scm), q);
    return r;
}

// Observational estimator over a joint table covering T, the evidence
// variables, and the label. Only the part of the intervention inside T enters
// the substitution; the admissibility criterion is exactly what makes that
// sufficient.
inline CtfResult closed_form(const JointTable& joint, const std::vector<std::string>& T,
                             const Query& q) {
    if (q.intervention.empty()) throw std::invalid_argument("query intervention is empty");
    for (const auto& t : T) joint.index_of(t);  // demand every column up front
    joint.index_of(q.label_name);

    CtfResult r;
    r.method = CtfResult::Method::ClosedForm;
    r.evidence_mass = joint.mass_where(q.evidence);
    if (r.evidence_mass == 0) throw ZeroEvidenceError("evidence has probability zero");

    Assignment substitution;  // intervened values inside T
    std::vector<std::string> strata_vars;  // T minus intervened variables
    for (const auto& t : T) {
        auto it = q.intervention.find(t);
        if (it != q.intervention.end())
            substitution[t] = it->second;
        else
            strata_vars.push_back(t);
    }

    // Walk the product of per-variable supports for the strata.
    std::vector<std::vector<long long>> supports;
    for (const auto& v : strata_vars) supports.push_back(joint.support(v));
    std::vector<std::size_t> pick(strata_vars.size(), 0);
    while (true) {
        Assignment z;
        for (std::size_t i = 0; i < strata_vars.size(); ++i)
            z[strata_vars[i]] = supports[i][pick[i]];

        Assignment z_and_e = q.evidence;
        for (const auto& [n, v] : z) z_and_e[n] = v;
        // Evidence fixing a stratum variable to a different value leaves a
        // zero-mass stratum; those are skipped, not errors.
        bool conflict = false;
        for (const auto& [n, v] : z)
            if (q.evidence.count(n) && q.evidence.at(n) != v) conflict = true;
        Rat p_ze = conflict ? Rat(0) : joint.mass_where(z_and_e);
        if (p_ze == 0) {
            ++r.strata_skipped;
        } else {
            Assignment cond = substitution;
            for (const auto& [n, v] : z) cond[n] = v;
            Rat denom = joint.mass_where(cond);
            if (denom == 0)
                throw PositivityError("conditioning event has no observational mass");
            Assignment cond_y = cond;
            cond_y[q.label_name] = q.outcome;
            r.value += (joint.mass_where(cond_y) / denom) * (p_ze / r.evidence_mass);
        }

        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < supports[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return r;
}

// Same estimator, fed from the model's own observational joint, with the
// admissibility flag filled in from the induced diagram.
inline CtfResult closed_form(const Scm& scm, const std::vector<std::string>& T, const Query& q) {
    ctf_detail::require_query(scm, q);
    CtfResult r = closed_form(scm.full_joint(), T, q);
    r.admissible = query_admissible(scm, ArchSpec::concepts(T), q);
    return r;
}

// Exact equality of the joint over endogenous variables, mixture components
// and label. Mismatched variable names, mixture signatures or label names are
// structural errors; differing probabilities are an honest `false`.
inline bool obs_equivalent(const Scm& a, const Scm& b) {
    std::set<std::string> va, vb;
    for (const auto& n : a.var_names()) va.insert(n);
    for (const auto& n : b.var_names()) vb.insert(n);
    if (va != vb) throw std::invalid_argument("models declare different endogenous variables");
    if (a.mixture_name() != b.mixture_name() || a.components() != b.components())
        throw std::invalid_argument("models declare different mixture signatures");
    if (a.label_name() != b.label_name())
        throw std::invalid_argument("models declare different label names");
    std::set<std::string> cols_set(a.observables().begin(), a.observables().end());
    std::vector<std::string> cols(cols_set.begin(), cols_set.end());
    cols.push_back(a.label_name());
    return observational_joint(a, cols) == observational_joint(b, cols);
}

// Oracle answers of two observationally equivalent models on the same query,
// with their absolute gap. A positive gap certifies that no estimator reading
// observational data alone can answer the query for every model of the class.
struct WitnessTriple {
    Rat left{0}, right{0}, gap{0};
};

inline WitnessTriple divergence_witness(const Scm& a, const Scm& b, const Query& q) {
    if (!obs_equivalent(a, b))
        throw std::invalid_argument("models are not observationally equivalent");
    WitnessTriple w;
    w.left = oracle(a, q).value;
    w.right = oracle(b, q).value;
    w.gap = w.left >= w.right ? w.left - w.right : w.right - w.left;
    return w;
}

// ------------------------------------------------------------------ tradeoff

// One architecture evaluated against one query: classifier accuracy, the
// interpretability flag, both evaluations of the query as declared, and the
// mean |closed - oracle| over every positive-mass full assignment of the
// mixture components used as evidence, weighted by its probability.
struct TradeoffRow {
    std::string arch_text;
    std::string query_name;
    Rat accuracy{0};
    bool admissible = false;
    Rat estimate{0};
    Rat oracle_value{0};
    Rat abs_error{0};
    Rat mean_error{0};
};

struct TradeoffReport {
    std::vector<TradeoffRow> rows;

    void write_csv(std::ostream& out) const {
        out << "arch,query,accuracy,admissible,estimate,oracle,abs_error\n";
        for (const auto& r : rows) {
            out << csv_cell(r.arch_text) << "," << csv_cell(r.query_name) << ","
                << csv_cell(prob_cell(r.accuracy)) << "," << (r.admissible ? "true" : "false")
                << "," << csv_cell(prob_cell(r.estimate)) << ","
                << csv_cell(prob_cell(r.oracle_value)) << ","
                << csv_cell(prob_cell(r.abs_error)) << "\n";
        }
    }
};

// Retrains the model's bayes label on each architecture and scores every
// (architecture, query) pair. Architectures must be concept architectures;
// the model's own label must be a bayes classifier (so there is a ground
// truth to retrain against).
inline TradeoffReport tradeoff_report(const Scm& scm, const std::vector<Query>& queries,
                                      const std::vector<ArchSpec>& archs) {
    if (!scm.block().label.is_bayes)
        throw std::invalid_argument("tradeoff analysis needs a bayes label");
    CausalDiagram g = induce_diagram(scm);
    JointTable comp_joint = observational_joint(scm, scm.components());

    TradeoffReport report;
    for (const auto& arch : archs) {
        if (arch.all_pixels)
            throw std::invalid_argument("tradeoff architectures must be concept architectures");
        Scm variant = with_bayes_arch(scm, arch.features);
        FeatureSet arch_set(arch.features.begin(), arch.features.end());
        for (const auto& q : queries) {
            TradeoffRow row;
            row.arch_text = set_text(arch_set);
            row.query_name = q.name;
            row.accuracy = variant.classifier()->accuracy;
            row.admissible = query_admissible(variant, arch, q);
            row.estimate = closed_form(variant.full_joint(), arch.features, q).value;
            row.oracle_value = oracle(variant, q).value;
            row.abs_error = row.estimate >= row.oracle_value ? row.estimate - row.oracle_value
                                                             : row.oracle_value - row.estimate;
            for (const auto& [key, px] : comp_joint.rows) {
                Query qx = q;
                qx.evidence.clear();
                for (std::size_t i = 0; i < comp_joint.vars.size(); ++i)
                    qx.evidence[comp_joint.vars[i]] = key[i];
                Rat o = oracle(variant, qx).value;
                Rat c = closed_form(variant.full_joint(), arch.features, qx).value;
                row.mean_error += px * (o >= c ? o - c : c - o);
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace ascm
