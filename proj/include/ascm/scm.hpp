#pragma once

// Model semantics: compile a parsed scm block into an evaluable structural
// causal model, enumerate its exogenous state space, form intervened
// submodels, and reduce everything observable to exact joint tables.
//
// A model owns a slot layout (exogenous variables first, then endogenous ones
// in declaration order) and evaluates mechanisms over a flat state vector, so
// the enumeration loops never touch string keys. Assignments (name -> value
// maps) appear only at the public edges.
//
// The "observables" of a model are what a dataset drawn from it would record:
// every endogenous variable plus every exogenous variable that is a mixture
// component. Labels are deterministic functions of their declared features; a
// bayes(TARGET) label is materialized once, from the observational
// distribution of the unintervened model, as an argmax lookup table with ties
// broken toward the smaller label value. Submodels inherit that table frozen,
// which is what makes counterfactuals about a trained classifier meaningful.

#include "dsl.hpp"

#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ascm {

using Assignment = std::map<std::string, long long>;

// RFC-style CSV cell quoting: wrap and double the quotes only when needed.
inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// ---------------------------------------------------------------- JointTable

// Exact probability table over an ordered variable list. Rows are keyed by
// the value tuple in the same order; iteration order is the map order, so
// every export is deterministic.
struct JointTable {
    std::vector<std::string> vars;
    std::map<std::vector<long long>, Rat> rows;

    bool operator==(const JointTable&) const = default;

    Rat total() const {
        Rat s = 0;
        for (const auto& [k, p] : rows) { (void)k; s += p; }
        return s;
    }

    int index_of(const std::string& v) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == v) return static_cast<int>(i);
        throw std::invalid_argument("joint table has no column '" + v + "'");
    }

    // Projection onto `keep`, in the given order. Zero-mass rows never arise
    // (sums of positive rationals stay positive).
    JointTable marginal(const std::vector<std::string>& keep) const {
        std::vector<int> idx;
        for (const auto& v : keep) idx.push_back(index_of(v));
        JointTable out;
        out.vars = keep;
        for (const auto& [key, p] : rows) {
            std::vector<long long> sub;
            sub.reserve(idx.size());
            for (int i : idx) sub.push_back(key[i]);
            out.rows[sub] += p;
        }
        return out;
    }

    // Total mass of rows consistent with `cond` (all of whose names must be
    // columns of this table).
    Rat mass_where(const Assignment& cond) const {
        std::vector<std::pair<int, long long>> tests;
        for (const auto& [n, v] : cond) tests.emplace_back(index_of(n), v);
        Rat s = 0;
        for (const auto& [key, p] : rows) {
            bool ok = true;
            for (const auto& [i, v] : tests)
                if (key[i] != v) { ok = false; break; }
            if (ok) s += p;
        }
        return s;
    }

    // Sorted value support of one column.
    std::vector<long long> support(const std::string& v) const {
        int i = index_of(v);
        std::set<long long> vals;
        for (const auto& [key, p] : rows) { (void)p; vals.insert(key[i]); }
        return {vals.begin(), vals.end()};
    }

    // Header `v1,...,vk,prob`; probability cells carry the exact fraction and
    // a decimal rendering side by side.
    void write_csv(std::ostream& out) const {
        for (const auto& v : vars) out << v << ",";
        out << "prob\n";
        for (const auto& [key, p] : rows) {
            for (long long v : key) out << v << ",";
            out << prob_cell(p) << "\n";
        }
    }
};

// ----------------------------------------------------------- BayesClassifier

// Deterministic argmax-of-posterior classifier materialized as a lookup
// table. `fallback` answers feature tuples never seen in the observational
// support (reachable only under interventions): the overall majority value of
// the target, ties toward the smaller value.
struct BayesClassifier {
    std::string target;
    std::vector<std::string> features;
    std::map<std::vector<long long>, long long> table;
    long long fallback = 0;
    Rat accuracy{0};  // P(prediction = target) under the training distribution

    long long apply(const std::vector<long long>& key) const {
        auto it = table.find(key);
        return it != table.end() ? it->second : fallback;
    }
};

// ------------------------------------------------------- compiled mechanisms

namespace scm_detail {

// Expression tree flattened into a pool with variable references resolved to
// state-vector slots. Logical operators read truthiness (nonzero) and yield
// 0/1; arithmetic is plain integer arithmetic.
struct CompiledExpr {
    struct Node {
        ExprKind kind;
        long long value = 0;
        int slot = -1;
        int a = -1, b = -1;
    };
    std::vector<Node> nodes;  // root is the last node

    long long eval(const std::vector<long long>& st) const {
        return eval_node(static_cast<int>(nodes.size()) - 1, st);
    }

  private:
    long long eval_node(int i, const std::vector<long long>& st) const {
        const Node& n = nodes[i];
        switch (n.kind) {
            case ExprKind::Constant: return n.value;
            case ExprKind::VarRef: return st[n.slot];
            case ExprKind::Not: return eval_node(n.a, st) == 0 ? 1 : 0;
            case ExprKind::Indicator: return eval_node(n.a, st) != 0 ? 1 : 0;
            case ExprKind::And:
                return eval_node(n.a, st) != 0 && eval_node(n.b, st) != 0 ? 1 : 0;
            case ExprKind::Or:
                return eval_node(n.a, st) != 0 || eval_node(n.b, st) != 0 ? 1 : 0;
            case ExprKind::Xor:
                return (eval_node(n.a, st) != 0) != (eval_node(n.b, st) != 0) ? 1 : 0;
            case ExprKind::Add: return eval_node(n.a, st) + eval_node(n.b, st);
            case ExprKind::Sub: return eval_node(n.a, st) - eval_node(n.b, st);
            case ExprKind::Mul: return eval_node(n.a, st) * eval_node(n.b, st);
            case ExprKind::Less: return eval_node(n.a, st) < eval_node(n.b, st) ? 1 : 0;
            case ExprKind::Greater: return eval_node(n.a, st) > eval_node(n.b, st) ? 1 : 0;
            case ExprKind::Equal: return eval_node(n.a, st) == eval_node(n.b, st) ? 1 : 0;
        }
        return 0;
    }
};

inline int compile_into(const ExprPtr& e, const std::map<std::string, int>& slots,
                        CompiledExpr& out) {
    CompiledExpr::Node n;
    n.kind = e->kind;
    switch (e->kind) {
        case ExprKind::Constant: n.value = e->value; break;
        case ExprKind::VarRef: n.slot = slots.at(e->name); break;
        default:
            n.a = compile_into(e->a, slots, out);
            if (e->b) n.b = compile_into(e->b, slots, out);
            break;
    }
    out.nodes.push_back(n);
    return static_cast<int>(out.nodes.size()) - 1;
}

inline CompiledExpr compile(const ExprPtr& e, const std::map<std::string, int>& slots) {
    CompiledExpr c;
    compile_into(e, slots, c);
    return c;
}

}  // namespace scm_detail

// ----------------------------------------------------------------------- Scm

class Scm {
  public:
    explicit Scm(ScmBlock block) : block_(std::move(block)) {
        for (const auto& e : block_.exos) add_slot(e.name);
        exo_count_ = static_cast<int>(slot_names_.size());
        for (const auto& v : block_.vars) add_slot(v.name);

        std::map<std::string, int> var_index;
        for (size_t i = 0; i < block_.vars.size(); ++i)
            var_index[block_.vars[i].name] = static_cast<int>(i);
        mech_.resize(block_.vars.size());
        for (size_t i = 0; i < block_.vars.size(); ++i)
            mech_[i] = scm_detail::compile(block_.vars[i].fn, slots_);
        for (const auto& name : topological_var_order(block_))
            eval_order_.push_back(var_index.at(name));

        for (const auto& v : block_.vars) observables_.push_back(v.name);
        for (const auto& c : block_.mixture.components)
            if (slots_.at(c) < exo_count_) observables_.push_back(c);

        if (!block_.label.is_bayes) label_expr_ = scm_detail::compile(block_.label.fn, slots_);
    }

    const std::string& name() const { return block_.name; }
    const ScmBlock& block() const { return block_; }
    const std::string& mixture_name() const { return block_.mixture.name; }
    const std::string& label_name() const { return block_.label.name; }
    const std::vector<std::string>& components() const { return block_.mixture.components; }
    const std::vector<std::string>& observables() const { return observables_; }

    std::vector<std::string> exo_names() const {
        std::vector<std::string> out;
        for (const auto& e : block_.exos) out.push_back(e.name);
        return out;
    }
    std::vector<std::string> var_names() const {
        std::vector<std::string> out;
        for (const auto& v : block_.vars) out.push_back(v.name);
        return out;
    }

    bool is_endogenous(const std::string& n) const {
        auto it = slots_.find(n);
        return it != slots_.end() && it->second >= exo_count_;
    }

    int slot_of(const std::string& n) const {
        auto it = slots_.find(n);
        return it == slots_.end() ? -1 : it->second;
    }
    std::size_t state_size() const { return slot_names_.size(); }

    BigInt u_space_size() const {
        BigInt n = 1;
        for (const auto& e : block_.exos) n *= e.dist.domain_size();
        return n;
    }

    // The features the label actually reads: the classifier's feature list
    // for bayes labels, the declared uses otherwise (the component list when
    // the label reads the mixture).
    std::vector<std::string> label_features() const {
        if (block_.label.is_bayes) { ensure_classifier(); return classifier_->features; }
        if (block_.label.on_mixture) return block_.mixture.components;
        return block_.label.uses;
    }
    bool label_on_mixture() const { return block_.label.on_mixture; }

    const BayesClassifier* classifier() const {
        if (!block_.label.is_bayes) return nullptr;
        ensure_classifier();
        return classifier_.get();
    }

    bool is_intervened() const { return !forced_.empty(); }
    Assignment forced_assignment() const {
        Assignment a;
        for (const auto& [idx, v] : forced_) a[block_.vars[idx].name] = v;
        return a;
    }

    // Depth-first product walk over the exogenous state space, calling
    // fn(state, p) with the exogenous slots filled and p = P(U = u).
    // Zero-probability values are skipped, so p is always positive.
    template <class Fn>
    void for_each_u(Fn&& fn) const {
        std::vector<long long> state(state_size(), 0);
        walk_u(0, Rat(1), state, fn);
    }

    // Fills the endogenous slots from the exogenous ones already in `state`.
    void evaluate_state(std::vector<long long>& state) const {
        for (int idx : eval_order_) {
            auto it = forced_.find(idx);
            state[exo_count_ + idx] =
                it != forced_.end() ? it->second : mech_[idx].eval(state);
        }
    }

    long long label_of(const std::vector<long long>& state) const {
        if (!block_.label.is_bayes) return label_expr_.eval(state);
        ensure_classifier();
        std::vector<long long> key;
        key.reserve(classifier_slots_.size());
        for (int s : classifier_slots_) key.push_back(state[s]);
        return classifier_->apply(key);
    }

    // Full evaluation at one exogenous assignment: u must bind exactly the
    // exogenous names, each within its declared domain. The result binds the
    // exogenous variables, the endogenous ones, and the label.
    Assignment evaluate(const Assignment& u) const {
        if (u.size() != block_.exos.size())
            throw std::invalid_argument("expected one value per exogenous variable");
        std::vector<long long> state(state_size(), 0);
        for (size_t i = 0; i < block_.exos.size(); ++i) {
            const auto& e = block_.exos[i];
            auto it = u.find(e.name);
            if (it == u.end())
                throw std::invalid_argument("missing exogenous value for '" + e.name + "'");
            if (it->second < 0 || it->second >= e.dist.domain_size())
                throw std::invalid_argument("value out of range for '" + e.name + "'");
            state[i] = it->second;
        }
        evaluate_state(state);
        Assignment out = u;
        for (size_t i = 0; i < block_.vars.size(); ++i)
            out[block_.vars[i].name] = state[exo_count_ + i];
        out[block_.label.name] = label_of(state);
        return out;
    }

    // Joint over observables plus the label, computed once and cached.
    const JointTable& full_joint() const {
        ensure_joint();
        return *full_joint_;
    }

    friend Scm intervene(const Scm& scm, const Assignment& w);
    friend Scm with_bayes_arch(const Scm& scm, const std::vector<std::string>& features);

  private:
    ScmBlock block_;
    std::vector<std::string> slot_names_;
    std::map<std::string, int> slots_;
    int exo_count_ = 0;
    std::vector<scm_detail::CompiledExpr> mech_;  // by endogenous index
    std::vector<int> eval_order_;                 // endogenous indices, topological
    std::map<int, long long> forced_;             // endogenous index -> constant
    std::vector<std::string> observables_;
    scm_detail::CompiledExpr label_expr_;
    mutable std::shared_ptr<const BayesClassifier> classifier_;
    mutable std::vector<int> classifier_slots_;
    mutable std::shared_ptr<const JointTable> full_joint_;

    void add_slot(const std::string& n) {
        slots_[n] = static_cast<int>(slot_names_.size());
        slot_names_.push_back(n);
    }

    template <class Fn>
    void walk_u(int i, const Rat& p, std::vector<long long>& state, Fn&& fn) const {
        if (i == exo_count_) { fn(state, p); return; }
        const DistSpec& d = block_.exos[i].dist;
        for (int v = 0; v < d.domain_size(); ++v) {
            if (d.probs[v] == 0) continue;
            state[i] = v;
            walk_u(i + 1, p * d.probs[v], state, fn);
        }
    }

    void ensure_classifier() const {
        if (classifier_) return;
        if (is_intervened())
            throw std::logic_error("classifier must be materialized before intervening");
        auto cls = std::make_shared<BayesClassifier>();
        cls->target = block_.label.bayes_target;
        cls->features = block_.label.uses;
        int target_slot = slots_.at(cls->target);
        std::vector<int> feat_slots;
        for (const auto& f : cls->features) feat_slots.push_back(slots_.at(f));

        // One pass: joint over (features, target), plus the target marginal
        // for the fallback value.
        std::map<std::pair<std::vector<long long>, long long>, Rat> joint;
        std::map<long long, Rat> target_marginal;
        std::vector<long long> st(state_size(), 0);
        walk_u(0, Rat(1), st, [&](std::vector<long long>& state, const Rat& p) {
            evaluate_state(state);
            std::vector<long long> key;
            key.reserve(feat_slots.size());
            for (int s : feat_slots) key.push_back(state[s]);
            joint[{std::move(key), state[target_slot]}] += p;
            target_marginal[state[target_slot]] += p;
        });

        // Rows arrive grouped by feature key with target values ascending, so
        // a strict > keeps the smallest argmax per key.
        const std::vector<long long>* cur = nullptr;
        Rat best;
        for (const auto& [kt, p] : joint) {
            const auto& [key, target] = kt;
            if (!cur || *cur != key) {
                cur = &key;
                best = p;
                cls->table[key] = target;
                cls->accuracy += p;
            } else if (p > best) {
                cls->accuracy += p - best;
                best = p;
                cls->table[key] = target;
            }
        }
        Rat best_marg = -1;
        for (const auto& [v, p] : target_marginal)
            if (p > best_marg) { best_marg = p; cls->fallback = v; }

        classifier_ = std::move(cls);
        classifier_slots_ = std::move(feat_slots);
    }

    void ensure_joint() const {
        if (full_joint_) return;
        auto jt = std::make_shared<JointTable>();
        jt->vars = observables_;
        jt->vars.push_back(block_.label.name);
        std::vector<int> obs_slots;
        for (const auto& n : observables_) obs_slots.push_back(slots_.at(n));
        std::vector<long long> st(state_size(), 0);
        walk_u(0, Rat(1), st, [&](std::vector<long long>& state, const Rat& p) {
            evaluate_state(state);
            std::vector<long long> key;
            key.reserve(obs_slots.size() + 1);
            for (int s : obs_slots) key.push_back(state[s]);
            key.push_back(label_of(state));
            jt->rows[std::move(key)] += p;
        });
        full_joint_ = std::move(jt);
    }
};

// A submodel is a model with some mechanisms replaced by constants; nothing
// else about the type changes.
using Submodel = Scm;

// ------------------------------------------------------------ free functions

// Submodel M_w: replaces the mechanism of every variable in w by a constant.
// Targets must be endogenous. An empty w yields a behaviorally identical
// model. A bayes label is materialized first, from the base model, so the
// submodel predicts with the table trained on observational data.
inline Scm intervene(const Scm& scm, const Assignment& w) {
    if (scm.block_.label.is_bayes) scm.ensure_classifier();
    Scm sub(scm);
    sub.full_joint_.reset();
    for (const auto& [n, v] : w) {
        auto it = sub.slots_.find(n);
        if (it == sub.slots_.end() || it->second < sub.exo_count_)
            throw std::invalid_argument("cannot intervene on '" + n +
                                        "': not an endogenous variable");
        sub.forced_[it->second - sub.exo_count_] = v;
    }
    return sub;
}

// Exact joint distribution over the requested columns, which must be
// observables of the model or its label. Column order is as requested; rows
// are in lexicographic value order.
inline JointTable observational_joint(const Scm& scm, const std::vector<std::string>& vars) {
    return scm.full_joint().marginal(vars);
}

// Materializes the argmax classifier for P(target | features) directly from
// the model's observational distribution, without touching the model's own
// label. Feature list may be empty (constant majority classifier).
inline BayesClassifier bayes_classifier(const Scm& scm, const std::string& target,
                                        const std::vector<std::string>& features) {
    if (!scm.is_endogenous(target))
        throw std::invalid_argument("bayes target '" + target + "' is not endogenous");
    for (const auto& f : features)
        if (!scm.is_endogenous(f))
            throw std::invalid_argument("bayes feature '" + f + "' is not endogenous");
    ScmBlock b = scm.block();
    b.label.is_bayes = true;
    b.label.bayes_target = target;
    b.label.uses = features;
    b.label.on_mixture = false;
    b.label.fn = nullptr;
    Scm variant(std::move(b));
    return *variant.classifier();
}

// The same model with its bayes label retrained on a different feature set.
// The new classifier is materialized eagerly from the observational
// distribution.
inline Scm with_bayes_arch(const Scm& scm, const std::vector<std::string>& features) {
    if (!scm.block_.label.is_bayes)
        throw std::invalid_argument("label of '" + scm.name() + "' is not a bayes classifier");
    if (scm.is_intervened())
        throw std::invalid_argument("cannot retrain the classifier of a submodel");
    std::set<std::string> seen;
    for (const auto& f : features) {
        if (!scm.is_endogenous(f))
            throw std::invalid_argument("bayes feature '" + f + "' is not endogenous");
        if (!seen.insert(f).second)
            throw std::invalid_argument("duplicate bayes feature '" + f + "'");
    }
    Scm variant(scm);
    variant.block_.label.uses = features;
    variant.classifier_.reset();
    variant.classifier_slots_.clear();
    variant.full_joint_.reset();
    variant.ensure_classifier();
    return variant;
}

}  // namespace ascm
