// Acceptance harness: nine end-to-end criteria, one verdict line each.
// Runs without any test framework so the output is just the checklist.

#include "helpers.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#ifndef ASCM_CLI_PATH
#error "ASCM_CLI_PATH must point at the built binary"
#endif

namespace {

using namespace ascm;
using testutil::Bundle;
using testutil::load_query;
using testutil::load_scm;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}

std::string joint_csv(const JointTable& j) {
    std::ostringstream out;
    j.write_csv(out);
    return out.str();
}

// ---------------------------------------------------------------- criterion 1

void c1_language_roundtrip(std::string& note) {
    const Bundle& b = Bundle::get();
    std::size_t scms = 0, queries = 0;
    for (const auto& f : b.files) {
        scms += f.scms.size();
        queries += f.queries.size();
        std::string once = render_source(f);
        require(parse_source(once) == f, "reparse of rendered text changed the AST");
        require(render_source(parse_source(once)) == once, "rendering is not stable");
    }
    require(scms == 8, "expected 8 bundled models, saw " + std::to_string(scms));
    require(queries == 9, "expected 9 bundled queries, saw " + std::to_string(queries));

    for (const auto& f : b.files)
        for (const auto& s : f.scms)
            require(Scm(s).full_joint().total() == 1,
                    "joint of '" + s.name + "' does not sum to 1");

    JointTable bar = load_scm("barmnist").full_joint();
    require(bar.mass_where({{"D", 0}, {"C", 0}, {"B", 0}, {"Y", 0}}) == rat(51, 200),
            "barmnist all-zero cell is off");
    require(bar.mass_where({{"D", 1}, {"C", 1}, {"B", 1}, {"Y", 1}}) == rat(231, 1000),
            "barmnist all-one cell is off");

    require(load_scm("face_cp").full_joint().mass_where({{"F", 0}, {"S", 1}, {"C", 1}}) ==
                rat(18, 125),
            "face evidence cell is off");

    std::string chain = joint_csv(load_scm("barmnist_chain").full_joint().marginal({"B", "D"}));
    require(chain ==
                "B,D,prob\n0,0,1/5 (0.2)\n0,1,1/5 (0.2)\n1,0,3/50 (0.06)\n1,1,27/50 (0.54)\n",
            "chain (B,D) marginal is off");
    note = std::to_string(scms) + " models and " + std::to_string(queries) +
           " queries parse, round-trip, and give the recorded joints";
}

// ---------------------------------------------------------------- criterion 2

void c2_diagrams_and_criterion(std::string& note) {
    CausalDiagram bar = induce_diagram(load_scm("barmnist"));
    require(bar.export_text() ==
                "B -> X\nB -> Y\nB -> Yhat\nC -> X\nC -> Y\nC -> Yhat\nD -> B\nD -> X\n"
                "D -> Y\nD -> Yhat\nC <-> D\n",
            "barmnist diagram is off");
    CausalDiagram chain = induce_diagram(load_scm("barmnist_chain"));
    require(chain.export_text() == "B -> C\nB -> D\nB -> Dhat\nB -> X\nC -> D\nC -> X\nD -> X\n",
            "chain diagram is off");

    ArchCheck full = check_architecture(bar, ArchSpec::concepts({"B", "D", "C"}), {"D"});
    require(!full.admissible && full.violators == std::vector<std::string>{"B"},
            "full barmnist architecture should fail on B alone");
    require(check_architecture(bar, ArchSpec::concepts({"D", "C"}), {"D"}).admissible,
            "{C,D} should be admissible for W={D}");

    CausalDiagram face = induce_diagram(load_scm("face_bp"));
    require(check_architecture(face, architecture_of(load_scm("face_bp")), {"S"}).reason ==
                ArchCheck::Reason::MixtureBlackbox,
            "mixture-reading label must be inadmissible");
    ArchSpec hybrid{true, {"F"}};
    require(check_architecture(face, hybrid, {"S"}).reason == ArchCheck::Reason::MixtureHybrid,
            "mixture-plus-features label must be inadmissible");

    CausalDiagram gcp = induce_diagram(load_scm("face_gcp"));
    QueryFamily fam_s;
    fam_s.insert(FeatureSet{"S"});
    require(max_t_admissible(gcp, fam_s) == FeatureSet{"F", "S"}, "face maximal set is off");
    require(t_admissible(gcp, fam_s).members ==
                std::set<FeatureSet>{{}, {"F"}, {"S"}, {"F", "S"}},
            "face admissible lattice is off");

    QueryFamily fam_d;
    fam_d.insert(FeatureSet{"D"});
    require(max_t_admissible(bar, fam_d) == FeatureSet{"C", "D"}, "barmnist maximal set is off");

    QueryFamily fam_bd;
    fam_bd.insert(FeatureSet{"B"});
    fam_bd.insert(FeatureSet{"D"});
    require(max_t_admissible(chain, fam_bd) == FeatureSet{"B"}, "chain maximal set is off");

    require(w_admissible(gcp, architecture_of(load_scm("face_gcp"))).members.size() == 7,
            "every nonempty target set should accept the {F,S} label");
    require(w_admissible(induce_diagram(load_scm("face_cp")),
                         architecture_of(load_scm("face_cp")))
                    .members ==
                std::set<FeatureSet>{{"C"}, {"C", "F"}, {"C", "F", "S"}, {"C", "S"}, {"F"}},
            "face_cp admissible target sets are off");
    note = "frozen diagrams, criterion verdicts, and admissible families all match";
}

// ---------------------------------------------------------------- criterion 3

void c3_equivalence_witnesses(std::string& note) {
    Scm bp = load_scm("face_bp"), bp_alt = load_scm("face_bp_alt");
    Scm cp = load_scm("face_cp"), cp_alt = load_scm("face_cp_alt");
    Scm gcp = load_scm("face_gcp"), gcp_alt = load_scm("face_gcp_alt");
    require(obs_equivalent(bp, bp_alt), "blackbox pair must be observationally equivalent");
    require(obs_equivalent(cp, cp_alt), "pipeline pair must be observationally equivalent");
    require(obs_equivalent(gcp, gcp_alt), "admissible pair must be observationally equivalent");
    require(!obs_equivalent(cp, gcp), "cp and gcp share data but differ as models");

    WitnessTriple wbp = divergence_witness(bp, bp_alt, load_query("q_bp"));
    require(wbp.left == 0 && wbp.right == 1 && wbp.gap == 1, "blackbox witness gap is off");
    WitnessTriple wcp = divergence_witness(cp, cp_alt, load_query("q_cp"));
    require(wcp.left == rat(3, 10) && wcp.right == rat(1, 2) && wcp.gap == rat(1, 5),
            "pipeline witness gap is off");
    WitnessTriple wgcp = divergence_witness(gcp, gcp_alt, load_query("q_gcp"));
    require(wgcp.left == 0 && wgcp.right == 0 && wgcp.gap == 0,
            "admissible pair must agree on the query");
    note = "equivalent pairs split on the blackbox and pipeline queries (gaps 1 and 1/5), agree "
           "on the admissible one";
}

// ---------------------------------------------------------------- criterion 4

void c4_closed_form(std::string& note) {
    Scm gcp = load_scm("face_gcp");
    Query q_gcp = load_query("q_gcp");
    CtfResult closed = closed_form(gcp, architecture_of(gcp).features, q_gcp);
    require(closed.admissible, "gcp query should be admissible");
    require(closed.value == 0 && oracle(gcp, q_gcp).value == 0, "gcp values should agree at 0");
    require(closed.strata_skipped == 1, "gcp estimator should skip one empty stratum");

    Scm cp = load_scm("face_cp");
    Query q_cp = load_query("q_cp");
    CtfResult wrong = closed_form(cp, architecture_of(cp).features, q_cp);
    require(!wrong.admissible, "cp query must be flagged inadmissible");
    require(wrong.value == 1 && oracle(cp, q_cp).value == rat(3, 10),
            "cp estimator should miss the oracle (1 vs 3/10)");
    require(wrong.evidence_mass == rat(18, 125) && wrong.strata_skipped == 3,
            "cp evidence bookkeeping is off");

    Scm narrowed = with_bayes_arch(load_scm("barmnist"), {"D", "C"});
    Query q_digit = load_query("q_digit");
    CtfResult good = closed_form(narrowed, {"D", "C"}, q_digit);
    require(good.admissible && good.value == rat(1, 2) &&
                oracle(narrowed, q_digit).value == rat(1, 2),
            "admissible barmnist estimate should equal the oracle at 1/2");

    Scm chain = load_scm("barmnist_chain");
    Query q_bar = load_query("q_bar");
    require(oracle(chain, q_bar).value == 0 && closed_form(chain, {"B"}, q_bar).value == 0,
            "chain narrow-architecture values should agree at 0");

    Scm wide = with_bayes_arch(chain, {"B", "C"});
    for (long long d = 0; d <= 1; ++d) {
        Query qx = q_bar;
        qx.evidence = {{"B", 1}, {"C", 1}, {"D", d}};
        CtfResult div = closed_form(wide, {"B", "C"}, qx);
        require(!div.admissible && div.value == 1 && oracle(wide, qx).value == rat(1, 2),
                "inadmissible chain estimate should diverge (1 vs 1/2)");
    }

    Query up = q_bar;
    up.intervention = {{"B", 1}};
    bool raised = false;
    try {
        closed_form(wide, {"B", "C"}, up);
    } catch (const PositivityError&) {
        raised = true;
    }
    require(raised, "estimator must refuse a zero-mass conditioning event");
    oracle(wide, up);  // the oracle has no positivity requirement
    note = "estimator equals the oracle exactly when admissible, diverges or refuses when not";
}

// ---------------------------------------------------------------- criterion 5

void c5_random_estimator_corpus(std::string& note) {
    Rng rng(101);
    std::size_t models = 0, pairs = 0, evaluations = 0, positivity_skips = 0;
    const std::array<std::pair<std::size_t, int>, 3> plan = {{{2, 100}, {3, 250}, {4, 150}}};
    for (const auto& [n_features, count] : plan) {
        for (int i = 0; i < count; ++i) {
            ScmBlock base = random_binary_scm(rng, n_features);
            ++models;
            Scm probe(base);
            CausalDiagram g = induce_diagram(probe);
            JointTable comp = observational_joint(probe, probe.components());
            std::vector<std::string> feats = probe.components();
            const std::size_t n = feats.size();
            for (std::size_t t_mask = 0; t_mask >> n == 0; ++t_mask) {
                FeatureSet T;
                for (std::size_t k = 0; k < n; ++k)
                    if (t_mask >> k & 1) T.insert(feats[k]);
                std::shared_ptr<Scm> variant;
                for (std::size_t w_mask = 1; w_mask >> n == 0; ++w_mask) {
                    FeatureSet W;
                    for (std::size_t k = 0; k < n; ++k)
                        if (w_mask >> k & 1) W.insert(feats[k]);
                    if (!check_architecture(g, ArchSpec::concepts({T.begin(), T.end()}), W)
                             .admissible)
                        continue;
                    if (!variant) variant = std::make_shared<Scm>(with_random_label(rng, base, T));
                    ++pairs;
                    std::vector<std::string> wvars(W.begin(), W.end());
                    for (std::size_t a_mask = 0; a_mask >> wvars.size() == 0; ++a_mask) {
                        Query q;
                        q.name = "probe";
                        q.label_name = "L";
                        for (std::size_t k = 0; k < wvars.size(); ++k)
                            q.intervention[wvars[k]] = static_cast<long long>(a_mask >> k & 1);
                        for (const auto& [key, p] : comp.rows) {
                            (void)p;
                            for (std::size_t k = 0; k < comp.vars.size(); ++k)
                                q.evidence[comp.vars[k]] = key[k];
                            for (long long y = 0; y <= 1; ++y) {
                                q.outcome = y;
                                CtfResult lhs;
                                try {
                                    lhs = closed_form(*variant, {T.begin(), T.end()}, q);
                                } catch (const PositivityError&) {
                                    // The identity presumes the forced T-values
                                    // co-occur with each stratum; skip when the
                                    // data cannot support the formula.
                                    ++positivity_skips;
                                    continue;
                                }
                                require(lhs.admissible,
                                        "estimator disagrees with the criterion on admissibility");
                                Rat rhs = oracle(*variant, q).value;
                                require(lhs.value == rhs,
                                        "estimator mismatch on a random model: closed " +
                                            fraction_string(lhs.value) + " vs oracle " +
                                            fraction_string(rhs));
                                ++evaluations;
                            }
                        }
                    }
                }
            }
        }
    }
    require(models == 500 && pairs > 10000 && evaluations > 100000,
            "random corpus smaller than intended");
    note = std::to_string(models) + " models, " + std::to_string(pairs) +
           " admissible pairs with every intervention and evidence, " +
           std::to_string(evaluations) + " evaluations all exact, " +
           std::to_string(positivity_skips) + " positivity skips";
}

// ---------------------------------------------------------------- criterion 6

void c6_random_lattices(std::string& note) {
    Rng rng(103);
    std::size_t lattice_members = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        std::size_t n = 1 + rand_below(rng, 8);
        CausalDiagram g = random_dag(rng, n);
        QueryFamily fam = random_family(rng, g, 3);
        FeatureSet maxt = max_t_admissible(g, fam);
        FamilyResult lattice = t_admissible(g, fam);
        require(!lattice.truncated, "uncapped enumeration must not truncate");
        require(lattice.members.count(maxt) == 1, "maximal set missing from the lattice");
        for (const auto& T : lattice.members)
            for (const auto& t : T)
                require(maxt.count(t) == 1, "lattice member escapes the maximal set");
        require(lattice.members.size() == std::size_t{1} << maxt.size(),
                "lattice is not the full downward closure of the maximal set");
        lattice_members += lattice.members.size();

        std::vector<std::string> feats(g.feature_nodes.begin(), g.feature_nodes.end());
        FeatureSet T2, T1;
        for (const auto& f : feats)
            if (rand_chance(rng, 1, 2)) T2.insert(f);
        for (const auto& f : T2)
            if (rand_chance(rng, 1, 2)) T1.insert(f);
        QueryFamily wider = fam;
        wider.insert(*random_family(rng, g, 1).begin());
        require(check_tradeoff(g, T1, T2, fam, wider).holds,
                "growing the feature set or query family must shrink the admissible side");
    }
    note = "1000 random graphs: formula matches lattice search (" +
           std::to_string(lattice_members) + " member sets), monotonicity holds";
}

// ---------------------------------------------------------------- criterion 7

void c7_retraining_tradeoff(std::string& note) {
    Scm chain = load_scm("barmnist_chain");
    const BayesClassifier* cls = chain.classifier();
    require(cls != nullptr, "chain label should train a classifier");
    require(cls->accuracy == rat(37, 50), "chain classifier accuracy is off");
    require(cls->apply({0}) == 0 && cls->apply({1}) == 1, "chain classifier table is off");

    Scm bar = load_scm("barmnist");
    require(bayes_classifier(bar, "Y", {"D"}).accuracy == rat(173, 250),
            "single-feature retrain accuracy is off");

    std::vector<ArchSpec> archs = {ArchSpec::concepts({"B", "D", "C"}),
                                   ArchSpec::concepts({"B", "D"}),
                                   ArchSpec::concepts({"D", "C"}), ArchSpec::concepts({"D"})};
    std::vector<Rat> accuracy = {rat(9, 10), rat(1633, 2250), rat(213, 250), rat(173, 250)};
    for (std::size_t a = 0; a < archs.size(); ++a)
        require(with_bayes_arch(bar, archs[a].features).classifier()->accuracy == accuracy[a],
                "retrained accuracy is off for " + archs[a].display());

    TradeoffReport rep =
        tradeoff_report(bar, {load_query("q_digit"), load_query("q_color")}, archs);
    require(rep.rows.size() == 8, "tradeoff grid should have 8 rows");
    std::vector<bool> digit_adm = {false, false, true, true};
    std::vector<Rat> digit_mean = {rat(9, 50), rat(9, 20), rat(0), rat(0)};
    for (std::size_t a = 0; a < archs.size(); ++a) {
        const TradeoffRow& digit = rep.rows[2 * a];
        const TradeoffRow& color = rep.rows[2 * a + 1];
        require(digit.query_name == "q_digit" && color.query_name == "q_color",
                "tradeoff row order is off");
        require(digit.accuracy == accuracy[a] && color.accuracy == accuracy[a],
                "tradeoff accuracy column is off");
        require(digit.admissible == digit_adm[a], "digit admissibility flag is off");
        require(digit.mean_error == digit_mean[a], "digit mean error is off");
        require(color.admissible && color.abs_error == 0 && color.mean_error == 0,
                "color query should be exact under every architecture");
        if (digit.admissible)
            require(digit.abs_error == 0 && digit.estimate == digit.oracle_value,
                    "admissible rows must be exact");
    }
    require(rep.rows[0].estimate == rat(619, 900) && rep.rows[0].oracle_value == rat(19, 36),
            "full-architecture digit row is off");
    require(rep.rows[2].estimate == rat(41, 90) && rep.rows[2].oracle_value == rat(1, 18),
            "{B,D} digit row is off");

    std::ostringstream csv;
    rep.write_csv(csv);
    require(csv.str().rfind("arch,query,accuracy,admissible,estimate,oracle,abs_error\n", 0) == 0,
            "tradeoff CSV header is off");
    require(csv.str().find("\"[\"\"B\"\",\"\"C\"\",\"\"D\"\"]\",q_digit,9/10 (0.9),false") !=
                std::string::npos,
            "tradeoff CSV row encoding is off");
    note = "accuracy falls 9/10 to 173/250 while the digit query turns exact; every admissible "
           "row matches the oracle";
}

// ---------------------------------------------------------------- criterion 8

void c8_determinism(std::string& note) {
    std::string face_text = testutil::slurp(std::string(ASCM_MODELS_DIR) + "/face.scm");
    SourceFile first = parse_source(face_text), second = parse_source(face_text);
    require(render_source(first) == render_source(second), "parsing is not deterministic");
    require(joint_csv(Scm(first.scms.at(4)).full_joint()) ==
                joint_csv(Scm(second.scms.at(4)).full_joint()),
            "joint computation is not deterministic");

    auto report_csv = [] {
        Scm bar = load_scm("barmnist");
        TradeoffReport rep = tradeoff_report(
            bar, {load_query("q_digit"), load_query("q_color")},
            {ArchSpec::concepts({"B", "D", "C"}), ArchSpec::concepts({"D"})});
        std::ostringstream out;
        rep.write_csv(out);
        return out.str();
    };
    require(report_csv() == report_csv(), "tradeoff report is not deterministic");

    auto generated = [] {
        Rng rng(77);
        ScmBlock base = random_binary_scm(rng, 4);
        ScmBlock labeled = with_random_label(rng, base, {"F0", "F2"});
        SourceFile f;
        f.scms.push_back(labeled);
        return render_source(f) + joint_csv(Scm(labeled).full_joint());
    };
    require(generated() == generated(), "seeded generation is not deterministic");
    note = "reparsing, joints, reports, and seeded generation reproduce byte for byte";
}

// ---------------------------------------------------------------- criterion 9

void c9_cli_suite(std::string& note) {
    std::string out_path = "/tmp/ascm_acceptance_suite.txt";
    std::string cmd = std::string(ASCM_CLI_PATH) + " paper-suite >" + out_path + " 2>&1";
    int status = std::system(cmd.c_str());
    require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
            "command-line suite exited with a failure");
    std::string text = testutil::slurp(out_path);
    std::remove(out_path.c_str());
    require(text.find("FAIL") == std::string::npos, "command-line suite reported a failure");
    require(text.find("suite passed") != std::string::npos, "suite trailer missing");

    std::size_t checks = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line == "suite passed") continue;
        require(line.front() == '[' && line.find("] PASS ") != std::string::npos,
                "unexpected suite line: " + line);
        ++checks;
    }
    require(checks == 24, "expected 24 suite checks, saw " + std::to_string(checks));
    for (const char* tag :
         {"bp-witness", "cp-witness", "gcp-agreement", "face-joint", "face-maxt", "face-wad",
          "barmnist-joint", "barmnist-bayes", "barmnist-maxt", "barmnist-tradeoff",
          "chain-divergence", "maxt-random", "wad-random", "estimator-random"})
        require(text.find("[" + std::string(tag) + "] PASS") != std::string::npos,
                std::string("suite section missing: ") + tag);
    note = "24 checks across 14 sections replayed green through the installed binary";
}

// -------------------------------------------------------------------- harness

struct Criterion {
    const char* id;
    const char* title;
    void (*fn)(std::string&);
    double budget_s;  // 0 = no budget enforced
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"C1", "model language round-trips and reproduces the recorded joints",
         c1_language_roundtrip, 1.0},
        {"C2", "induced diagrams and the interpretability criterion match the worked cases",
         c2_diagrams_and_criterion, 1.0},
        {"C3", "equivalent model pairs certify which queries observation cannot fix",
         c3_equivalence_witnesses, 5.0},
        {"C4", "the closed-form estimator is exact when admissible and honest when not",
         c4_closed_form, 5.0},
        {"C5", "the estimator survives an exhaustive random-model corpus",
         c5_random_estimator_corpus, 300.0},
        {"C6", "the maximal-set formula agrees with lattice search on random graphs",
         c6_random_lattices, 60.0},
        {"C7", "retraining across architectures trades accuracy for faithfulness as scored",
         c7_retraining_tradeoff, 30.0},
        {"C8", "every pipeline is a pure function of its inputs", c8_determinism, 30.0},
        {"C9", "the bundled case studies replay end to end through the command line",
         c9_cli_suite, 30.0},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string note;
        bool ok = false;
        std::string error;
        try {
            c.fn(note);
            ok = true;
        } catch (const std::exception& e) {
            error = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && c.budget_s > 0 && elapsed > c.budget_s) {
            ok = false;
            error = "finished but blew the " + std::to_string(c.budget_s) + "s budget";
        }
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(elapsed < 10 ? 3 : 1);
        line << (ok ? "PASS " : "FAIL ") << c.id << " " << c.title << " (" << elapsed << "s)";
        if (ok && !note.empty()) line << " -- " << note;
        if (!ok) line << ": " << error;
        std::cout << line.str() << "\n" << std::flush;
        if (!ok) ++failures;
    }
    std::cout << (failures == 0 ? "acceptance: all 9 criteria passed"
                                : "acceptance: " + std::to_string(failures) + " criteria FAILED")
              << "\n";
    return failures == 0 ? 0 : 1;
}
