#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace ascm;
using testutil::load_query;
using testutil::load_scm;

TEST_CASE("equivalent model pairs answer the same query differently or identically") {
    WitnessTriple bp =
        divergence_witness(load_scm("face_bp"), load_scm("face_bp_alt"), load_query("q_bp"));
    CHECK(bp.left == 0);
    CHECK(bp.right == 1);
    CHECK(bp.gap == 1);

    WitnessTriple cp =
        divergence_witness(load_scm("face_cp"), load_scm("face_cp_alt"), load_query("q_cp"));
    CHECK(cp.left == rat(3, 10));
    CHECK(cp.right == rat(1, 2));
    CHECK(cp.gap == rat(1, 5));

    WitnessTriple gcp =
        divergence_witness(load_scm("face_gcp"), load_scm("face_gcp_alt"), load_query("q_gcp"));
    CHECK(gcp.left == 0);
    CHECK(gcp.right == 0);
    CHECK(gcp.gap == 0);
}

TEST_CASE("observational equivalence distinguishes values from structure") {
    CHECK(obs_equivalent(load_scm("face_bp"), load_scm("face_bp_alt")));
    CHECK(obs_equivalent(load_scm("face_cp"), load_scm("face_cp_alt")));
    CHECK(obs_equivalent(load_scm("face_gcp"), load_scm("face_gcp_alt")));
    // Same signature, different label function: an honest false.
    CHECK_FALSE(obs_equivalent(load_scm("face_cp"), load_scm("face_gcp")));
    CHECK_THROWS_WITH(divergence_witness(load_scm("face_cp"), load_scm("face_gcp"),
                                         load_query("q_cp")),
                      Catch::Matchers::ContainsSubstring("not observationally equivalent"));
    // Different mixture signature: a structural error, not a verdict.
    CHECK_THROWS_WITH(obs_equivalent(load_scm("face_bp"), load_scm("face_cp")),
                      Catch::Matchers::ContainsSubstring("different mixture signatures"));
    CHECK_THROWS_WITH(obs_equivalent(load_scm("face_cp"), load_scm("barmnist")),
                      Catch::Matchers::ContainsSubstring("different endogenous variables"));

    std::string a = "scm a { exo u ~ bernoulli(1/2) var V = u mixture X = tuple(V)"
                    " label L1 uses {V} = V }";
    std::string b = "scm b { exo u ~ bernoulli(1/2) var V = u mixture X = tuple(V)"
                    " label L2 uses {V} = V }";
    CHECK_THROWS_WITH(obs_equivalent(Scm(parse_source(a).scms.at(0)),
                                     Scm(parse_source(b).scms.at(0))),
                      Catch::Matchers::ContainsSubstring("different label names"));
}

TEST_CASE("both evaluations normalize over the outcome") {
    for (const char* qn : {"q_cp", "q_digit", "q_color", "q_bar"}) {
        Query q = load_query(qn);
        Scm m = load_scm(testutil::Bundle::get().query(qn).scm_name);
        Query q0 = q, q1 = q;
        q0.outcome = 0;
        q1.outcome = 1;
        CHECK(oracle(m, q0).value + oracle(m, q1).value == 1);
        if (!m.label_on_mixture())
            CHECK(closed_form(m, m.label_features(), q0).value +
                      closed_form(m, m.label_features(), q1).value ==
                  1);
    }
}

TEST_CASE("forcing the factual value reduces the oracle to conditioning") {
    Scm m = load_scm("barmnist");
    Query q;
    q.name = "factual";
    q.label_name = "Yhat";
    q.outcome = 1;
    q.intervention = {{"D", 1}};
    q.evidence = {{"D", 1}, {"B", 1}};
    Rat conditional = m.full_joint().mass_where({{"D", 1}, {"B", 1}, {"Yhat", 1}}) /
                      m.full_joint().mass_where({{"D", 1}, {"B", 1}});
    CHECK(oracle(m, q).value == conditional);
}

TEST_CASE("impossible evidence and unsupported conditioning raise distinct errors") {
    Scm m = load_scm("barmnist_chain");
    Query q = load_query("q_bar");
    q.evidence = {{"B", 1}, {"C", 0}};  // the bar forces the chain color on
    CHECK_THROWS_AS(oracle(m, q), ZeroEvidenceError);
    CHECK_THROWS_AS(closed_form(m, {"B"}, q), ZeroEvidenceError);

    Scm wide = with_bayes_arch(m, {"B", "C"});
    Query up = load_query("q_bar");
    up.intervention = {{"B", 1}};
    // Stratum C = 0 has positive mass, but never together with B forced to 1.
    CHECK_THROWS_AS(closed_form(wide, {"B", "C"}, up), PositivityError);
    CHECK_NOTHROW(oracle(wide, up));

    Query mislabeled = load_query("q_bar");
    mislabeled.label_name = "Yhat";
    CHECK_THROWS_WITH(oracle(m, mislabeled),
                      Catch::Matchers::ContainsSubstring("does not match model label"));
    Query bare = load_query("q_bar");
    bare.intervention.clear();
    CHECK_THROWS_WITH(oracle(m, bare),
                      Catch::Matchers::ContainsSubstring("intervention is empty"));
    Query foreign = load_query("q_bar");
    foreign.evidence = {{"U_B", 1}};
    CHECK_THROWS_WITH(oracle(m, foreign),
                      Catch::Matchers::ContainsSubstring("'U_B' is not observable"));
}

TEST_CASE("the table-only estimator demands its columns and claims no admissibility") {
    Scm m = load_scm("barmnist");
    Query q = load_query("q_color");
    JointTable j = m.full_joint();
    CtfResult r = closed_form(j, {"D", "C"}, q);
    CHECK(r.value == closed_form(m, std::vector<std::string>{"D", "C"}, q).value);
    CHECK_FALSE(r.admissible);  // a bare table cannot certify the criterion
    CHECK(closed_form(m, std::vector<std::string>{"D", "C"}, q).admissible);
    CHECK_THROWS_WITH(closed_form(j.marginal({"D", "C"}), {"D", "C"}, q),
                      Catch::Matchers::ContainsSubstring("joint table has no column 'Yhat'"));
}

TEST_CASE("skipped strata are counted, not silently dropped") {
    // Evidence pins F and C, so three of the four (F, C) strata are empty.
    CtfResult cp = closed_form(load_scm("face_cp"), {"F", "S", "C"}, load_query("q_cp"));
    CHECK(cp.strata_skipped == 3);
    CHECK(cp.value == 1);
    CHECK(cp.evidence_mass == rat(18, 125));

    CtfResult gcp = closed_form(load_scm("face_gcp"), {"S", "F"}, load_query("q_gcp"));
    CHECK(gcp.strata_skipped == 1);
    CHECK(gcp.value == 0);
    CHECK(gcp.admissible);
}

TEST_CASE("the chain model separates faithful from unfaithful architectures exactly") {
    Scm m = load_scm("barmnist_chain");
    Query q = load_query("q_bar");
    JointTable comp = observational_joint(m, {"B", "C", "D"});

    for (const auto& [key, p] : comp.rows) {
        (void)p;
        Query qx = q;
        qx.evidence = {{"B", key[0]}, {"C", key[1]}, {"D", key[2]}};
        CHECK(oracle(m, qx).value == 0);
        CHECK(closed_form(m, {"B"}, qx).value == 0);
    }

    Scm wide = with_bayes_arch(m, {"B", "C"});
    for (long long d = 0; d <= 1; ++d) {
        Query qx = q;
        qx.evidence = {{"B", 1}, {"C", 1}, {"D", d}};
        CHECK(oracle(wide, qx).value == rat(1, 2));
        CHECK(closed_form(wide, {"B", "C"}, qx).value == 1);
        CHECK_FALSE(closed_form(wide, std::vector<std::string>{"B", "C"}, qx).admissible);
    }
}

TEST_CASE("the tradeoff report scores accuracy against faithfulness") {
    Scm m = load_scm("barmnist");
    std::vector<Query> qs = {load_query("q_digit"), load_query("q_color")};
    std::vector<ArchSpec> archs = {ArchSpec::concepts({"B", "D", "C"}),
                                   ArchSpec::concepts({"B", "D"}), ArchSpec::concepts({"D", "C"}),
                                   ArchSpec::concepts({"D"})};
    TradeoffReport r = tradeoff_report(m, qs, archs);
    REQUIRE(r.rows.size() == 8);

    std::vector<Rat> accuracy = {rat(9, 10), rat(1633, 2250), rat(213, 250), rat(173, 250)};
    std::vector<bool> digit_adm = {false, false, true, true};
    std::vector<Rat> digit_mean = {rat(9, 50), rat(9, 20), rat(0), rat(0)};
    for (std::size_t a = 0; a < 4; ++a) {
        const TradeoffRow& digit = r.rows[2 * a];
        const TradeoffRow& color = r.rows[2 * a + 1];
        CHECK(digit.query_name == "q_digit");
        CHECK(color.query_name == "q_color");
        CHECK(digit.accuracy == accuracy[a]);
        CHECK(color.accuracy == accuracy[a]);
        CHECK(digit.admissible == digit_adm[a]);
        CHECK(color.admissible);
        CHECK(digit.mean_error == digit_mean[a]);
        CHECK(color.mean_error == 0);
        CHECK(color.abs_error == 0);
        if (digit.admissible) {
            CHECK(digit.abs_error == 0);
            CHECK(digit.estimate == digit.oracle_value);
        }
    }
    // The unfaithful architectures overstate the counterfactual digit response.
    CHECK(r.rows[0].oracle_value == rat(19, 36));
    CHECK(r.rows[0].estimate == rat(619, 900));
    CHECK(r.rows[2].oracle_value == rat(1, 18));
    CHECK(r.rows[2].estimate == rat(41, 90));

    std::ostringstream csv;
    r.write_csv(csv);
    CHECK_THAT(csv.str(), Catch::Matchers::StartsWith(
                              "arch,query,accuracy,admissible,estimate,oracle,abs_error\n"));
    CHECK_THAT(csv.str(), Catch::Matchers::ContainsSubstring(
                              "\"[\"\"B\"\",\"\"C\"\",\"\"D\"\"]\",q_digit,9/10 (0.9),false"));

    CHECK_THROWS_WITH(tradeoff_report(load_scm("face_cp"), qs, archs),
                      Catch::Matchers::ContainsSubstring("needs a bayes label"));
    CHECK_THROWS_WITH(tradeoff_report(m, qs, {ArchSpec::pixels()}),
                      Catch::Matchers::ContainsSubstring("must be concept architectures"));
}
