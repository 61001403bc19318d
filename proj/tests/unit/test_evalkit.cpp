#include "psl/evalkit.hpp"

#include "psl/errors.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace psl;

TEST_CASE("rouge_l basics") {
    SUBCASE("identical texts score 1") {
        auto s = eval::rouge_l("The cat sat on the mat", "the cat sat on the mat");
        CHECK(s.precision == doctest::Approx(1.0));
        CHECK(s.recall == doctest::Approx(1.0));
        CHECK(s.f1 == doctest::Approx(1.0));
    }
    SUBCASE("the cat sat vs the cat ran") {
        auto s = eval::rouge_l("the cat sat", "the cat ran");
        CHECK(s.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(s.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("disjoint vocabularies score 0") {
        auto s = eval::rouge_l("alpha beta", "gamma delta");
        CHECK(s.f1 == doctest::Approx(0.0));
    }
    SUBCASE("empty side scores all zeros") {
        auto s = eval::rouge_l("", "reference text");
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SUBCASE("swapping sides swaps P and R, preserves F1") {
        auto ab = eval::rouge_l("the quick brown fox", "the brown fox jumps high");
        auto ba = eval::rouge_l("the brown fox jumps high", "the quick brown fox");
        CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
        CHECK(ab.recall == doctest::Approx(ba.precision).epsilon(1e-12));
        CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-12));
    }
}

namespace {

eval::RatingSet rating_set(const std::vector<std::vector<std::optional<int>>>& values) {
    eval::RatingSet rs;
    rs.values = values;
    for (std::size_t i = 0; i < values.size(); ++i)
        rs.item_ids.push_back("I" + std::to_string(i));
    if (!values.empty())
        for (std::size_t r = 0; r < values[0].size(); ++r)
            rs.rater_ids.push_back("R" + std::to_string(r));
    return rs;
}

} // namespace

TEST_CASE("krippendorff alpha") {
    SUBCASE("perfect agreement is 1.0 with a degenerate flag") {
        auto result = eval::krippendorff_alpha(rating_set({{3, 3}, {3, 3}}));
        CHECK(result.alpha == doctest::Approx(1.0));
        CHECK(result.degenerate);
    }
    SUBCASE("two-item anti-agreement is strongly negative") {
        auto result = eval::krippendorff_alpha(rating_set({{0, 5}, {5, 0}}));
        CHECK(result.alpha == doctest::Approx(-0.5).epsilon(1e-9));
        CHECK_FALSE(result.degenerate);
    }
    SUBCASE("single item is an error") {
        CHECK_THROWS_AS(eval::krippendorff_alpha(rating_set({{0, 5}})), DataError);
    }
    SUBCASE("units with one rating are dropped") {
        CHECK_THROWS_AS(
            eval::krippendorff_alpha(rating_set({{1, std::nullopt}, {2, std::nullopt}})),
            DataError);
    }
    SUBCASE("invariant under item and rater permutations") {
        auto base = eval::krippendorff_alpha(rating_set({{1, 4}, {2, 2}, {5, 3}}));
        auto items_swapped = eval::krippendorff_alpha(rating_set({{5, 3}, {1, 4}, {2, 2}}));
        auto raters_swapped = eval::krippendorff_alpha(rating_set({{4, 1}, {2, 2}, {3, 5}}));
        CHECK(base.alpha == doctest::Approx(items_swapped.alpha).epsilon(1e-12));
        CHECK(base.alpha == doctest::Approx(raters_swapped.alpha).epsilon(1e-12));
    }
    SUBCASE("missing ratings are tolerated") {
        auto result = eval::krippendorff_alpha(
            rating_set({{1, 1, std::nullopt}, {4, std::nullopt, 4}, {2, 3, 2}}));
        CHECK(result.alpha <= 1.0);
    }
}

TEST_CASE("pairwise winloss") {
    SUBCASE("all wins") {
        auto wl = eval::pairwise_winloss({{"a", 5, 1}, {"b", 4, 2}});
        CHECK(wl.win == doctest::Approx(1.0));
    }
    SUBCASE("all ties") {
        auto wl = eval::pairwise_winloss({{"a", 3, 3}, {"b", 2, 2}});
        CHECK(wl.tie == doctest::Approx(1.0));
    }
    SUBCASE("mixed set from the worked example") {
        auto wl = eval::pairwise_winloss(
            {{"a", 3, 2}, {"b", 3, 3}, {"c", 1, 3}, {"d", 5, 2}});
        CHECK(wl.win == doctest::Approx(0.5));
        CHECK(wl.tie == doctest::Approx(0.25));
        CHECK(wl.lose == doctest::Approx(0.25));
        CHECK(wl.win + wl.lose + wl.tie == doctest::Approx(1.0));
    }
    SUBCASE("empty input errors") {
        CHECK_THROWS_AS(eval::pairwise_winloss({}), DataError);
    }
}

namespace {

qa::QAInstance corpus_instance(const std::string& acc, const std::string& seq,
                               const std::string& q, const std::string& a,
                               qa::QaType type = qa::QaType::Knowledge) {
    qa::QAInstance inst;
    inst.accession = acc;
    inst.qa_type = type;
    inst.question = q;
    inst.answer = a;
    inst.sequence = seq;
    inst.source_model = "mock";
    return inst;
}

context::CorpusIndices eval_indices() {
    std::vector<qa::QAInstance> corpus{
        corpus_instance("C1", "MKTAYIAKQRQISFVKSHFSRQL", "What process involves this protein?",
                        "It participates in glycolysis."),
        corpus_instance("C2", "MKTAYIAKQRQISFVKSHFSRQA", "Where does it localize?",
                        "It localizes to the cytoplasm."),
        corpus_instance("C3", "WWWWHHHHCCCCNNNNDDDDPPPP", "What does the transporter move?",
                        "It moves ions across membranes."),
    };
    return context::build_indices(std::move(corpus));
}

std::vector<eval::DatasetItem> eval_items() {
    return {
        {"Q1", "MKTAYIAKQRQISFVKSHFSRQL", "What process involves this protein?",
         "It participates in glycolysis.", "protein2text-qa"},
        {"Q2", "MKTAYIAKQRQISFVKSHFSRQA", "Where does it localize?",
         "It localizes to the cytoplasm.", "protein2text-qa"},
        {"Q3", "WWWWHHHHCCCCNNNNDDDDPPPP", "What does the transporter move?",
         "It moves ions.", "protein2text-qa"},
    };
}

} // namespace

TEST_CASE("k_sweep emits one row per k") {
    auto idx = eval_indices();
    auto items = eval_items();
    context::RetrievalConfig base;
    gateway::MockGateway gw({{gateway::MockRule::Match::Contains, "", {"constant answer"}}},
                            false);
    eval::RunOptions options;
    options.workers = 2;
    auto report = eval::k_sweep(items, {1, 2}, idx, base, gw, options);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].k == 1);
    CHECK(report.rows[1].k == 2);
    CHECK(report.rows[0].n_items == 3);
    CHECK(report.rows[1].n_items == 3);
    // identical mock answers across k give a flat curve
    CHECK(report.rows[0].rouge_l_f1 == doctest::Approx(report.rows[1].rouge_l_f1));
}

TEST_CASE("ablate emits one row per mode with audit-checkable bundles") {
    auto idx = eval_indices();
    auto items = eval_items();
    context::RetrievalConfig base;
    gateway::MockGateway gw({}, true);
    eval::RunOptions options;
    options.workers = 1;
    options.k_override = 2;

    std::vector<eval::EvalMode> modes{eval::eval_mode_from_string("dual"),
                                      eval::eval_mode_from_string("seq"),
                                      eval::eval_mode_from_string("qa"),
                                      eval::eval_mode_from_string("zero")};
    auto report = eval::ablate(items, modes, idx, base, gw, options);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].mode == "dual");
    CHECK(report.rows[1].mode == "seq");
    CHECK(report.rows[2].mode == "qa");
    CHECK(report.rows[3].mode == "zero");
    CHECK(report.rows[3].k == 0);

    // SeqOnly bundles hold only sequence-retrieved exemplars
    auto seq_results = eval::run_items(items, idx, base, eval::eval_mode_from_string("seq"), 2,
                                       gw, 1);
    for (const auto& r : seq_results)
        for (const auto& e : r.bundle.exemplars) {
            CHECK(e.seq_score > 0.0);
            CHECK(e.text_score == 0.0);
        }

    // zero-shot bundles are empty
    auto zero_results = eval::run_items(items, idx, base, eval::eval_mode_from_string("zero"), 0,
                                        gw, 1);
    for (const auto& r : zero_results)
        CHECK(r.bundle.exemplars.empty());
}

TEST_CASE("default k per task family") {
    CHECK(eval::default_k_for_task("protdescribe") == 11);
    CHECK(eval::default_k_for_task("protein2text-qa") == 4);
    CHECK(eval::default_k_for_task("mol-instructions") == 4);
    CHECK(eval::default_k_for_task("anything-else") == 4);
}

TEST_CASE("corpus_stats") {
    std::vector<ProteinRecord> proteins(1);
    proteins[0].accession = "C1";
    proteins[0].sequence = "MKTAYIAKQR";
    proteins[0].superkingdom = Superkingdom::Bacteria;

    SUBCASE("ratio of a 10-residue sequence and 10 text tokens is one half") {
        auto inst = corpus_instance("C1", "MKTAYIAKQR",
                                    "one two three four five", "six seven eight nine ten");
        auto stats = eval::corpus_stats({inst}, proteins);
        CHECK(stats.sequence_tokens == 10);
        CHECK(stats.text_tokens == 10);
        CHECK(stats.sequence_token_share == doctest::Approx(0.5));
        CHECK(stats.per_type.at("knowledge") == 1);
        CHECK(stats.per_superkingdom.at("Bacteria") == 1);
    }

    SUBCASE("full-scale reference values are displayed") {
        auto ref = eval::full_scale_reference();
        CHECK(ref["per_type"]["attribute"] == 11693);
        CHECK(ref["per_type"]["truefalse"] == 32444);
        CHECK(ref["sequence_token_share"] == doctest::Approx(0.70));
    }
}

TEST_CASE("report serialization carries every row field") {
    eval::EvalReport report;
    eval::EvalRow row;
    row.dataset = "d";
    row.task = "t";
    row.model = "m";
    row.mode = "dual";
    row.k = 4;
    row.rouge_l_precision = 0.25;
    row.rouge_l_recall = 0.5;
    row.rouge_l_f1 = 1.0 / 3.0;
    row.n_items = 3;
    report.rows.push_back(row);

    auto j = eval::report_to_json(report);
    CHECK(j["rows"][0]["mode"] == "dual");
    CHECK(j["rows"][0]["k"] == 4);

    auto tsv = eval::report_to_tsv(report);
    CHECK(tsv.find("dataset\ttask\tmodel\tmode\tk") == 0);
    CHECK(tsv.find("\tdual\t4\t") != std::string::npos);
}
