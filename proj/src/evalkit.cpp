#include "psl/evalkit.hpp"

#include "psl/errors.hpp"
#include "psl/jsonl.hpp"
#include "psl/parallel.hpp"
#include "psl/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psl::eval {

RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    auto cand = text::tokenize(candidate);
    auto ref = text::tokenize(reference);
    RougeScore score;
    if (cand.empty() || ref.empty())
        return score;

    std::vector<uint32_t> prev(ref.size() + 1, 0);
    std::vector<uint32_t> cur(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            if (cand[i - 1] == ref[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    double lcs = prev[ref.size()];
    score.precision = lcs / static_cast<double>(cand.size());
    score.recall = lcs / static_cast<double>(ref.size());
    if (score.precision + score.recall > 0.0)
        score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
    return score;
}

AlphaResult krippendorff_alpha(const RatingSet& ratings, AlphaMetric metric) {
    (void)metric; // ordinal is the only distance in use

    // Units with fewer than two ratings cannot produce coincidences.
    std::vector<std::vector<int>> units;
    for (const auto& row : ratings.values) {
        std::vector<int> unit;
        for (const auto& v : row)
            if (v.has_value()) {
                if (*v < 0 || *v > 5)
                    throw DataError("rating outside the 0-5 scale");
                unit.push_back(*v);
            }
        if (unit.size() >= 2)
            units.push_back(std::move(unit));
    }
    if (units.size() < 2)
        throw DataError("krippendorff_alpha needs at least 2 items with 2 ratings each");

    constexpr int kCategories = 6; // scores 0..5
    double o[kCategories][kCategories] = {};
    for (const auto& unit : units) {
        double m = static_cast<double>(unit.size());
        for (std::size_t i = 0; i < unit.size(); ++i)
            for (std::size_t j = 0; j < unit.size(); ++j)
                if (i != j)
                    o[unit[i]][unit[j]] += 1.0 / (m - 1.0);
    }
    double marginals[kCategories] = {};
    double n = 0.0;
    for (int c = 0; c < kCategories; ++c) {
        for (int k = 0; k < kCategories; ++k)
            marginals[c] += o[c][k];
        n += marginals[c];
    }

    // Ordinal distance: square of the rank mass between the two categories.
    auto delta_sq = [&](int c, int k) {
        if (c == k)
            return 0.0;
        int lo = std::min(c, k);
        int hi = std::max(c, k);
        double sum = 0.0;
        for (int g = lo; g <= hi; ++g)
            sum += marginals[g];
        sum -= (marginals[lo] + marginals[hi]) / 2.0;
        return sum * sum;
    };

    double observed = 0.0;
    double expected = 0.0;
    for (int c = 0; c < kCategories; ++c)
        for (int k = 0; k < kCategories; ++k) {
            observed += o[c][k] * delta_sq(c, k);
            expected += marginals[c] * marginals[k] * delta_sq(c, k);
        }

    AlphaResult result;
    if (expected == 0.0) {
        result.alpha = 1.0;
        result.degenerate = true;
        return result;
    }
    result.alpha = 1.0 - (n - 1.0) * observed / expected;
    return result;
}

WinLoss pairwise_winloss(const std::vector<PairedRating>& pairs) {
    if (pairs.empty())
        throw DataError("pairwise_winloss on an empty set");
    WinLoss out;
    for (const auto& p : pairs) {
        if (p.rating_with > p.rating_without)
            out.win += 1.0;
        else if (p.rating_with < p.rating_without)
            out.lose += 1.0;
        else
            out.tie += 1.0;
    }
    double n = static_cast<double>(pairs.size());
    out.win /= n;
    out.lose /= n;
    out.tie /= n;
    return out;
}

std::vector<DatasetItem> load_dataset(const std::string& path, const std::string& field_map_path) {
    std::map<std::string, std::string> map{{"id", "id"},
                                           {"sequence", "sequence"},
                                           {"question", "question"},
                                           {"reference", "reference"},
                                           {"task", "task"}};
    std::map<std::string, std::string> defaults;
    if (!field_map_path.empty()) {
        std::ifstream in(field_map_path);
        if (!in)
            throw DataError("cannot open field map " + field_map_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(field_map_path + ": " + e.what());
        }
        for (auto& [ours, theirs] : map)
            if (j.contains(ours) && j[ours].is_string())
                theirs = j[ours].get<std::string>();
        if (j.contains("defaults"))
            for (const auto& [key, val] : j["defaults"].items())
                defaults[key] = val.get<std::string>();
    }

    std::vector<DatasetItem> items;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line_no) {
        auto fetch = [&](const std::string& ours, bool required) -> std::string {
            const std::string& theirs = map.at(ours);
            if (j.contains(theirs))
                return j.at(theirs).is_string() ? j.at(theirs).get<std::string>()
                                                : j.at(theirs).dump();
            if (defaults.count(ours))
                return defaults.at(ours);
            if (required)
                throw DataError(path + ":" + std::to_string(line_no) + ": missing field '" +
                                theirs + "'");
            return "";
        };
        DatasetItem item;
        item.id = fetch("id", true);
        item.sequence = fetch("sequence", true);
        item.question = fetch("question", true);
        item.reference = fetch("reference", true);
        item.task = fetch("task", false);
        items.push_back(std::move(item));
    });
    return items;
}

std::size_t default_k_for_task(const std::string& task) {
    std::string t = text::to_lower(task);
    // Description-style tasks benefit from more exemplars than QA-style ones.
    if (t.find("describe") != std::string::npos || t.find("protdescribe") != std::string::npos)
        return 11;
    return 4;
}

EvalMode eval_mode_from_string(const std::string& s) {
    EvalMode m;
    std::string t = text::to_lower(s);
    if (t == "zero" || t == "zeroshot" || t == "zero-shot") {
        m.zero_shot = true;
        return m;
    }
    m.retrieval = context::mode_from_string(s);
    return m;
}

std::vector<ItemResult> run_items(const std::vector<DatasetItem>& items,
                                  const context::CorpusIndices& indices,
                                  const context::RetrievalConfig& base, const EvalMode& mode,
                                  std::size_t k, gateway::Gateway& gw, int workers) {
    std::vector<ItemResult> results(items.size());
    parallel_for(items.size(), workers, [&](std::size_t i) {
        const auto& item = items[i];
        context::RetrievalQuery query{item.id, item.sequence, item.question};
        context::RetrievalConfig config = base;
        config.k = std::max<std::size_t>(k, 1);
        config.candidate_m = std::max(config.candidate_m, config.k);
        config.mode = mode.retrieval;

        context::AnswerResult ans;
        if (mode.zero_shot) {
            ans.bundle = context::assemble_context({}, query, config);
            ans.text = gw.complete({{"user", ans.bundle.prompt}}).text;
        } else {
            ans = context::answer(query, indices, config, gw);
        }
        results[i] = ItemResult{item.id, ans.text, rouge_l(ans.text, item.reference),
                                std::move(ans.bundle)};
    });
    return results;
}

namespace {

EvalRow summarize(const std::vector<ItemResult>& results, const RunOptions& options,
                  const std::string& task, const std::string& mode_name, std::size_t k) {
    EvalRow row;
    row.dataset = options.dataset_tag;
    row.task = task;
    row.model = options.model_tag;
    row.mode = mode_name;
    row.k = k;
    row.n_items = results.size();
    for (const auto& r : results) {
        row.rouge_l_precision += r.score.precision;
        row.rouge_l_recall += r.score.recall;
        row.rouge_l_f1 += r.score.f1;
    }
    if (!results.empty()) {
        row.rouge_l_precision /= static_cast<double>(results.size());
        row.rouge_l_recall /= static_cast<double>(results.size());
        row.rouge_l_f1 /= static_cast<double>(results.size());
    }
    return row;
}

std::string dominant_task(const std::vector<DatasetItem>& items) {
    std::map<std::string, std::size_t> counts;
    for (const auto& i : items)
        ++counts[i.task];
    std::string best;
    std::size_t best_n = 0;
    for (const auto& [task, n] : counts)
        if (n > best_n) {
            best = task;
            best_n = n;
        }
    return best;
}

} // namespace

EvalReport k_sweep(const std::vector<DatasetItem>& items, const std::vector<std::size_t>& ks,
                   const context::CorpusIndices& indices, const context::RetrievalConfig& base,
                   gateway::Gateway& gw, const RunOptions& options) {
    if (items.empty())
        throw DataError("k_sweep on an empty dataset");
    EvalReport report;
    std::string task = dominant_task(items);
    EvalMode mode;
    mode.retrieval = base.mode;
    for (std::size_t k : ks) {
        auto results = run_items(items, indices, base, mode, k, gw, options.workers);
        report.rows.push_back(summarize(results, options, task, mode.name(), k));
    }
    return report;
}

EvalReport ablate(const std::vector<DatasetItem>& items, const std::vector<EvalMode>& modes,
                  const context::CorpusIndices& indices, const context::RetrievalConfig& base,
                  gateway::Gateway& gw, const RunOptions& options) {
    if (items.empty())
        throw DataError("ablate on an empty dataset");
    EvalReport report;
    std::string task = dominant_task(items);
    std::size_t k = options.k_override.value_or(default_k_for_task(task));
    for (const auto& mode : modes) {
        auto results = run_items(items, indices, base, mode, mode.zero_shot ? 0 : k, gw,
                                 options.workers);
        report.rows.push_back(
            summarize(results, options, task, mode.name(), mode.zero_shot ? 0 : k));
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"dataset", r.dataset},
                        {"task", r.task},
                        {"model", r.model},
                        {"mode", r.mode},
                        {"k", r.k},
                        {"rouge_l_precision", r.rouge_l_precision},
                        {"rouge_l_recall", r.rouge_l_recall},
                        {"rouge_l_f1", r.rouge_l_f1},
                        {"n_items", r.n_items}});
    return nlohmann::json{{"rows", rows}};
}

std::string report_to_tsv(const EvalReport& report) {
    std::ostringstream out;
    out << "dataset\ttask\tmodel\tmode\tk\trouge_l_precision\trouge_l_recall\trouge_l_f1\tn_"
           "items\n";
    for (const auto& r : report.rows)
        out << r.dataset << "\t" << r.task << "\t" << r.model << "\t" << r.mode << "\t" << r.k
            << "\t" << r.rouge_l_precision << "\t" << r.rouge_l_recall << "\t" << r.rouge_l_f1
            << "\t" << r.n_items << "\n";
    return out.str();
}

CorpusStats corpus_stats(const std::vector<qa::QAInstance>& corpus,
                         const std::vector<ProteinRecord>& proteins) {
    CorpusStats stats;
    std::map<std::string, Superkingdom> kingdom_of;
    for (const auto& p : proteins)
        kingdom_of[p.accession] = p.superkingdom;

    std::map<std::size_t, std::size_t> length_buckets; // bucket start -> count
    std::set<std::string> seen_accessions;
    for (const auto& q : corpus) {
        ++stats.per_type[qa::to_string(q.qa_type)];
        stats.sequence_tokens += q.sequence.size();
        std::string text_side = q.question + " " + q.answer;
        if (q.explanation)
            text_side += " " + *q.explanation;
        stats.text_tokens += text::tokenize(text_side).size();
        if (seen_accessions.insert(q.accession).second) {
            ++length_buckets[(q.sequence.size() / 100) * 100];
            auto it = kingdom_of.find(q.accession);
            ++stats.per_superkingdom[to_string(
                it == kingdom_of.end() ? Superkingdom::Unknown : it->second)];
        }
    }
    for (const auto& [start, count] : length_buckets)
        stats.sequence_length_histogram.emplace_back(
            std::to_string(start) + "-" + std::to_string(start + 99), count);
    uint64_t total = stats.sequence_tokens + stats.text_tokens;
    stats.sequence_token_share =
        total == 0 ? 0.0 : static_cast<double>(stats.sequence_tokens) / static_cast<double>(total);
    return stats;
}

nlohmann::json full_scale_reference() {
    return nlohmann::json{
        {"per_type", {{"attribute", 11693}, {"truefalse", 32444}}},
        {"sequence_token_share", 0.70},
    };
}

nlohmann::json stats_to_json(const CorpusStats& stats) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [bucket, count] : stats.sequence_length_histogram)
        hist.push_back({{"bucket", bucket}, {"count", count}});
    return nlohmann::json{{"per_type", stats.per_type},
                          {"per_superkingdom", stats.per_superkingdom},
                          {"sequence_length_histogram", hist},
                          {"sequence_tokens", stats.sequence_tokens},
                          {"text_tokens", stats.text_tokens},
                          {"sequence_token_share", stats.sequence_token_share},
                          {"full_scale_reference", full_scale_reference()}};
}

} // namespace psl::eval
