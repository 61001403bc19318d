#include "psl/context_engine.hpp"

#include "psl/corpus_dedup.hpp"
#include "psl/errors.hpp"
#include "psl/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

namespace psl::context {

const char* to_string(Mode m) {
    switch (m) {
    case Mode::Dual: return "dual";
    case Mode::SeqOnly: return "seq";
    case Mode::QAOnly: return "qa";
    }
    return "dual";
}

Mode mode_from_string(const std::string& s) {
    if (s == "dual" || s == "Dual") return Mode::Dual;
    if (s == "seq" || s == "seqonly" || s == "SeqOnly") return Mode::SeqOnly;
    if (s == "qa" || s == "qaonly" || s == "QAOnly") return Mode::QAOnly;
    throw UsageError("unknown retrieval mode: " + s);
}

void RetrievalConfig::validate() const {
    if (k < 1)
        throw UsageError("retrieval k must be >= 1");
    if (k > candidate_m)
        throw UsageError("retrieval k must not exceed candidate_m");
    if (token_budget == 0)
        throw UsageError("token_budget must be > 0");
    if (seq_kmer_k == 0)
        throw UsageError("seq_kmer_k must be > 0");
}

double Bm25Index::idf(const std::string& term) const {
    auto it = postings.find(term);
    if (it == postings.end())
        return 0.0;
    double df = static_cast<double>(it->second.size());
    double n = static_cast<double>(n_docs);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

CorpusIndices build_indices(std::vector<qa::QAInstance> corpus, std::size_t seq_kmer_k) {
    if (corpus.empty())
        throw DataError("cannot build indices over an empty corpus");
    CorpusIndices out;
    out.corpus = std::move(corpus);
    out.seq.kmer_k = seq_kmer_k;

    for (uint32_t i = 0; i < out.corpus.size(); ++i)
        out.instances_of[out.corpus[i].accession].push_back(i);

    // Accession ids follow lexicographic order.
    for (const auto& [acc, ids] : out.instances_of) {
        out.seq.accessions.push_back(acc);
        out.seq.sequences.push_back(out.corpus[ids.front()].sequence);
    }
    for (uint32_t id = 0; id < out.seq.accessions.size(); ++id) {
        const std::string& seq = out.seq.sequences[id];
        std::unordered_set<std::string> seen;
        if (seq.size() >= seq_kmer_k)
            for (std::size_t i = 0; i + seq_kmer_k <= seq.size(); ++i)
                if (seen.insert(seq.substr(i, seq_kmer_k)).second)
                    out.seq.postings[seq.substr(i, seq_kmer_k)].push_back(id);
    }

    auto& bm = out.text;
    bm.n_docs = out.corpus.size();
    bm.doc_len.resize(bm.n_docs, 0.0);
    double total_len = 0.0;
    for (uint32_t d = 0; d < out.corpus.size(); ++d) {
        auto tokens = text::tokenize(out.corpus[d].question + " " + out.corpus[d].answer);
        bm.doc_len[d] = static_cast<double>(tokens.size());
        total_len += bm.doc_len[d];
        std::map<std::string, uint32_t> tf;
        for (const auto& t : tokens)
            ++tf[t];
        for (const auto& [term, count] : tf)
            bm.postings[term].emplace_back(d, count);
    }
    bm.avgdl = bm.n_docs ? total_len / static_cast<double>(bm.n_docs) : 0.0;
    return out;
}

std::vector<ScoredAccession> seq_candidates(const std::string& query_seq,
                                            const CorpusIndices& indices, std::size_t m) {
    const auto& idx = indices.seq;
    if (query_seq.size() < idx.kmer_k) {
        std::cerr << "[warn] query sequence shorter than k-mer size; no sequence candidates\n";
        return {};
    }
    std::unordered_set<std::string> qkmers;
    for (std::size_t i = 0; i + idx.kmer_k <= query_seq.size(); ++i)
        qkmers.insert(query_seq.substr(i, idx.kmer_k));

    std::vector<uint32_t> shared(idx.accessions.size(), 0);
    for (const auto& kmer : qkmers) {
        auto it = idx.postings.find(kmer);
        if (it == idx.postings.end())
            continue;
        for (uint32_t id : it->second)
            ++shared[id];
    }

    struct Hit {
        uint32_t id;
        double containment;
    };
    std::vector<Hit> hits;
    for (uint32_t id = 0; id < shared.size(); ++id)
        if (shared[id] > 0)
            hits.push_back({id, static_cast<double>(shared[id]) / static_cast<double>(qkmers.size())});
    std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
        if (a.containment != b.containment)
            return a.containment > b.containment;
        return idx.accessions[a.id] < idx.accessions[b.id];
    });
    if (hits.size() > 4 * m)
        hits.resize(4 * m);

    std::vector<ScoredAccession> out;
    out.reserve(hits.size());
    for (const auto& h : hits)
        out.push_back({idx.accessions[h.id],
                       dedup::pairwise_identity(query_seq, idx.sequences[h.id])});
    std::sort(out.begin(), out.end(), [](const ScoredAccession& a, const ScoredAccession& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.accession < b.accession;
    });
    if (out.size() > m)
        out.resize(m);
    return out;
}

std::vector<ScoredInstance> text_candidates(const std::string& query_question,
                                            const CorpusIndices& indices, std::size_t m) {
    auto tokens = text::tokenize(query_question);
    if (tokens.empty()) {
        std::cerr << "[warn] query question tokenizes to nothing; no text candidates\n";
        return {};
    }
    std::unordered_set<std::string> distinct(tokens.begin(), tokens.end());
    std::vector<std::string> terms(distinct.begin(), distinct.end());
    std::sort(terms.begin(), terms.end());

    const auto& bm = indices.text;
    std::unordered_map<uint32_t, double> scores;
    for (const auto& term : terms) {
        auto it = bm.postings.find(term);
        if (it == bm.postings.end())
            continue;
        double idf = bm.idf(term);
        for (const auto& [doc, tf] : it->second) {
            double norm = static_cast<double>(tf) * (bm.k1 + 1.0) /
                          (static_cast<double>(tf) +
                           bm.k1 * (1.0 - bm.b + bm.b * bm.doc_len[doc] / bm.avgdl));
            scores[doc] += idf * norm;
        }
    }
    std::vector<ScoredInstance> out;
    for (const auto& [doc, score] : scores)
        if (score > 0.0)
            out.push_back({doc, score});
    std::sort(out.begin(), out.end(), [&](const ScoredInstance& a, const ScoredInstance& b) {
        if (a.score != b.score)
            return a.score > b.score;
        const auto& aa = indices.corpus[a.instance_id].accession;
        const auto& bb = indices.corpus[b.instance_id].accession;
        if (aa != bb)
            return aa < bb;
        return a.instance_id < b.instance_id;
    });
    if (out.size() > m)
        out.resize(m);
    return out;
}

std::vector<Exemplar> fuse(const std::vector<ScoredAccession>& seq_list,
                           const std::vector<ScoredInstance>& text_list, Mode mode, double rrf_k,
                           std::size_t k, const CorpusIndices& indices) {
    std::vector<Exemplar> pool;
    std::unordered_map<uint32_t, std::size_t> slot; // instance id -> pool index

    auto get_slot = [&](uint32_t instance_id) -> Exemplar& {
        auto it = slot.find(instance_id);
        if (it != slot.end())
            return pool[it->second];
        slot[instance_id] = pool.size();
        Exemplar e;
        e.instance_id = instance_id;
        e.instance = indices.corpus[instance_id];
        pool.push_back(std::move(e));
        return pool.back();
    };

    if (mode == Mode::SeqOnly) {
        std::vector<Exemplar> out;
        for (const auto& sa : seq_list) {
            auto it = indices.instances_of.find(sa.accession);
            if (it == indices.instances_of.end())
                continue;
            for (uint32_t id : it->second) {
                Exemplar e;
                e.instance_id = id;
                e.instance = indices.corpus[id];
                e.seq_score = sa.score;
                e.fused_score = sa.score;
                out.push_back(std::move(e));
                if (out.size() == k)
                    return out;
            }
        }
        return out;
    }
    if (mode == Mode::QAOnly) {
        std::vector<Exemplar> out;
        for (const auto& si : text_list) {
            Exemplar e;
            e.instance_id = si.instance_id;
            e.instance = indices.corpus[si.instance_id];
            e.text_score = si.score;
            e.fused_score = si.score;
            out.push_back(std::move(e));
            if (out.size() == k)
                break;
        }
        return out;
    }

    // Dual: RRF with 1-based ranks. A sequence-ranked accession contributes
    // its rank to every instance it owns.
    for (std::size_t r = 0; r < seq_list.size(); ++r) {
        auto it = indices.instances_of.find(seq_list[r].accession);
        if (it == indices.instances_of.end())
            continue;
        for (uint32_t id : it->second) {
            Exemplar& e = get_slot(id);
            e.seq_score = seq_list[r].score;
            e.fused_score += 1.0 / (rrf_k + static_cast<double>(r + 1));
        }
    }
    for (std::size_t r = 0; r < text_list.size(); ++r) {
        Exemplar& e = get_slot(text_list[r].instance_id);
        e.text_score = text_list[r].score;
        e.fused_score += 1.0 / (rrf_k + static_cast<double>(r + 1));
    }

    std::sort(pool.begin(), pool.end(), [](const Exemplar& a, const Exemplar& b) {
        if (a.fused_score != b.fused_score)
            return a.fused_score > b.fused_score;
        if (a.instance.accession != b.instance.accession)
            return a.instance.accession < b.instance.accession;
        return a.instance_id < b.instance_id;
    });
    if (pool.size() > k)
        pool.resize(k);
    return pool;
}

std::vector<Exemplar> select_exemplars(const RetrievalQuery& query, const CorpusIndices& indices,
                                       const RetrievalConfig& config) {
    config.validate();

    auto seq_list = (config.mode != Mode::QAOnly)
                        ? seq_candidates(query.sequence, indices, config.candidate_m)
                        : std::vector<ScoredAccession>{};
    auto text_list = (config.mode != Mode::SeqOnly)
                         ? text_candidates(query.question, indices, config.candidate_m)
                         : std::vector<ScoredInstance>{};

    // Leak exclusion in the candidate lists, before ranks are fused.
    if (!query.accession.empty()) {
        std::erase_if(seq_list,
                      [&](const ScoredAccession& s) { return s.accession == query.accession; });
        std::erase_if(text_list, [&](const ScoredInstance& s) {
            return indices.corpus[s.instance_id].accession == query.accession;
        });
    }
    if (config.exclude_near_duplicates && !query.sequence.empty()) {
        auto too_close = [&](const std::string& seq) {
            return !seq.empty() &&
                   dedup::pairwise_identity(query.sequence, seq) >= config.near_duplicate_identity;
        };
        std::erase_if(seq_list, [&](const ScoredAccession& s) {
            auto it = indices.instances_of.find(s.accession);
            return it != indices.instances_of.end() &&
                   too_close(indices.corpus[it->second.front()].sequence);
        });
        std::erase_if(text_list, [&](const ScoredInstance& s) {
            return too_close(indices.corpus[s.instance_id].sequence);
        });
    }

    if (seq_list.empty() && text_list.empty()) {
        std::cerr << "[warn] no exemplar candidates; answering proceeds zero-shot\n";
        return {};
    }
    return fuse(seq_list, text_list, config.mode, config.rrf_k, config.k, indices);
}

namespace {

std::string center_truncate(const std::string& seq, std::size_t keep_each_side = 100) {
    if (seq.size() <= 2 * keep_each_side)
        return seq;
    return seq.substr(0, keep_each_side) + "…" + seq.substr(seq.size() - keep_each_side);
}

std::string render_exemplar(const Exemplar& e, bool truncate_seq) {
    std::string seq = truncate_seq ? center_truncate(e.instance.sequence) : e.instance.sequence;
    return "Protein sequence: " + seq + "\nQ: " + e.instance.question +
           "\nA: " + e.instance.answer;
}

std::string render_prompt_text(const std::vector<Exemplar>& ordered, const RetrievalQuery& query,
                               bool truncate_seqs) {
    std::string prompt = kContextPreamble;
    for (const auto& e : ordered)
        prompt += "\n\n" + render_exemplar(e, truncate_seqs);
    prompt += "\n\nProtein sequence: " + query.sequence + "\nQ: " + query.question + "\nA:";
    return prompt;
}

} // namespace

ContextBundle assemble_context(std::vector<Exemplar> exemplars, const RetrievalQuery& query,
                               const RetrievalConfig& config) {
    ContextBundle bundle;
    bundle.query_sequence = query.sequence;
    bundle.query_question = query.question;

    std::string query_only = render_prompt_text({}, query, false);
    if (text::estimate_tokens(query_only, config.token_multiplier) > config.token_budget)
        throw DataError("query alone exceeds the token budget");

    // exemplars arrive in descending relevance; store ascending by default so
    // the most relevant block sits adjacent to the query.
    if (config.most_relevant_last)
        std::reverse(exemplars.begin(), exemplars.end());
    bundle.exemplars = std::move(exemplars);

    bool truncate_seqs = false;
    while (true) {
        bundle.prompt = render_prompt_text(bundle.exemplars, query, truncate_seqs);
        if (text::estimate_tokens(bundle.prompt, config.token_multiplier) <= config.token_budget)
            break;
        if (!truncate_seqs) {
            truncate_seqs = true;
            continue;
        }
        if (bundle.exemplars.empty())
            break; // query alone fits; nothing left to drop
        // Drop the lowest-relevance exemplar.
        if (config.most_relevant_last)
            bundle.exemplars.erase(bundle.exemplars.begin());
        else
            bundle.exemplars.pop_back();
    }
    return bundle;
}

AnswerResult answer(const RetrievalQuery& query, const CorpusIndices& indices,
                    const RetrievalConfig& config, gateway::Gateway& gw) {
    auto exemplars = select_exemplars(query, indices, config);
    AnswerResult result;
    result.bundle = assemble_context(std::move(exemplars), query, config);
    try {
        result.text = gw.complete({{"user", result.bundle.prompt}}).text;
    } catch (const GatewayError& e) {
        throw GatewayError(std::string(e.what()) + " (bundle with " +
                           std::to_string(result.bundle.exemplars.size()) +
                           " exemplars retained for audit)");
    }
    return result;
}

nlohmann::json bundle_to_json(const ContextBundle& bundle) {
    nlohmann::json exemplars = nlohmann::json::array();
    for (const auto& e : bundle.exemplars)
        exemplars.push_back({{"instance_id", e.instance_id},
                             {"accession", e.instance.accession},
                             {"qa_type", qa::to_string(e.instance.qa_type)},
                             {"seq_score", e.seq_score},
                             {"text_score", e.text_score},
                             {"fused_score", e.fused_score}});
    return nlohmann::json{{"query_sequence", bundle.query_sequence},
                          {"query_question", bundle.query_question},
                          {"exemplars", exemplars},
                          {"prompt", bundle.prompt}};
}

} // namespace psl::context
