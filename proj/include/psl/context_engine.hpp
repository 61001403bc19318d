#pragma once

#include "psl/llm_gateway.hpp"
#include "psl/qa.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace psl::context {

enum class Mode { Dual, SeqOnly, QAOnly };
const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct RetrievalConfig {
    Mode mode = Mode::Dual;
    std::size_t k = 4;            // exemplar count
    std::size_t candidate_m = 50; // per-criterion candidate pool
    double rrf_k = 60.0;          // rank-fusion constant
    std::size_t token_budget = 8192;
    std::size_t seq_kmer_k = 3;
    double token_multiplier = 1.0;
    bool most_relevant_last = true;
    bool exclude_near_duplicates = false; // homologs are wanted in context
    double near_duplicate_identity = 0.95;

    void validate() const;
};

inline constexpr const char* kContextPreamble =
    "You will learn to interpret protein sequences from the following examples.";

// Inverted k-mer index over the distinct accessions of the corpus.
struct SeqIndex {
    std::size_t kmer_k = 3;
    std::vector<std::string> accessions; // sorted; position = accession id
    std::vector<std::string> sequences;  // parallel to accessions
    std::unordered_map<std::string, std::vector<uint32_t>> postings; // kmer -> accession ids
    std::size_t kmer_count() const { return postings.size(); }
};

// BM25 (k1=1.2, b=0.75) over question+answer tokens of each instance.
struct Bm25Index {
    double k1 = 1.2;
    double b = 0.75;
    std::size_t n_docs = 0;
    double avgdl = 0.0;
    std::vector<double> doc_len; // tokens per instance
    std::unordered_map<std::string, std::vector<std::pair<uint32_t, uint32_t>>> postings;

    double idf(const std::string& term) const;
    std::size_t vocabulary_size() const { return postings.size(); }
};

struct CorpusIndices {
    std::vector<qa::QAInstance> corpus; // instance id = position
    SeqIndex seq;
    Bm25Index text;
    std::map<std::string, std::vector<uint32_t>> instances_of; // accession -> instance ids
};

CorpusIndices build_indices(std::vector<qa::QAInstance> corpus, std::size_t seq_kmer_k = 3);

struct ScoredAccession {
    std::string accession;
    double score = 0.0; // stage-2 alignment identity
};

struct ScoredInstance {
    uint32_t instance_id = 0;
    double score = 0.0; // BM25
};

// Stage 1: shared-k-mer containment shortlists 4m accessions; stage 2 reranks
// the shortlist by pairwise alignment identity. Queries shorter than the
// k-mer size yield an empty list.
std::vector<ScoredAccession> seq_candidates(const std::string& query_seq,
                                            const CorpusIndices& indices, std::size_t m);

// BM25 top-m instances; zero-score hits are filtered out.
std::vector<ScoredInstance> text_candidates(const std::string& query_question,
                                            const CorpusIndices& indices, std::size_t m);

struct Exemplar {
    uint32_t instance_id = 0;
    qa::QAInstance instance;
    double seq_score = 0.0;
    double text_score = 0.0;
    double fused_score = 0.0;
};

// Dual: reciprocal-rank fusion over both lists (accessions contribute their
// rank to each of their instances); SeqOnly/QAOnly pass the single list
// through. Returns up to k exemplars in descending relevance.
std::vector<Exemplar> fuse(const std::vector<ScoredAccession>& seq_list,
                           const std::vector<ScoredInstance>& text_list, Mode mode, double rrf_k,
                           std::size_t k, const CorpusIndices& indices);

struct RetrievalQuery {
    std::string accession; // may be empty; used for leak exclusion
    std::string sequence;
    std::string question;
};

struct ContextBundle {
    std::string query_sequence;
    std::string query_question;
    std::vector<Exemplar> exemplars; // ascending relevance: most relevant last
    std::string prompt;
};

// Candidate selection honoring mode and leak exclusion; exemplars returned in
// descending relevance (assemble_context does the final ordering).
std::vector<Exemplar> select_exemplars(const RetrievalQuery& query, const CorpusIndices& indices,
                                       const RetrievalConfig& config);

// Renders preamble + exemplar blocks + query block. Over budget, exemplar
// sequences are center-truncated (100 residues a side) before whole
// lowest-relevance exemplars are dropped.
ContextBundle assemble_context(std::vector<Exemplar> exemplars, const RetrievalQuery& query,
                               const RetrievalConfig& config);

struct AnswerResult {
    std::string text;
    ContextBundle bundle;
};

AnswerResult answer(const RetrievalQuery& query, const CorpusIndices& indices,
                    const RetrievalConfig& config, gateway::Gateway& gw);

nlohmann::json bundle_to_json(const ContextBundle& bundle);

} // namespace psl::context
