#pragma once

#include "psl/context_engine.hpp"
#include "psl/protein.hpp"
#include "psl/qa.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psl::eval {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Sentence-level ROUGE-L over lowercase alphanumeric tokens.
RougeScore rouge_l(const std::string& candidate, const std::string& reference);

// Ratings matrix: items x raters, ordinal scores 0..5, missing allowed.
struct RatingSet {
    std::vector<std::string> item_ids;
    std::vector<std::string> rater_ids;
    // values[item][rater]
    std::vector<std::vector<std::optional<int>>> values;
};

struct AlphaResult {
    double alpha = 0.0;
    bool degenerate = false; // zero expected disagreement (all ratings equal)
};

enum class AlphaMetric { Ordinal };

// Krippendorff's alpha via the coincidence matrix with ordinal distances.
AlphaResult krippendorff_alpha(const RatingSet& ratings,
                               AlphaMetric metric = AlphaMetric::Ordinal);

struct PairedRating {
    std::string item;
    int rating_with = 0;
    int rating_without = 0;
};

struct WinLoss {
    double win = 0.0;
    double lose = 0.0;
    double tie = 0.0;
};

WinLoss pairwise_winloss(const std::vector<PairedRating>& pairs);

struct DatasetItem {
    std::string id;
    std::string sequence;
    std::string question;
    std::string reference;
    std::string task;
};

// Optional field-mapping config: {"id": "...", "sequence": "...", ...} maps
// our field names onto the source file's keys.
std::vector<DatasetItem> load_dataset(const std::string& path,
                                      const std::string& field_map_path = "");

struct EvalRow {
    std::string dataset;
    std::string task;
    std::string model;
    std::string mode; // zero | dual | seq | qa
    std::size_t k = 0;
    double rouge_l_precision = 0.0;
    double rouge_l_recall = 0.0;
    double rouge_l_f1 = 0.0;
    std::size_t n_items = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_tsv(const EvalReport& report);

// Task-dependent exemplar-count defaults; overridable via config.
std::size_t default_k_for_task(const std::string& task);

struct RunOptions {
    std::string dataset_tag = "dataset";
    std::string model_tag = "mock";
    std::optional<std::size_t> k_override; // else default_k_for_task
    int workers = 4;
};

struct ItemResult {
    std::string id;
    std::string answer;
    RougeScore score;
    context::ContextBundle bundle;
};

// Zero-shot is expressed as "no exemplars": the eval modes extend the
// retrieval modes with "zero".
struct EvalMode {
    bool zero_shot = false;
    context::Mode retrieval = context::Mode::Dual;
    std::string name() const { return zero_shot ? "zero" : context::to_string(retrieval); }
};

EvalMode eval_mode_from_string(const std::string& s);

// Runs the full answer pipeline over the dataset at a fixed mode and k.
std::vector<ItemResult> run_items(const std::vector<DatasetItem>& items,
                                  const context::CorpusIndices& indices,
                                  const context::RetrievalConfig& base, const EvalMode& mode,
                                  std::size_t k, gateway::Gateway& gw, int workers);

EvalReport k_sweep(const std::vector<DatasetItem>& items, const std::vector<std::size_t>& ks,
                   const context::CorpusIndices& indices, const context::RetrievalConfig& base,
                   gateway::Gateway& gw, const RunOptions& options);

EvalReport ablate(const std::vector<DatasetItem>& items, const std::vector<EvalMode>& modes,
                  const context::CorpusIndices& indices, const context::RetrievalConfig& base,
                  gateway::Gateway& gw, const RunOptions& options);

struct CorpusStats {
    std::map<std::string, std::size_t> per_type;
    std::map<std::string, std::size_t> per_superkingdom;
    std::vector<std::pair<std::string, std::size_t>> sequence_length_histogram;
    uint64_t sequence_tokens = 0; // residues
    uint64_t text_tokens = 0;     // evaluation tokenizer
    double sequence_token_share = 0.0;
};

CorpusStats corpus_stats(const std::vector<qa::QAInstance>& corpus,
                         const std::vector<ProteinRecord>& proteins);

// Full-scale reference statistics used for sanity display next to desk-scale
// runs: per-type instance counts and the sequence-token share of the corpus
// the pipeline targets at production scale.
nlohmann::json full_scale_reference();

nlohmann::json stats_to_json(const CorpusStats& stats);

} // namespace psl::eval
