#pragma once

#include "psl/protein.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace psl::go {

struct GoNode {
    std::string term_id;
    std::string name;
    std::string ns; // biological_process | molecular_function | cellular_component
    std::set<std::string> parents;  // is_a edges only
    std::set<std::string> children;
    uint64_t direct_count = 0;
    uint64_t propagated_count = 0; // proteins at this term or any descendant
    int depth = 0;                 // min edge distance from a namespace root
};

// Thresholds controlling the recursive pruning walk.
struct PruningParams {
    double lambda = 0.001;
    double beta = 0.5;
    double tau0 = 10.0;
    double alpha = 0.9;
    uint64_t total_count = 1;

    void validate() const; // throws UsageError on out-of-range values
};

class GoDag {
public:
    bool has(const std::string& term_id) const { return nodes_.count(term_id) > 0; }
    const GoNode& node(const std::string& term_id) const;
    GoNode& node_mut(const std::string& term_id);
    void add_node(GoNode n);

    // Term ids in lexicographic order; all traversal is deterministic.
    const std::vector<std::string>& term_ids() const { return order_; }
    std::vector<std::string> roots() const; // nodes with no parents
    std::size_t size() const { return order_.size(); }

    // Links children sets, rejects cycles, computes BFS depths from roots.
    void finalize();

    // Union of `terms` and all their is_a ancestors (unknown ids skipped).
    std::set<std::string> ancestor_closure(const std::set<std::string>& terms) const;

    // Distinct proteins with >=1 resolvable annotation in each namespace.
    std::map<std::string, uint64_t> namespace_counts;

private:
    std::unordered_map<std::string, GoNode> nodes_;
    std::vector<std::string> order_;
};

// OBO 1.2/1.4 flat file -> DAG. Non-obsolete [Term] stanzas become nodes;
// only is_a edges are kept. Malformed stanzas and cycles raise DataError.
GoDag parse_obo(std::istream& in);
GoDag parse_obo_file(const std::string& path);

struct AnnotateReport {
    uint64_t annotated_proteins = 0;   // proteins with >=1 resolvable term
    uint64_t unresolved_annotations = 0;
    std::set<std::string> unresolved_terms;
};

// Populates direct/propagated counts; a protein counts at most once per node.
AnnotateReport annotate_counts(GoDag& dag, const std::vector<ProteinRecord>& proteins);

// Eq-style thresholds. min_support(d) = lambda * C_tot * (1 + beta*d);
// imbalance_threshold(d) = tau0 * alpha^d.
double min_support(int depth, const PruningParams& params);
double imbalance_threshold(int depth, const PruningParams& params);

// max/min propagated count over children with non-zero counts; nullopt when
// fewer than two such children exist (treated as "not imbalanced").
std::optional<double> imbalance_ratio(const GoNode& node, const GoDag& dag);

enum class RetentionRule { Support, Imbalance };
const char* to_string(RetentionRule r);

struct RetainedNode {
    std::string term_id;
    RetentionRule rule;
};

struct PruneResult {
    // term_id -> rule, lexicographically ordered.
    std::map<std::string, RetentionRule> retained;
};

// Recursive top-down walk from every root. At node v:
//   (a) imbalance ratio defined and above threshold -> retain v, stop;
//   (b) otherwise descend into children meeting min_support at their depth;
//   (c) no child qualifies -> retain v if it meets min_support itself.
PruneResult prune(const GoDag& dag, const PruningParams& params);

struct GroupingResult {
    // group term_id -> accessions, both lexicographically ordered.
    std::map<std::string, std::vector<std::string>> groups;
    std::vector<std::string> ungrouped; // accessions with no retained ancestor
};

GroupingResult group_proteins(const PruneResult& retained, const GoDag& dag,
                              const std::vector<ProteinRecord>& proteins);

} // namespace psl::go
