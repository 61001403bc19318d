#pragma once

#include "psl/go_graph.hpp"
#include "psl/protein.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace psl::dedup {

// Global alignment maximizing matches (match +1, mismatch 0, gap 0), i.e. the
// longest common subsequence; identity = matches / min(len a, len b).
double pairwise_identity(const std::string& a, const std::string& b);

struct Cluster {
    std::string representative;
    std::vector<std::string> members; // includes the representative
    std::string group;
};

struct ClusterOptions {
    double threshold = 0.70;
    bool use_prefilter = true; // k-mer gate is performance only, not correctness
    std::size_t prefilter_k = 5;
    double prefilter_min_shared = 0.3;
};

// Greedy incremental clustering: longest sequences first (ties by accession),
// each protein joins the first cluster whose representative it matches at
// >= threshold, else founds its own.
std::vector<Cluster> cluster_group(const std::vector<ProteinRecord>& group,
                                   const ClusterOptions& options = {});

struct IcTable {
    // term_id -> information content in nats; zero-count terms are absent.
    std::unordered_map<std::string, double> ic;
    double value(const std::string& term_id) const {
        auto it = ic.find(term_id);
        return it == ic.end() ? 0.0 : it->second;
    }
};

// IC(g) = -log(propagated_count(g) / N), N = proteins annotated in g's
// namespace, both computed over `representatives` on a copy of the dag.
// log_base 0 means natural log (nats); any base > 1 rescales the table.
IcTable compute_ic(const go::GoDag& dag, const std::vector<ProteinRecord>& representatives,
                   double log_base = 0.0);

// Eq-style functional IC: sum of IC over the union of the protein's terms and
// all their ancestors, each term counted once.
double protein_functional_ic(const ProteinRecord& p, const go::GoDag& dag, const IcTable& ic);

// One survivor per distinct functional IC rounded to 3 decimals
// (round half to even); ties keep the smallest accession. Ascending accession order.
std::vector<ProteinRecord> sample_by_ic(const std::vector<ProteinRecord>& group,
                                        const go::GoDag& dag, const IcTable& ic);

// Largest-remainder apportionment of target_n across superkingdoms; unfilled
// quota flows to the classes with the most remaining candidates.
std::vector<ProteinRecord>
species_quota_sample(const std::vector<ProteinRecord>& candidates, std::size_t target_n,
                     const std::map<Superkingdom, double>& global_proportions);

std::map<Superkingdom, double> species_proportions(const std::vector<ProteinRecord>& proteins);

struct DedupOptions {
    ClusterOptions cluster;
    std::size_t per_group_target = 0; // 0 disables the species quota stage
    double ic_log_base = 0.0;         // 0 = natural log
};

struct ProvenanceRow {
    std::string accession;
    std::string group;
    std::string cluster_representative;
    double functional_ic = 0.0;
};

struct DedupResult {
    std::vector<ProteinRecord> survivors;    // unique accessions, ascending
    std::vector<ProvenanceRow> provenance;   // one row per (group, survivor)
    std::vector<Cluster> clusters;           // all clusters across groups
    IcTable ic;
};

// Full two-pass pipeline over pruned groups: sequence clustering per group,
// IC table over the union of representatives, IC-unique sampling, then the
// optional per-group species quota.
DedupResult dedup_groups(const std::map<std::string, std::vector<std::string>>& groups,
                         const std::vector<ProteinRecord>& proteins, const go::GoDag& dag,
                         const DedupOptions& options);

} // namespace psl::dedup
