#include "psl/corpus_dedup.hpp"

#include "psl/errors.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <unordered_set>

namespace psl::dedup {

double pairwise_identity(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("pairwise_identity: empty sequence");
    const std::string& rows = a.size() <= b.size() ? a : b;
    const std::string& cols = a.size() <= b.size() ? b : a;

    std::vector<uint32_t> prev(cols.size() + 1, 0);
    std::vector<uint32_t> cur(cols.size() + 1, 0);
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        char rc = rows[i - 1];
        for (std::size_t j = 1; j <= cols.size(); ++j) {
            if (rc == cols[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    uint32_t matches = prev[cols.size()];
    return static_cast<double>(matches) / static_cast<double>(std::min(a.size(), b.size()));
}

namespace {

std::unordered_set<std::string> kmer_set(const std::string& seq, std::size_t k) {
    std::unordered_set<std::string> out;
    if (seq.size() >= k)
        for (std::size_t i = 0; i + k <= seq.size(); ++i)
            out.insert(seq.substr(i, k));
    return out;
}

// Shared fraction relative to the smaller set; empty sets pass the gate so the
// prefilter can never reject a pair the alignment would accept on short input.
bool prefilter_pass(const std::unordered_set<std::string>& a,
                    const std::unordered_set<std::string>& b, double min_shared) {
    if (a.empty() || b.empty())
        return true;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    std::size_t shared = 0;
    for (const auto& k : small)
        if (large.count(k))
            ++shared;
    return static_cast<double>(shared) / static_cast<double>(small.size()) >= min_shared;
}

} // namespace

std::vector<Cluster> cluster_group(const std::vector<ProteinRecord>& group,
                                   const ClusterOptions& options) {
    if (!(options.threshold > 0.0) || options.threshold > 1.0)
        throw UsageError("cluster threshold must be in (0,1]");

    std::vector<std::size_t> order(group.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (group[x].sequence.size() != group[y].sequence.size())
            return group[x].sequence.size() > group[y].sequence.size();
        return group[x].accession < group[y].accession;
    });

    std::vector<Cluster> clusters;
    std::vector<const std::string*> rep_seqs;
    std::vector<std::unordered_set<std::string>> rep_kmers;

    for (std::size_t idx : order) {
        const ProteinRecord& p = group[idx];
        auto kmers = options.use_prefilter ? kmer_set(p.sequence, options.prefilter_k)
                                           : std::unordered_set<std::string>{};
        bool placed = false;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (options.use_prefilter &&
                !prefilter_pass(kmers, rep_kmers[c], options.prefilter_min_shared))
                continue;
            if (pairwise_identity(p.sequence, *rep_seqs[c]) >= options.threshold) {
                clusters[c].members.push_back(p.accession);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Cluster cl;
            cl.representative = p.accession;
            cl.members.push_back(p.accession);
            clusters.push_back(std::move(cl));
            rep_seqs.push_back(&p.sequence);
            rep_kmers.push_back(options.use_prefilter ? kmer_set(p.sequence, options.prefilter_k)
                                                      : std::unordered_set<std::string>{});
        }
    }
    for (auto& c : clusters)
        std::sort(c.members.begin(), c.members.end());
    return clusters;
}

IcTable compute_ic(const go::GoDag& dag, const std::vector<ProteinRecord>& representatives,
                   double log_base) {
    if (log_base != 0.0 && !(log_base > 1.0))
        throw UsageError("ic log base must be > 1 (or 0 for natural log)");
    double scale = log_base == 0.0 ? 1.0 : std::log(log_base);

    go::GoDag counted = dag;
    go::annotate_counts(counted, representatives);

    IcTable table;
    for (const auto& id : counted.term_ids()) {
        const auto& n = counted.node(id);
        if (n.propagated_count == 0)
            continue;
        auto it = counted.namespace_counts.find(n.ns);
        if (it == counted.namespace_counts.end() || it->second == 0)
            continue;
        double freq = static_cast<double>(n.propagated_count) / static_cast<double>(it->second);
        table.ic[id] = -std::log(freq) / scale;
    }
    return table;
}

double protein_functional_ic(const ProteinRecord& p, const go::GoDag& dag, const IcTable& ic) {
    if (p.go_terms.empty())
        throw std::invalid_argument("protein_functional_ic: " + p.accession + " has no GO terms");
    double sum = 0.0;
    for (const auto& t : dag.ancestor_closure(p.go_terms))
        sum += ic.value(t);
    return sum;
}

namespace {

// Bucket key in milli-nats, rounded half to even.
long long round3_key(double x) {
    return static_cast<long long>(std::nearbyint(x * 1000.0));
}

} // namespace

std::vector<ProteinRecord> sample_by_ic(const std::vector<ProteinRecord>& group,
                                        const go::GoDag& dag, const IcTable& ic) {
    std::map<long long, const ProteinRecord*> buckets;
    for (const auto& p : group) {
        long long key = round3_key(protein_functional_ic(p, dag, ic));
        auto it = buckets.find(key);
        if (it == buckets.end() || p.accession < it->second->accession)
            buckets[key] = &p;
    }
    std::vector<ProteinRecord> out;
    out.reserve(buckets.size());
    for (const auto& [key, p] : buckets)
        out.push_back(*p);
    std::sort(out.begin(), out.end(),
              [](const ProteinRecord& a, const ProteinRecord& b) { return a.accession < b.accession; });
    return out;
}

std::map<Superkingdom, double> species_proportions(const std::vector<ProteinRecord>& proteins) {
    std::map<Superkingdom, double> out;
    if (proteins.empty())
        return out;
    for (const auto& p : proteins)
        out[p.superkingdom] += 1.0;
    for (auto& [sk, v] : out)
        v /= static_cast<double>(proteins.size());
    return out;
}

std::vector<ProteinRecord>
species_quota_sample(const std::vector<ProteinRecord>& candidates, std::size_t target_n,
                     const std::map<Superkingdom, double>& global_proportions) {
    double total = 0.0;
    for (const auto& [sk, v] : global_proportions)
        total += v;
    if (std::fabs(total - 1.0) > 1e-9)
        throw UsageError("species proportions must sum to 1");

    if (target_n >= candidates.size()) {
        auto out = candidates;
        std::sort(out.begin(), out.end(), [](const ProteinRecord& a, const ProteinRecord& b) {
            return a.accession < b.accession;
        });
        return out;
    }

    std::map<Superkingdom, std::vector<const ProteinRecord*>> pools;
    for (const auto& p : candidates)
        pools[p.superkingdom].push_back(&p);
    for (auto& [sk, pool] : pools)
        std::sort(pool.begin(), pool.end(), [](const ProteinRecord* a, const ProteinRecord* b) {
            return a->accession < b->accession;
        });

    // Largest-remainder apportionment over the configured proportions.
    struct Share {
        Superkingdom sk;
        double raw;
        std::size_t quota;
        double remainder;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (const auto& [sk, prop] : global_proportions) {
        double raw = prop * static_cast<double>(target_n);
        auto quota = static_cast<std::size_t>(raw);
        shares.push_back({sk, raw, quota, raw - static_cast<double>(quota)});
        assigned += quota;
    }
    std::sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
        if (a.remainder != b.remainder)
            return a.remainder > b.remainder;
        if (a.raw != b.raw)
            return a.raw > b.raw;
        return a.sk < b.sk;
    });
    for (std::size_t i = 0; assigned < target_n && i < shares.size(); ++i) {
        ++shares[i].quota;
        ++assigned;
    }

    std::map<Superkingdom, std::size_t> take;
    std::size_t short_by = 0;
    for (const auto& s : shares) {
        std::size_t avail = pools.count(s.sk) ? pools[s.sk].size() : 0;
        take[s.sk] = std::min(s.quota, avail);
        short_by += s.quota - take[s.sk];
    }
    // Redistribute unfilled quota to the classes with the most spare candidates.
    while (short_by > 0) {
        Superkingdom best = Superkingdom::Unknown;
        std::size_t best_spare = 0;
        for (const auto& [sk, pool] : pools) {
            std::size_t spare = pool.size() - take[sk];
            if (spare > best_spare) {
                best_spare = spare;
                best = sk;
            }
        }
        if (best_spare == 0)
            break;
        ++take[best];
        --short_by;
    }

    std::vector<ProteinRecord> out;
    for (const auto& [sk, pool] : pools)
        for (std::size_t i = 0; i < take[sk] && i < pool.size(); ++i)
            out.push_back(*pool[i]);
    std::sort(out.begin(), out.end(),
              [](const ProteinRecord& a, const ProteinRecord& b) { return a.accession < b.accession; });
    return out;
}

DedupResult dedup_groups(const std::map<std::string, std::vector<std::string>>& groups,
                         const std::vector<ProteinRecord>& proteins, const go::GoDag& dag,
                         const DedupOptions& options) {
    std::unordered_map<std::string, const ProteinRecord*> by_accession;
    for (const auto& p : proteins)
        by_accession[p.accession] = &p;

    DedupResult result;

    // Pass 1: sequence clustering per group; representatives carry forward.
    std::map<std::string, std::vector<ProteinRecord>> group_reps;
    std::map<std::string, const ProteinRecord*> rep_union;
    std::map<std::string, std::map<std::string, std::string>> rep_of; // group -> member -> rep
    for (const auto& [group_id, accessions] : groups) {
        std::vector<ProteinRecord> members;
        for (const auto& acc : accessions) {
            auto it = by_accession.find(acc);
            if (it == by_accession.end())
                throw DataError("group " + group_id + " references unknown accession " + acc);
            members.push_back(*it->second);
        }
        auto clusters = cluster_group(members, options.cluster);
        for (auto& c : clusters) {
            c.group = group_id;
            for (const auto& m : c.members)
                rep_of[group_id][m] = c.representative;
            group_reps[group_id].push_back(*by_accession.at(c.representative));
            rep_union[c.representative] = by_accession.at(c.representative);
            result.clusters.push_back(std::move(c));
        }
    }

    // IC over the union of representatives (the post-clustering corpus).
    std::vector<ProteinRecord> rep_corpus;
    rep_corpus.reserve(rep_union.size());
    for (const auto& [acc, p] : rep_union)
        rep_corpus.push_back(*p);
    result.ic = compute_ic(dag, rep_corpus, options.ic_log_base);
    auto proportions = species_proportions(rep_corpus);

    // Pass 2: IC-unique sampling per group, then the optional species quota.
    std::map<std::string, ProteinRecord> survivors;
    for (const auto& [group_id, reps] : group_reps) {
        auto sampled = sample_by_ic(reps, dag, result.ic);
        if (options.per_group_target > 0)
            sampled = species_quota_sample(sampled, options.per_group_target, proportions);
        for (const auto& p : sampled) {
            ProvenanceRow row;
            row.accession = p.accession;
            row.group = group_id;
            row.cluster_representative = rep_of[group_id][p.accession];
            row.functional_ic = protein_functional_ic(p, dag, result.ic);
            result.provenance.push_back(std::move(row));
            survivors.emplace(p.accession, p);
        }
    }

    for (const auto& [acc, p] : survivors)
        result.survivors.push_back(p);
    std::sort(result.provenance.begin(), result.provenance.end(),
              [](const ProvenanceRow& a, const ProvenanceRow& b) {
                  if (a.group != b.group)
                      return a.group < b.group;
                  return a.accession < b.accession;
              });
    return result;
}

} // namespace psl::dedup
