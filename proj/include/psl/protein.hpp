#pragma once

#include <nlohmann/json_fwd.hpp>

#include <set>
#include <string>
#include <vector>

namespace psl {

enum class Superkingdom { Eukaryota, Bacteria, Archaea, Viruses, Unknown };

const char* to_string(Superkingdom sk);
Superkingdom superkingdom_from_string(const std::string& s);

// Structured annotation text carried alongside each protein entry.
struct Annotation {
    std::string name;
    std::string function;
    std::string location;
    std::string family;
    std::string similarity;

    bool operator==(const Annotation&) const = default;
};

struct ProteinRecord {
    std::string accession;
    std::string sequence; // 20-letter amino-acid alphabet plus B,Z,X,U,O
    std::set<std::string> go_terms;
    Superkingdom superkingdom = Superkingdom::Unknown;
    Annotation annotation;

    bool operator==(const ProteinRecord&) const = default;
};

nlohmann::json protein_to_json(const ProteinRecord& p);
ProteinRecord protein_from_json(const nlohmann::json& j);

// Reads a protein JSONL file (header records are skipped). Throws DataError
// on malformed lines or duplicate accessions.
std::vector<ProteinRecord> load_proteins(const std::string& path);

} // namespace psl
