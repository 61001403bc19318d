#include "psl/protein.hpp"

#include "psl/errors.hpp"
#include "psl/jsonl.hpp"

#include <nlohmann/json.hpp>

#include <unordered_set>

namespace psl {

const char* to_string(Superkingdom sk) {
    switch (sk) {
    case Superkingdom::Eukaryota: return "Eukaryota";
    case Superkingdom::Bacteria: return "Bacteria";
    case Superkingdom::Archaea: return "Archaea";
    case Superkingdom::Viruses: return "Viruses";
    case Superkingdom::Unknown: break;
    }
    return "Unknown";
}

Superkingdom superkingdom_from_string(const std::string& s) {
    if (s == "Eukaryota") return Superkingdom::Eukaryota;
    if (s == "Bacteria") return Superkingdom::Bacteria;
    if (s == "Archaea") return Superkingdom::Archaea;
    if (s == "Viruses") return Superkingdom::Viruses;
    return Superkingdom::Unknown;
}

nlohmann::json protein_to_json(const ProteinRecord& p) {
    return nlohmann::json{
        {"accession", p.accession},
        {"sequence", p.sequence},
        {"go_terms", p.go_terms},
        {"superkingdom", to_string(p.superkingdom)},
        {"annotation",
         {{"name", p.annotation.name},
          {"function", p.annotation.function},
          {"location", p.annotation.location},
          {"family", p.annotation.family},
          {"similarity", p.annotation.similarity}}}};
}

ProteinRecord protein_from_json(const nlohmann::json& j) {
    ProteinRecord p;
    p.accession = j.at("accession").get<std::string>();
    p.sequence = j.at("sequence").get<std::string>();
    if (p.accession.empty())
        throw DataError("protein record with empty accession");
    if (p.sequence.empty())
        throw DataError("protein " + p.accession + " has an empty sequence");
    if (j.contains("go_terms"))
        for (const auto& t : j.at("go_terms"))
            p.go_terms.insert(t.get<std::string>());
    if (j.contains("superkingdom"))
        p.superkingdom = superkingdom_from_string(j.at("superkingdom").get<std::string>());
    if (j.contains("annotation")) {
        const auto& a = j.at("annotation");
        auto field = [&](const char* key) {
            return a.contains(key) ? a.at(key).get<std::string>() : std::string();
        };
        p.annotation.name = field("name");
        p.annotation.function = field("function");
        p.annotation.location = field("location");
        p.annotation.family = field("family");
        p.annotation.similarity = field("similarity");
    }
    return p;
}

std::vector<ProteinRecord> load_proteins(const std::string& path) {
    std::vector<ProteinRecord> out;
    std::unordered_set<std::string> seen;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line_no) {
        ProteinRecord p;
        try {
            p = protein_from_json(j);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen.insert(p.accession).second)
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate accession " +
                            p.accession);
        out.push_back(std::move(p));
    });
    return out;
}

} // namespace psl
