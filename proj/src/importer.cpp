#include "psl/importer.hpp"

#include "psl/errors.hpp"
#include "psl/text.hpp"

#include <fstream>
#include <unordered_map>

namespace psl::importer {

std::map<std::string, std::string> default_uniprot_columns() {
    return {{"accession", "Entry"},
            {"sequence", "Sequence"},
            {"go_terms", "Gene Ontology IDs"},
            {"superkingdom", "Taxonomic lineage (SUPERKINGDOM)"},
            {"name", "Protein names"},
            {"function", "Function [CC]"},
            {"location", "Subcellular location [CC]"},
            {"family", "Protein families"},
            {"similarity", "Sequence similarities"}};
}

std::vector<ProteinRecord> import_uniprot_tsv(const std::string& path,
                                              std::map<std::string, std::string> columns) {
    auto mapping = default_uniprot_columns();
    for (const auto& [k, v] : columns) {
        if (!mapping.count(k))
            throw UsageError("unknown import field '" + k + "'");
        mapping[k] = v;
    }

    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw DataError(path + " is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    auto headers = text::split(line, '\t');
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < headers.size(); ++i)
        col_index[headers[i]] = i;

    auto index_of = [&](const std::string& field, bool required) -> std::ptrdiff_t {
        auto it = col_index.find(mapping.at(field));
        if (it == col_index.end()) {
            if (required)
                throw DataError(path + ": missing required column '" + mapping.at(field) + "'");
            return -1;
        }
        return static_cast<std::ptrdiff_t>(it->second);
    };

    std::ptrdiff_t c_acc = index_of("accession", true);
    std::ptrdiff_t c_seq = index_of("sequence", true);
    std::ptrdiff_t c_go = index_of("go_terms", false);
    std::ptrdiff_t c_king = index_of("superkingdom", false);
    std::ptrdiff_t c_name = index_of("name", false);
    std::ptrdiff_t c_func = index_of("function", false);
    std::ptrdiff_t c_loc = index_of("location", false);
    std::ptrdiff_t c_fam = index_of("family", false);
    std::ptrdiff_t c_sim = index_of("similarity", false);

    std::vector<ProteinRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (text::trim(line).empty())
            continue;
        auto fields = text::split(line, '\t');
        auto cell = [&](std::ptrdiff_t idx) -> std::string {
            if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size())
                return "";
            return text::trim(fields[static_cast<std::size_t>(idx)]);
        };

        ProteinRecord p;
        p.accession = cell(c_acc);
        p.sequence = cell(c_seq);
        if (p.accession.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty accession");
        if (p.sequence.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty sequence for " +
                            p.accession);
        for (const auto& term : text::split(cell(c_go), ';')) {
            std::string t = text::trim(term);
            if (!t.empty())
                p.go_terms.insert(t);
        }
        p.superkingdom = superkingdom_from_string(cell(c_king));
        p.annotation.name = cell(c_name);
        p.annotation.function = cell(c_func);
        p.annotation.location = cell(c_loc);
        p.annotation.family = cell(c_fam);
        p.annotation.similarity = cell(c_sim);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace psl::importer
