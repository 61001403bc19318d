#pragma once

#include "psl/protein.hpp"

#include <map>
#include <string>
#include <vector>

namespace psl::importer {

// Column-name mapping for UniProt/Swiss-Prot TSV exports; keys are our field
// names (accession, sequence, go_terms, superkingdom, name, function,
// location, family, similarity), values are column headers in the file.
std::map<std::string, std::string> default_uniprot_columns();

std::vector<ProteinRecord> import_uniprot_tsv(const std::string& path,
                                              std::map<std::string, std::string> columns = {});

} // namespace psl::importer
