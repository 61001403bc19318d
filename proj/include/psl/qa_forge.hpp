#pragma once

#include "psl/llm_gateway.hpp"
#include "psl/protein.hpp"
#include "psl/qa.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace psl::forge {

// Canonical question sides for the two answer-only generation types.
inline constexpr const char* kAttributeQuestion =
    "Summarize the key attributes of this protein.";
inline constexpr const char* kDescriptiveQuestion =
    "Provide a description of the protein with the given amino acid sequence.";

// Templates live as UTF-8 text files (attribute.txt, knowledge.txt,
// descriptive.txt, truefalse.txt) with a single {{ANNOTATIONS}} slot.
class PromptLibrary {
public:
    static PromptLibrary load(const std::string& dir);

    std::string render(const ProteinRecord& p, qa::QaType type) const;
    const std::string& raw_template(qa::QaType type) const;

private:
    std::map<qa::QaType, std::string> templates_;
};

// The entry text interpolated into the templates; missing fields become N/A.
std::string annotation_block(const ProteinRecord& p);

// Parsers for the four response formats. All throw ParseError (carrying the
// raw text) when the response does not follow its template.
qa::QAInstance parse_truefalse(const std::string& raw);
std::vector<qa::QAInstance> parse_knowledge(const std::string& raw);
qa::QAInstance parse_attribute(const std::string& raw);
qa::QAInstance parse_descriptive(const std::string& raw);

// Canonical re-rendering of parsed instances, mainly for round-trip checks.
std::string serialize_truefalse(const qa::QAInstance& q);
std::string serialize_knowledge(const std::vector<qa::QAInstance>& batch);

struct GenerateOptions {
    std::set<qa::QaType> types = {qa::QaType::Attribute, qa::QaType::Knowledge,
                                  qa::QaType::Descriptive, qa::QaType::TrueFalse};
    int retries = 2; // extra attempts after the first failure
    int workers = 4;
    std::string checkpoint_path; // empty disables checkpointing
    std::string source_model = "unknown";
};

struct RejectRow {
    std::string accession;
    qa::QaType qa_type;
    int attempts = 0;
    std::string last_error;
    std::string raw;
};

struct GenerationResult {
    std::vector<qa::QAInstance> instances; // ordered by (accession, type)
    std::vector<RejectRow> rejects;
};

// Render -> complete -> parse per protein x type, with parse-error feedback
// retries. Completed work is appended to the checkpoint as it finishes; a
// GatewayError flushes the checkpoint and rethrows so the run can resume.
GenerationResult generate_corpus(const std::vector<ProteinRecord>& proteins,
                                 const PromptLibrary& prompts, gateway::Gateway& gw,
                                 const GenerateOptions& options);

} // namespace psl::forge
