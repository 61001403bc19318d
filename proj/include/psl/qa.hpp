#pragma once

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace psl::qa {

enum class QaType { Attribute, Knowledge, Descriptive, TrueFalse };

const char* to_string(QaType t);
QaType qa_type_from_string(const std::string& s);

// One bilingual (sequence + natural language) question-answer pair.
struct QAInstance {
    std::string accession;
    QaType qa_type = QaType::Attribute;
    std::string question;
    std::string answer;
    std::optional<std::string> explanation; // TrueFalse only
    std::optional<bool> verdict;            // TrueFalse only
    std::string source_model;
    std::string sequence; // copied so exemplars are self-contained
    std::optional<std::string> batch_id; // links Knowledge siblings

    bool operator==(const QAInstance&) const = default;

    void validate() const; // throws DataError on violated invariants
};

nlohmann::json qa_to_json(const QAInstance& q);
QAInstance qa_from_json(const nlohmann::json& j);

std::vector<QAInstance> load_corpus(const std::string& path);

} // namespace psl::qa
