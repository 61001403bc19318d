#include "psl/qa.hpp"

#include "psl/errors.hpp"
#include "psl/jsonl.hpp"

#include <nlohmann/json.hpp>

namespace psl::qa {

const char* to_string(QaType t) {
    switch (t) {
    case QaType::Attribute: return "attribute";
    case QaType::Knowledge: return "knowledge";
    case QaType::Descriptive: return "descriptive";
    case QaType::TrueFalse: return "truefalse";
    }
    return "attribute";
}

QaType qa_type_from_string(const std::string& s) {
    if (s == "attribute" || s == "attr") return QaType::Attribute;
    if (s == "knowledge" || s == "know") return QaType::Knowledge;
    if (s == "descriptive" || s == "desc") return QaType::Descriptive;
    if (s == "truefalse" || s == "tf") return QaType::TrueFalse;
    throw DataError("unknown qa_type: " + s);
}

void QAInstance::validate() const {
    if (question.empty() || answer.empty())
        throw DataError("QA instance for " + accession + " has an empty question or answer");
    if (qa_type == QaType::TrueFalse) {
        if (!verdict.has_value() || !explanation.has_value() || explanation->empty())
            throw DataError("true/false instance for " + accession +
                            " must carry a verdict and an explanation");
    }
}

nlohmann::json qa_to_json(const QAInstance& q) {
    nlohmann::json j{{"accession", q.accession},
                     {"qa_type", to_string(q.qa_type)},
                     {"question", q.question},
                     {"answer", q.answer},
                     {"source_model", q.source_model},
                     {"sequence", q.sequence}};
    if (q.explanation)
        j["explanation"] = *q.explanation;
    if (q.verdict)
        j["verdict"] = *q.verdict;
    if (q.batch_id)
        j["batch_id"] = *q.batch_id;
    return j;
}

QAInstance qa_from_json(const nlohmann::json& j) {
    QAInstance q;
    q.accession = j.at("accession").get<std::string>();
    q.qa_type = qa_type_from_string(j.at("qa_type").get<std::string>());
    q.question = j.at("question").get<std::string>();
    q.answer = j.at("answer").get<std::string>();
    if (j.contains("explanation"))
        q.explanation = j.at("explanation").get<std::string>();
    if (j.contains("verdict"))
        q.verdict = j.at("verdict").get<bool>();
    q.source_model = j.value("source_model", "");
    q.sequence = j.value("sequence", "");
    if (j.contains("batch_id"))
        q.batch_id = j.at("batch_id").get<std::string>();
    return q;
}

std::vector<QAInstance> load_corpus(const std::string& path) {
    std::vector<QAInstance> out;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line_no) {
        try {
            out.push_back(qa_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    return out;
}

} // namespace psl::qa
