#include "psl/qa_forge.hpp"

#include "psl/errors.hpp"
#include "psl/jsonl.hpp"
#include "psl/parallel.hpp"
#include "psl/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

namespace psl::forge {

namespace {

const char* template_file(qa::QaType t) {
    switch (t) {
    case qa::QaType::Attribute: return "attribute.txt";
    case qa::QaType::Knowledge: return "knowledge.txt";
    case qa::QaType::Descriptive: return "descriptive.txt";
    case qa::QaType::TrueFalse: return "truefalse.txt";
    }
    return "attribute.txt";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open prompt template " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string or_na(const std::string& s) { return s.empty() ? "N/A" : s; }

} // namespace

PromptLibrary PromptLibrary::load(const std::string& dir) {
    PromptLibrary lib;
    for (auto type : {qa::QaType::Attribute, qa::QaType::Knowledge, qa::QaType::Descriptive,
                      qa::QaType::TrueFalse}) {
        std::string path = (std::filesystem::path(dir) / template_file(type)).string();
        std::string text = slurp(path);
        if (text.find("{{ANNOTATIONS}}") == std::string::npos)
            throw DataError(path + " is missing the {{ANNOTATIONS}} slot");
        lib.templates_[type] = std::move(text);
    }
    return lib;
}

const std::string& PromptLibrary::raw_template(qa::QaType type) const {
    auto it = templates_.find(type);
    if (it == templates_.end())
        throw std::invalid_argument("no template loaded for qa_type");
    return it->second;
}

std::string annotation_block(const ProteinRecord& p) {
    std::ostringstream out;
    out << "Accession: " << or_na(p.accession) << "\n";
    out << "Protein name: " << or_na(p.annotation.name) << "\n";
    out << "Function: " << or_na(p.annotation.function) << "\n";
    out << "Subcellular location: " << or_na(p.annotation.location) << "\n";
    out << "Family: " << or_na(p.annotation.family) << "\n";
    out << "Similarity: " << or_na(p.annotation.similarity) << "\n";
    std::string terms;
    for (const auto& t : p.go_terms) {
        if (!terms.empty())
            terms += "; ";
        terms += t;
    }
    out << "GO terms: " << or_na(terms) << "\n";
    out << "Superkingdom: " << to_string(p.superkingdom) << "\n";
    out << "Sequence: " << p.sequence;
    return out.str();
}

std::string PromptLibrary::render(const ProteinRecord& p, qa::QaType type) const {
    std::string prompt = raw_template(type);
    const std::string slot = "{{ANNOTATIONS}}";
    auto pos = prompt.find(slot);
    prompt.replace(pos, slot.size(), annotation_block(p));
    return prompt;
}

namespace {

// Field extraction between labels; labels must appear in order.
struct LabeledFields {
    std::string stem, answer, explanation;
};

LabeledFields split_truefalse_fields(const std::string& raw) {
    auto stem_pos = raw.find("Stem:");
    if (stem_pos == std::string::npos)
        throw ParseError("true/false response missing 'Stem:'", raw);
    auto answer_pos = raw.find("Answer:", stem_pos);
    if (answer_pos == std::string::npos)
        throw ParseError("true/false response missing 'Answer:'", raw);
    auto expl_pos = raw.find("Explanation:", answer_pos);
    if (expl_pos == std::string::npos)
        throw ParseError("true/false response missing 'Explanation:'", raw);

    auto strip = [](std::string s) {
        s = text::trim(s);
        while (!s.empty() && (s.back() == ';'))
            s.pop_back();
        return text::trim(s);
    };
    LabeledFields f;
    f.stem = strip(raw.substr(stem_pos + 5, answer_pos - stem_pos - 5));
    f.answer = strip(raw.substr(answer_pos + 7, expl_pos - answer_pos - 7));
    f.explanation = strip(raw.substr(expl_pos + 12));
    return f;
}

bool parse_verdict(const std::string& s, const std::string& raw) {
    std::string v = text::to_lower(text::trim(s));
    while (!v.empty() && (v.back() == '.' || v.back() == '!'))
        v.pop_back();
    if (v == "true" || v == "t")
        return true;
    if (v == "false" || v == "f")
        return false;
    throw ParseError("unparseable true/false verdict: '" + s + "'", raw);
}

} // namespace

qa::QAInstance parse_truefalse(const std::string& raw) {
    auto fields = split_truefalse_fields(raw);
    if (fields.stem.empty())
        throw ParseError("true/false stem is empty", raw);
    if (fields.explanation.empty())
        throw ParseError("true/false explanation is empty", raw);
    bool verdict = parse_verdict(fields.answer, raw);

    // Template rule: the stem must not give the answer format away.
    for (const auto& tok : text::tokenize(fields.stem))
        if (tok == "true" || tok == "false")
            throw ParseError("true/false stem contains the word '" + tok + "'", raw);

    qa::QAInstance q;
    q.qa_type = qa::QaType::TrueFalse;
    q.question = fields.stem;
    q.answer = verdict ? "True" : "False";
    q.verdict = verdict;
    q.explanation = fields.explanation;
    return q;
}

std::string serialize_truefalse(const qa::QAInstance& q) {
    return "Stem: " + q.question + "; Answer: " + q.answer +
           "; Explanation: " + (q.explanation ? *q.explanation : "");
}

namespace {

// Accepts </Tag> and <\Tag> closers.
std::string tag_section(const std::string& raw, const std::string& tag) {
    std::string open = "<" + tag + ">";
    auto start = raw.find(open);
    if (start == std::string::npos)
        throw ParseError("response missing <" + tag + "> section", raw);
    start += open.size();
    std::size_t end = std::string::npos;
    for (const std::string& closer : {"</" + tag + ">", "<\\" + tag + ">"}) {
        auto pos = raw.find(closer, start);
        if (pos != std::string::npos && (end == std::string::npos || pos < end))
            end = pos;
    }
    if (end == std::string::npos)
        throw ParseError("response missing closing tag for <" + tag + ">", raw);
    return raw.substr(start, end - start);
}

std::vector<std::string> numbered_items(const std::string& section, const std::string& raw) {
    std::vector<std::string> items;
    for (const auto& line : text::split(section, '\n')) {
        std::string t = text::trim(line);
        if (t.empty())
            continue;
        std::size_t i = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])))
            ++i;
        if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')' || t[i] == ':')) {
            items.push_back(text::trim(t.substr(i + 1)));
        } else if (!items.empty()) {
            items.back() += " " + t; // continuation line
        } else {
            throw ParseError("unnumbered line before first item: '" + t + "'", raw);
        }
    }
    return items;
}

} // namespace

std::vector<qa::QAInstance> parse_knowledge(const std::string& raw) {
    auto questions = numbered_items(tag_section(raw, "Questions"), raw);
    auto answers = numbered_items(tag_section(raw, "Answers"), raw);
    if (questions.size() != answers.size())
        throw ParseError("question/answer count mismatch: " + std::to_string(questions.size()) +
                             " vs " + std::to_string(answers.size()),
                         raw);
    if (questions.empty() || questions.size() > 9)
        throw ParseError("knowledge batch must contain 1-9 pairs, got " +
                             std::to_string(questions.size()),
                         raw);
    std::vector<qa::QAInstance> out;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (questions[i].empty() || answers[i].empty())
            throw ParseError("empty question or answer at index " + std::to_string(i + 1), raw);
        qa::QAInstance q;
        q.qa_type = qa::QaType::Knowledge;
        q.question = questions[i];
        q.answer = answers[i];
        out.push_back(std::move(q));
    }
    return out;
}

std::string serialize_knowledge(const std::vector<qa::QAInstance>& batch) {
    std::ostringstream out;
    out << "<Questions>\n";
    for (std::size_t i = 0; i < batch.size(); ++i)
        out << (i + 1) << ". " << batch[i].question << "\n";
    out << "</Questions>\n<Answers>\n";
    for (std::size_t i = 0; i < batch.size(); ++i)
        out << (i + 1) << ". " << batch[i].answer << "\n";
    out << "</Answers>";
    return out.str();
}

qa::QAInstance parse_attribute(const std::string& raw) {
    std::string body = text::trim(raw);
    if (body.empty())
        throw ParseError("empty attribute response", raw);
    for (const char* label : {"PROTEIN NAME:", "FUNCTION:", "SUBCELLULAR LOCATION:", "FAMILY:",
                              "KEY SEQUENCE MOTIF:"}) {
        if (body.find(label) == std::string::npos)
            throw ParseError(std::string("attribute response missing label '") + label + "'", raw);
    }
    qa::QAInstance q;
    q.qa_type = qa::QaType::Attribute;
    q.question = kAttributeQuestion;
    q.answer = body;
    return q;
}

qa::QAInstance parse_descriptive(const std::string& raw) {
    static const char* openers[] = {
        "A short report on the protein with the given amino acid sequence highlights:",
        "A brief overview of the protein with the provided amino acid sequence is as follows:",
        "A concise description of the protein with the specified amino acid sequence includes:",
        "An outline of the key aspects of the protein with the corresponding amino acid sequence "
        "is as follows:",
        "A summary of the protein's main attributes with the input amino acid sequence reveals:",
    };
    std::string body = text::trim(raw);
    if (body.empty())
        throw ParseError("empty descriptive response", raw);
    bool ok = false;
    for (const char* opener : openers)
        if (text::starts_with(body, opener)) {
            ok = true;
            break;
        }
    if (!ok)
        throw ParseError("descriptive response does not start with a recognized opener", raw);
    qa::QAInstance q;
    q.qa_type = qa::QaType::Descriptive;
    q.question = kDescriptiveQuestion;
    q.answer = body;
    return q;
}

namespace {

struct Task {
    const ProteinRecord* protein;
    qa::QaType type;
};

struct TaskOutcome {
    bool done = false;
    bool rejected = false;
    std::vector<qa::QAInstance> instances;
    RejectRow reject;
};

std::vector<qa::QAInstance> parse_for_type(qa::QaType type, const std::string& raw) {
    switch (type) {
    case qa::QaType::Attribute: return {parse_attribute(raw)};
    case qa::QaType::Knowledge: return parse_knowledge(raw);
    case qa::QaType::Descriptive: return {parse_descriptive(raw)};
    case qa::QaType::TrueFalse: return {parse_truefalse(raw)};
    }
    throw std::invalid_argument("unknown qa_type");
}

nlohmann::json outcome_to_json(const std::string& accession, qa::QaType type,
                               const TaskOutcome& o) {
    nlohmann::json j{{"accession", accession}, {"qa_type", qa::to_string(type)}};
    if (o.rejected) {
        j["status"] = "rejected";
        j["reject"] = {{"attempts", o.reject.attempts},
                       {"last_error", o.reject.last_error},
                       {"raw", o.reject.raw}};
    } else {
        j["status"] = "done";
        auto& arr = j["instances"] = nlohmann::json::array();
        for (const auto& inst : o.instances)
            arr.push_back(qa::qa_to_json(inst));
    }
    return j;
}

} // namespace

GenerationResult generate_corpus(const std::vector<ProteinRecord>& proteins,
                                 const PromptLibrary& prompts, gateway::Gateway& gw,
                                 const GenerateOptions& options) {
    std::vector<const ProteinRecord*> sorted;
    sorted.reserve(proteins.size());
    for (const auto& p : proteins)
        sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const ProteinRecord* a, const ProteinRecord* b) {
        return a->accession < b->accession;
    });

    // Previously completed (accession, type) pairs are skipped on resume.
    std::map<std::pair<std::string, qa::QaType>, TaskOutcome> completed;
    if (!options.checkpoint_path.empty() && std::filesystem::exists(options.checkpoint_path)) {
        jsonl::for_each_record(options.checkpoint_path, [&](const nlohmann::json& j, std::size_t) {
            TaskOutcome o;
            auto type = qa::qa_type_from_string(j.at("qa_type").get<std::string>());
            std::string accession = j.at("accession").get<std::string>();
            if (j.at("status") == "rejected") {
                o.rejected = true;
                o.reject.accession = accession;
                o.reject.qa_type = type;
                o.reject.attempts = j.at("reject").value("attempts", 0);
                o.reject.last_error = j.at("reject").value("last_error", "");
                o.reject.raw = j.at("reject").value("raw", "");
            } else {
                for (const auto& inst : j.at("instances"))
                    o.instances.push_back(qa::qa_from_json(inst));
            }
            o.done = true;
            completed[{accession, type}] = std::move(o);
        });
    }

    std::vector<Task> tasks;
    for (const auto* p : sorted)
        for (auto type : {qa::QaType::Attribute, qa::QaType::Knowledge, qa::QaType::Descriptive,
                          qa::QaType::TrueFalse})
            if (options.types.count(type) && !completed.count({p->accession, type}))
                tasks.push_back(Task{p, type});

    std::vector<TaskOutcome> outcomes(tasks.size());
    std::mutex checkpoint_mutex;
    std::ofstream checkpoint;
    if (!options.checkpoint_path.empty())
        checkpoint.open(options.checkpoint_path, std::ios::app);

    auto run_task = [&](std::size_t i) {
        const Task& task = tasks[i];
        TaskOutcome& out = outcomes[i];
        std::string prompt = prompts.render(*task.protein, task.type);
        std::string feedback;
        int attempts = 0;
        std::string last_error;
        std::string last_raw;
        while (attempts <= options.retries) {
            ++attempts;
            std::string full = feedback.empty() ? prompt : prompt + feedback;
            gateway::Completion c = gw.complete({{"user", full}});
            try {
                out.instances = parse_for_type(task.type, c.text);
                out.done = true;
                break;
            } catch (const ParseError& e) {
                last_error = e.what();
                last_raw = c.text;
                feedback = "\n\nYour previous response could not be parsed: " +
                           std::string(e.what()) + ". Follow the required format exactly.";
            }
        }
        if (!out.done) {
            out.rejected = true;
            out.reject = RejectRow{task.protein->accession, task.type, attempts, last_error,
                                   last_raw};
            out.done = true;
        }
        for (std::size_t k = 0; k < out.instances.size(); ++k) {
            auto& inst = out.instances[k];
            inst.accession = task.protein->accession;
            inst.sequence = task.protein->sequence;
            inst.source_model = options.source_model;
            if (task.type == qa::QaType::Knowledge)
                inst.batch_id = task.protein->accession + ":know";
            inst.validate();
        }
        if (checkpoint.is_open()) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            checkpoint << outcome_to_json(task.protein->accession, task.type, out).dump() << "\n";
            checkpoint.flush();
        }
    };

    std::exception_ptr gateway_failure;
    try {
        parallel_for(tasks.size(), options.workers, run_task);
    } catch (const GatewayError&) {
        gateway_failure = std::current_exception();
    }

    if (gateway_failure)
        std::rethrow_exception(gateway_failure); // checkpoint already holds finished tasks

    GenerationResult result;
    auto emit = [&](const std::string& accession, qa::QaType type, const TaskOutcome& o) {
        (void)accession;
        (void)type;
        if (o.rejected)
            result.rejects.push_back(o.reject);
        else
            for (const auto& inst : o.instances)
                result.instances.push_back(inst);
    };
    // Deterministic output order: accession, then type enum order.
    std::size_t task_idx = 0;
    for (const auto* p : sorted) {
        for (auto type : {qa::QaType::Attribute, qa::QaType::Knowledge, qa::QaType::Descriptive,
                          qa::QaType::TrueFalse}) {
            if (!options.types.count(type))
                continue;
            auto it = completed.find({p->accession, type});
            if (it != completed.end()) {
                emit(p->accession, type, it->second);
            } else {
                emit(p->accession, type, outcomes[task_idx]);
                ++task_idx;
            }
        }
    }
    return result;
}

} // namespace psl::forge
