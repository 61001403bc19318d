#include "psl/cli.hpp"

#include "psl/config.hpp"
#include "psl/context_engine.hpp"
#include "psl/corpus_dedup.hpp"
#include "psl/errors.hpp"
#include "psl/evalkit.hpp"
#include "psl/go_graph.hpp"
#include "psl/importer.hpp"
#include "psl/jsonl.hpp"
#include "psl/qa_forge.hpp"
#include "psl/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace psl::cli {

namespace {

struct GlobalArgs {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

config::AppConfig effective_config(const GlobalArgs& g) {
    return config::load_app_config(g.config_path, g.overrides);
}

void write_text_with_header(const std::string& path, const config::AppConfig& cfg,
                            const std::string& body) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path);
    out << "# tool=psl version=" << jsonl::tool_version() << " config_hash=" << cfg.config_hash()
        << " seed=" << cfg.seed << "\n";
    out << body;
}

void write_json_with_header(const std::string& path, const config::AppConfig& cfg,
                            nlohmann::json body) {
    body["_header"] = jsonl::make_header(cfg.config_hash(), cfg.seed)["_header"];
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path);
    out << body.dump(2) << "\n";
}

std::string require_path(const std::string& flag_value, const config::AppConfig& cfg,
                         const std::string& config_key, const std::string& what) {
    std::string path = flag_value.empty() ? cfg.kv.get_string(config_key, "") : flag_value;
    if (path.empty())
        throw UsageError("missing " + what + " (flag or config key " + config_key + ")");
    if (!std::filesystem::exists(path))
        throw UsageError(what + " does not exist: " + path);
    return path;
}

std::map<std::string, std::vector<std::string>> load_groups_file(const std::string& path) {
    std::map<std::string, std::vector<std::string>> groups;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t) {
        std::vector<std::string> members;
        for (const auto& acc : j.at("protein_ids"))
            members.push_back(acc.get<std::string>());
        groups[j.at("term_id").get<std::string>()] = std::move(members);
    });
    return groups;
}

std::vector<std::size_t> parse_k_list(const std::string& range) {
    std::vector<std::size_t> ks;
    auto dots = range.find("..");
    if (dots != std::string::npos) {
        std::size_t lo = std::stoull(range.substr(0, dots));
        std::size_t hi = std::stoull(range.substr(dots + 2));
        if (lo == 0 || hi < lo)
            throw UsageError("bad k range: " + range);
        for (std::size_t k = lo; k <= hi; ++k)
            ks.push_back(k);
        return ks;
    }
    for (const auto& part : text::split(range, ',')) {
        std::string t = text::trim(part);
        if (t.empty())
            continue;
        std::size_t k = std::stoull(t);
        if (k == 0)
            throw UsageError("k values must be >= 1");
        ks.push_back(k);
    }
    if (ks.empty())
        throw UsageError("empty k list");
    return ks;
}

int cmd_import(const GlobalArgs& g, const std::string& tsv, const std::string& out,
               const std::vector<std::string>& column_overrides) {
    auto cfg = effective_config(g);
    std::map<std::string, std::string> columns;
    for (const auto& kv : column_overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--map expects field=Column, got " + kv);
        columns[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto proteins = importer::import_uniprot_tsv(tsv, columns);
    std::vector<nlohmann::json> records;
    records.reserve(proteins.size());
    for (const auto& p : proteins)
        records.push_back(protein_to_json(p));
    jsonl::write_file(out, jsonl::make_header(cfg.config_hash(), cfg.seed), records);
    std::cerr << "imported " << proteins.size() << " proteins -> " << out << "\n";
    return 0;
}

int cmd_prune_dag(const GlobalArgs& g, const std::string& obo_flag,
                  const std::string& proteins_flag, const std::string& out,
                  const std::string& report_path) {
    auto cfg = effective_config(g);
    std::string obo_path = require_path(obo_flag, cfg, "paths.obo", "OBO file");
    std::string proteins_path = require_path(proteins_flag, cfg, "paths.proteins", "protein file");

    auto dag = go::parse_obo_file(obo_path);
    auto proteins = load_proteins(proteins_path);
    auto annotate_report = go::annotate_counts(dag, proteins);

    auto params = cfg.pruning();
    if (params.total_count == 0)
        params.total_count = annotate_report.annotated_proteins;
    params.validate();

    auto result = go::prune(dag, params);
    auto grouping = go::group_proteins(result, dag, proteins);

    std::vector<nlohmann::json> records;
    for (const auto& [term_id, rule] : result.retained) {
        const auto& node = dag.node(term_id);
        const auto& members = grouping.groups.at(term_id);
        records.push_back(nlohmann::json{{"term_id", term_id},
                                         {"name", node.name},
                                         {"namespace", node.ns},
                                         {"depth", node.depth},
                                         {"count", members.size()},
                                         {"rule", go::to_string(rule)},
                                         {"protein_ids", members}});
    }
    jsonl::write_file(out, jsonl::make_header(cfg.config_hash(), cfg.seed), records);

    if (!report_path.empty()) {
        write_json_with_header(
            report_path, cfg,
            nlohmann::json{{"annotated_proteins", annotate_report.annotated_proteins},
                           {"unresolved_annotations", annotate_report.unresolved_annotations},
                           {"unresolved_terms", annotate_report.unresolved_terms},
                           {"retained_nodes", result.retained.size()},
                           {"ungrouped", grouping.ungrouped}});
    }
    std::cerr << "retained " << result.retained.size() << " grouping nodes; " <<
        grouping.ungrouped.size() << " proteins ungrouped\n";
    return 0;
}

int cmd_dedup(const GlobalArgs& g, const std::string& groups_flag,
              const std::string& proteins_flag, const std::string& obo_flag,
              const std::string& out, std::string provenance_path) {
    auto cfg = effective_config(g);
    std::string groups_path = require_path(groups_flag, cfg, "paths.groups", "groups file");
    std::string proteins_path = require_path(proteins_flag, cfg, "paths.proteins", "protein file");
    std::string obo_path = require_path(obo_flag, cfg, "paths.obo", "OBO file");

    auto dag = go::parse_obo_file(obo_path);
    auto proteins = load_proteins(proteins_path);
    auto groups = load_groups_file(groups_path);

    auto result = dedup::dedup_groups(groups, proteins, dag, cfg.dedup_options());

    std::vector<nlohmann::json> records;
    for (const auto& p : result.survivors)
        records.push_back(protein_to_json(p));
    jsonl::write_file(out, jsonl::make_header(cfg.config_hash(), cfg.seed), records);

    if (provenance_path.empty())
        provenance_path = out + ".provenance.jsonl";
    std::vector<nlohmann::json> prov;
    for (const auto& row : result.provenance)
        prov.push_back(nlohmann::json{{"accession", row.accession},
                                      {"group", row.group},
                                      {"cluster_representative", row.cluster_representative},
                                      {"functional_ic", row.functional_ic}});
    jsonl::write_file(provenance_path, jsonl::make_header(cfg.config_hash(), cfg.seed), prov);

    std::cerr << "dedup kept " << result.survivors.size() << " of " << proteins.size()
              << " proteins (" << result.clusters.size() << " clusters)\n";
    return 0;
}

int cmd_gen_qa(const GlobalArgs& g, const std::string& proteins_flag, const std::string& types,
               const std::string& out, const std::string& resume_path, std::string rejects_path,
               std::optional<int> review_sample) {
    auto cfg = effective_config(g);
    std::string proteins_path = require_path(proteins_flag, cfg, "paths.proteins", "protein file");
    auto proteins = load_proteins(proteins_path);
    auto prompts = forge::PromptLibrary::load(cfg.prompts_dir());

    forge::GenerateOptions options;
    options.types.clear();
    for (const auto& part : text::split(types, ','))
        if (!text::trim(part).empty())
            options.types.insert(qa::qa_type_from_string(text::trim(part)));
    if (options.types.empty())
        throw UsageError("no QA types selected");
    options.retries = cfg.gen_retries();
    options.workers = cfg.gateway_config().max_inflight;
    options.checkpoint_path = resume_path;
    options.source_model = cfg.gen_source_model();

    auto gw = gateway::make_gateway(cfg.gateway_config());
    forge::GenerationResult result;
    try {
        result = forge::generate_corpus(proteins, prompts, *gw, options);
    } catch (const GatewayError& e) {
        if (!resume_path.empty())
            std::cerr << "gateway exhausted; completed work saved in " << resume_path
                      << ", rerun with --resume to continue\n";
        throw GatewayError(e.what());
    }

    std::vector<nlohmann::json> records;
    for (const auto& inst : result.instances)
        records.push_back(qa::qa_to_json(inst));
    jsonl::write_file(out, jsonl::make_header(cfg.config_hash(), cfg.seed), records);

    if (rejects_path.empty())
        rejects_path = out + ".rejects.jsonl";
    std::vector<nlohmann::json> rejects;
    for (const auto& r : result.rejects)
        rejects.push_back(nlohmann::json{{"accession", r.accession},
                                         {"qa_type", qa::to_string(r.qa_type)},
                                         {"attempts", r.attempts},
                                         {"last_error", r.last_error},
                                         {"raw", r.raw}});
    jsonl::write_file(rejects_path, jsonl::make_header(cfg.config_hash(), cfg.seed), rejects);

    // Seeded sample for manual quality review.
    auto review_n = static_cast<std::size_t>(
        review_sample ? *review_sample : cfg.kv.get_int("gen.review_sample", 25));
    if (review_n > 0 && !result.instances.empty()) {
        std::vector<std::size_t> order(result.instances.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::mt19937_64 rng(cfg.seed);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            std::size_t j = i + rng() % (order.size() - i);
            std::swap(order[i], order[j]);
        }
        review_n = std::min(review_n, order.size());
        std::vector<std::size_t> picked(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(review_n));
        std::sort(picked.begin(), picked.end());
        std::vector<nlohmann::json> sample;
        for (std::size_t i : picked)
            sample.push_back(qa::qa_to_json(result.instances[i]));
        jsonl::write_file(out + ".review.jsonl", jsonl::make_header(cfg.config_hash(), cfg.seed),
                          sample);
    }

    std::cerr << "generated " << result.instances.size() << " QA instances ("
              << result.rejects.size() << " rejects)\n";
    return 0;
}

int cmd_build_index(const GlobalArgs& g, const std::string& corpus_flag, const std::string& out) {
    auto cfg = effective_config(g);
    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    auto corpus = qa::load_corpus(corpus_path);
    auto indices = context::build_indices(std::move(corpus), cfg.retrieval().seq_kmer_k);

    std::map<std::string, std::size_t> per_type;
    for (const auto& q : indices.corpus)
        ++per_type[qa::to_string(q.qa_type)];
    write_json_with_header(out, cfg,
                           nlohmann::json{{"n_instances", indices.corpus.size()},
                                          {"n_accessions", indices.seq.accessions.size()},
                                          {"n_seq_kmers", indices.seq.kmer_count()},
                                          {"n_text_terms", indices.text.vocabulary_size()},
                                          {"per_type", per_type}});
    std::cerr << "indexed " << indices.corpus.size() << " instances over "
              << indices.seq.accessions.size() << " accessions\n";
    return 0;
}

int cmd_query(const GlobalArgs& g, const std::string& corpus_flag, std::string seq,
              const std::string& seq_file, const std::string& question,
              const std::string& accession, const std::string& mode, std::optional<int> k,
              bool dry_run, const std::string& out, const std::string& bundle_out) {
    auto cfg = effective_config(g);
    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    if (seq.empty() && !seq_file.empty()) {
        std::ifstream in(seq_file);
        if (!in)
            throw UsageError("cannot open --seq-file " + seq_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        for (char c : ss.str())
            if (!std::isspace(static_cast<unsigned char>(c)))
                seq.push_back(c);
    }
    if (seq.empty())
        throw UsageError("query needs --seq or --seq-file");
    if (question.empty())
        throw UsageError("query needs --question");

    auto retrieval = cfg.retrieval();
    if (!mode.empty())
        retrieval.mode = context::mode_from_string(mode);
    if (k)
        retrieval.k = static_cast<std::size_t>(*k);
    retrieval.candidate_m = std::max(retrieval.candidate_m, retrieval.k);

    auto corpus = qa::load_corpus(corpus_path);
    auto indices = context::build_indices(std::move(corpus), retrieval.seq_kmer_k);
    context::RetrievalQuery query{accession, seq, question};

    if (dry_run) {
        auto exemplars = context::select_exemplars(query, indices, retrieval);
        auto bundle = context::assemble_context(std::move(exemplars), query, retrieval);
        std::cout << bundle.prompt << "\n";
        return 0;
    }

    auto gw = gateway::make_gateway(cfg.gateway_config());
    auto result = context::answer(query, indices, retrieval, *gw);

    nlohmann::json audit{{"answer", result.text},
                         {"bundle", context::bundle_to_json(result.bundle)}};
    if (out.empty()) {
        std::cout << result.text << "\n";
    } else {
        write_json_with_header(out, cfg, audit);
    }
    if (!bundle_out.empty())
        write_json_with_header(bundle_out, cfg, context::bundle_to_json(result.bundle));
    return 0;
}

eval::RunOptions run_options_from(const config::AppConfig& cfg, const std::string& dataset_path,
                                  std::optional<int> k) {
    eval::RunOptions options;
    options.dataset_tag = std::filesystem::path(dataset_path).stem().string();
    options.model_tag = cfg.kv.get_string("gateway.model", "mock-model");
    if (k)
        options.k_override = static_cast<std::size_t>(*k);
    options.workers = cfg.gateway_config().max_inflight;
    return options;
}

void emit_report(const std::string& out_base, const config::AppConfig& cfg,
                 const eval::EvalReport& report) {
    write_text_with_header(out_base + ".tsv", cfg, eval::report_to_tsv(report));
    write_json_with_header(out_base + ".json", cfg, eval::report_to_json(report));
}

int cmd_eval(const GlobalArgs& g, const std::string& corpus_flag, const std::string& dataset_path,
             const std::string& field_map, const std::string& mode, std::optional<int> k,
             const std::string& ratings_path, const std::string& out_base) {
    auto cfg = effective_config(g);

    if (!ratings_path.empty()) {
        write_json_with_header(out_base + ".json", cfg, aggregate_ratings(ratings_path));
        return 0;
    }

    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    if (dataset_path.empty())
        throw UsageError("eval needs --dataset (or --ratings)");
    auto items = eval::load_dataset(dataset_path, field_map);
    auto retrieval = cfg.retrieval();
    auto indices = context::build_indices(qa::load_corpus(corpus_path), retrieval.seq_kmer_k);
    auto gw = gateway::make_gateway(cfg.gateway_config());

    auto options = run_options_from(cfg, dataset_path, k);
    eval::EvalMode eval_mode =
        mode.empty() ? eval::EvalMode{false, retrieval.mode} : eval::eval_mode_from_string(mode);
    std::size_t item_k = options.k_override.value_or(
        eval::default_k_for_task(items.empty() ? "" : items.front().task));
    auto results = eval::run_items(items, indices, retrieval, eval_mode,
                                   eval_mode.zero_shot ? 0 : item_k, *gw, options.workers);

    eval::EvalReport report;
    eval::EvalRow row;
    row.dataset = options.dataset_tag;
    row.task = items.empty() ? "" : items.front().task;
    row.model = options.model_tag;
    row.mode = eval_mode.name();
    row.k = eval_mode.zero_shot ? 0 : item_k;
    row.n_items = results.size();
    for (const auto& r : results) {
        row.rouge_l_precision += r.score.precision;
        row.rouge_l_recall += r.score.recall;
        row.rouge_l_f1 += r.score.f1;
    }
    if (!results.empty()) {
        row.rouge_l_precision /= static_cast<double>(results.size());
        row.rouge_l_recall /= static_cast<double>(results.size());
        row.rouge_l_f1 /= static_cast<double>(results.size());
    }
    report.rows.push_back(row);
    emit_report(out_base, cfg, report);
    return 0;
}

int cmd_sweep_k(const GlobalArgs& g, const std::string& corpus_flag,
                const std::string& dataset_path, const std::string& field_map,
                const std::string& ks_spec, const std::string& out_base) {
    auto cfg = effective_config(g);
    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    auto items = eval::load_dataset(dataset_path, field_map);
    auto retrieval = cfg.retrieval();
    auto indices = context::build_indices(qa::load_corpus(corpus_path), retrieval.seq_kmer_k);
    auto gw = gateway::make_gateway(cfg.gateway_config());
    auto ks = parse_k_list(ks_spec);

    auto report = eval::k_sweep(items, ks, indices, retrieval, *gw,
                                run_options_from(cfg, dataset_path, std::nullopt));
    emit_report(out_base, cfg, report);
    return 0;
}

int cmd_ablate(const GlobalArgs& g, const std::string& corpus_flag,
               const std::string& dataset_path, const std::string& field_map,
               const std::string& modes_spec, std::optional<int> k,
               const std::string& out_base) {
    auto cfg = effective_config(g);
    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    auto items = eval::load_dataset(dataset_path, field_map);
    auto retrieval = cfg.retrieval();
    auto indices = context::build_indices(qa::load_corpus(corpus_path), retrieval.seq_kmer_k);
    auto gw = gateway::make_gateway(cfg.gateway_config());

    std::vector<eval::EvalMode> modes;
    for (const auto& part : text::split(modes_spec, ','))
        if (!text::trim(part).empty())
            modes.push_back(eval::eval_mode_from_string(text::trim(part)));
    if (modes.empty())
        throw UsageError("no ablation modes selected");

    auto report = eval::ablate(items, modes, indices, retrieval, *gw,
                               run_options_from(cfg, dataset_path, k));
    emit_report(out_base, cfg, report);
    return 0;
}

int cmd_stats(const GlobalArgs& g, const std::string& corpus_flag,
              const std::string& proteins_flag, const std::string& out) {
    auto cfg = effective_config(g);
    std::string corpus_path = require_path(corpus_flag, cfg, "paths.corpus", "QA corpus");
    auto corpus = qa::load_corpus(corpus_path);
    std::vector<ProteinRecord> proteins;
    if (!proteins_flag.empty())
        proteins = load_proteins(proteins_flag);
    auto stats = eval::corpus_stats(corpus, proteins);
    write_json_with_header(out, cfg, eval::stats_to_json(stats));
    return 0;
}

} // namespace

nlohmann::json aggregate_ratings(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in)
        throw DataError("cannot open ratings file " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw DataError(csv_path + " is empty");

    struct Key {
        std::string item, rater, condition;
    };
    // condition -> item -> rater -> score
    std::map<std::string, std::map<std::string, std::map<std::string, int>>> data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        auto fields = text::split(line, ',');
        if (fields.size() != 4)
            throw DataError(csv_path + ":" + std::to_string(line_no) +
                            ": expected item_id,rater_id,condition,score");
        int score;
        try {
            score = std::stoi(text::trim(fields[3]));
        } catch (const std::exception&) {
            throw DataError(csv_path + ":" + std::to_string(line_no) + ": bad score");
        }
        if (score < 0 || score > 5)
            throw DataError(csv_path + ":" + std::to_string(line_no) +
                            ": score outside the 0-5 scale");
        data[text::trim(fields[2])][text::trim(fields[0])][text::trim(fields[1])] = score;
    }

    auto build_rating_set = [](const std::map<std::string, std::map<std::string, int>>& items) {
        eval::RatingSet rs;
        std::set<std::string> raters;
        for (const auto& [item, by_rater] : items)
            for (const auto& [rater, score] : by_rater)
                raters.insert(rater);
        rs.rater_ids.assign(raters.begin(), raters.end());
        for (const auto& [item, by_rater] : items) {
            rs.item_ids.push_back(item);
            std::vector<std::optional<int>> row(rs.rater_ids.size());
            for (std::size_t r = 0; r < rs.rater_ids.size(); ++r) {
                auto it = by_rater.find(rs.rater_ids[r]);
                if (it != by_rater.end())
                    row[r] = it->second;
            }
            rs.values.push_back(std::move(row));
        }
        return rs;
    };

    nlohmann::json per_condition = nlohmann::json::object();
    std::map<std::string, std::map<std::string, int>> all_units;
    for (const auto& [condition, items] : data) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [item, by_rater] : items)
            for (const auto& [rater, score] : by_rater) {
                sum += score;
                ++n;
                all_units[item + "\x1f" + condition][rater] = score;
            }
        nlohmann::json entry{{"mean", n ? sum / static_cast<double>(n) : 0.0}, {"n_ratings", n}};
        try {
            auto alpha = eval::krippendorff_alpha(build_rating_set(items));
            entry["alpha"] = alpha.alpha;
            entry["alpha_degenerate"] = alpha.degenerate;
        } catch (const DataError&) {
            entry["alpha"] = nullptr;
        }
        per_condition[condition] = entry;
    }

    nlohmann::json out{{"per_condition", per_condition}};
    try {
        auto alpha = eval::krippendorff_alpha(build_rating_set(all_units));
        out["overall_alpha"] = alpha.alpha;
        out["overall_alpha_degenerate"] = alpha.degenerate;
    } catch (const DataError&) {
        out["overall_alpha"] = nullptr;
    }

    // Pairwise win/lose between the "with" and "without" conditions, one
    // comparison per (item, rater) present in both.
    if (data.count("with") && data.count("without")) {
        std::vector<eval::PairedRating> pairs;
        for (const auto& [item, by_rater] : data.at("with")) {
            auto other = data.at("without").find(item);
            if (other == data.at("without").end())
                continue;
            for (const auto& [rater, score] : by_rater) {
                auto o = other->second.find(rater);
                if (o != other->second.end())
                    pairs.push_back({item, score, o->second});
            }
        }
        if (!pairs.empty()) {
            auto wl = eval::pairwise_winloss(pairs);
            out["winloss"] = {{"win", wl.win},
                              {"lose", wl.lose},
                              {"tie", wl.tie},
                              {"n_pairs", pairs.size()}};
        }
    }
    return out;
}

int run_cli(std::vector<std::string> args) {
    CLI::App app{"protein second-language toolkit"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--config", global.config_path, "key = value config file");
    std::vector<std::string> set_pairs;
    app.add_option("--set", set_pairs, "override a config key as key=value (repeatable)");
    std::optional<uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "run seed recorded in output headers");

    // import
    auto* import_cmd = app.add_subcommand("import", "UniProt/Swiss-Prot TSV -> protein JSONL");
    std::string import_tsv, import_out;
    std::vector<std::string> import_map;
    import_cmd->add_option("--tsv", import_tsv, "TSV export")->required();
    import_cmd->add_option("--out", import_out, "output JSONL")->required();
    import_cmd->add_option("--map", import_map, "field=Column overrides");

    // prune-dag
    auto* prune_cmd = app.add_subcommand("prune-dag", "prune the GO DAG into grouping nodes");
    std::string prune_obo, prune_proteins, prune_out, prune_report;
    std::optional<double> lambda_flag, beta_flag, tau0_flag, alpha_flag;
    std::optional<int64_t> total_count_flag;
    prune_cmd->add_option("--obo", prune_obo, "OBO ontology file");
    prune_cmd->add_option("--proteins", prune_proteins, "protein JSONL");
    prune_cmd->add_option("--lambda", lambda_flag, "support fraction");
    prune_cmd->add_option("--beta", beta_flag, "support depth slope");
    prune_cmd->add_option("--tau0", tau0_flag, "base imbalance threshold");
    prune_cmd->add_option("--alpha", alpha_flag, "imbalance depth scaling");
    prune_cmd->add_option("--total-count", total_count_flag, "override C_tot");
    prune_cmd->add_option("--out", prune_out, "retained groups JSONL")->required();
    prune_cmd->add_option("--report", prune_report, "side report JSON");

    // dedup
    auto* dedup_cmd = app.add_subcommand("dedup", "two-pass redundancy removal per group");
    std::string dedup_groups, dedup_proteins, dedup_obo, dedup_out, dedup_prov;
    std::optional<double> identity_flag;
    std::optional<int64_t> per_group_flag;
    bool no_prefilter = false;
    dedup_cmd->add_option("--groups", dedup_groups, "groups JSONL from prune-dag");
    dedup_cmd->add_option("--proteins", dedup_proteins, "protein JSONL");
    dedup_cmd->add_option("--obo", dedup_obo, "OBO ontology file");
    dedup_cmd->add_option("--identity", identity_flag, "clustering identity threshold");
    dedup_cmd->add_option("--per-group-target", per_group_flag, "species-quota target per group");
    dedup_cmd->add_flag("--no-prefilter", no_prefilter, "disable the k-mer prefilter");
    dedup_cmd->add_option("--out", dedup_out, "deduplicated protein JSONL")->required();
    dedup_cmd->add_option("--provenance", dedup_prov, "provenance sidecar JSONL");

    // gen-qa
    auto* gen_cmd = app.add_subcommand("gen-qa", "generate the bilingual QA corpus");
    std::string gen_proteins, gen_types = "attr,know,desc,tf", gen_out, gen_resume, gen_rejects;
    std::optional<int> gen_review;
    gen_cmd->add_option("--proteins", gen_proteins, "curated protein JSONL");
    gen_cmd->add_option("--types", gen_types, "comma list: attr,know,desc,tf");
    gen_cmd->add_option("--out", gen_out, "QA corpus JSONL")->required();
    gen_cmd->add_option("--resume", gen_resume, "checkpoint file (created if absent)");
    gen_cmd->add_option("--rejects", gen_rejects, "rejects JSONL");
    gen_cmd->add_option("--review-sample", gen_review,
                        "instances sampled into OUT.review.jsonl for manual review");

    // build-index
    auto* index_cmd = app.add_subcommand("build-index", "validate corpus and report index stats");
    std::string index_corpus, index_out;
    index_cmd->add_option("--corpus", index_corpus, "QA corpus JSONL");
    index_cmd->add_option("--out", index_out, "index summary JSON")->required();

    // query
    auto* query_cmd = app.add_subcommand("query", "answer one protein question with context");
    std::string query_corpus, query_seq, query_seq_file, query_question, query_accession;
    std::string query_mode, query_out, query_bundle_out;
    std::optional<int> query_k;
    bool dry_run = false;
    query_cmd->add_option("--corpus", query_corpus, "QA corpus JSONL");
    query_cmd->add_option("--seq", query_seq, "query amino-acid sequence");
    query_cmd->add_option("--seq-file", query_seq_file, "file holding the sequence");
    query_cmd->add_option("--question", query_question, "query question");
    query_cmd->add_option("--accession", query_accession, "query accession (leak exclusion)");
    query_cmd->add_option("--mode", query_mode, "dual | seq | qa");
    query_cmd->add_option("--k", query_k, "exemplar count");
    query_cmd->add_flag("--dry-run", dry_run, "print the assembled prompt, no gateway call");
    query_cmd->add_option("--out", query_out, "answer + bundle JSON");
    query_cmd->add_option("--bundle-out", query_bundle_out, "bundle audit JSON");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score answers or aggregate human ratings");
    std::string eval_corpus, eval_dataset, eval_field_map, eval_mode, eval_ratings, eval_out;
    std::optional<int> eval_k;
    eval_cmd->add_option("--corpus", eval_corpus, "QA corpus JSONL");
    eval_cmd->add_option("--dataset", eval_dataset, "dataset JSONL");
    eval_cmd->add_option("--field-map", eval_field_map, "dataset field-mapping JSON");
    eval_cmd->add_option("--mode", eval_mode, "zero | dual | seq | qa");
    eval_cmd->add_option("--k", eval_k, "exemplar count");
    eval_cmd->add_option("--ratings", eval_ratings, "ratings CSV (item,rater,condition,score)");
    eval_cmd->add_option("--out", eval_out, "report base path (.tsv/.json)")->required();

    // sweep-k
    auto* sweep_cmd = app.add_subcommand("sweep-k", "ROUGE-L across exemplar counts");
    std::string sweep_corpus, sweep_dataset, sweep_field_map, sweep_ks = "1..12", sweep_out;
    sweep_cmd->add_option("--corpus", sweep_corpus, "QA corpus JSONL");
    sweep_cmd->add_option("--dataset", sweep_dataset, "dataset JSONL")->required();
    sweep_cmd->add_option("--field-map", sweep_field_map, "dataset field-mapping JSON");
    sweep_cmd->add_option("--ks", sweep_ks, "list (1,2,4) or range (1..12)");
    sweep_cmd->add_option("--out", sweep_out, "report base path")->required();

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "mode ablation report");
    std::string ablate_corpus, ablate_dataset, ablate_field_map;
    std::string ablate_modes = "dual,zero,seq,qa", ablate_out;
    std::optional<int> ablate_k;
    ablate_cmd->add_option("--corpus", ablate_corpus, "QA corpus JSONL");
    ablate_cmd->add_option("--dataset", ablate_dataset, "dataset JSONL")->required();
    ablate_cmd->add_option("--field-map", ablate_field_map, "dataset field-mapping JSON");
    ablate_cmd->add_option("--modes", ablate_modes, "comma list of zero,dual,seq,qa");
    ablate_cmd->add_option("--k", ablate_k, "exemplar count override");
    ablate_cmd->add_option("--out", ablate_out, "report base path")->required();

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "corpus statistics report");
    std::string stats_corpus, stats_proteins, stats_out;
    stats_cmd->add_option("--corpus", stats_corpus, "QA corpus JSONL");
    stats_cmd->add_option("--proteins", stats_proteins, "protein JSONL for species counts");
    stats_cmd->add_option("--out", stats_out, "stats JSON")->required();

    std::vector<const char*> argv;
    argv.push_back("psl");
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& kv : set_pairs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return 1;
        }
        global.overrides[text::trim(kv.substr(0, eq))] = text::trim(kv.substr(eq + 1));
    }
    if (seed_flag)
        global.overrides["seed"] = std::to_string(*seed_flag);
    auto set_if = [&](const char* key, const auto& opt) {
        if (opt) {
            std::ostringstream ss;
            ss << *opt;
            global.overrides[key] = ss.str();
        }
    };

    try {
        if (*import_cmd)
            return cmd_import(global, import_tsv, import_out, import_map);
        if (*prune_cmd) {
            set_if("prune.lambda", lambda_flag);
            set_if("prune.beta", beta_flag);
            set_if("prune.tau0", tau0_flag);
            set_if("prune.alpha", alpha_flag);
            set_if("prune.total_count", total_count_flag);
            return cmd_prune_dag(global, prune_obo, prune_proteins, prune_out, prune_report);
        }
        if (*dedup_cmd) {
            set_if("dedup.identity", identity_flag);
            set_if("dedup.per_group_target", per_group_flag);
            if (no_prefilter)
                global.overrides["dedup.prefilter"] = "false";
            return cmd_dedup(global, dedup_groups, dedup_proteins, dedup_obo, dedup_out,
                             dedup_prov);
        }
        if (*gen_cmd)
            return cmd_gen_qa(global, gen_proteins, gen_types, gen_out, gen_resume, gen_rejects,
                              gen_review);
        if (*index_cmd)
            return cmd_build_index(global, index_corpus, index_out);
        if (*query_cmd)
            return cmd_query(global, query_corpus, query_seq, query_seq_file, query_question,
                             query_accession, query_mode, query_k, dry_run, query_out,
                             query_bundle_out);
        if (*eval_cmd)
            return cmd_eval(global, eval_corpus, eval_dataset, eval_field_map, eval_mode, eval_k,
                            eval_ratings, eval_out);
        if (*sweep_cmd)
            return cmd_sweep_k(global, sweep_corpus, sweep_dataset, sweep_field_map, sweep_ks,
                               sweep_out);
        if (*ablate_cmd)
            return cmd_ablate(global, ablate_corpus, ablate_dataset, ablate_field_map,
                              ablate_modes, ablate_k, ablate_out);
        if (*stats_cmd)
            return cmd_stats(global, stats_corpus, stats_proteins, stats_out);
        throw UsageError("no subcommand selected");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace psl::cli
