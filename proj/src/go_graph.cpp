#include "psl/go_graph.hpp"

#include "psl/errors.hpp"
#include "psl/text.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

namespace psl::go {

void PruningParams::validate() const {
    if (!(lambda > 0.0))
        throw UsageError("pruning lambda must be > 0");
    if (beta < 0.0)
        throw UsageError("pruning beta must be >= 0");
    if (!(tau0 > 1.0))
        throw UsageError("pruning tau0 must be > 1");
    if (!(alpha > 0.0))
        throw UsageError("pruning alpha must be > 0");
    if (total_count < 1)
        throw UsageError("pruning total_count must be >= 1");
}

const GoNode& GoDag::node(const std::string& term_id) const {
    auto it = nodes_.find(term_id);
    if (it == nodes_.end())
        throw DataError("unknown GO term " + term_id);
    return it->second;
}

GoNode& GoDag::node_mut(const std::string& term_id) {
    auto it = nodes_.find(term_id);
    if (it == nodes_.end())
        throw DataError("unknown GO term " + term_id);
    return it->second;
}

void GoDag::add_node(GoNode n) {
    if (nodes_.count(n.term_id))
        throw DataError("duplicate GO term " + n.term_id);
    order_.push_back(n.term_id);
    nodes_.emplace(n.term_id, std::move(n));
}

std::vector<std::string> GoDag::roots() const {
    std::vector<std::string> out;
    for (const auto& id : order_)
        if (nodes_.at(id).parents.empty())
            out.push_back(id);
    return out;
}

void GoDag::finalize() {
    std::sort(order_.begin(), order_.end());

    for (auto& [id, n] : nodes_) {
        for (const auto& p : n.parents) {
            auto it = nodes_.find(p);
            if (it == nodes_.end())
                throw DataError("term " + id + " has is_a parent " + p + " not defined in the file");
            it->second.children.insert(id);
        }
    }

    // Kahn's algorithm over is_a edges; leftovers expose a cycle.
    std::unordered_map<std::string, std::size_t> pending;
    std::deque<std::string> ready;
    for (const auto& id : order_) {
        pending[id] = nodes_.at(id).parents.size();
        if (pending[id] == 0)
            ready.push_back(id);
    }
    std::size_t processed = 0;
    while (!ready.empty()) {
        std::string id = ready.front();
        ready.pop_front();
        ++processed;
        for (const auto& c : nodes_.at(id).children)
            if (--pending[c] == 0)
                ready.push_back(c);
    }
    if (processed != order_.size()) {
        // Walk leftover->leftover parent edges until a node repeats; the
        // closing edge lies on a cycle.
        std::string start;
        for (const auto& id : order_)
            if (pending[id] > 0) {
                start = id;
                break;
            }
        std::unordered_map<std::string, bool> on_path;
        std::string cur = start;
        std::string prev;
        while (!on_path[cur]) {
            on_path[cur] = true;
            prev = cur;
            for (const auto& p : nodes_.at(cur).parents)
                if (pending[p] > 0) {
                    cur = p;
                    break;
                }
        }
        throw DataError("cycle detected in is_a graph; edge " + prev + " is_a " + cur +
                        " lies on a cycle");
    }

    // BFS from the roots; depth = min edge distance.
    std::deque<std::string> queue;
    for (const auto& id : roots()) {
        nodes_.at(id).depth = 0;
        queue.push_back(id);
    }
    std::unordered_map<std::string, bool> seen;
    for (const auto& id : queue)
        seen[id] = true;
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        int d = nodes_.at(id).depth;
        for (const auto& c : nodes_.at(id).children) {
            if (!seen[c]) {
                seen[c] = true;
                nodes_.at(c).depth = d + 1;
                queue.push_back(c);
            }
        }
    }
}

std::set<std::string> GoDag::ancestor_closure(const std::set<std::string>& terms) const {
    std::set<std::string> closure;
    std::deque<std::string> queue;
    for (const auto& t : terms) {
        if (!has(t))
            continue;
        if (closure.insert(t).second)
            queue.push_back(t);
    }
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        for (const auto& p : nodes_.at(id).parents)
            if (closure.insert(p).second)
                queue.push_back(p);
    }
    return closure;
}

namespace {

struct Stanza {
    std::string id;
    std::string name;
    std::string ns;
    std::vector<std::string> is_a;
    bool obsolete = false;
    std::size_t start_line = 0;
    bool any_field = false;
};

void flush_term(GoDag& dag, const Stanza& s) {
    if (s.obsolete)
        return;
    if (s.id.empty())
        throw DataError("OBO parse error at line " + std::to_string(s.start_line) +
                        ": [Term] stanza missing id");
    if (s.ns.empty())
        throw DataError("OBO parse error at line " + std::to_string(s.start_line) +
                        ": term " + s.id + " missing namespace");
    GoNode n;
    n.term_id = s.id;
    n.name = s.name;
    n.ns = s.ns;
    for (const auto& p : s.is_a)
        n.parents.insert(p);
    dag.add_node(std::move(n));
}

// Tag values may carry a trailing "! comment".
std::string strip_obo_comment(std::string_view v) {
    auto pos = v.find(" ! ");
    if (pos != std::string_view::npos)
        v = v.substr(0, pos);
    if (!v.empty() && v.back() == '!')
        v = v.substr(0, v.size() - 1);
    return text::trim(v);
}

} // namespace

GoDag parse_obo(std::istream& in) {
    GoDag dag;
    std::string line;
    std::size_t line_no = 0;
    bool in_term = false;
    Stanza cur;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::string t = text::trim(line);
        if (t.empty())
            continue;
        if (t[0] == '[') {
            if (in_term)
                flush_term(dag, cur);
            in_term = (t == "[Term]");
            cur = Stanza{};
            cur.start_line = line_no;
            continue;
        }
        if (!in_term)
            continue;
        auto colon = t.find(':');
        if (colon == std::string::npos)
            continue;
        std::string tag = t.substr(0, colon);
        std::string value = text::trim(t.substr(colon + 1));
        cur.any_field = true;
        if (tag == "id") {
            cur.id = strip_obo_comment(value);
        } else if (tag == "name") {
            cur.name = strip_obo_comment(value);
        } else if (tag == "namespace") {
            cur.ns = strip_obo_comment(value);
        } else if (tag == "is_a") {
            cur.is_a.push_back(strip_obo_comment(value));
        } else if (tag == "is_obsolete") {
            cur.obsolete = text::starts_with(strip_obo_comment(value), "true");
        }
        // part_of and every other relationship type is intentionally ignored.
    }
    if (in_term)
        flush_term(dag, cur);

    dag.finalize();
    return dag;
}

GoDag parse_obo_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    return parse_obo(in);
}

AnnotateReport annotate_counts(GoDag& dag, const std::vector<ProteinRecord>& proteins) {
    AnnotateReport report;
    for (const auto& id : dag.term_ids()) {
        auto& n = dag.node_mut(id);
        n.direct_count = 0;
        n.propagated_count = 0;
    }
    dag.namespace_counts.clear();

    for (const auto& p : proteins) {
        std::set<std::string> direct;
        for (const auto& t : p.go_terms) {
            if (dag.has(t)) {
                direct.insert(t);
            } else {
                ++report.unresolved_annotations;
                report.unresolved_terms.insert(t);
            }
        }
        if (direct.empty())
            continue;
        ++report.annotated_proteins;

        std::set<std::string> namespaces;
        for (const auto& t : direct) {
            dag.node_mut(t).direct_count += 1;
            namespaces.insert(dag.node(t).ns);
        }
        for (const auto& ns : namespaces)
            dag.namespace_counts[ns] += 1;

        for (const auto& t : dag.ancestor_closure(direct))
            dag.node_mut(t).propagated_count += 1;
    }
    return report;
}

double min_support(int depth, const PruningParams& params) {
    return params.lambda * static_cast<double>(params.total_count) *
           (1.0 + params.beta * static_cast<double>(depth));
}

double imbalance_threshold(int depth, const PruningParams& params) {
    return params.tau0 * std::pow(params.alpha, depth);
}

std::optional<double> imbalance_ratio(const GoNode& node, const GoDag& dag) {
    uint64_t max_c = 0;
    uint64_t min_c = 0;
    std::size_t valid = 0;
    for (const auto& c : node.children) {
        uint64_t count = dag.node(c).propagated_count;
        if (count == 0)
            continue;
        if (valid == 0) {
            max_c = min_c = count;
        } else {
            max_c = std::max(max_c, count);
            min_c = std::min(min_c, count);
        }
        ++valid;
    }
    if (valid <= 1)
        return std::nullopt;
    return static_cast<double>(max_c) / static_cast<double>(min_c);
}

namespace {

void prune_visit(const std::string& id, const GoDag& dag, const PruningParams& params,
                 PruneResult& result, std::set<std::string>& visited) {
    if (!visited.insert(id).second)
        return;
    const GoNode& v = dag.node(id);

    auto ratio = imbalance_ratio(v, dag);
    if (ratio && *ratio > imbalance_threshold(v.depth, params)) {
        result.retained.emplace(id, RetentionRule::Imbalance);
        return;
    }

    std::vector<std::string> qualifying;
    for (const auto& c : v.children) // std::set gives lexicographic order
        if (static_cast<double>(dag.node(c).propagated_count) >= min_support(dag.node(c).depth, params))
            qualifying.push_back(c);

    if (!qualifying.empty()) {
        for (const auto& c : qualifying)
            prune_visit(c, dag, params, result, visited);
    } else if (static_cast<double>(v.propagated_count) >= min_support(v.depth, params)) {
        result.retained.emplace(id, RetentionRule::Support);
    }
}

} // namespace

const char* to_string(RetentionRule r) {
    return r == RetentionRule::Support ? "support" : "imbalance";
}

PruneResult prune(const GoDag& dag, const PruningParams& params) {
    params.validate();
    PruneResult result;
    std::set<std::string> visited;
    auto roots = dag.roots();
    for (const auto& r : roots)
        prune_visit(r, dag, params, result, visited);
    if (result.retained.empty()) {
        std::ostringstream msg;
        msg << "pruning retained no nodes; no subtree met the support threshold under roots:";
        for (const auto& r : roots)
            msg << " " << r;
        throw UsageError(msg.str());
    }
    return result;
}

GroupingResult group_proteins(const PruneResult& retained, const GoDag& dag,
                              const std::vector<ProteinRecord>& proteins) {
    GroupingResult out;
    for (const auto& [id, rule] : retained.retained)
        out.groups[id]; // every retained node appears even if empty
    for (const auto& p : proteins) {
        auto closure = dag.ancestor_closure(p.go_terms);
        bool grouped = false;
        for (const auto& t : closure) {
            auto it = out.groups.find(t);
            if (it != out.groups.end()) {
                it->second.push_back(p.accession);
                grouped = true;
            }
        }
        if (!grouped)
            out.ungrouped.push_back(p.accession);
    }
    for (auto& [id, members] : out.groups)
        std::sort(members.begin(), members.end());
    std::sort(out.ungrouped.begin(), out.ungrouped.end());
    return out;
}

} // namespace psl::go
