#include "causalkit/dag.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "causalkit/errors.hpp"

namespace causalkit {

Dag::Dag(std::vector<std::string> node_codes) : codes(std::move(node_codes)) {
    adjacency = Eigen::MatrixXi::Zero(size(), size());
}

int Dag::edge_count() const {
    return adjacency.sum();
}

void Dag::add_edge(int i, int j) {
    if (i == j) throw ContractError("self-loop " + codes.at(i) + " -> " + codes.at(j));
    adjacency(i, j) = 1;
}

std::vector<int> Dag::parents(int j) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (adjacency(i, j)) out.push_back(i);
    return out;
}

std::vector<int> Dag::children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < size(); ++j)
        if (adjacency(i, j)) out.push_back(j);
    return out;
}

std::vector<int> Dag::descendants(int i) const {
    std::vector<char> seen(size(), 0);
    std::deque<int> queue{i};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int c = 0; c < size(); ++c) {
            if (adjacency(v, c) && !seen[c]) {
                seen[c] = 1;
                queue.push_back(c);
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (seen[v] && v != i) out.push_back(v);
    return out;
}

std::optional<std::vector<int>> Dag::topological_sort() const {
    std::vector<int> indegree(size(), 0);
    for (int j = 0; j < size(); ++j) indegree[j] = adjacency.col(j).sum();
    std::deque<int> ready;
    for (int v = 0; v < size(); ++v)
        if (indegree[v] == 0) ready.push_back(v);
    std::vector<int> order;
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (int c = 0; c < size(); ++c) {
            if (adjacency(v, c) && --indegree[c] == 0) ready.push_back(c);
        }
    }
    if (static_cast<int>(order.size()) != size()) return std::nullopt;
    return order;
}

bool Dag::is_acyclic() const {
    return topological_sort().has_value();
}

int Dag::node_index(const std::string& code) const {
    auto it = std::find(codes.begin(), codes.end(), code);
    if (it == codes.end()) throw LookupError("unknown node code: " + code);
    return static_cast<int>(it - codes.begin());
}

std::string Dag::to_dot() const {
    std::ostringstream out;
    out << "digraph causal {\n";
    for (const auto& code : codes) out << "  \"" << code << "\";\n";
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (adjacency(i, j)) out << "  \"" << codes[i] << "\" -> \"" << codes[j] << "\";\n";
    out << "}\n";
    return out.str();
}

std::string Dag::to_adjacency_csv() const {
    std::ostringstream out;
    out << "code";
    for (const auto& code : codes) out << ',' << code;
    out << '\n';
    for (int i = 0; i < size(); ++i) {
        out << codes[i];
        for (int j = 0; j < size(); ++j) out << ',' << adjacency(i, j);
        out << '\n';
    }
    return out.str();
}

Dag Dag::from_adjacency_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty adjacency CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    if (header.empty() || header[0] != "code") throw FormatError("adjacency CSV must start with a 'code' header column");
    Dag dag(std::vector<std::string>(header.begin() + 1, header.end()));
    long row = 1;
    int i = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (i >= dag.size()) throw FormatError("adjacency CSV has more rows than header columns");
        std::istringstream rs(line);
        std::getline(rs, cell, ',');
        if (cell != dag.codes[i]) throw FormatError("adjacency CSV row order must match header (row " + std::to_string(row) + ")");
        for (int j = 0; j < dag.size(); ++j) {
            if (!std::getline(rs, cell, ',')) throw FormatError("short adjacency row " + std::to_string(row));
            if (cell == "0")
                dag.adjacency(i, j) = 0;
            else if (cell == "1")
                dag.adjacency(i, j) = 1;
            else
                throw ParseError("adjacency entries must be 0 or 1, got '" + cell + "'", row);
        }
        ++i;
    }
    if (i != dag.size()) throw FormatError("adjacency CSV has fewer rows than header columns");
    return dag;
}

}  // namespace causalkit
