#include "causalkit/metrics.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <sstream>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

void require_same_nodes(const Dag& g, const Dag& h) {
    if (g.codes != h.codes) throw ContractError("graph metrics require identical node sets and ordering");
}

// Directed reachability i ~> v over the whole graph, i excluded.
std::vector<char> reach_from(const Dag& g, int i) {
    std::vector<char> seen(g.size(), 0);
    std::deque<int> queue{i};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int c = 0; c < g.size(); ++c)
            if (g.adjacency(v, c) && !seen[c]) {
                seen[c] = 1;
                queue.push_back(c);
            }
    }
    seen[i] = 0;
    return seen;
}

}  // namespace

std::string MetricsReport::to_json() const {
    std::ostringstream out;
    out.precision(17);
    out << "{\"sid\": " << sid << ", \"shd\": " << shd << ", \"precision\": " << precision << ", \"recall\": " << recall
        << ", \"f1\": " << f1 << ", \"l2\": " << l2 << "}";
    return out.str();
}

int shd(const Dag& truth, const Dag& predicted) {
    require_same_nodes(truth, predicted);
    int total = 0;
    for (int i = 0; i < truth.size(); ++i) {
        for (int j = i + 1; j < truth.size(); ++j) {
            int gij = truth.adjacency(i, j), gji = truth.adjacency(j, i);
            int hij = predicted.adjacency(i, j), hji = predicted.adjacency(j, i);
            int diff = std::abs(gij - hij) + std::abs(gji - hji);
            bool reversal = diff == 2 && gij + gji == 1 && hij + hji == 1;
            total += reversal ? 1 : diff;
        }
    }
    return total;
}

double l2_distance(const Dag& truth, const Dag& predicted) {
    require_same_nodes(truth, predicted);
    int differing = (truth.adjacency - predicted.adjacency).cwiseAbs().sum();
    return std::sqrt(static_cast<double>(differing));
}

EdgePrf edge_prf(const Dag& truth, const Dag& predicted) {
    require_same_nodes(truth, predicted);
    int true_edges = truth.edge_count();
    int pred_edges = predicted.edge_count();
    if (true_edges == 0 && pred_edges == 0) return {1.0, 1.0, 1.0};
    int tp = (truth.adjacency.array() * predicted.adjacency.array()).sum();
    double precision = pred_edges > 0 ? static_cast<double>(tp) / pred_edges : 0.0;
    double recall = true_edges > 0 ? static_cast<double>(tp) / true_edges : 0.0;
    double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return {precision, recall, f1};
}

bool d_separated(const Dag& g, int i, int j, const std::set<int>& z) {
    if (i == j) throw ContractError("d_separated requires distinct endpoints");
    if (z.count(i) || z.count(j)) throw ContractError("conditioning set must exclude the endpoints");
    for (int v : z)
        if (v < 0 || v >= g.size()) throw LookupError("conditioning node out of range");
    if (i < 0 || i >= g.size() || j < 0 || j >= g.size()) throw LookupError("endpoint out of range");

    // Nodes in z or with a descendant in z; colliders at these nodes are
    // open.
    std::vector<char> anc_of_z(g.size(), 0);
    {
        std::deque<int> queue(z.begin(), z.end());
        for (int v : z) anc_of_z[v] = 1;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int p : g.parents(v))
                if (!anc_of_z[p]) {
                    anc_of_z[p] = 1;
                    queue.push_back(p);
                }
        }
    }

    // Active-trail reachability; direction encodes whether v was entered
    // from a child (up) or from a parent (down).
    enum { kUp = 0, kDown = 1 };
    std::vector<std::array<char, 2>> visited(g.size(), {0, 0});
    std::deque<std::pair<int, int>> queue{{i, kUp}};
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        if (visited[v][dir]) continue;
        visited[v][dir] = 1;
        if (v == j && !z.count(v)) return false;
        if (dir == kUp && !z.count(v)) {
            for (int p : g.parents(v)) queue.push_back({p, kUp});
            for (int c : g.children(v)) queue.push_back({c, kDown});
        } else if (dir == kDown) {
            if (!z.count(v))
                for (int c : g.children(v)) queue.push_back({c, kDown});
            if (anc_of_z[v])
                for (int p : g.parents(v)) queue.push_back({p, kUp});
        }
    }
    return true;
}

bool valid_adjustment_set(const Dag& g, int cause, int target, const std::set<int>& z) {
    if (z.count(cause) || z.count(target)) throw ContractError("adjustment set must exclude cause and target");

    // Nodes (other than cause) lying on a proper causal path cause -> ... -> target.
    std::vector<char> from_cause = reach_from(g, cause);
    std::vector<char> causal(g.size(), 0);
    for (int v = 0; v < g.size(); ++v) {
        if (v == cause || !from_cause[v]) continue;
        if (v == target || reach_from(g, v)[target]) causal[v] = 1;
    }

    // (a) z must avoid causal-path nodes and their descendants.
    for (int v = 0; v < g.size(); ++v) {
        if (!causal[v]) continue;
        if (z.count(v)) return false;
        for (int d : g.descendants(v))
            if (z.count(d)) return false;
    }

    // (b) z blocks every non-causal path: d-separation in the proper
    // backdoor graph, where the first edge of each causal path is cut.
    Dag pbd = g;
    for (int v = 0; v < g.size(); ++v)
        if (causal[v] && pbd.adjacency(cause, v)) pbd.remove_edge(cause, v);
    return d_separated(pbd, cause, target, z);
}

int sid(const Dag& truth, const Dag& predicted) {
    require_same_nodes(truth, predicted);
    if (!truth.is_acyclic() || !predicted.is_acyclic()) throw ContractError("sid requires acyclic inputs");
    int mistakes = 0;
    for (int i = 0; i < truth.size(); ++i) {
        std::vector<int> pa = predicted.parents(i);
        std::set<int> z(pa.begin(), pa.end());
        std::vector<char> desc = reach_from(truth, i);
        for (int j = 0; j < truth.size(); ++j) {
            if (j == i) continue;
            if (z.count(j)) {
                // The predicted graph claims no effect i -> j; wrong iff a
                // directed path exists in truth.
                if (desc[j]) ++mistakes;
            } else if (!valid_adjustment_set(truth, i, j, z)) {
                ++mistakes;
            }
        }
    }
    return mistakes;
}

MetricsReport back_re(const Dag& truth, const Dag& predicted) {
    MetricsReport report;
    report.sid = sid(truth, predicted);
    report.shd = shd(truth, predicted);
    EdgePrf prf = edge_prf(truth, predicted);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f1 = prf.f1;
    report.l2 = l2_distance(truth, predicted);
    return report;
}

}  // namespace causalkit
