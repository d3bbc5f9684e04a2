#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace causalkit {

// Directed acyclic graph over named nodes. adjacency(i, j) == 1 means an
// edge i -> j.
struct Dag {
    std::vector<std::string> codes;
    Eigen::MatrixXi adjacency;

    Dag() = default;
    explicit Dag(std::vector<std::string> node_codes);

    int size() const { return static_cast<int>(codes.size()); }
    int edge_count() const;

    bool has_edge(int i, int j) const { return adjacency(i, j) != 0; }
    void add_edge(int i, int j);
    void remove_edge(int i, int j) { adjacency(i, j) = 0; }

    std::vector<int> parents(int j) const;
    std::vector<int> children(int i) const;

    // All nodes reachable from i by directed paths, i excluded.
    std::vector<int> descendants(int i) const;

    bool is_acyclic() const;
    // Empty when the graph is cyclic.
    std::optional<std::vector<int>> topological_sort() const;

    int node_index(const std::string& code) const;  // throws LookupError

    std::string to_dot() const;
    std::string to_adjacency_csv() const;
    static Dag from_adjacency_csv(std::istream& in);
};

// Node permutation produced by iterative leaf removal. order.front() is
// root-most, order.back() leaf-most. leaf_trace records, per removal, the
// chosen original index and the variance vector over the still-active
// variables at that step.
struct TopologicalOrder {
    std::vector<int> order;
    std::vector<std::pair<int, Eigen::VectorXd>> leaf_trace;
};

}  // namespace causalkit
