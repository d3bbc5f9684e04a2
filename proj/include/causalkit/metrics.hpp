#pragma once

#include <set>
#include <string>

#include "causalkit/dag.hpp"

namespace causalkit {

// Six-element evaluation vector in the fixed order
// [sid, shd, precision, recall, f1, l2].
struct MetricsReport {
    int sid = 0;
    int shd = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double l2 = 0.0;

    std::string to_json() const;
};

// Structural Hamming distance; a reversed edge counts as one operation.
int shd(const Dag& truth, const Dag& predicted);

// sqrt of the count of differing adjacency entries. A reversed edge
// contributes 2 under the square root where shd charges 1.
double l2_distance(const Dag& truth, const Dag& predicted);

struct EdgePrf {
    double precision, recall, f1;
};

// Directed-edge precision/recall/F1. Both graphs empty scores (1,1,1);
// one-sided empty scores zero.
EdgePrf edge_prf(const Dag& truth, const Dag& predicted);

// d-separation of i and j given conditioning set z, by reachability over
// active trails.
bool d_separated(const Dag& g, int i, int j, const std::set<int>& z);

// True when z is a valid adjustment set for the effect of cause on target
// in g: z avoids descendants of nodes on proper causal paths and blocks
// every non-causal path (checked by d-separation in the proper backdoor
// graph).
bool valid_adjustment_set(const Dag& g, int cause, int target, const std::set<int>& z);

// Structural intervention distance: ordered pairs (i, j) whose
// interventional distribution would be miscomputed by adjusting for the
// predicted graph's parent set of i.
int sid(const Dag& truth, const Dag& predicted);

MetricsReport back_re(const Dag& truth, const Dag& predicted);

}  // namespace causalkit
