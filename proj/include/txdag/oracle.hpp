// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "txdag/tdag.hpp"

namespace txdag {

// Level-sequence enumeration of all rooted unlabeled trees on n vertices
// (Beyer-Hedetniemi successor rule, decreasing lexicographic order). Used as
// the independent oracle for the canonical labeling: no canon code involved.
inline std::vector<std::vector<int>> rooted_tree_level_sequences(int n) {
    std::vector<std::vector<int>> all;
    if (n <= 0) return all;
    std::vector<int> level(n);
    std::iota(level.begin(), level.end(), 1);
    while (true) {
        all.push_back(level);
        int p = -1;
        for (int i = n - 1; i >= 0; --i)
            if (level[i] > 2) {
                p = i;
                break;
            }
        if (p < 0) break;
        int q = -1;
        for (int i = p - 1; i >= 0; --i)
            if (level[i] == level[p] - 1) {
                q = i;
                break;
            }
        for (int i = p; i < n; ++i) level[i] = level[i - (p - q)];
    }
    return all;
}

inline TDag tree_from_level_sequence(const std::vector<int>& level) {
    TDag t;
    t.vertices.resize(level.size());
    t.children.resize(level.size());
    for (std::size_t i = 1; i < level.size(); ++i) {
        for (std::size_t j = i; j-- > 0;) {
            if (level[j] == level[i] - 1) {
                t.children[j].push_back(static_cast<std::uint32_t>(i));
                break;
            }
        }
    }
    t.recompute_roles();
    return t;
}

inline std::vector<TDag> enumerate_rooted_trees(int n) {
    std::vector<TDag> trees;
    for (const auto& level : rooted_tree_level_sequences(n))
        trees.push_back(tree_from_level_sequence(level));
    return trees;
}

}  // namespace txdag
