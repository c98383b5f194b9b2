// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "txdag/canon.hpp"
#include "txdag/script.hpp"
#include "txdag/tdag.hpp"

namespace txdag {

// One row per isomorphism class. height, edges and roots describe the
// component as extracted; cardinality counts the vertices of the normalized
// (super-rooted) form that the class label is computed from.
struct IsoClassReport {
    CanonicalLabel label;
    std::uint64_t count = 0;
    std::uint32_t height = 0;
    std::uint64_t cardinality = 0;
    std::uint64_t edges = 0;
    std::uint64_t roots = 0;
    std::vector<std::uint32_t> sample_component_ids;
};

// Deterministic parallel map: labels land at their component's index
// regardless of thread count.
inline std::vector<CanonicalLabel> component_labels(const Forest& forest, unsigned threads = 1) {
    std::vector<CanonicalLabel> labels(forest.component_count());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            labels[i] = canonical_label(add_super_root(forest.components[i]));
    };
    std::size_t n = forest.component_count();
    if (threads <= 1 || n < 2) {
        work(0, n);
        return labels;
    }
    unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        if (begin >= n) break;
        pool.emplace_back([&, w, begin] {
            try {
                work(begin, std::min(n, begin + chunk));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return labels;
}

constexpr std::size_t kSampleIdsPerClass = 5;

// Groups components by canonical label. Rows are sorted by count descending,
// then label ascending; per-class stats are asserted identical across
// members.
inline std::vector<IsoClassReport> cluster(const Forest& forest, unsigned threads = 1) {
    auto labels = component_labels(forest, threads);
    std::map<CanonicalLabel, IsoClassReport> by_label;
    for (std::size_t i = 0; i < forest.component_count(); ++i) {
        const TDag& comp = forest.components[i];
        std::uint32_t h = height(comp);
        std::uint64_t card = comp.vertex_count() + (comp.roots.size() > 1 ? 1 : 0);
        std::uint64_t edges = comp.edge_count();
        std::uint64_t roots = comp.roots.size();
        auto [it, fresh] = by_label.try_emplace(labels[i]);
        IsoClassReport& row = it->second;
        if (fresh) {
            row.label = labels[i];
            row.height = h;
            row.cardinality = card;
            row.edges = edges;
            row.roots = roots;
        } else if (row.height != h || row.cardinality != card || row.edges != edges ||
                   row.roots != roots) {
            throw GraphError("cluster: components with equal label disagree on stats (label " +
                             labels[i] + ")");
        }
        ++row.count;
        if (row.sample_component_ids.size() < kSampleIdsPerClass)
            row.sample_component_ids.push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<IsoClassReport> rows;
    rows.reserve(by_label.size());
    for (auto& [label, row] : by_label) rows.push_back(std::move(row));
    std::sort(rows.begin(), rows.end(), [](const IsoClassReport& a, const IsoClassReport& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.label < b.label;
    });
    return rows;
}

struct FilterResult {
    Forest kept;
    std::map<std::string, std::size_t> dropped;  // rule name -> component count
};

// A component is dropped when any Null-address output of a root transaction
// matches one of the rules; counts are attributed to the first matching rule.
inline FilterResult filter_by_script(const Forest& forest, const ScriptMatcher& matcher) {
    FilterResult result;
    for (const auto& rule : matcher.rules()) result.dropped[rule.name] = 0;
    for (const TDag& comp : forest.components) {
        std::optional<std::string> hit;
        for (auto r : comp.roots) {
            if (comp.vertices[r].synthetic) continue;
            for (auto c : comp.children[r]) {
                const TdagVertex& v = comp.vertices[c];
                if (v.address || !v.script) continue;
                if (auto name = matcher.match(*v.script)) {
                    hit = *name;
                    break;
                }
            }
            if (hit) break;
        }
        if (hit)
            ++result.dropped[*hit];
        else
            result.kept.components.push_back(comp);
    }
    return result;
}

inline std::string csv_quote(const std::string& field) {
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string report_to_csv(const std::vector<IsoClassReport>& rows) {
    std::string out = "label,count,height,cardinality,edges,roots\n";
    for (const IsoClassReport& r : rows) {
        out += csv_quote(r.label) + ',' + std::to_string(r.count) + ',' + std::to_string(r.height) +
               ',' + std::to_string(r.cardinality) + ',' + std::to_string(r.edges) + ',' +
               std::to_string(r.roots) + '\n';
    }
    return out;
}

inline nlohmann::json report_to_json(const std::vector<IsoClassReport>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const IsoClassReport& r : rows)
        j.push_back({{"label", r.label},
                     {"count", r.count},
                     {"height", r.height},
                     {"cardinality", r.cardinality},
                     {"edges", r.edges},
                     {"roots", r.roots},
                     {"sample_component_ids", r.sample_component_ids}});
    return j;
}

inline nlohmann::json dropped_to_json(const std::map<std::string, std::size_t>& dropped) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, count] : dropped) j[name] = count;
    return j;
}

}  // namespace txdag
