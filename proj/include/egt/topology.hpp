// Population structure: well-mixed, lattice, and Watts-Strogatz small-world
// graphs, plus agent placement and residential mobility.
#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egt/rng.hpp"

namespace egt {

enum class TopologyKind { WellMixed, Grid, SmallWorld };
enum class Neighborhood { VonNeumann4, Moore8 };

/// Immutable undirected simple graph with sorted adjacency lists.
class Topology {
public:
    Topology() = default;
    Topology(TopologyKind kind, std::vector<std::vector<std::size_t>> adjacency)
        : kind_(kind), adj_(std::move(adjacency)) {
        for (auto& nbrs : adj_) {
            std::sort(nbrs.begin(), nbrs.end());
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        }
    }

    TopologyKind kind() const { return kind_; }
    std::size_t node_count() const { return adj_.size(); }
    std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }
    const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_.at(v); }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& n : adj_) twice += n.size();
        return twice / 2;
    }

    bool adjacent(std::size_t u, std::size_t v) const {
        const auto& n = adj_.at(u);
        return std::binary_search(n.begin(), n.end(), v);
    }

    /// Edges (u, v) with u < v, ordered by u then v.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        out.reserve(edge_count());
        for (std::size_t u = 0; u < adj_.size(); ++u)
            for (auto v : adj_[u])
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    /// Symmetric, loop-free, duplicate-free.
    bool is_simple() const {
        for (std::size_t u = 0; u < adj_.size(); ++u) {
            const auto& n = adj_[u];
            if (std::adjacent_find(n.begin(), n.end()) != n.end()) return false;
            for (auto v : n) {
                if (v == u || v >= adj_.size() || !adjacent(v, u)) return false;
            }
        }
        return true;
    }

private:
    TopologyKind kind_ = TopologyKind::WellMixed;
    std::vector<std::vector<std::size_t>> adj_;
};

/// Complete graph: every agent can meet every other.
inline Topology make_well_mixed(std::size_t n) {
    if (n < 2) throw std::invalid_argument("well-mixed population needs at least 2 agents");
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        adj[u].reserve(n - 1);
        for (std::size_t v = 0; v < n; ++v)
            if (v != u) adj[u].push_back(v);
    }
    return Topology(TopologyKind::WellMixed, std::move(adj));
}

/// Row-major lattice; node (x, y) has index y * width + x. Offsets that land
/// on the node itself or repeat a neighbor (small tori) are dropped.
inline Topology make_grid(int width, int height, Neighborhood hood = Neighborhood::VonNeumann4,
                          bool wraparound = true) {
    if (width < 2 || height < 2) throw std::invalid_argument("grid dimensions must be at least 2x2");
    const auto w = static_cast<std::size_t>(width);
    const auto h = static_cast<std::size_t>(height);
    std::vector<std::pair<int, int>> offsets{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    if (hood == Neighborhood::Moore8) {
        offsets.insert(offsets.end(), {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
    }
    std::vector<std::vector<std::size_t>> adj(w * h);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t u = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
            for (auto [dx, dy] : offsets) {
                int nx = x + dx, ny = y + dy;
                if (wraparound) {
                    nx = (nx + width) % width;
                    ny = (ny + height) % height;
                } else if (nx < 0 || ny < 0 || nx >= width || ny >= height) {
                    continue;
                }
                const std::size_t v = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                if (v != u) adj[u].push_back(v);
            }
        }
    }
    return Topology(TopologyKind::Grid, std::move(adj));
}

/// Watts-Strogatz construction: ring lattice where each node links to
/// mean_degree/2 successors, then each lattice edge (u, u+j) has its far
/// endpoint rewired with probability rewire_prob to a uniform target that is
/// neither u nor an existing neighbor of u. Edges are visited in lap order
/// (all j = 1 edges first, then j = 2, ...).
inline Topology make_small_world(std::size_t n, int mean_degree, double rewire_prob, Rng& rng) {
    if (mean_degree < 2 || mean_degree % 2 != 0)
        throw std::invalid_argument("mean_degree must be an even integer >= 2");
    if (n <= static_cast<std::size_t>(mean_degree))
        throw std::invalid_argument("small-world network needs n > mean_degree");
    if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0))
        throw std::invalid_argument("rewire_prob must lie in [0, 1]");

    const std::size_t half = static_cast<std::size_t>(mean_degree) / 2;
    std::vector<std::vector<std::size_t>> adj(n);
    auto link = [&](std::size_t u, std::size_t v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    auto unlink = [&](std::size_t u, std::size_t v) {
        std::erase(adj[u], v);
        std::erase(adj[v], u);
    };
    auto has = [&](std::size_t u, std::size_t v) {
        return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end();
    };

    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t j = 1; j <= half; ++j) link(u, (u + j) % n);

    for (std::size_t j = 1; j <= half; ++j) {
        for (std::size_t u = 0; u < n; ++u) {
            if (!rng.bernoulli(rewire_prob)) continue;
            // Node u already touches every other node: no legal target.
            if (adj[u].size() >= n - 1) continue;
            const std::size_t v = (u + j) % n;
            std::size_t target = rng.below(n);
            while (target == u || has(u, target)) target = rng.below(n);
            unlink(u, v);
            link(u, target);
        }
    }
    return Topology(TopologyKind::SmallWorld, std::move(adj));
}

inline double strength_of_ties(const Topology& t, std::size_t node) {
    const auto d = t.degree(node);
    if (d == 0) throw std::invalid_argument("strength_of_ties: node " + std::to_string(node) + " is isolated");
    return 1.0 / static_cast<double>(d);
}

inline double mean_strength_of_ties(const Topology& t) {
    double sum = 0.0;
    for (std::size_t v = 0; v < t.node_count(); ++v) sum += strength_of_ties(t, v);
    return sum / static_cast<double>(t.node_count());
}

/// Bijection between graph nodes and agents.
class Placement {
public:
    Placement() = default;
    explicit Placement(std::size_t n) : agent_at_(n), node_of_(n) {
        std::iota(agent_at_.begin(), agent_at_.end(), std::size_t{0});
        std::iota(node_of_.begin(), node_of_.end(), std::size_t{0});
    }

    std::size_t size() const { return agent_at_.size(); }
    std::size_t agent_at(std::size_t node) const { return agent_at_[node]; }
    std::size_t node_of(std::size_t agent) const { return node_of_[agent]; }
    const std::vector<std::size_t>& agents_by_node() const { return agent_at_; }

    void swap_agents(std::size_t a, std::size_t b) {
        std::swap(node_of_[a], node_of_[b]);
        agent_at_[node_of_[a]] = a;
        agent_at_[node_of_[b]] = b;
    }

    bool is_bijection() const {
        std::vector<char> seen(agent_at_.size(), 0);
        for (std::size_t v = 0; v < agent_at_.size(); ++v) {
            const auto a = agent_at_[v];
            if (a >= seen.size() || seen[a] || node_of_[a] != v) return false;
            seen[a] = 1;
        }
        return true;
    }

private:
    std::vector<std::size_t> agent_at_;
    std::vector<std::size_t> node_of_;
};

/// Each agent, in ascending index order, swaps position with a uniformly
/// chosen other agent with probability `mobility`.
inline Placement mobility_shuffle(Placement placement, double mobility, Rng& rng) {
    if (!(mobility >= 0.0 && mobility <= 1.0)) throw std::invalid_argument("mobility must lie in [0, 1]");
    const std::size_t n = placement.size();
    if (n < 2 || mobility == 0.0) return placement;
    for (std::size_t a = 0; a < n; ++a) {
        if (!rng.bernoulli(mobility)) continue;
        std::size_t other = rng.below(n - 1);
        if (other >= a) ++other;
        placement.swap_agents(a, other);
    }
    return placement;
}

/// One "u v" pair per line, u < v, zero-indexed.
inline void write_edge_list(const Topology& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (auto [u, v] : t.edges()) out << u << ' ' << v << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace egt
